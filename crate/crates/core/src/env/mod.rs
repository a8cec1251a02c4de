//! Environments and feature maps: finite MDPs with one-hot features and the
//! discrete-time LQR with normalized quadratic features.

mod lqr;
mod tabular;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::{dot, ParamVector};
use crate::qlinear::{argext_index, Environment, Experience, Extremum};

pub use lqr::{
    h_blocks, lqr_features, lqr_step, policy_from_theta, unvech, vech, LqrModel, ProcessNoise,
    QuadFeatureMap, NORMALIZER_PROBES,
};
pub use tabular::{random_mdp, sample_iid, single_state_mdp, tabular_features, TabularMdp};

impl Environment for TabularMdp {
    type State = usize;
    type Action = usize;
    type Greedy = ();
    type Sampler = ();

    fn feature_dim(&self) -> usize {
        self.n_pairs()
    }

    fn gamma(&self) -> f64 {
        self.gamma
    }

    fn extremum(&self) -> Extremum {
        Extremum::Max
    }

    fn features(&self, s: &usize, a: &usize) -> Result<Vec<f64>> {
        TabularMdp::features(self, *s, *a)
    }

    fn greedy(&self, _theta: &[f64]) -> Result<()> {
        Ok(())
    }

    fn argext(&self, _greedy: &(), theta: &[f64], s: &usize) -> Result<usize> {
        if *s >= self.n_states {
            return Err(Error::OutOfRange(format!("state {s} of {}", self.n_states)));
        }
        let start = self.pair_index(*s, 0);
        Ok(argext_index(&theta[start..start + self.n_actions], Extremum::Max)?.0)
    }

    fn sampler(&self, _rng: &mut ChaCha8Rng) {}

    fn sample_batch(
        &self,
        _sampler: &mut (),
        _theta: &[f64],
        batch: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Experience<usize, usize>>> {
        Ok((0..batch).map(|_| sample_iid(self, rng)).collect())
    }
}

/// Exploration around the greedy linear policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LqrBehavior {
    /// Probability of a uniformly random action from the box.
    pub epsilon: f64,
    /// Std of the Gaussian noise added to greedy actions.
    pub action_noise: f64,
    /// Std of the Gaussian that (re)starts walkers.
    pub state_std: f64,
    /// Per-step probability of restarting a walker.
    pub reset_prob: f64,
    pub process_noise: f64,
}

impl Default for LqrBehavior {
    fn default() -> Self {
        Self {
            epsilon: 0.1,
            action_noise: 0.1,
            state_std: 0.5,
            reset_prob: 0.05,
            process_noise: 0.0,
        }
    }
}

impl LqrBehavior {
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(0.0..=1.0).contains(&self.epsilon) {
            errs.push(format!(
                "behavior.epsilon must lie in [0, 1], got {}",
                self.epsilon
            ));
        }
        if !(0.0..=1.0).contains(&self.reset_prob) {
            errs.push(format!(
                "behavior.reset_prob must lie in [0, 1], got {}",
                self.reset_prob
            ));
        }
        for (name, v) in [
            ("action_noise", self.action_noise),
            ("state_std", self.state_std),
            ("process_noise", self.process_noise),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                errs.push(format!("behavior.{name} must be finite and >= 0, got {v}"));
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }
}

/// LQR as a cost-minimizing Q-learning environment.
///
/// Transitions come from a set of walkers, one per batch slot, each following
/// an ε-greedy noisy version of `u = -K(θ)x`. Transitions whose successor
/// leaves the feature box are discarded and the walker restarts from the state
/// Gaussian; walkers also restart with probability `reset_prob`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrEnv {
    pub model: LqrModel,
    pub map: QuadFeatureMap,
    pub behavior: LqrBehavior,
}

impl LqrEnv {
    pub fn new(model: LqrModel, z_max: f64, behavior: LqrBehavior) -> Result<Self> {
        behavior.validate().map_err(Error::Validation)?;
        let map = QuadFeatureMap::new(model.state_dim(), model.action_dim(), z_max)?;
        Ok(Self {
            model,
            map,
            behavior,
        })
    }

    /// `θ` encoding `H = scale·I`.
    pub fn identity_theta(&self, scale: f64) -> ParamVector {
        let k = self.map.z_dim();
        ParamVector(vech(&(DMatrix::identity(k, k) * (scale * self.map.c_phi))))
    }

    /// `θ` encoding a symmetric `H`.
    pub fn theta_from_h(&self, h: &DMatrix<f64>) -> Result<ParamVector> {
        let k = self.map.z_dim();
        if h.shape() != (k, k) {
            return Err(Error::Shape(format!("H must be {k}x{k}")));
        }
        Ok(ParamVector(vech(&(h * self.map.c_phi))))
    }

    pub fn gain(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        policy_from_theta(theta, &self.map)
    }

    fn clip_action(&self, u: &mut [f64]) {
        for v in u.iter_mut() {
            *v = v.clamp(-self.map.z_max, self.map.z_max);
        }
    }

    fn fresh_state(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.model.state_dim();
        let std = self.behavior.state_std;
        loop {
            let x: Vec<f64> = (0..n)
                .map(|_| std * Distribution::<f64>::sample(&rand_distr::StandardNormal, rng))
                .collect();
            if self.in_box(&x) {
                return x;
            }
        }
    }

    fn in_box(&self, x: &[f64]) -> bool {
        x.iter().all(|v| v.abs() <= self.map.z_max)
    }
}

const MAX_RESAMPLE: usize = 10_000;

/// Walker positions of the LQR behavior policy.
#[derive(Debug, Clone, Default)]
pub struct Walkers(pub Vec<Vec<f64>>);

impl Environment for LqrEnv {
    type State = Vec<f64>;
    type Action = Vec<f64>;
    type Greedy = DMatrix<f64>;
    type Sampler = Walkers;

    fn feature_dim(&self) -> usize {
        self.map.dim()
    }

    fn gamma(&self) -> f64 {
        self.model.gamma
    }

    fn extremum(&self) -> Extremum {
        Extremum::Min
    }

    fn features(&self, s: &Vec<f64>, a: &Vec<f64>) -> Result<Vec<f64>> {
        if s.len() != self.map.n || a.len() != self.map.m {
            return Err(Error::Shape(format!(
                "(x, u) has dims ({}, {}), map expects ({}, {})",
                s.len(),
                a.len(),
                self.map.n,
                self.map.m
            )));
        }
        Ok(lqr_features(s, a, &self.map))
    }

    fn greedy(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        self.gain(theta)
    }

    /// `u = -Kx`, clipped to the action box.
    fn argext(&self, k: &DMatrix<f64>, _theta: &[f64], s: &Vec<f64>) -> Result<Vec<f64>> {
        let mut u: Vec<f64> = (-(k * DVector::from_column_slice(s)))
            .iter()
            .copied()
            .collect();
        self.clip_action(&mut u);
        Ok(u)
    }

    fn sampler(&self, _rng: &mut ChaCha8Rng) -> Walkers {
        Walkers::default()
    }

    fn sample_batch(
        &self,
        walkers: &mut Walkers,
        theta: &[f64],
        batch: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Experience<Vec<f64>, Vec<f64>>>> {
        while walkers.0.len() < batch {
            let x = self.fresh_state(rng);
            walkers.0.push(x);
        }
        walkers.0.truncate(batch);
        // an indefinite H_uu has no greedy action; the walkers then explore uniformly
        let gain = self.gain(theta).ok();
        let beh = self.behavior;
        let noise = Normal::new(0.0, beh.action_noise.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let m = self.model.action_dim();
        let mut out = Vec::with_capacity(batch);
        for i in 0..batch {
            let mut tries = 0;
            let exp = loop {
                let x = walkers.0[i].clone();
                let explore = rng.random::<f64>() < beh.epsilon;
                let mut u: Vec<f64> = match (&gain, explore) {
                    (Some(k), false) => {
                        let mut u = self.argext(k, theta, &x)?;
                        if beh.action_noise > 0.0 {
                            for v in u.iter_mut() {
                                *v += noise.sample(rng);
                            }
                        }
                        u
                    }
                    _ => (0..m)
                        .map(|_| rng.random_range(-self.map.z_max..=self.map.z_max))
                        .collect(),
                };
                self.clip_action(&mut u);
                let xv = DVector::from_column_slice(&x);
                let uv = DVector::from_column_slice(&u);
                let pn = ProcessNoise {
                    std: beh.process_noise,
                };
                let (next, cost) = lqr_step(
                    &self.model,
                    &xv,
                    &uv,
                    Some((pn, rng as &mut dyn rand::RngCore)),
                )?;
                let s_next: Vec<f64> = next.iter().copied().collect();
                if !self.in_box(&s_next) {
                    // clipped successor features would bias the target; restart the walker instead
                    tries += 1;
                    if tries > MAX_RESAMPLE {
                        return Err(Error::InvalidArgument(
                            "behavior keeps leaving the feature box; increase z_max or shrink state_std".into(),
                        ));
                    }
                    walkers.0[i] = self.fresh_state(rng);
                    continue;
                }
                let reset = rng.random::<f64>() < beh.reset_prob;
                walkers.0[i] = if reset {
                    self.fresh_state(rng)
                } else {
                    s_next.clone()
                };
                break Experience {
                    s: x,
                    a: u,
                    r: cost,
                    s_next,
                };
            };
            out.push(exp);
        }
        Ok(out)
    }
}

/// `Q̂(s, a; θ)` for every action of a tabular state.
pub fn tabular_action_values(mdp: &TabularMdp, theta: &[f64], s: usize) -> Vec<f64> {
    (0..mdp.n_actions)
        .map(|a| dot(&mdp.features(s, a).expect("indices in range"), theta))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinear::{greedy_action, td_target, LinearQ};
    use rand_chacha::rand_core::SeedableRng;

    #[test]
    fn tabular_target_uses_max() {
        // s0 -> s1 deterministically; θ holds Q(s1, .) = (2, 0)
        let mdp = TabularMdp::new(
            2,
            2,
            vec![0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0],
            vec![1.0; 4],
            1.0,
            0.5,
        )
        .unwrap();
        let theta = [0.0, 0.0, 2.0, 0.0];
        let q = LinearQ::new(&theta, &mdp);
        let exp = Experience {
            s: 0,
            a: 0,
            r: 1.0,
            s_next: 1,
        };
        assert_eq!(td_target(&exp, &q).unwrap(), 2.0);
        let zero = [0.0; 4];
        assert_eq!(td_target(&exp, &LinearQ::new(&zero, &mdp)).unwrap(), 1.0);
    }

    #[test]
    fn tabular_greedy_ties() {
        let mdp = random_mdp(0, 1, 3, 1.0, 0.9).unwrap();
        assert_eq!(
            greedy_action(&LinearQ::new(&[1.0, 3.0, 3.0], &mdp), &0).unwrap(),
            1
        );
        assert_eq!(
            greedy_action(&LinearQ::new(&[0.0, 0.0, 0.0], &mdp), &0).unwrap(),
            0
        );
    }

    #[test]
    fn lqr_greedy_closed_form() {
        let model = LqrModel::scalar(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let env = LqrEnv::new(model, 10.0, LqrBehavior::default()).unwrap();
        // H = [[h_xx, h_xu], [h_ux, h_uu]] = [[1, 1], [1, 2]]
        let theta = env
            .theta_from_h(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 2.0]))
            .unwrap();
        let q = LinearQ::new(&theta, &env);
        assert_eq!(greedy_action(&q, &vec![4.0]).unwrap(), vec![-2.0]);
        let scaled: Vec<f64> = theta.iter().map(|v| 7.5 * v).collect();
        let u = greedy_action(&LinearQ::new(&scaled, &env), &vec![4.0]).unwrap();
        assert!((u[0] + 2.0).abs() < 1e-14);
    }

    #[test]
    fn lqr_greedy_rejects_indefinite_h_uu() {
        let model = LqrModel::scalar(1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let env = LqrEnv::new(model, 10.0, LqrBehavior::default()).unwrap();
        let theta = env
            .theta_from_h(&DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, -2.0]))
            .unwrap();
        assert!(matches!(
            greedy_action(&LinearQ::new(&theta, &env), &vec![1.0]),
            Err(Error::NotPositiveDefinite(_))
        ));
    }

    #[test]
    fn lqr_batch_stays_in_box() {
        let model = LqrModel::new(
            DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.0, 0.8]),
            DMatrix::from_row_slice(2, 1, &[0.0, 1.0]),
            DMatrix::identity(2, 2),
            DMatrix::identity(1, 1),
            DMatrix::zeros(2, 1),
            1.0,
        )
        .unwrap();
        let env = LqrEnv::new(model, 1.0, LqrBehavior::default()).unwrap();
        let theta = env.identity_theta(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut walkers = env.sampler(&mut rng);
        for _ in 0..200 {
            for e in env.sample_batch(&mut walkers, &theta, 8, &mut rng).unwrap() {
                assert!(env.in_box(&e.s) && env.in_box(&e.a));
                assert!(e.r >= 0.0);
            }
        }
        assert_eq!(walkers.0.len(), 8);
    }
}
