use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinear::Experience;

/// Finite MDP with row-stochastic transitions and rewards in `[0, r_max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// `P(s'|s,a)` stored row-major as `[s][a][s']`.
    pub transitions: Vec<f64>,
    /// `R(s,a)` stored row-major as `[s][a]`.
    pub rewards: Vec<f64>,
    pub r_max: f64,
    pub gamma: f64,
}

impl TabularMdp {
    pub fn new(
        n_states: usize,
        n_actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        r_max: f64,
        gamma: f64,
    ) -> Result<Self> {
        let mdp = Self {
            n_states,
            n_actions,
            transitions,
            rewards,
            r_max,
            gamma,
        };
        mdp.validate().map_err(Error::Validation)?;
        Ok(mdp)
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let (ns, na) = (self.n_states, self.n_actions);
        if ns == 0 || na == 0 {
            errs.push("n_states and n_actions must be >= 1".to_string());
            return Err(errs);
        }
        if self.transitions.len() != ns * na * ns {
            errs.push(format!(
                "transitions must have {} entries, got {}",
                ns * na * ns,
                self.transitions.len()
            ));
        }
        if self.rewards.len() != ns * na {
            errs.push(format!(
                "rewards must have {} entries, got {}",
                ns * na,
                self.rewards.len()
            ));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            errs.push(format!("gamma must lie in (0, 1), got {}", self.gamma));
        }
        if !errs.is_empty() {
            return Err(errs);
        }
        for s in 0..ns {
            for a in 0..na {
                let row = self.row(s, a);
                if row.iter().any(|p| !(*p >= 0.0)) {
                    errs.push(format!("P(.|{s},{a}) has a negative or NaN entry"));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-12 {
                    errs.push(format!("P(.|{s},{a}) sums to {sum}"));
                }
                let r = self.reward(s, a);
                if !(0.0..=self.r_max).contains(&r) {
                    errs.push(format!("R({s},{a}) = {r} outside [0, {}]", self.r_max));
                }
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn n_pairs(&self) -> usize {
        self.n_states * self.n_actions
    }

    pub fn pair_index(&self, s: usize, a: usize) -> usize {
        s * self.n_actions + a
    }

    /// Transition row `P(.|s,a)`.
    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = self.pair_index(s, a) * self.n_states;
        &self.transitions[start..start + self.n_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[self.pair_index(s, a)]
    }

    /// One-hot feature of `(s, a)`.
    pub fn features(&self, s: usize, a: usize) -> Result<Vec<f64>> {
        tabular_features(s, a, self.n_states, self.n_actions)
    }

    fn sample_next(&self, s: usize, a: usize, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let row = self.row(s, a);
        let mut acc = 0.0;
        for (sp, p) in row.iter().enumerate() {
            acc += p;
            if u < acc {
                return sp;
            }
        }
        // rounding left a sliver above the last cumulative sum
        row.iter()
            .rposition(|p| *p > 0.0)
            .unwrap_or(self.n_states - 1)
    }
}

/// `e_{s·n_actions + a}`.
pub fn tabular_features(s: usize, a: usize, n_states: usize, n_actions: usize) -> Result<Vec<f64>> {
    if s >= n_states || a >= n_actions {
        return Err(Error::OutOfRange(format!(
            "(s, a) = ({s}, {a}) for a {n_states}x{n_actions} table"
        )));
    }
    let mut phi = vec![0.0; n_states * n_actions];
    phi[s * n_actions + a] = 1.0;
    Ok(phi)
}

/// Draws `(s, a)` uniformly, then `s' ~ P(.|s, a)` and `r = R(s, a)`.
pub fn sample_iid(mdp: &TabularMdp, rng: &mut impl Rng) -> Experience<usize, usize> {
    let s = rng.random_range(0..mdp.n_states);
    let a = rng.random_range(0..mdp.n_actions);
    let s_next = mdp.sample_next(s, a, rng);
    Experience {
        s,
        a,
        r: mdp.reward(s, a),
        s_next,
    }
}

/// Random instance: Dirichlet(1, ..., 1) transition rows, uniform rewards on `[0, r_max]`.
pub fn random_mdp(
    seed: u64,
    n_states: usize,
    n_actions: usize,
    r_max: f64,
    gamma: f64,
) -> Result<TabularMdp> {
    if n_states == 0 || n_actions == 0 {
        return Err(Error::InvalidArgument("MDP sizes must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut transitions = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        // normalized Exp(1) draws are Dirichlet(1, ..., 1)
        let draws: Vec<f64> = (0..n_states).map(|_| Exp1.sample(&mut rng)).collect();
        let total: f64 = draws.iter().sum();
        transitions.extend(draws.iter().map(|x| x / total));
    }
    let rewards = (0..n_states * n_actions)
        .map(|_| rng.random::<f64>() * r_max)
        .collect();
    TabularMdp::new(n_states, n_actions, transitions, rewards, r_max, gamma)
}

/// A single-state, single-action MDP paying `reward` forever.
pub fn single_state_mdp(reward: f64, gamma: f64) -> Result<TabularMdp> {
    TabularMdp::new(1, 1, vec![1.0], vec![reward], reward.max(0.0), gamma)
}
