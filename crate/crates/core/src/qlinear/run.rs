use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Environment, Experience};
use crate::error::{Error, Result};
use crate::optim::{Algorithm, Domain, RunningMean, Schedule, StepInfo, Updater, ADAM_EPSILON};
use crate::param::{dot, norm, ParamVector};

/// A run aborts once `‖θ‖` exceeds this multiple of the domain radius.
pub const DIVERGENCE_FACTOR: f64 = 1e3;

/// How much of each step the [`RunTrace`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Record {
    /// Scalars plus `θ_t`, `g_t`, `m_t` and `v̂_t`.
    #[default]
    Full,
    /// Scalars only.
    Scalars,
}

/// Maps a parameter vector to a policy-error metric (e.g. `‖K(θ) - K*‖₂`).
pub type PolicyMetric = Arc<dyn Fn(&[f64]) -> Option<f64> + Send + Sync>;

#[derive(Clone)]
pub struct RunOptions {
    pub double_q: bool,
    /// Gradient multiplier `τ̃²`.
    pub scale: f64,
    pub batch: usize,
    pub record: Record,
    pub theta_star: Option<ParamVector>,
    pub policy_metric: Option<PolicyMetric>,
    pub divergence_factor: f64,
    /// Denominator regularizer of the Adam variants.
    pub adam_epsilon: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            double_q: false,
            scale: 1.0,
            batch: 1,
            record: Record::Full,
            theta_star: None,
            policy_metric: None,
            divergence_factor: DIVERGENCE_FACTOR,
            adam_epsilon: ADAM_EPSILON,
        }
    }
}

impl std::fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RunOptions")
            .field("double_q", &self.double_q)
            .field("scale", &self.scale)
            .field("batch", &self.batch)
            .field("record", &self.record)
            .field("theta_star", &self.theta_star)
            .field("policy_metric", &self.policy_metric.is_some())
            .field("divergence_factor", &self.divergence_factor)
            .field("adam_epsilon", &self.adam_epsilon)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub struct RunSpec {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    pub domain: Domain,
    pub steps: usize,
    pub seed: u64,
    pub options: RunOptions,
}

/// Everything the loop knows right after step `t`.
#[derive(Debug)]
pub struct StepView<'a> {
    pub t: usize,
    /// Iterate `θ_t` at which the gradient was taken.
    pub theta: &'a [f64],
    /// Iterate `θ_{t+1}` after the update.
    pub theta_next: &'a [f64],
    /// Mean of `θ_1, ..., θ_t`.
    pub theta_avg: &'a [f64],
    pub g: &'a [f64],
    pub m: &'a [f64],
    pub v_hat: &'a [f64],
    pub info: StepInfo,
    pub grad_norm: f64,
    /// Batch mean of the Bellman targets `b_t`.
    pub target: f64,
    /// Batch mean of `τ̃²·(φᵀθ - b)²/2`.
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub steps: usize,
    pub theta_final: ParamVector,
    pub theta_avg: ParamVector,
    pub stopped_early: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub t: usize,
    pub theta: Vec<f64>,
    pub g: Vec<f64>,
    pub m: Vec<f64>,
    pub v_hat: Vec<f64>,
    pub grad_norm: f64,
    pub target: f64,
    pub loss: f64,
    pub alpha_t: f64,
    pub beta1_t: f64,
    pub restarted: bool,
    pub param_err: Option<f64>,
    pub policy_err: Option<f64>,
}

/// Per-step log of a run plus its initial, final and averaged iterates.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<StepRecord>,
    pub theta_initial: ParamVector,
    pub theta_final: ParamVector,
    /// `(1/T)·Σ θ_t`.
    pub theta_avg: ParamVector,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `‖g_{1:T,i}‖` for every coordinate `i`.
    pub fn grad_column_norms(&self) -> Vec<f64> {
        let d = self.theta_initial.dim();
        let mut acc = vec![0.0; d];
        for r in &self.records {
            for (a, g) in acc.iter_mut().zip(&r.g) {
                *a += g * g;
            }
        }
        acc.into_iter().map(f64::sqrt).collect()
    }
}

/// `b = r + γ·φ(s', a*)ᵀθ_eval` with `a* = argext_{a'} φ(s', a')ᵀθ_select`.
pub fn double_q_target<E: Environment>(
    env: &E,
    exp: &Experience<E::State, E::Action>,
    theta_select: &[f64],
    theta_eval: &[f64],
) -> Result<f64> {
    let rule = env.greedy(theta_select)?;
    let a_star = env.argext(&rule, theta_select, &exp.s_next)?;
    Ok(exp.r + env.gamma() * dot(&env.features(&exp.s_next, &a_star)?, theta_eval))
}

struct BatchGradient {
    g: Vec<f64>,
    target: f64,
    loss: f64,
}

fn batch_gradient<E: Environment>(
    env: &E,
    batch: &[Experience<E::State, E::Action>],
    theta: &[f64],
    theta_eval: &[f64],
    scale: f64,
) -> Result<BatchGradient> {
    let rule = env.greedy(theta)?;
    let gamma = env.gamma();
    let k = batch.len() as f64;
    let mut g = vec![0.0; theta.len()];
    let (mut target, mut loss) = (0.0, 0.0);
    for exp in batch {
        let a_next = env.argext(&rule, theta, &exp.s_next)?;
        let b = exp.r + gamma * dot(&env.features(&exp.s_next, &a_next)?, theta_eval);
        let phi = env.features(&exp.s, &exp.a)?;
        let err = dot(&phi, theta) - b;
        for (gi, p) in g.iter_mut().zip(&phi) {
            *gi += scale * err * p / k;
        }
        target += b / k;
        loss += 0.5 * scale * err * err / k;
    }
    Ok(BatchGradient { g, target, loss })
}

/// Runs the alternating loop and streams every step to `observer`.
///
/// Single-estimator runs evaluate the target with the current iterate;
/// with `double_q` a seeded coin picks which of two estimators is updated,
/// that estimator selects the next action and the other one evaluates it.
/// Both estimators share the step counter `t` and restart together. The
/// exposed iterate is the mean of the two estimators.
pub fn run_with_observer<E, F>(
    env: &E,
    spec: &RunSpec,
    theta0: ParamVector,
    mut observer: F,
) -> Result<RunOutcome>
where
    E: Environment,
    F: FnMut(&StepView<'_>) -> Flow,
{
    let d = env.feature_dim();
    if theta0.dim() != d {
        return Err(Error::Shape(format!(
            "theta0 has {} entries, features have {d}",
            theta0.dim()
        )));
    }
    if spec.steps == 0 {
        return Err(Error::InvalidArgument(
            "number of steps must be >= 1".into(),
        ));
    }
    if spec.options.batch == 0 {
        return Err(Error::InvalidArgument("batch size must be >= 1".into()));
    }
    let opts = &spec.options;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut sampler = env.sampler(&mut rng);

    let new_updater = || {
        Ok::<_, Error>(
            Updater::new(spec.algorithm, spec.schedule, spec.domain, d)?
                .with_epsilon(opts.adam_epsilon),
        )
    };
    let mut est = [theta0.clone(), theta0.clone()];
    let mut upd = [new_updater()?, new_updater()?];
    let n_est = if opts.double_q { 2 } else { 1 };

    let mut theta = theta0;
    let mut avg = RunningMean::new(d);
    let limit = opts.divergence_factor * spec.domain.radius;
    let mut stopped_early = false;
    let mut steps = 0;

    for t in 1..=spec.steps {
        let batch = env.sample_batch(&mut sampler, &theta, opts.batch, &mut rng)?;
        let which = if n_est == 2 {
            usize::from(rng.random::<bool>())
        } else {
            0
        };
        let eval = if n_est == 2 {
            est[1 - which].clone()
        } else {
            est[0].clone()
        };
        let bg = batch_gradient(env, &batch, &est[which], &eval, opts.scale)
            .map_err(|e| diverged_or(e, t))?;
        if n_est == 2 {
            // both estimators follow the global iteration counter
            for u in upd.iter_mut() {
                u.set_clock(t - 1);
            }
        }
        let info = upd[which]
            .step(&mut est[which], &bg.g)
            .map_err(|e| diverged_or(e, t))?;
        if n_est == 2 && info.restarted {
            let other = 1 - which;
            upd[other]
                .step(&mut est[other], &bg.g)
                .map_err(|e| diverged_or(e, t))?;
        }

        avg.push(&theta);
        let next = if n_est == 2 {
            ParamVector(
                est[0]
                    .iter()
                    .zip(est[1].iter())
                    .map(|(a, b)| 0.5 * (a + b))
                    .collect(),
            )
        } else {
            est[0].clone()
        };
        if !next.is_finite() {
            return Err(Error::Diverged {
                step: t,
                reason: "non-finite parameter".into(),
            });
        }
        if next.norm() > limit {
            return Err(Error::Diverged {
                step: t,
                reason: format!("‖θ‖ = {:.3e} exceeds {:.3e}", next.norm(), limit),
            });
        }

        let state = upd[which].state();
        let view = StepView {
            t,
            theta: &theta,
            theta_next: &next,
            theta_avg: avg.mean(),
            g: &bg.g,
            m: &state.m,
            v_hat: &state.v_hat,
            info,
            grad_norm: norm(&bg.g),
            target: bg.target,
            loss: bg.loss,
        };
        let flow = observer(&view);
        theta = next;
        steps = t;
        if flow == Flow::Stop {
            stopped_early = t < spec.steps;
            break;
        }
    }

    Ok(RunOutcome {
        steps,
        theta_final: theta,
        theta_avg: ParamVector(avg.mean().to_vec()),
        stopped_early,
    })
}

fn diverged_or(e: Error, step: usize) -> Error {
    match e {
        Error::NonFinite(what) => Error::Diverged {
            step,
            reason: format!("non-finite {what}"),
        },
        other => other,
    }
}

/// Runs the loop and collects a [`RunTrace`].
pub fn run_q_learning<E: Environment>(
    env: &E,
    spec: &RunSpec,
    theta0: ParamVector,
) -> Result<RunTrace> {
    let opts = &spec.options;
    let full = opts.record == Record::Full;
    let mut records = Vec::with_capacity(spec.steps.min(1 << 20));
    let theta_initial = theta0.clone();
    let out = run_with_observer(env, spec, theta0, |v| {
        let vec_or_empty = |x: &[f64]| if full { x.to_vec() } else { Vec::new() };
        records.push(StepRecord {
            t: v.t,
            theta: vec_or_empty(v.theta),
            g: vec_or_empty(v.g),
            m: vec_or_empty(v.m),
            v_hat: vec_or_empty(v.v_hat),
            grad_norm: v.grad_norm,
            target: v.target,
            loss: v.loss,
            alpha_t: v.info.alpha_t,
            beta1_t: v.info.beta1_t,
            restarted: v.info.restarted,
            param_err: opts.theta_star.as_ref().map(|ts| ts.distance(v.theta)),
            policy_err: opts.policy_metric.as_ref().and_then(|f| f(v.theta)),
        });
        Flow::Continue
    })?;
    Ok(RunTrace {
        records,
        theta_initial,
        theta_final: out.theta_final,
        theta_avg: out.theta_avg,
    })
}
