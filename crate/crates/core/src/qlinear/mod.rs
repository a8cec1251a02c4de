//! Alternating Q-learning over a linear function approximation
//! `Q̂(s, a; θ) = φ(s, a)ᵀθ`.
//!
//! Each iteration draws a batch of transitions, forms the empirical Bellman
//! target with the current parameters, takes the gradient of the (scaled)
//! squared TD error and hands it to an [`Updater`](crate::optim::Updater).

mod run;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::dot;

pub use run::{
    double_q_target, run_q_learning, run_with_observer, Flow, PolicyMetric, Record, RunOptions,
    RunOutcome, RunSpec, RunTrace, StepRecord, StepView, DIVERGENCE_FACTOR,
};

/// One observed transition.
#[derive(Debug, Clone, PartialEq)]
pub struct Experience<S, A> {
    pub s: S,
    pub a: A,
    pub r: f64,
    pub s_next: S,
}

/// Whether the environment pays rewards (maximize) or charges costs (minimize).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Max,
    Min,
}

impl Extremum {
    /// True when `candidate` strictly improves on `incumbent`.
    pub fn better(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Extremum::Max => candidate > incumbent,
            Extremum::Min => candidate < incumbent,
        }
    }
}

/// What the Q-learning loop needs from an environment.
pub trait Environment {
    type State: Clone + std::fmt::Debug;
    type Action: Clone + std::fmt::Debug;
    /// Argext rule precomputed for a fixed parameter vector.
    type Greedy;
    /// Behavior-policy state carried across iterations.
    type Sampler;

    fn feature_dim(&self) -> usize;
    fn gamma(&self) -> f64;
    fn extremum(&self) -> Extremum;
    fn features(&self, s: &Self::State, a: &Self::Action) -> Result<Vec<f64>>;

    fn greedy(&self, theta: &[f64]) -> Result<Self::Greedy>;
    /// `argext_{a ∈ U(s)} φ(s, a)ᵀθ` under a rule built by [`Environment::greedy`].
    fn argext(&self, greedy: &Self::Greedy, theta: &[f64], s: &Self::State)
        -> Result<Self::Action>;

    fn sampler(&self, rng: &mut ChaCha8Rng) -> Self::Sampler;
    /// Draws `batch` transitions under the behavior policy around `theta`.
    fn sample_batch(
        &self,
        sampler: &mut Self::Sampler,
        theta: &[f64],
        batch: usize,
        rng: &mut ChaCha8Rng,
    ) -> Result<Vec<Experience<Self::State, Self::Action>>>;
}

/// Linear Q-function bound to an environment's feature map.
#[derive(Debug, Clone, Copy)]
pub struct LinearQ<'a, E> {
    pub theta: &'a [f64],
    pub env: &'a E,
}

impl<'a, E: Environment> LinearQ<'a, E> {
    pub fn new(theta: &'a [f64], env: &'a E) -> Self {
        Self { theta, env }
    }

    pub fn value(&self, s: &E::State, a: &E::Action) -> Result<f64> {
        Ok(dot(&self.env.features(s, a)?, self.theta))
    }

    /// Greedy action and its value at `s`.
    pub fn best(&self, s: &E::State) -> Result<(E::Action, f64)> {
        let rule = self.env.greedy(self.theta)?;
        let a = self.env.argext(&rule, self.theta, s)?;
        let v = self.value(s, &a)?;
        Ok((a, v))
    }
}

/// Extremum of a finite list of action values; ties go to the lowest index.
pub fn argext_index(values: &[f64], ext: Extremum) -> Result<(usize, f64)> {
    let (&first, rest) = values.split_first().ok_or(Error::EmptyActionSet)?;
    let mut best = (0, first);
    for (i, &v) in rest.iter().enumerate() {
        if ext.better(v, best.1) {
            best = (i + 1, v);
        }
    }
    Ok(best)
}

/// `b = r + γ·ext_{a'} Q̂(s', a')` from the values of the admissible next actions.
pub fn td_target_from_values(
    r: f64,
    gamma: f64,
    next_values: &[f64],
    ext: Extremum,
) -> Result<f64> {
    let (_, v) = argext_index(next_values, ext)?;
    Ok(r + gamma * v)
}

/// Empirical Bellman target `b = r + γ·ext_{a'} φ(s', a')ᵀθ`.
pub fn td_target<E: Environment>(
    exp: &Experience<E::State, E::Action>,
    q: &LinearQ<'_, E>,
) -> Result<f64> {
    let (_, v) = q.best(&exp.s_next)?;
    Ok(exp.r + q.env.gamma() * v)
}

/// `scale·(φᵀθ - b)·φ`.
pub fn td_gradient(phi: &[f64], theta: &[f64], b: f64, scale: f64) -> Vec<f64> {
    let err = scale * (dot(phi, theta) - b);
    phi.iter().map(|p| err * p).collect()
}

/// Greedy action at `s`.
pub fn greedy_action<E: Environment>(q: &LinearQ<'_, E>, s: &E::State) -> Result<E::Action> {
    let rule = q.env.greedy(q.theta)?;
    q.env.argext(&rule, q.theta, s)
}
