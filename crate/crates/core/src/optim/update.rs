use serde::{Deserialize, Serialize};

use super::projection::{project_ball, project_weighted_ball, Domain};
use super::schedule::{schedule_at, Schedule};
use crate::error::{Error, Result};
use crate::param::ParamVector;

/// Default denominator regularizer of the Adam variant.
pub const ADAM_EPSILON: f64 = 1e-8;

/// Optimizer internals: first moment, max second moment and step counter.
///
/// For the Adam variant `v_hat` holds the running second moment `v`
/// (no elementwise max is taken).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentState {
    pub m: Vec<f64>,
    pub v_hat: Vec<f64>,
    /// Number of steps taken so far.
    pub t: usize,
}

impl MomentState {
    pub fn zeros(d: usize) -> Self {
        Self {
            m: vec![0.0; d],
            v_hat: vec![0.0; d],
            t: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    fn check(&self, theta: &[f64], g: &[f64]) -> Result<()> {
        if theta.len() != self.m.len()
            || g.len() != self.m.len()
            || self.v_hat.len() != self.m.len()
        {
            return Err(Error::Shape(format!(
                "theta {}, gradient {}, state {}/{}",
                theta.len(),
                g.len(),
                self.m.len(),
                self.v_hat.len()
            )));
        }
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("parameter"));
        }
        Ok(())
    }
}

/// One AMSGrad step with the moment weighting used by the analyzed algorithm:
///
/// ```text
/// m = (1 - β1t)·m + β1t·g
/// v = (1 - β2)·v̂ + β2·g²
/// v̂ = max(v̂, v)
/// θ = Π_{D, V̂^{1/4}}(θ - αt·m/√v̂)
/// ```
///
/// Coordinates with `v̂_i = 0` take a zero step.
pub fn amsgrad_step(
    state: &MomentState,
    theta: &[f64],
    g: &[f64],
    sched: &Schedule,
    dom: &Domain,
) -> Result<(ParamVector, MomentState)> {
    state.check(theta, g)?;
    let t = state.t + 1;
    let (alpha_t, beta1_t) = schedule_at(sched, t)?;
    let b2 = sched.beta2;
    let d = theta.len();
    let mut m = Vec::with_capacity(d);
    let mut v_hat = Vec::with_capacity(d);
    let mut raw = Vec::with_capacity(d);
    for i in 0..d {
        let mi = (1.0 - beta1_t) * state.m[i] + beta1_t * g[i];
        let vi = (1.0 - b2) * state.v_hat[i] + b2 * g[i] * g[i];
        let vh = state.v_hat[i].max(vi);
        let step = if vh > 0.0 {
            alpha_t * mi / vh.sqrt()
        } else {
            0.0
        };
        m.push(mi);
        v_hat.push(vh);
        raw.push(theta[i] - step);
    }
    let next = project_weighted_ball(&raw, &v_hat, dom)?;
    Ok((ParamVector(next), MomentState { m, v_hat, t }))
}

/// Practical Adam variant: running `v` instead of the max, `√(v + ε)` in the
/// denominator and no projection.
pub fn adam_step(
    state: &MomentState,
    theta: &[f64],
    g: &[f64],
    sched: &Schedule,
    epsilon: f64,
) -> Result<(ParamVector, MomentState)> {
    state.check(theta, g)?;
    let t = state.t + 1;
    let (alpha_t, beta1_t) = schedule_at(sched, t)?;
    let b2 = sched.beta2;
    let d = theta.len();
    let mut m = Vec::with_capacity(d);
    let mut v = Vec::with_capacity(d);
    let mut next = Vec::with_capacity(d);
    for i in 0..d {
        let mi = (1.0 - beta1_t) * state.m[i] + beta1_t * g[i];
        let vi = (1.0 - b2) * state.v_hat[i] + b2 * g[i] * g[i];
        m.push(mi);
        v.push(vi);
        next.push(theta[i] - alpha_t * mi / (vi + epsilon).sqrt());
    }
    Ok((ParamVector(next), MomentState { m, v_hat: v, t }))
}

/// Projected SGD step `Π_D(θ - αt·g)` under the Euclidean norm.
pub fn sgd_step(theta: &[f64], g: &[f64], alpha_t: f64, dom: &Domain) -> Result<ParamVector> {
    if theta.len() != g.len() {
        return Err(Error::Shape(format!(
            "theta {}, gradient {}",
            theta.len(),
            g.len()
        )));
    }
    if !alpha_t.is_finite() || g.iter().chain(theta).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("sgd input"));
    }
    let raw: Vec<f64> = theta
        .iter()
        .zip(g)
        .map(|(x, gi)| x - alpha_t * gi)
        .collect();
    Ok(ParamVector(project_ball(&raw, dom)))
}

/// Zeroes `m` and `v̂` when `t` is a multiple of the restart period.
pub fn restart_if_due(state: &MomentState, t: usize, sched: &Schedule) -> MomentState {
    match sched.restart_period {
        Some(r) if r > 0 && t % r == 0 => MomentState {
            m: vec![0.0; state.m.len()],
            v_hat: vec![0.0; state.v_hat.len()],
            t: state.t,
        },
        _ => state.clone(),
    }
}

/// The five update rules compared by the experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Sgd,
    Adam,
    AdamR,
    Amsgrad,
    AmsgradR,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Sgd,
        Algorithm::Adam,
        Algorithm::AdamR,
        Algorithm::Amsgrad,
        Algorithm::AmsgradR,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Sgd => "sgd",
            Algorithm::Adam => "adam",
            Algorithm::AdamR => "adam_r",
            Algorithm::Amsgrad => "amsgrad",
            Algorithm::AmsgradR => "amsgrad_r",
        }
    }

    pub fn restarts(self) -> bool {
        matches!(self, Algorithm::AdamR | Algorithm::AmsgradR)
    }

    /// Whether iterates are projected onto the domain.
    pub fn projects(self) -> bool {
        matches!(
            self,
            Algorithm::Sgd | Algorithm::Amsgrad | Algorithm::AmsgradR
        )
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .iter()
            .copied()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

/// Bookkeeping of one updater step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub t: usize,
    pub alpha_t: f64,
    pub beta1_t: f64,
    /// The moments were reset at this step, so the iterate did not move.
    pub restarted: bool,
}

/// Stateful driver around the pure step functions.
#[derive(Debug, Clone)]
pub struct Updater {
    algo: Algorithm,
    sched: Schedule,
    dom: Domain,
    epsilon: f64,
    state: MomentState,
}

impl Updater {
    pub fn new(algo: Algorithm, sched: Schedule, dom: Domain, dim: usize) -> Result<Self> {
        if algo.restarts() && sched.restart_period.is_none() {
            return Err(Error::InvalidArgument(format!(
                "{algo} requires a restart period"
            )));
        }
        Ok(Self {
            algo,
            sched,
            dom,
            epsilon: ADAM_EPSILON,
            state: MomentState::zeros(dim),
        })
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algo
    }

    pub fn state(&self) -> &MomentState {
        &self.state
    }

    /// Sets the number of completed steps, so the next call to
    /// [`Updater::step`] uses the schedule at `done + 1`.
    pub fn set_clock(&mut self, done: usize) {
        self.state.t = done;
    }

    /// Advances `theta` by one step of the configured rule.
    ///
    /// For restarting rules, at `t ≡ 0 (mod r)` the moments are zeroed and
    /// the iterate is left unchanged, so `θ_{kr+1} = θ_{kr}` holds exactly.
    pub fn step(&mut self, theta: &mut ParamVector, g: &[f64]) -> Result<StepInfo> {
        let t = self.state.t + 1;
        let (alpha_t, beta1_t) = schedule_at(&self.sched, t)?;
        if self.algo.restarts() {
            if self.sched.restart_period.is_some_and(|r| t % r == 0) {
                let reset = restart_if_due(&self.state, t, &self.sched);
                self.state = MomentState { t, ..reset };
                return Ok(StepInfo {
                    t,
                    alpha_t,
                    beta1_t,
                    restarted: true,
                });
            }
        }
        match self.algo {
            Algorithm::Sgd => {
                self.state.check(theta, g)?;
                *theta = sgd_step(theta, g, alpha_t, &self.dom)?;
                self.state.t = t;
            }
            Algorithm::Adam | Algorithm::AdamR => {
                let (next, st) = adam_step(&self.state, theta, g, &self.sched, self.epsilon)?;
                *theta = next;
                self.state = st;
            }
            Algorithm::Amsgrad | Algorithm::AmsgradR => {
                let (next, st) = amsgrad_step(&self.state, theta, g, &self.sched, &self.dom)?;
                *theta = next;
                self.state = st;
            }
        }
        Ok(StepInfo {
            t,
            alpha_t,
            beta1_t,
            restarted: false,
        })
    }
}
