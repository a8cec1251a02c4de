//! Closed-form constants and right-hand sides of the convergence analysis,
//! and checks of the supporting inequalities against recorded runs.
//!
//! The parameter-error side of both convergence bounds is taken as the
//! squared distance `‖θ̄_T - θ*‖²`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::Schedule;
use crate::param::norm;
use crate::qlinear::{RunTrace, StepView};

/// `G_∞ = R_max + (1 + γ)·D_∞`, the uniform bound on `‖g_t‖`.
pub fn g_infty(r_max: f64, gamma: f64, d_inf: f64) -> f64 {
    r_max + (1.0 + gamma) * d_inf
}

/// Everything the right-hand sides depend on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    pub g_inf: f64,
    pub d_inf: f64,
    pub alpha: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub lambda: f64,
    pub c: f64,
    pub d: usize,
    pub t: usize,
    pub restart_period: Option<usize>,
    /// `‖g_{1:T,i}‖` for each coordinate.
    pub grad_column_norms: Vec<f64>,
    /// `‖θ_1 - θ*‖`.
    pub theta1_err: f64,
}

impl BoundInputs {
    /// Inputs carrying the schedule's hyperparameters and zero gradient history.
    pub fn from_schedule(
        sched: &Schedule,
        g_inf: f64,
        d_inf: f64,
        c: f64,
        d: usize,
        t: usize,
    ) -> Self {
        Self {
            g_inf,
            d_inf,
            alpha: sched.alpha,
            beta1: sched.beta1,
            beta2: sched.beta2,
            lambda: sched.lambda,
            c,
            d,
            t,
            restart_period: sched.restart_period,
            grad_column_norms: vec![0.0; d],
            theta1_err: 0.0,
        }
    }

    pub fn delta(&self) -> f64 {
        self.beta1 / self.beta2
    }

    /// `Σ_i ‖g_{1:T,i}‖`.
    pub fn grad_norm_sum(&self) -> f64 {
        self.grad_column_norms.iter().sum()
    }

    fn check(&self) -> Result<()> {
        if !(self.c > 0.0) {
            return Err(Error::Assumption(format!(
                "monotonicity constant c = {} is not positive; the bound does not apply",
                self.c
            )));
        }
        let mut errs = Vec::new();
        if self.t < 2 {
            errs.push(format!("T must be >= 2, got {}", self.t));
        }
        if !(self.alpha > 0.0) {
            errs.push(format!("alpha must be > 0, got {}", self.alpha));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            errs.push(format!("beta1 must lie in [0, 1), got {}", self.beta1));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            errs.push(format!("beta2 must lie in (0, 1), got {}", self.beta2));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            errs.push(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        let delta = self.delta();
        if !(delta > 0.0 && delta < 1.0) {
            errs.push(format!(
                "delta = beta1/beta2 must lie in (0, 1), got {delta}"
            ));
        }
        let norms_ok = self.g_inf >= 0.0
            && self.d_inf >= 0.0
            && self.theta1_err >= 0.0
            && self.grad_column_norms.iter().all(|x| *x >= 0.0);
        if !norms_ok {
            errs.push("norms and constants must be >= 0".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(errs))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem1 {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub rhs: f64,
}

/// Constants and value of the Q-AMSGrad bound
/// `B₁/T + B₂/√T + B₃·√(1 + log T)/T·Σ_i ‖g_{1:T,i}‖`.
pub fn theorem1(inp: &BoundInputs) -> Result<Theorem1> {
    inp.check()?;
    let (g, d2, a, c, b1) = (
        inp.g_inf,
        inp.d_inf * inp.d_inf,
        inp.alpha,
        inp.c,
        inp.beta1,
    );
    let alpha2 = a / 2f64.sqrt();
    let one_l = 1.0 - inp.lambda;
    let c1 = g * d2 / (2.0 * alpha2 * c * (1.0 - b1))
        + b1 * g * d2 / (2.0 * a * c * (1.0 - b1) * one_l * one_l)
        + inp.theta1_err * inp.theta1_err;
    let c2 = inp.d as f64 * g * d2 / (2.0 * a * c * (1.0 - b1));
    let c3 = momentum_constant(inp);
    let t = inp.t as f64;
    let rhs = c1 / t + c2 / t.sqrt() + c3 * (1.0 + t.ln()).sqrt() / t * inp.grad_norm_sum();
    Ok(Theorem1 {
        b1: c1,
        b2: c2,
        b3: c3,
        rhs,
    })
}

pub fn theorem1_rhs(inp: &BoundInputs) -> Result<f64> {
    Ok(theorem1(inp)?.rhs)
}

/// `α(1 + β₁) / (2c(1 - β₁)²(1 - δ)√(1 - β₂))`.
fn momentum_constant(inp: &BoundInputs) -> f64 {
    let b1 = inp.beta1;
    inp.alpha * (1.0 + b1)
        / (2.0 * inp.c * (1.0 - b1).powi(2) * (1.0 - inp.delta()) * (1.0 - inp.beta2).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Theorem2 {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
    pub rhs: f64,
}

/// Constants and value of the Q-AMSGradR bound.
///
/// `snapshot_sq_errs[k]` is `‖θ_{kr} - θ*‖²` for `k = 0..=⌊T/r⌋`, with
/// `θ_0` read as the initial iterate.
pub fn theorem2(inp: &BoundInputs, snapshot_sq_errs: &[f64]) -> Result<Theorem2> {
    inp.check()?;
    let r = inp
        .restart_period
        .filter(|r| *r >= 1)
        .ok_or_else(|| Error::InvalidArgument("restart period r >= 1 is required".into()))?;
    let kmax = inp.t / r;
    if snapshot_sq_errs.len() < kmax + 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} restart snapshots, got {}",
            kmax + 1,
            snapshot_sq_errs.len()
        )));
    }
    let (g, d2, a, c, b1) = (
        inp.g_inf,
        inp.d_inf * inp.d_inf,
        inp.alpha,
        inp.c,
        inp.beta1,
    );
    let one_l = 1.0 - inp.lambda;
    let c1 = b1 * d2 * g / (2.0 * a * c * (1.0 - b1) * one_l * one_l);
    let c2 = momentum_constant(inp);
    let c3 = inp.d as f64 * g * d2 / (2.0 * a * c * (1.0 - b1));
    let c4 = 4.0 * c * (1.0 - b1);
    let t = inp.t as f64;

    let restart_sqrt: f64 = (1..=kmax).map(|k| ((k * r) as f64 - 1.0).sqrt()).sum();
    let snapshots: f64 = (0..=kmax)
        .map(|k| g * d2 / a * ((k * r) as f64 + 2.0).sqrt() + c4 * snapshot_sq_errs[k])
        .sum();
    let rhs = c1 / t
        + c2 * (1.0 + t.ln()).sqrt() / t * inp.grad_norm_sum()
        + c3 / t * (t.sqrt() + restart_sqrt)
        + snapshots / t;
    Ok(Theorem2 {
        b1: c1,
        b2: c2,
        b3: c3,
        b4: c4,
        rhs,
    })
}

pub fn theorem2_rhs(inp: &BoundInputs, snapshot_sq_errs: &[f64]) -> Result<f64> {
    Ok(theorem2(inp, snapshot_sq_errs)?.rhs)
}

/// Outcome of a one-sided inequality `lhs <= rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl Check {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            holds: lhs <= rhs,
        }
    }
}

/// `α_t·‖V̂_t^{-1/4} m_t‖²`, with zero-variance coordinates contributing 0.
pub fn weighted_momentum_term(alpha_t: f64, m: &[f64], v_hat: &[f64]) -> f64 {
    let s: f64 = m
        .iter()
        .zip(v_hat)
        .filter(|(_, v)| **v > 0.0)
        .map(|(mi, v)| mi * mi / v.sqrt())
        .sum();
    alpha_t * s
}

/// `α√(1 + log T) / ((1 - β₁)(1 - δ)√(1 - β₂))·Σ_i ‖g_{1:T,i}‖`.
pub fn lemma2_rhs(sched: &Schedule, t: usize, grad_norm_sum: f64) -> f64 {
    if t == 0 {
        return 0.0;
    }
    let tf = t as f64;
    sched.alpha * (1.0 + tf.ln()).sqrt()
        / ((1.0 - sched.beta1) * (1.0 - sched.delta()) * (1.0 - sched.beta2).sqrt())
        * grad_norm_sum
}

/// Both sides of the momentum sum inequality on a full trace.
pub fn lemma2_check(trace: &RunTrace, sched: &Schedule) -> Check {
    let lhs: f64 = trace
        .records
        .iter()
        .map(|r| weighted_momentum_term(r.alpha_t, &r.m, &r.v_hat))
        .sum();
    let rhs = lemma2_rhs(sched, trace.len(), trace.grad_column_norms().iter().sum());
    Check::new(lhs, rhs)
}

/// `Σ_{t=1}^T β₁λᵗ√t/α` against `β₁/(α(1-λ)²)`.
pub fn lemma3_check(sched: &Schedule, t: usize) -> Check {
    let lhs: f64 = (1..=t)
        .map(|k| sched.beta1 * sched.lambda.powi(k as i32) * (k as f64).sqrt() / sched.alpha)
        .sum();
    Check::new(lhs, lemma3_bound(sched))
}

pub fn lemma3_bound(sched: &Schedule) -> f64 {
    sched.beta1 / (sched.alpha * (1.0 - sched.lambda).powi(2))
}

/// Running partial sums for `T = 1..=t_max`; returns the number of `T` at
/// which the bound fails and the final partial sum.
pub fn lemma3_sweep(sched: &Schedule, t_max: usize) -> (usize, f64) {
    let bound = lemma3_bound(sched);
    let mut sum = 0.0;
    let mut pow = 1.0;
    let mut violations = 0;
    for k in 1..=t_max {
        pow *= sched.lambda;
        sum += sched.beta1 * pow * (k as f64).sqrt() / sched.alpha;
        if sum > bound {
            violations += 1;
        }
    }
    (violations, sum)
}

/// Largest norms seen along a run and how often each bound was exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Lemma1Report {
    pub max_grad: f64,
    pub max_m: f64,
    pub max_v_hat: f64,
    pub grad_violations: usize,
    pub m_violations: usize,
    pub v_hat_violations: usize,
}

impl Lemma1Report {
    pub fn observe(&mut self, g: &[f64], m: &[f64], v_hat: &[f64], g_inf: f64) {
        let (ng, nm, nv) = (norm(g), norm(m), norm(v_hat));
        self.max_grad = self.max_grad.max(ng);
        self.max_m = self.max_m.max(nm);
        self.max_v_hat = self.max_v_hat.max(nv);
        self.grad_violations += usize::from(ng > g_inf);
        self.m_violations += usize::from(nm > g_inf);
        self.v_hat_violations += usize::from(nv > g_inf * g_inf);
    }

    pub fn violations(&self) -> usize {
        self.grad_violations + self.m_violations + self.v_hat_violations
    }
}

/// `‖g_t‖ <= G`, `‖m_t‖ <= G`, `‖v̂_t‖ <= G²` at every recorded step.
pub fn lemma1_check(trace: &RunTrace, g_inf: f64) -> Lemma1Report {
    let mut rep = Lemma1Report::default();
    for r in &trace.records {
        rep.observe(&r.g, &r.m, &r.v_hat, g_inf);
    }
    rep
}

/// Constants the streaming tracker needs besides the run itself.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackerSetup {
    pub sched: Schedule,
    pub g_inf: f64,
    pub d_inf: f64,
    /// Monotonicity constant; `None` skips the convergence bounds.
    pub c: Option<f64>,
    pub theta_star: Option<Vec<f64>>,
}

/// One `bounds_report` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub t: usize,
    pub lemma1_grad_max: f64,
    pub lemma1_m_max: f64,
    pub lemma1_vhat_max: f64,
    pub g_inf: f64,
    pub lemma1_violations: usize,
    pub lemma2_lhs: f64,
    pub lemma2_rhs: f64,
    pub lemma3_lhs: f64,
    pub lemma3_rhs: f64,
    /// `‖θ̄_T - θ*‖²`, when `θ*` is known.
    pub theorem_lhs: Option<f64>,
    /// Non-restart bound, or the restart bound for `*_r` runs.
    pub theorem_rhs: Option<f64>,
}

/// Accumulates every bound ingredient while a run streams past.
#[derive(Debug, Clone)]
pub struct BoundTracker {
    setup: TrackerSetup,
    grad_sq: Vec<f64>,
    lemma1: Lemma1Report,
    lemma2_lhs: f64,
    lemma3_lhs: f64,
    theta1_err: Option<f64>,
    snapshot_sq: Vec<f64>,
}

impl BoundTracker {
    pub fn new(setup: TrackerSetup, d: usize) -> Self {
        Self {
            setup,
            grad_sq: vec![0.0; d],
            lemma1: Lemma1Report::default(),
            lemma2_lhs: 0.0,
            lemma3_lhs: 0.0,
            theta1_err: None,
            snapshot_sq: Vec::new(),
        }
    }

    fn sq_err(&self, theta: &[f64]) -> Option<f64> {
        self.setup.theta_star.as_ref().map(|ts| {
            let d: Vec<f64> = theta.iter().zip(ts).map(|(a, b)| a - b).collect();
            let n = norm(&d);
            n * n
        })
    }

    pub fn observe(&mut self, v: &StepView<'_>) {
        self.observe_parts(v.t, v.info.alpha_t, v.theta, v.g, v.m, v.v_hat);
    }

    /// Same as [`BoundTracker::observe`] from the raw per-step quantities.
    pub fn observe_parts(
        &mut self,
        t: usize,
        alpha_t: f64,
        theta: &[f64],
        g: &[f64],
        m: &[f64],
        v_hat: &[f64],
    ) {
        for (acc, gi) in self.grad_sq.iter_mut().zip(g) {
            *acc += gi * gi;
        }
        self.lemma1.observe(g, m, v_hat, self.setup.g_inf);
        self.lemma2_lhs += weighted_momentum_term(alpha_t, m, v_hat);
        let s = &self.setup.sched;
        self.lemma3_lhs += s.beta1 * s.lambda.powi(t as i32) * (t as f64).sqrt() / s.alpha;
        if t == 1 {
            let e = self.sq_err(theta);
            self.theta1_err = e.map(f64::sqrt);
            // θ_0 is read as θ_1
            self.snapshot_sq.extend(e);
        }
        if let Some(r) = s.restart_period {
            if t % r == 0 {
                if let Some(e) = self.sq_err(theta) {
                    self.snapshot_sq.push(e);
                }
            }
        }
    }

    pub fn lemma1(&self) -> Lemma1Report {
        self.lemma1
    }

    pub fn grad_column_norms(&self) -> Vec<f64> {
        self.grad_sq.iter().map(|x| x.sqrt()).collect()
    }

    /// Row for checkpoint `T = t` given the current average iterate.
    pub fn row(&self, t: usize, theta_avg: &[f64]) -> Result<BoundRow> {
        let s = &self.setup.sched;
        let cols = self.grad_column_norms();
        let gsum: f64 = cols.iter().sum();
        let theorem_lhs = self.sq_err(theta_avg);
        let theorem_rhs = match (self.setup.c, self.theta1_err, t >= 2) {
            (Some(c), Some(e1), true) => {
                let mut inp = BoundInputs::from_schedule(
                    s,
                    self.setup.g_inf,
                    self.setup.d_inf,
                    c,
                    cols.len(),
                    t,
                );
                inp.grad_column_norms = cols;
                inp.theta1_err = e1;
                Some(match s.restart_period {
                    Some(_) => theorem2_rhs(&inp, &self.snapshot_sq)?,
                    None => theorem1_rhs(&inp)?,
                })
            }
            _ => None,
        };
        Ok(BoundRow {
            t,
            lemma1_grad_max: self.lemma1.max_grad,
            lemma1_m_max: self.lemma1.max_m,
            lemma1_vhat_max: self.lemma1.max_v_hat,
            g_inf: self.setup.g_inf,
            lemma1_violations: self.lemma1.violations(),
            lemma2_lhs: self.lemma2_lhs,
            lemma2_rhs: lemma2_rhs(s, t, gsum),
            lemma3_lhs: self.lemma3_lhs,
            lemma3_rhs: lemma3_bound(s),
            theorem_lhs,
            theorem_rhs,
        })
    }
}
