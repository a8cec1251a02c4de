use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step-size and momentum schedule shared by every updater.
///
/// At step `t >= 1` the step size is `alpha / sqrt(t)` and the momentum
/// weight is `beta1 * lambda^t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub alpha: f64,
    pub beta1: f64,
    pub lambda: f64,
    pub beta2: f64,
    /// Momentum restart period `r`; `None` disables restarts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart_period: Option<usize>,
}

impl Schedule {
    pub fn new(alpha: f64, beta1: f64, lambda: f64, beta2: f64) -> Result<Self> {
        let s = Self {
            alpha,
            beta1,
            lambda,
            beta2,
            restart_period: None,
        };
        s.validate().map_err(Error::Validation)?;
        Ok(s)
    }

    pub fn with_restart(mut self, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidArgument("restart period must be >= 1".into()));
        }
        self.restart_period = Some(period);
        Ok(self)
    }

    /// `beta1 / beta2`, which the convergence analysis requires to lie in (0, 1).
    pub fn delta(&self) -> f64 {
        self.beta1 / self.beta2
    }

    /// Returns every range violation, one message per field.
    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            errs.push(format!(
                "alpha must be a positive finite real, got {}",
                self.alpha
            ));
        }
        if !(0.0..1.0).contains(&self.beta1) {
            errs.push(format!("beta1 must lie in [0, 1), got {}", self.beta1));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            errs.push(format!("lambda must lie in (0, 1), got {}", self.lambda));
        }
        if !(self.beta2 > 0.0 && self.beta2 < 1.0) {
            errs.push(format!("beta2 must lie in (0, 1), got {}", self.beta2));
        }
        let delta = self.delta();
        if errs.is_empty() && !(delta > 0.0 && delta < 1.0) {
            errs.push(format!(
                "delta = beta1/beta2 must lie in (0, 1), got {delta}"
            ));
        }
        if self.restart_period == Some(0) {
            errs.push("restart_period must be >= 1".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// `(alpha_t, beta1_t)` at step `t`.
    pub fn at(&self, t: usize) -> Result<(f64, f64)> {
        schedule_at(self, t)
    }
}

pub fn schedule_at(sched: &Schedule, t: usize) -> Result<(f64, f64)> {
    if t == 0 {
        return Err(Error::InvalidStep(t));
    }
    let tf = t as f64;
    let beta1_t = sched.beta1 * sched.lambda.powf(tf);
    Ok((sched.alpha / tf.sqrt(), beta1_t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sched() -> Schedule {
        Schedule::new(1.0, 0.9, 0.5, 0.999).unwrap()
    }

    #[test]
    fn first_and_fourth_step() {
        let (a, b) = schedule_at(&sched(), 1).unwrap();
        assert_eq!(a, 1.0);
        assert!((b - 0.45).abs() < 1e-15);
        let (a, b) = schedule_at(&sched(), 4).unwrap();
        assert_eq!(a, 0.5);
        assert!((b - 0.05625).abs() < 1e-15);
    }

    #[test]
    fn zero_step_is_rejected() {
        assert!(matches!(
            schedule_at(&sched(), 0),
            Err(Error::InvalidStep(0))
        ));
    }

    #[test]
    fn both_components_decrease() {
        let s = Schedule::new(0.3, 0.9, 0.99, 0.999).unwrap();
        let mut prev = s.at(1).unwrap();
        for t in 2..2000 {
            let cur = s.at(t).unwrap();
            assert!(cur.0 < prev.0 && cur.1 < prev.1, "t = {t}");
            prev = cur;
        }
        assert!(prev.0 < 0.01 && prev.1 < 1e-8);
    }

    #[test]
    fn range_checks_are_aggregated() {
        let bad = Schedule {
            alpha: -1.0,
            beta1: 0.9,
            lambda: 1.5,
            beta2: 0.999,
            restart_period: Some(0),
        };
        let errs = bad.validate().unwrap_err();
        assert_eq!(errs.len(), 3);
        assert!(errs.iter().any(|e| e.contains("lambda")));
    }

    #[test]
    fn delta_must_be_below_one() {
        assert!(Schedule::new(1.0, 0.9, 0.5, 0.5).is_err());
    }
}
