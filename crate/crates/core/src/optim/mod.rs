//! Adaptive-moment updaters (AMSGrad, Adam, SGD), their schedules, momentum
//! restart and the weighted ball projection.
//!
//! All step functions are pure: they take the previous [`MomentState`] by
//! reference and return the next one. [`Updater`] wraps them for use inside
//! a training loop.

mod projection;
mod schedule;
mod update;

pub use projection::{
    project_ball, project_weighted_ball, project_weighted_ball_with_multiplier, Domain,
    PROJECTION_MAX_ITER, PROJECTION_RTOL,
};
pub use schedule::{schedule_at, Schedule};
pub use update::{
    adam_step, amsgrad_step, restart_if_due, sgd_step, Algorithm, MomentState, StepInfo, Updater,
    ADAM_EPSILON,
};

/// Incremental arithmetic mean of a sequence of vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct RunningMean {
    mean: Vec<f64>,
    count: usize,
}

impl RunningMean {
    pub fn new(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            count: 0,
        }
    }

    pub fn push(&mut self, x: &[f64]) {
        self.count += 1;
        let k = self.count as f64;
        for (m, xi) in self.mean.iter_mut().zip(x) {
            *m += (xi - *m) / k;
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }
}
