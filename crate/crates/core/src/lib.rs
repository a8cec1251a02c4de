//! Alternating Q-learning with linear function approximation, driven by
//! AMSGrad/Adam-type updates with optional momentum restart.
//!
//! The crate is organized around six modules:
//!
//! - [`optim`]: updaters, schedules, restart and the weighted ball projection
//! - [`qlinear`]: the sample / target / gradient / update loop
//! - [`env`]: tabular MDPs and the discrete-time LQR with quadratic features
//! - [`oracle`]: DARE, value iteration, `θ*`, expected gradients
//! - [`bounds`]: convergence-bound constants and inequality checks
//! - [`harness`]: configs, seeded suites, CSV output and the CLI
//!
//! ```
//! use altq::optim::{Algorithm, Domain, Schedule};
//! use altq::qlinear::{run_q_learning, RunOptions, RunSpec};
//! use altq::env::single_state_mdp;
//!
//! let mdp = single_state_mdp(1.0, 0.5).unwrap();
//! let spec = RunSpec {
//!     algorithm: Algorithm::Amsgrad,
//!     schedule: Schedule::new(0.5, 0.9, 0.99, 0.999).unwrap(),
//!     domain: Domain::new(4.0).unwrap(),
//!     steps: 50,
//!     seed: 7,
//!     options: RunOptions::default(),
//! };
//! let trace = run_q_learning(&mdp, &spec, vec![0.0].into()).unwrap();
//! assert_eq!(trace.len(), 50);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod env;
pub mod error;
pub mod harness;
pub mod optim;
pub mod oracle;
pub mod param;
pub mod qlinear;

pub use error::{Error, Result};
pub use param::ParamVector;
