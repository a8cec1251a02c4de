//! Shipped environments and experiment suites.

use super::config::{EnvConfig, LqrConfig, RunConfig, TraceMode};
use crate::env::{LqrBehavior, TabularMdp};
use crate::optim::{Algorithm, Schedule};

pub const ENV_PRESETS: &[(&str, &str)] = &[
    ("lqr2", "stable 2-state / 1-input LQR, A = [[0.9, 0.2], [0, 0.8]], B = [0; 1], Q = I, R = 1, gamma = 1"),
    ("lqr_scalar", "scalar LQR with A = B = Q = R = 1, gamma = 1 (P* is the golden ratio)"),
    ("chain2", "2-state chain: s0 -> s1 with reward 0, s1 absorbing with reward 1, gamma = 0.5"),
];

pub const RUN_PRESETS: &[(&str, &str)] = &[
    (
        "lqr_table1",
        "sgd / adam / adam_r on lqr2 with the standard LQR hyperparameters, 10 seeds",
    ),
    (
        "lqr_scalar",
        "adam / adam_r on lqr_scalar with the standard LQR hyperparameters, 3 seeds",
    ),
    (
        "tabular_amsgrad",
        "amsgrad / amsgrad_r on a random 4x2 MDP, gamma = 0.5, 5 seeds",
    ),
    ("chain", "amsgrad on chain2"),
];

/// Box half-width of the shipped LQR instances.
pub const LQR_Z_MAX: f64 = 0.025;

fn lqr_behavior(z_max: f64) -> LqrBehavior {
    LqrBehavior {
        epsilon: 0.1,
        action_noise: 0.1 * z_max,
        state_std: 0.3 * z_max,
        reset_prob: 0.05,
        process_noise: 0.0,
    }
}

pub fn env_preset(name: &str) -> Option<EnvConfig> {
    let m = |rows: &[&[f64]]| rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    Some(match name {
        "lqr2" => EnvConfig::Lqr(LqrConfig {
            a: m(&[&[0.9, 0.2], &[0.0, 0.8]]),
            b: m(&[&[0.0], &[1.0]]),
            q: m(&[&[1.0, 0.0], &[0.0, 1.0]]),
            r: m(&[&[1.0]]),
            n: None,
            gamma: 1.0,
            z_max: LQR_Z_MAX,
            behavior: lqr_behavior(LQR_Z_MAX),
        }),
        "lqr_scalar" => EnvConfig::Lqr(LqrConfig {
            a: m(&[&[1.0]]),
            b: m(&[&[1.0]]),
            q: m(&[&[1.0]]),
            r: m(&[&[1.0]]),
            n: None,
            gamma: 1.0,
            z_max: LQR_Z_MAX,
            behavior: lqr_behavior(LQR_Z_MAX),
        }),
        "chain2" => EnvConfig::Tabular(
            TabularMdp::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0], 1.0, 0.5)
                .expect("chain2 is a valid MDP"),
        ),
        _ => return None,
    })
}

/// Step size, loss scale, moments, restart period and stop criterion of the LQR study.
pub fn lqr_schedule() -> Schedule {
    Schedule {
        alpha: 1e-4,
        beta1: 0.9,
        lambda: 0.9993,
        beta2: 0.999,
        restart_period: Some(100),
    }
}

fn lqr_suite(env: &str, algorithms: Vec<Algorithm>, seeds: u64) -> RunConfig {
    RunConfig {
        name: None,
        algorithms,
        seeds: (0..seeds).collect(),
        steps: 40_000,
        batch: 32,
        double_q: true,
        scale: 0.01,
        radius: 10.0,
        cadence: 100,
        init_scale: 1.0,
        stop_tol: Some(1e-4),
        adam_epsilon: 1e-30,
        trace: TraceMode::Cadence,
        c: None,
        out: None,
        schedule: lqr_schedule(),
        env: EnvConfig::Preset(env.into()),
    }
}

pub fn run_preset(name: &str) -> Option<RunConfig> {
    let mut cfg = match name {
        "lqr_table1" => lqr_suite(
            "lqr2",
            vec![Algorithm::Sgd, Algorithm::Adam, Algorithm::AdamR],
            10,
        ),
        "lqr_scalar" => lqr_suite("lqr_scalar", vec![Algorithm::Adam, Algorithm::AdamR], 3),
        "tabular_amsgrad" => RunConfig {
            name: None,
            algorithms: vec![Algorithm::Amsgrad, Algorithm::AmsgradR],
            seeds: (0..5).collect(),
            steps: 40_000,
            batch: 1,
            double_q: false,
            scale: 1.0,
            radius: 6.0,
            cadence: 100,
            init_scale: 1.0,
            stop_tol: None,
            adam_epsilon: crate::optim::ADAM_EPSILON,
            trace: TraceMode::Cadence,
            c: None,
            out: None,
            schedule: Schedule {
                alpha: 0.5,
                beta1: 0.9,
                lambda: 0.99,
                beta2: 0.999,
                restart_period: Some(1000),
            },
            env: EnvConfig::RandomTabular {
                seed: 0,
                n_states: 4,
                n_actions: 2,
                r_max: 1.0,
                gamma: 0.5,
            },
        },
        "chain" => RunConfig {
            name: None,
            algorithms: vec![Algorithm::Amsgrad],
            seeds: vec![0],
            steps: 5_000,
            batch: 1,
            double_q: false,
            scale: 1.0,
            radius: 4.0,
            cadence: 100,
            init_scale: 1.0,
            stop_tol: None,
            adam_epsilon: crate::optim::ADAM_EPSILON,
            trace: TraceMode::Full,
            c: None,
            out: None,
            schedule: Schedule {
                alpha: 0.5,
                beta1: 0.9,
                lambda: 0.99,
                beta2: 0.999,
                restart_period: None,
            },
            env: EnvConfig::Preset("chain2".into()),
        },
        _ => return None,
    };
    cfg.name = Some(name.into());
    Some(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_preset_resolves_and_validates() {
        for (name, _) in ENV_PRESETS {
            env_preset(name).unwrap().resolve().unwrap();
        }
        for (name, _) in RUN_PRESETS {
            let cfg = run_preset(name).unwrap();
            cfg.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(run_preset("nope").is_none());
    }

    #[test]
    fn lqr_table1_hyperparameters() {
        let c = run_preset("lqr_table1").unwrap();
        assert_eq!(c.schedule.alpha, 0.0001);
        assert_eq!(c.scale, 0.01);
        assert_eq!(c.schedule.beta1, 0.9);
        assert_eq!(c.schedule.beta2, 0.999);
        assert_eq!(c.schedule.restart_period, Some(100));
        assert_eq!(c.stop_tol, Some(1e-4));
        assert_eq!(c.seeds.len(), 10);
        match c.env.definition().unwrap() {
            EnvConfig::Lqr(l) => assert_eq!(l.gamma, 1.0),
            other => panic!("{other:?}"),
        }
    }
}
