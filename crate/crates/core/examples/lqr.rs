//! Q-Adam against Q-AdamR on the shipped 2-state LQR, one seed each,
//! tracking `‖K_t - K*‖₂` until the stop tolerance is met.

use std::sync::Arc;

use altq::harness::{run_preset, ResolvedEnv};
use altq::optim::{Algorithm, Domain};
use altq::oracle::{solve_dare, spectral_norm, DARE_MAX_ITER, DARE_TOL};
use altq::qlinear::{run_with_observer, Flow, RunOptions, RunSpec};

fn main() -> altq::Result<()> {
    let cfg = run_preset("lqr_table1").expect("shipped preset");
    let ResolvedEnv::Lqr(env) = cfg.env.resolve()? else {
        unreachable!("lqr_table1 runs on an LQR")
    };
    let k_star = solve_dare(&env.model, DARE_TOL, DARE_MAX_ITER)?.k_star;
    let tol = cfg.stop_tol.unwrap_or(1e-4);

    for algorithm in [Algorithm::Adam, Algorithm::AdamR] {
        let metric_env = env.clone();
        let k = k_star.clone();
        let spec = RunSpec {
            algorithm,
            schedule: cfg.schedule_for(algorithm),
            domain: Domain::new(cfg.radius)?,
            steps: cfg.steps,
            seed: 0,
            options: RunOptions {
                double_q: cfg.double_q,
                scale: cfg.scale * cfg.scale,
                batch: cfg.batch,
                adam_epsilon: cfg.adam_epsilon,
                policy_metric: Some(Arc::new(move |th: &[f64]| {
                    metric_env.gain(th).ok().map(|kt| spectral_norm(&(kt - &k)))
                })),
                ..RunOptions::default()
            },
        };
        let metric = spec.options.policy_metric.clone().unwrap();
        let mut last = f64::NAN;
        let out = run_with_observer(&env, &spec, env.identity_theta(cfg.init_scale), |v| {
            last = metric(v.theta).unwrap_or(f64::NAN);
            if v.t % 2000 == 0 {
                println!("{algorithm:<7} t={:>5}  ‖K_t - K*‖₂ = {last:.3e}", v.t);
            }
            if last <= tol {
                Flow::Stop
            } else {
                Flow::Continue
            }
        })?;
        match out.stopped_early {
            true => println!("{algorithm:<7} reached {tol:.0e} at t = {}\n", out.steps),
            false => println!(
                "{algorithm:<7} ended at {last:.3e} after {} steps\n",
                out.steps
            ),
        }
    }
    Ok(())
}
