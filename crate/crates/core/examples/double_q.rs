//! Single- and double-estimator targets on a random MDP, compared by the
//! signed error of the final iterate. The max in the single target biases
//! values upward; the double target trades that for a downward bias.

use altq::env::random_mdp;
use altq::optim::{Algorithm, Domain, Schedule};
use altq::oracle::{theta_star_tabular, value_iteration};
use altq::qlinear::{run_q_learning, Record, RunOptions, RunSpec};
use altq::ParamVector;

fn main() -> altq::Result<()> {
    let mdp = random_mdp(11, 6, 4, 1.0, 0.7)?;
    let theta_star = theta_star_tabular(&value_iteration(&mdp, 1e-12)?);

    for double_q in [false, true] {
        let mut bias = 0.0;
        let seeds = 8;
        for seed in 0..seeds {
            let spec = RunSpec {
                algorithm: Algorithm::AmsgradR,
                schedule: Schedule::new(0.5, 0.9, 0.9999, 0.999)?.with_restart(1000)?,
                domain: Domain::new(20.0)?,
                steps: 40_000,
                seed,
                options: RunOptions {
                    double_q,
                    record: Record::Scalars,
                    ..RunOptions::default()
                },
            };
            let trace = run_q_learning(&mdp, &spec, ParamVector::zeros(mdp.n_pairs()))?;
            let n = theta_star.dim() as f64;
            bias += trace
                .theta_final
                .iter()
                .zip(theta_star.iter())
                .map(|(a, b)| a - b)
                .sum::<f64>()
                / n;
        }
        println!(
            "{:<15} mean (θ_T - θ*) per entry over {seeds} seeds: {:+.4}",
            if double_q {
                "double target"
            } else {
                "single target"
            },
            bias / seeds as f64
        );
    }
    Ok(())
}
