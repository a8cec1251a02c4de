//! Q-AMSGrad on a random finite MDP against the value-iteration optimum.
//!
//! Once `β₁λᵗ` is negligible the first moment stops absorbing new gradients;
//! without restarts the iterate then drifts along the stale direction.

use altq::env::random_mdp;
use altq::optim::{Algorithm, Domain, Schedule};
use altq::oracle::{theta_star_tabular, value_iteration};
use altq::qlinear::{run_with_observer, Flow, RunOptions, RunSpec};
use altq::ParamVector;

fn main() -> altq::Result<()> {
    let mdp = random_mdp(0, 4, 2, 1.0, 0.5)?;
    let opt = value_iteration(&mdp, 1e-12)?;
    let theta_star = theta_star_tabular(&opt);
    println!(
        "optimal policy {:?}, ‖θ*‖ = {:.4}",
        opt.policy,
        theta_star.norm()
    );

    for algorithm in [Algorithm::Amsgrad, Algorithm::AmsgradR] {
        let base = Schedule::new(0.5, 0.9, 0.99, 0.999)?;
        let spec = RunSpec {
            algorithm,
            schedule: if algorithm.restarts() {
                base.with_restart(1000)?
            } else {
                base
            },
            domain: Domain::new(6.0)?,
            steps: 20_000,
            seed: 1,
            options: RunOptions::default(),
        };
        print!("{algorithm:<10}");
        run_with_observer(&mdp, &spec, ParamVector::zeros(mdp.n_pairs()), |v| {
            if v.t.is_power_of_two() && v.t >= 256 {
                print!("  t={}: {:.4}", v.t, theta_star.distance(v.theta_avg));
            }
            Flow::Continue
        })?;
        println!();
    }
    println!("(distance of the averaged iterate to θ*)");
    Ok(())
}
