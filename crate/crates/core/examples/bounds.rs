//! Streams a tabular run through a `BoundTracker` and prints every
//! inequality next to its right-hand side.

use altq::bounds::{g_infty, BoundTracker, TrackerSetup};
use altq::env::random_mdp;
use altq::optim::{Algorithm, Domain, Schedule};
use altq::oracle::{estimate_c, theta_star_tabular, value_iteration, C_PROBES};
use altq::qlinear::{run_with_observer, Flow, RunOptions, RunSpec};
use altq::ParamVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> altq::Result<()> {
    let mdp = random_mdp(2, 4, 2, 1.0, 0.5)?;
    let dom = Domain::new(6.0)?;
    let theta_star = theta_star_tabular(&value_iteration(&mdp, 1e-12)?);
    let c = estimate_c(
        &mdp,
        &theta_star,
        &dom,
        C_PROBES,
        &mut ChaCha8Rng::seed_from_u64(0),
    )?;
    let sched = Schedule::new(0.5, 0.9, 0.99, 0.999)?;
    let g_inf = g_infty(mdp.r_max, mdp.gamma, dom.diameter());
    println!("G∞ = {g_inf}, c ≈ {c:.4}");

    let mut tracker = BoundTracker::new(
        TrackerSetup {
            sched,
            g_inf,
            d_inf: dom.diameter(),
            c: (c > 0.0).then_some(c),
            theta_star: Some(theta_star.to_vec()),
        },
        mdp.n_pairs(),
    );
    let spec = RunSpec {
        algorithm: Algorithm::Amsgrad,
        schedule: sched,
        domain: dom,
        steps: 10_000,
        seed: 0,
        options: RunOptions::default(),
    };
    println!("     t  max‖g‖  momentum sum / rhs   schedule sum / rhs   ‖θ̄-θ*‖² / rhs");
    let mut failure = None;
    run_with_observer(&mdp, &spec, ParamVector::zeros(mdp.n_pairs()), |v| {
        tracker.observe(v);
        if matches!(v.t, 10 | 100 | 1000 | 10_000) {
            match tracker.row(v.t, v.theta_avg) {
                Ok(r) => println!(
                    "{:>6}  {:>6.3}  {:>8.3e} / {:<8.2e}  {:>8.4} / {:<8.4}  {} / {}",
                    r.t,
                    r.lemma1_grad_max,
                    r.lemma2_lhs,
                    r.lemma2_rhs,
                    r.lemma3_lhs,
                    r.lemma3_rhs,
                    r.theorem_lhs.map_or("-".into(), |x| format!("{x:.3e}")),
                    r.theorem_rhs.map_or("-".into(), |x| format!("{x:.3e}")),
                ),
                Err(e) => failure = Some(e),
            }
        }
        Flow::Continue
    })?;
    match failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
