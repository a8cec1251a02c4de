//! Momentum restart: every `r` steps the moments are zeroed and the
//! parameters stay put for that step.

use altq::optim::{Algorithm, Domain, Schedule, Updater};
use altq::ParamVector;

fn main() -> altq::Result<()> {
    let sched = Schedule::new(0.2, 0.9, 0.95, 0.999)?.with_restart(5)?;
    let mut upd = Updater::new(Algorithm::AmsgradR, sched, Domain::new(10.0)?, 2)?;
    let mut theta = ParamVector::from(vec![1.0, -1.0]);

    println!("  t  restart        θ_1        θ_2        m_1");
    for t in 1..=12 {
        let g = [theta[0] - 0.3, theta[1] + 0.5 * (t as f64).sin()];
        let info = upd.step(&mut theta, &g)?;
        println!(
            "{:>3}  {:>7}  {:>9.5}  {:>9.5}  {:>9.5}",
            info.t,
            if info.restarted { "yes" } else { "" },
            theta[0],
            theta[1],
            upd.state().m[0]
        );
    }
    Ok(())
}
