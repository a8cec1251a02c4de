//! One AMSGrad step by hand and the weighted ball projection it ends with.

use altq::optim::{amsgrad_step, project_weighted_ball, Domain, MomentState, Schedule};

fn main() -> altq::Result<()> {
    let sched = Schedule::new(0.1, 0.9, 0.5, 0.999)?;
    let state = MomentState::zeros(1);

    let (theta, next) = amsgrad_step(&state, &[0.5], &[1.0], &sched, &Domain::new(1e6)?)?;
    println!(
        "interior step: θ = {:.6}, m = {}, v̂ = {}",
        theta[0], next.m[0], next.v_hat[0]
    );

    // the same step into a small ball lands on its boundary
    let (theta, _) = amsgrad_step(&state, &[0.5], &[-40.0], &sched, &Domain::new(0.6)?)?;
    println!("clipped step:  θ = {:.6}", theta[0]);

    // coordinates with large v̂ are expensive to move, so the projection
    // shrinks the cheap ones more
    let p = project_weighted_ball(&[2.0, 2.0], &[4.0, 1.0], &Domain::new(1.0)?)?;
    println!(
        "weighted projection of (2, 2) with v̂ = (4, 1): ({:.4}, {:.4})",
        p[0], p[1]
    );
    Ok(())
}
