//! DARE solutions of the shipped LQR instances.

use nalgebra::DMatrix;

use altq::harness::{env_preset, EnvConfig};
use altq::oracle::{solve_dare, spectral_radius, DARE_MAX_ITER, DARE_TOL};

fn rows(m: &DMatrix<f64>) -> String {
    let r: Vec<String> = m
        .row_iter()
        .map(|row| {
            format!(
                "[{}]",
                row.iter()
                    .map(|x| format!("{x:.6}"))
                    .collect::<Vec<_>>()
                    .join(", ")
            )
        })
        .collect();
    format!("[{}]", r.join(", "))
}

fn main() -> altq::Result<()> {
    for name in ["lqr_scalar", "lqr2"] {
        let Some(EnvConfig::Lqr(cfg)) = env_preset(name) else {
            unreachable!("{name} is an LQR preset")
        };
        let env = cfg.build()?;
        let sol = solve_dare(&env.model, DARE_TOL, DARE_MAX_ITER)?;
        let closed = &env.model.a - &env.model.b * &sol.k_star;
        println!(
            "{name}: {} iterations, residual {:.1e}",
            sol.iterations, sol.residual
        );
        println!("  P  = {}", rows(&sol.p));
        println!("  K* = {}", rows(&sol.k_star));
        println!(
            "  spectral radius of A - BK* = {:.4}",
            spectral_radius(&closed)
        );
    }
    Ok(())
}
