//! Projection onto the origin-centred parameter ball.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::param::norm;

/// Relative tolerance on `|‖θ‖ - radius|` for the weighted projection.
pub const PROJECTION_RTOL: f64 = 1e-12;
/// Bisection iteration cap for the weighted projection.
pub const PROJECTION_MAX_ITER: usize = 200;

/// Feasible parameter set: the Euclidean ball of `radius` around the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub radius: f64,
}

impl Domain {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "domain radius must be positive, got {radius}"
            )));
        }
        Ok(Self { radius })
    }

    /// Diameter `D_inf` of the ball.
    pub fn diameter(&self) -> f64 {
        2.0 * self.radius
    }

    pub fn contains(&self, theta: &[f64]) -> bool {
        norm(theta) <= self.radius
    }
}

/// Plain Euclidean projection (radial shrink).
pub fn project_ball(theta: &[f64], dom: &Domain) -> Vec<f64> {
    let n = norm(theta);
    if n <= dom.radius {
        return theta.to_vec();
    }
    let s = dom.radius / n;
    theta.iter().map(|x| x * s).collect()
}

/// Minimizes `‖V̂^{1/4}(θ' - θ)‖` over the ball, where `V̂ = diag(v_hat)`.
///
/// The stationarity condition gives `θ_i = w_i θ'_i / (w_i + μ)` with
/// `w_i = sqrt(v_hat_i)`; the multiplier `μ >= 0` is found by bisection on
/// `‖θ(μ)‖ = radius`. Zero-weight coordinates do not enter the objective and
/// collapse to zero once `μ > 0`.
pub fn project_weighted_ball(theta_raw: &[f64], v_hat: &[f64], dom: &Domain) -> Result<Vec<f64>> {
    project_weighted_ball_with_multiplier(theta_raw, v_hat, dom).map(|(theta, _)| theta)
}

/// Same as [`project_weighted_ball`], also returning the multiplier `μ`.
pub fn project_weighted_ball_with_multiplier(
    theta_raw: &[f64],
    v_hat: &[f64],
    dom: &Domain,
) -> Result<(Vec<f64>, f64)> {
    if theta_raw.len() != v_hat.len() {
        return Err(Error::Shape(format!(
            "projection: theta has {} entries, v_hat has {}",
            theta_raw.len(),
            v_hat.len()
        )));
    }
    if v_hat.iter().any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(
            "v_hat must be entrywise >= 0".into(),
        ));
    }
    if theta_raw.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("projection input"));
    }
    let radius = dom.radius;
    if norm(theta_raw) <= radius {
        return Ok((theta_raw.to_vec(), 0.0));
    }

    let w: Vec<f64> = v_hat.iter().map(|v| v.sqrt()).collect();
    let weighted_sq: f64 = theta_raw
        .iter()
        .zip(&w)
        .filter(|(_, wi)| **wi > 0.0)
        .map(|(x, _)| x * x)
        .sum();

    // The weighted coordinates alone fit in the ball: they keep their value
    // at zero cost and the unweighted remainder is shrunk radially into the
    // leftover room, which is the closest point among the minimizers.
    if weighted_sq <= radius * radius {
        let free_sq: f64 = theta_raw
            .iter()
            .zip(&w)
            .filter(|(_, wi)| **wi == 0.0)
            .map(|(x, _)| x * x)
            .sum();
        let room = (radius * radius - weighted_sq).max(0.0).sqrt();
        let s = if free_sq > 0.0 {
            room / free_sq.sqrt()
        } else {
            0.0
        };
        let theta = theta_raw
            .iter()
            .zip(&w)
            .map(|(x, wi)| if *wi > 0.0 { *x } else { x * s })
            .collect();
        return Ok((theta, 0.0));
    }

    let at = |mu: f64| -> Vec<f64> {
        theta_raw
            .iter()
            .zip(&w)
            .map(|(x, wi)| if *wi > 0.0 { wi * x / (wi + mu) } else { 0.0 })
            .collect()
    };

    // ‖θ(μ)‖ <= w_max/(w_max + μ)·‖θ'‖, so this μ is feasible.
    let w_max = w.iter().cloned().fold(0.0, f64::max);
    let mut hi = w_max * (weighted_sq.sqrt() / radius - 1.0);
    let mut lo = 0.0;
    let mut theta_hi = at(hi);
    let mut residual = radius - norm(&theta_hi);
    for _ in 0..PROJECTION_MAX_ITER {
        if residual.abs() <= PROJECTION_RTOL * radius {
            return Ok((theta_hi, hi));
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let theta_mid = at(mid);
        let n = norm(&theta_mid);
        if n > radius {
            lo = mid;
        } else {
            hi = mid;
            theta_hi = theta_mid;
            residual = radius - n;
        }
    }
    if residual.abs() <= PROJECTION_RTOL * radius {
        return Ok((theta_hi, hi));
    }
    Err(Error::NoConvergence {
        what: "weighted ball projection",
        iterations: PROJECTION_MAX_ITER,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weighted_obj(raw: &[f64], v: &[f64], th: &[f64]) -> f64 {
        raw.iter()
            .zip(v)
            .zip(th)
            .map(|((r, v), t)| v.sqrt() * (r - t) * (r - t))
            .sum()
    }

    #[test]
    fn feasible_point_is_returned_exactly() {
        let dom = Domain::new(2.0).unwrap();
        let x = [0.3, -1.1, 0.7];
        assert_eq!(
            project_weighted_ball(&x, &[1.0, 2.0, 0.5], &dom).unwrap(),
            x.to_vec()
        );
    }

    #[test]
    fn scalar_symmetric_case() {
        let dom = Domain::new(1.0).unwrap();
        let p = project_weighted_ball(&[2.0], &[1.0], &dom).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_dimensional_instance_matches_circle_scan() {
        let dom = Domain::new(1.0).unwrap();
        let raw = [2.0, 2.0];
        let v = [4.0, 1.0];
        let (p, mu) = project_weighted_ball_with_multiplier(&raw, &v, &dom).unwrap();
        assert!(
            (p[0] - 0.845).abs() < 1e-3 && (p[1] - 0.535).abs() < 1e-3,
            "{p:?}"
        );
        assert!((mu - 2.736).abs() < 1e-3, "mu = {mu}");
        assert!((norm(&p) - 1.0).abs() <= 1e-12);

        // dense scan of the boundary circle
        let n = 2_000_000;
        let best = (0..n)
            .map(|k| {
                let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                weighted_obj(&raw, &v, &[a.cos(), a.sin()])
            })
            .fold(f64::INFINITY, f64::min);
        assert!(weighted_obj(&raw, &v, &p) <= best + 1e-9);
    }

    #[test]
    fn zero_weight_coordinates_shrink_to_zero() {
        let dom = Domain::new(1.0).unwrap();
        let p = project_weighted_ball(&[3.0, 5.0], &[1.0, 0.0], &dom).unwrap();
        assert!((p[0] - 1.0).abs() < 1e-12);
        assert_eq!(p[1], 0.0);
    }

    #[test]
    fn zero_weight_coordinates_fill_leftover_room() {
        let dom = Domain::new(1.0).unwrap();
        let p = project_weighted_ball(&[0.6, 5.0], &[1.0, 0.0], &dom).unwrap();
        assert_eq!(p[0], 0.6);
        assert!((p[1] - 0.8).abs() < 1e-12);
        assert!((norm(&p) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let dom = Domain::new(1.0).unwrap();
        assert!(matches!(
            project_weighted_ball(&[1.0, 2.0], &[1.0], &dom),
            Err(Error::Shape(_))
        ));
        assert!(project_weighted_ball(&[1.0], &[-1.0], &dom).is_err());
        assert!(project_weighted_ball(&[f64::NAN], &[1.0], &dom).is_err());
    }

    #[test]
    fn euclidean_projection_is_radial() {
        let dom = Domain::new(1.0).unwrap();
        assert_eq!(project_ball(&[0.0, 3.0], &dom), vec![0.0, 1.0]);
    }
}
