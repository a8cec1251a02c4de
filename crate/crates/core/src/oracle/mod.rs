//! Model-based ground truth: the DARE fixed point and optimal LQR gain, value
//! iteration, the exact tabular `θ*`, expected TD gradients and the
//! strong-monotonicity constant `c`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::env::TabularMdp;
use crate::error::{Error, Result};
use crate::optim::Domain;
use crate::param::{dot, norm, ParamVector};

pub const DARE_TOL: f64 = 1e-12;
pub const DARE_MAX_ITER: usize = 100_000;
pub const VI_MAX_ITER: usize = 1_000_000;
pub const C_PROBES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct DareSolution {
    pub p: DMatrix<f64>,
    pub k_star: DMatrix<f64>,
    /// `‖P_{k+1} - P_k‖_F` at the last iteration.
    pub residual: f64,
    pub iterations: usize,
}

/// `(√γA, √γB)`: the discounted problem is the undiscounted one on these.
fn discounted(model: &crate::env::LqrModel) -> (DMatrix<f64>, DMatrix<f64>) {
    let s = model.gamma.sqrt();
    (&model.a * s, &model.b * s)
}

/// One application of the Riccati map to `P`, plus the gain it induces.
pub fn dare_map(
    model: &crate::env::LqrModel,
    p: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let (a, b) = discounted(model);
    let at_p = a.transpose() * p;
    let bt_p = b.transpose() * p;
    let s = &model.r + &bt_p * &b;
    let cross = &bt_p * &a + model.n.transpose();
    let k = s
        .clone()
        .lu()
        .solve(&cross)
        .ok_or(Error::Singular("R + BᵀPB"))?;
    let next = &at_p * &a - cross.transpose() * &k + &model.q;
    // symmetrize to stop round-off drift
    let next = (&next + next.transpose()) * 0.5;
    Ok((next, k))
}

/// Fixed-point iteration of the Riccati map from `P₀ = Q`.
pub fn solve_dare(model: &crate::env::LqrModel, tol: f64, max_iter: usize) -> Result<DareSolution> {
    let mut p = model.q.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        let (next, _) = dare_map(model, &p)?;
        residual = (&next - &p).norm();
        if !residual.is_finite() {
            break;
        }
        p = next;
        if residual <= tol {
            let (_, k_star) = dare_map(model, &p)?;
            return Ok(DareSolution {
                p,
                k_star,
                residual,
                iterations: it,
            });
        }
    }
    Err(Error::NoConvergence {
        what: "DARE fixed-point iteration",
        iterations: max_iter,
        residual,
    })
}

/// Optimal quadratic Q-matrix `H*` for a DARE solution `P`.
///
/// `Q*(x, u) = [x; u]ᵀ H* [x; u]` with
/// `H* = [[Q + γAᵀPA, N + γAᵀPB], [Nᵀ + γBᵀPA, R + γBᵀPB]]`.
pub fn lqr_h_star(model: &crate::env::LqrModel, p: &DMatrix<f64>) -> DMatrix<f64> {
    let (a, b) = discounted(model);
    let (n, m) = (model.state_dim(), model.action_dim());
    let mut h = DMatrix::zeros(n + m, n + m);
    h.view_mut((0, 0), (n, n))
        .copy_from(&(&model.q + a.transpose() * p * &a));
    let xu = &model.n + a.transpose() * p * &b;
    h.view_mut((0, n), (n, m)).copy_from(&xu);
    h.view_mut((n, 0), (m, n)).copy_from(&xu.transpose());
    h.view_mut((n, n), (m, m))
        .copy_from(&(&model.r + b.transpose() * p * &b));
    h
}

/// Largest eigenvalue modulus.
pub fn spectral_radius(m: &DMatrix<f64>) -> f64 {
    m.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Spectral norm `‖M‖₂`.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// Tabular optimum from value iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalQ {
    pub n_states: usize,
    pub n_actions: usize,
    /// `Q*(s, a)` row-major as `[s][a]`.
    pub q: Vec<f64>,
    /// `J*(s) = max_a Q*(s, a)`.
    pub v: Vec<f64>,
    /// Greedy action per state, lowest index on ties.
    pub policy: Vec<usize>,
    /// Sup-norm Bellman residual of `q`.
    pub residual: f64,
    pub iterations: usize,
}

impl OptimalQ {
    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }
}

fn bellman_apply(mdp: &TabularMdp, v: &[f64]) -> Vec<f64> {
    let mut q = Vec::with_capacity(mdp.n_pairs());
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            q.push(mdp.reward(s, a) + mdp.gamma * dot(mdp.row(s, a), v));
        }
    }
    q
}

fn greedy_values(q: &[f64], n_states: usize, n_actions: usize) -> (Vec<f64>, Vec<usize>) {
    let mut v = Vec::with_capacity(n_states);
    let mut pi = Vec::with_capacity(n_states);
    for s in 0..n_states {
        let row = &q[s * n_actions..(s + 1) * n_actions];
        let mut best = 0;
        for a in 1..n_actions {
            if row[a] > row[best] {
                best = a;
            }
        }
        v.push(row[best]);
        pi.push(best);
    }
    (v, pi)
}

/// `max_{s,a} |Q(s,a) - (R(s,a) + γ E max_{a'} Q(s',a'))|`.
pub fn bellman_residual(mdp: &TabularMdp, q: &[f64]) -> f64 {
    let (v, _) = greedy_values(q, mdp.n_states, mdp.n_actions);
    bellman_apply(mdp, &v)
        .iter()
        .zip(q)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

pub fn value_iteration(mdp: &TabularMdp, tol: f64) -> Result<OptimalQ> {
    value_iteration_from(mdp, tol, &vec![0.0; mdp.n_states])
}

/// Value iteration from an explicit initial `J₀`.
///
/// Stops once successive `Q` iterates differ by at most `tol·(1-γ)/γ` in sup
/// norm, which puts the Bellman residual of the returned table under `tol`.
pub fn value_iteration_from(mdp: &TabularMdp, tol: f64, v0: &[f64]) -> Result<OptimalQ> {
    if !(mdp.gamma < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "value iteration needs gamma < 1, got {}",
            mdp.gamma
        )));
    }
    if v0.len() != mdp.n_states {
        return Err(Error::Shape(format!(
            "J₀ has {} entries, expected {}",
            v0.len(),
            mdp.n_states
        )));
    }
    let stop = tol * (1.0 - mdp.gamma) / mdp.gamma.max(f64::MIN_POSITIVE);
    let mut v = v0.to_vec();
    let mut q = bellman_apply(mdp, &v);
    for it in 1..=VI_MAX_ITER {
        let (v_next, _) = greedy_values(&q, mdp.n_states, mdp.n_actions);
        let q_next = bellman_apply(mdp, &v_next);
        let diff = q_next
            .iter()
            .zip(&q)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = v_next;
        q = q_next;
        if diff <= stop {
            let (v, policy) = greedy_values(&q, mdp.n_states, mdp.n_actions);
            return Ok(OptimalQ {
                n_states: mdp.n_states,
                n_actions: mdp.n_actions,
                residual: bellman_residual(mdp, &q),
                q,
                v,
                policy,
                iterations: it,
            });
        }
    }
    let _ = v;
    Err(Error::NoConvergence {
        what: "value iteration",
        iterations: VI_MAX_ITER,
        residual: bellman_residual(mdp, &q),
    })
}

/// `θ*` under one-hot features: `Q*` flattened in `(s, a)` order.
pub fn theta_star_tabular(optimal: &OptimalQ) -> ParamVector {
    ParamVector(optimal.q.clone())
}

/// Exact mean TD gradient under uniform `(s, a)` sampling:
/// `ḡ(θ) = E[(θ_{sa} - R(s,a) - γ max_{a'} θ_{s'a'}) e_{sa}]`.
pub fn expected_gradient_exact(mdp: &TabularMdp, theta: &[f64]) -> Result<Vec<f64>> {
    if theta.len() != mdp.n_pairs() {
        return Err(Error::Shape(format!(
            "θ has {} entries, expected {}",
            theta.len(),
            mdp.n_pairs()
        )));
    }
    let (v, _) = greedy_values(theta, mdp.n_states, mdp.n_actions);
    let w = 1.0 / mdp.n_pairs() as f64;
    let mut g = vec![0.0; mdp.n_pairs()];
    for s in 0..mdp.n_states {
        for a in 0..mdp.n_actions {
            let i = mdp.pair_index(s, a);
            let mut e = 0.0;
            for (sp, p) in mdp.row(s, a).iter().enumerate() {
                e += p * (theta[i] - mdp.reward(s, a) - mdp.gamma * v[sp]);
            }
            g[i] = w * e;
        }
    }
    Ok(g)
}

/// Monte-Carlo mean of single-sample TD gradients.
pub fn expected_gradient(
    mdp: &TabularMdp,
    theta: &[f64],
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be >= 1".into()));
    }
    if theta.len() != mdp.n_pairs() {
        return Err(Error::Shape(format!(
            "θ has {} entries, expected {}",
            theta.len(),
            mdp.n_pairs()
        )));
    }
    let (v, _) = greedy_values(theta, mdp.n_states, mdp.n_actions);
    let mut g = vec![0.0; mdp.n_pairs()];
    for _ in 0..n_samples {
        let e = crate::env::sample_iid(mdp, rng);
        let i = mdp.pair_index(e.s, e.a);
        g[i] += theta[i] - e.r - mdp.gamma * v[e.s_next];
    }
    for x in g.iter_mut() {
        *x /= n_samples as f64;
    }
    Ok(g)
}

fn random_direction(d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let u: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
        let n = norm(&u);
        if n > 1e-12 {
            return u.into_iter().map(|x| x / n).collect();
        }
    }
}

/// `min (θ - θ*)ᵀḡ(θ) / ‖θ - θ*‖²` over probe points.
///
/// Even-numbered probes are uniform in the ball, odd ones sit on random rays
/// through `θ*` at a uniform distance up to the domain diameter. Probes that
/// coincide with `θ*` are skipped. A non-positive result means the
/// monotonicity condition fails on this instance.
pub fn estimate_c(
    mdp: &TabularMdp,
    theta_star: &[f64],
    dom: &Domain,
    n_probes: usize,
    rng: &mut impl Rng,
) -> Result<f64> {
    let d = mdp.n_pairs();
    if theta_star.len() != d {
        return Err(Error::Shape(format!(
            "θ* has {} entries, expected {d}",
            theta_star.len()
        )));
    }
    let mut best = f64::INFINITY;
    for i in 0..n_probes {
        let dir = random_direction(d, rng);
        let u: f64 = rng.random();
        let theta: Vec<f64> = if i % 2 == 0 {
            let rad = dom.radius * u.powf(1.0 / d as f64);
            dir.iter().map(|x| x * rad).collect()
        } else {
            let len = dom.diameter() * u;
            theta_star
                .iter()
                .zip(&dir)
                .map(|(t, x)| t + len * x)
                .collect()
        };
        let diff: Vec<f64> = theta.iter().zip(theta_star).map(|(a, b)| a - b).collect();
        let dd = dot(&diff, &diff);
        if dd <= 1e-24 {
            continue;
        }
        let g = expected_gradient_exact(mdp, &theta)?;
        best = best.min(dot(&diff, &g) / dd);
    }
    Ok(best)
}
