use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of random box points checked when computing the feature normalizer.
pub const NORMALIZER_PROBES: usize = 10_000;

/// Discrete-time LQR: `x' = Ax + Bu`, stage cost `xᵀQx + uᵀRu + 2xᵀNu`.
#[derive(Debug, Clone, PartialEq)]
pub struct LqrModel {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub q: DMatrix<f64>,
    pub r: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub gamma: f64,
}

impl LqrModel {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        n: DMatrix<f64>,
        gamma: f64,
    ) -> Result<Self> {
        let model = Self {
            a,
            b,
            q,
            r,
            n,
            gamma,
        };
        model.validate().map_err(Error::Validation)?;
        Ok(model)
    }

    /// Scalar model `x' = a x + b u`, cost `q x² + r u²`.
    pub fn scalar(a: f64, b: f64, q: f64, r: f64, gamma: f64) -> Result<Self> {
        let m = |v| DMatrix::from_element(1, 1, v);
        Self::new(m(a), m(b), m(q), m(r), m(0.0), gamma)
    }

    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn action_dim(&self) -> usize {
        self.b.ncols()
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut errs = Vec::new();
        let (n, m) = (self.a.nrows(), self.b.ncols());
        if self.a.ncols() != n {
            errs.push(format!("A must be square, got {}x{}", n, self.a.ncols()));
        }
        if self.b.nrows() != n {
            errs.push(format!("B must have {n} rows, got {}", self.b.nrows()));
        }
        if self.q.shape() != (n, n) {
            errs.push(format!("Q must be {n}x{n}"));
        }
        if self.r.shape() != (m, m) {
            errs.push(format!("R must be {m}x{m}"));
        }
        if self.n.shape() != (n, m) {
            errs.push(format!("N must be {n}x{m}"));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            errs.push(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        if errs.is_empty() {
            if (&self.q - self.q.transpose()).amax() > 1e-12 {
                errs.push("Q must be symmetric".into());
            }
            if (&self.r - self.r.transpose()).amax() > 1e-12 {
                errs.push("R must be symmetric".into());
            } else if self.r.clone().cholesky().is_none() {
                errs.push("R must be positive definite".into());
            }
            if self
                .q
                .clone()
                .symmetric_eigenvalues()
                .iter()
                .any(|l| *l < -1e-12)
            {
                errs.push("Q must be positive semidefinite".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    /// Stage cost `xᵀQx + uᵀRu + 2xᵀNu`.
    pub fn cost(&self, x: &DVector<f64>, u: &DVector<f64>) -> f64 {
        (x.transpose() * &self.q * x)[0]
            + (u.transpose() * &self.r * u)[0]
            + 2.0 * (x.transpose() * &self.n * u)[0]
    }
}

/// Optional Gaussian process noise on the LQR transition.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProcessNoise {
    pub std: f64,
}

/// One transition; returns `(x', cost)`.
pub fn lqr_step(
    model: &LqrModel,
    x: &DVector<f64>,
    u: &DVector<f64>,
    noise: Option<(ProcessNoise, &mut dyn rand::RngCore)>,
) -> Result<(DVector<f64>, f64)> {
    if x.len() != model.state_dim() || u.len() != model.action_dim() {
        return Err(Error::Shape(format!(
            "x has {} entries, u has {}; model expects {} and {}",
            x.len(),
            u.len(),
            model.state_dim(),
            model.action_dim()
        )));
    }
    let mut next = &model.a * x + &model.b * u;
    if let Some((pn, rng)) = noise {
        if pn.std > 0.0 {
            for v in next.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *v += pn.std * z;
            }
        }
    }
    Ok((next, model.cost(x, u)))
}

/// Normalized quadratic features of `z = [x; u]`.
///
/// The raw feature vector lists `z_i z_j` for `i <= j` in row-major upper
/// triangle order, with off-diagonal products doubled, so that
/// `raw(z)ᵀ vech(H) = zᵀHz` for symmetric `H`. Inputs are clipped to the box
/// `|z_i| <= z_max` and the result is divided by `c_phi`, the largest raw
/// norm over the box, which keeps every feature vector inside the unit ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadFeatureMap {
    pub n: usize,
    pub m: usize,
    pub z_max: f64,
    pub c_phi: f64,
}

impl QuadFeatureMap {
    pub fn new(n: usize, m: usize, z_max: f64) -> Result<Self> {
        if n == 0 || m == 0 || !(z_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "feature map needs n, m >= 1 and z_max > 0 (got {n}, {m}, {z_max})"
            )));
        }
        let mut map = Self {
            n,
            m,
            z_max,
            c_phi: 1.0,
        };
        map.c_phi = map.box_sup_norm();
        Ok(map)
    }

    /// Feature map with an explicit normalizer.
    pub fn with_normalizer(n: usize, m: usize, z_max: f64, c_phi: f64) -> Result<Self> {
        if !(c_phi > 0.0) {
            return Err(Error::InvalidArgument("c_phi must be positive".into()));
        }
        Ok(Self { n, m, z_max, c_phi })
    }

    pub fn z_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn dim(&self) -> usize {
        let k = self.z_dim();
        k * (k + 1) / 2
    }

    /// Clips every entry of `z` to `[-z_max, z_max]`.
    pub fn clip(&self, z: &mut [f64]) {
        for v in z.iter_mut() {
            *v = v.clamp(-self.z_max, self.z_max);
        }
    }

    /// Unnormalized monomials of an (unclipped) `z`.
    pub fn raw(&self, z: &[f64]) -> Vec<f64> {
        let k = z.len();
        let mut out = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                let f = if i == j { 1.0 } else { 2.0 };
                out.push(f * z[i] * z[j]);
            }
        }
        out
    }

    pub fn features_z(&self, z: &[f64]) -> Vec<f64> {
        let mut zc = z.to_vec();
        self.clip(&mut zc);
        let mut phi = self.raw(&zc);
        for v in phi.iter_mut() {
            *v /= self.c_phi;
        }
        phi
    }

    /// Max raw-feature norm over the box: all corners plus random interior points.
    fn box_sup_norm(&self) -> f64 {
        let k = self.z_dim();
        let norm = |z: &[f64]| self.raw(z).iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut best = 0.0f64;
        if k < 24 {
            for mask in 0u32..(1 << k) {
                let z: Vec<f64> = (0..k)
                    .map(|i| {
                        if mask >> i & 1 == 1 {
                            self.z_max
                        } else {
                            -self.z_max
                        }
                    })
                    .collect();
                best = best.max(norm(&z));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_c0de);
        for _ in 0..NORMALIZER_PROBES {
            let z: Vec<f64> = (0..k)
                .map(|_| rng.random_range(-self.z_max..=self.z_max))
                .collect();
            best = best.max(norm(&z));
        }
        best
    }
}

/// Quadratic features `φ(x, u)`.
pub fn lqr_features(x: &[f64], u: &[f64], map: &QuadFeatureMap) -> Vec<f64> {
    let mut z = Vec::with_capacity(x.len() + u.len());
    z.extend_from_slice(x);
    z.extend_from_slice(u);
    map.features_z(&z)
}

/// Upper-triangle entries of a symmetric matrix, row-major.
pub fn vech(h: &DMatrix<f64>) -> Vec<f64> {
    let k = h.nrows();
    let mut out = Vec::with_capacity(k * (k + 1) / 2);
    for i in 0..k {
        for j in i..k {
            out.push(h[(i, j)]);
        }
    }
    out
}

/// Symmetric matrix from its upper triangle.
pub fn unvech(theta: &[f64], k: usize) -> Result<DMatrix<f64>> {
    if theta.len() != k * (k + 1) / 2 {
        return Err(Error::Shape(format!(
            "vech of a {k}x{k} matrix has {} entries, got {}",
            k * (k + 1) / 2,
            theta.len()
        )));
    }
    let mut h = DMatrix::zeros(k, k);
    let mut idx = 0;
    for i in 0..k {
        for j in i..k {
            h[(i, j)] = theta[idx];
            h[(j, i)] = theta[idx];
            idx += 1;
        }
    }
    Ok(h)
}

/// Blocks `(H_xx, H_xu, H_ux, H_uu)` of the matrix encoded by `theta`.
pub fn h_blocks(theta: &[f64], map: &QuadFeatureMap) -> Result<[DMatrix<f64>; 4]> {
    let h = unvech(theta, map.z_dim())?;
    let (n, m) = (map.n, map.m);
    Ok([
        h.view((0, 0), (n, n)).into_owned(),
        h.view((0, n), (n, m)).into_owned(),
        h.view((n, 0), (m, n)).into_owned(),
        h.view((n, n), (m, m)).into_owned(),
    ])
}

/// Greedy linear gain `K = H_uu⁻¹ H_ux`, so that `u = -Kx`.
pub fn policy_from_theta(theta: &[f64], map: &QuadFeatureMap) -> Result<DMatrix<f64>> {
    let [_, _, h_ux, h_uu] = h_blocks(theta, map)?;
    let chol = h_uu.cholesky().ok_or(Error::NotPositiveDefinite("H_uu"))?;
    Ok(chol.solve(&h_ux))
}
