//! Vertex conditions on a one-dimensional star graph: Datta-Das Sarma
//! projections, boundary conditions read off a scattering matrix, and the
//! symmetric-junction parameter.
//!
//! Conditions are stored as a pair `(A, B)` acting on the vertex values and
//! outward derivatives: `A ψ(0) + B ψ'(0) = 0`. For the Ansatz
//! `ψ(0) = (I + S)e`, `ψ'(0) = iK(I - S)e` this gives
//! `S = -(A - iBK)^{-1}(A + iBK)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{c, diag, eye, max_abs, orthonormal_columns, singular_values, solve, CMat};
use crate::smatrix::{Provenance, SMatrix};

#[derive(Clone, Debug)]
pub struct VertexConditions {
    pub a: CMat,
    pub b: CMat,
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn row(v: &[f64]) -> CMat {
    CMat::from_fn(1, v.len(), |_, j| c(v[j]))
}

/// Rows spanning the orthogonal complement of `v`.
fn complement_rows(v: &[f64]) -> CMat {
    let u = unit(v);
    let n = u.len();
    let proj = eye(n) - CMat::from_fn(n, n, |i, j| c(u[i] * u[j]));
    orthonormal_columns(&proj, 1e-12).transpose()
}

fn stack(top: CMat, bottom: CMat) -> CMat {
    let n = top.ncols().max(bottom.ncols());
    let mut out = CMat::zeros(top.nrows() + bottom.nrows(), n);
    out.rows_mut(0, top.nrows()).copy_from(&top);
    out.rows_mut(top.nrows(), bottom.nrows()).copy_from(&bottom);
    out
}

impl VertexConditions {
    /// `ψ(0) ∥ v` and `⟨v, ψ'(0)⟩ = 0`.
    pub fn value_parallel(v: &[f64]) -> Self {
        let n = v.len();
        let perp = complement_rows(v);
        let a = stack(perp, CMat::zeros(1, n));
        let b = stack(CMat::zeros(n - 1, n), row(&unit(v)));
        VertexConditions { a, b }
    }

    /// `⟨v, ψ(0)⟩ = 0` and `ψ'(0) ∥ v`.
    pub fn derivative_parallel(v: &[f64]) -> Self {
        let n = v.len();
        let perp = complement_rows(v);
        let a = stack(row(&unit(v)), CMat::zeros(n - 1, n));
        let b = stack(CMat::zeros(1, n), perp);
        VertexConditions { a, b }
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    /// Rank of `[A B]`; equal to the number of leads for a Lagrangian plane.
    pub fn rank(&self) -> usize {
        let n = self.dim();
        let mut ab = CMat::zeros(self.a.nrows(), 2 * n);
        ab.columns_mut(0, n).copy_from(&self.a);
        ab.columns_mut(n, n).copy_from(&self.b);
        let s = singular_values(&ab);
        let top = s.first().copied().unwrap_or(0.0);
        s.iter().filter(|&&x| x > 1e-12 * top).count()
    }

    pub fn smatrix(&self, k_plus: &[f64], lambda: f64) -> Result<SMatrix> {
        let ik = diag(&k_plus.iter().map(|&k| C64::new(0.0, k)).collect::<Vec<_>>());
        let bk = &self.b * ik;
        let s = solve(&(&self.a - &bk), &(&self.a + &bk)).ok_or(Error::SMatrixSingular(lambda))?;
        Ok(SMatrix::new(lambda, -s, Provenance::Datta))
    }

    /// Largest residual of the conditions on the Ansatz columns `e_j`.
    pub fn residual(&self, s: &CMat, k_plus: &[f64]) -> f64 {
        let n = s.nrows();
        let ik = diag(&k_plus.iter().map(|&k| C64::new(0.0, k)).collect::<Vec<_>>());
        let values = eye(n) + s;
        let derivs = ik * (eye(n) - s);
        max_abs(&(&self.a * values + &self.b * derivs))
    }
}

/// Datta-Das Sarma vertex with weight vector `(1, β, 1)`.
#[derive(Clone, Debug, Serialize)]
pub struct DattaVertex {
    pub beta: f64,
    pub weights: Vec<f64>,
    #[serde(serialize_with = "ser_real")]
    pub p: CMat,
    /// Scattering matrix of the conditions `P_β⊥ψ = 0`, `P_βψ' = 0`.
    #[serde(serialize_with = "ser_real")]
    pub s: CMat,
}

fn ser_real<S: serde::Serializer>(m: &CMat, ser: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect();
    serde::Serialize::serialize(&rows, ser)
}

/// `P_β` from `(1, β, 1, …, 1)` on `m` leads; the T-junction vertex is `m = 3`.
pub fn datta_projection(beta: f64, m: usize) -> DattaVertex {
    let mut w = vec![1.0; m.max(2)];
    w[1] = beta;
    datta_from_weights(beta, &w)
}

pub fn datta_from_weights(beta: f64, weights: &[f64]) -> DattaVertex {
    let u = unit(weights);
    let n = u.len();
    let p = CMat::from_fn(n, n, |i, j| c(u[i] * u[j]));
    let s = &p * c(2.0) - eye(n);
    DattaVertex { beta, weights: weights.to_vec(), p, s }
}

impl DattaVertex {
    /// `I - 2P_β`, the constant matrix as usually quoted; it belongs to the
    /// swapped conditions `P_βψ = 0`, `P_β⊥ψ' = 0`.
    pub fn s_printed(&self) -> CMat {
        eye(self.p.nrows()) - &self.p * c(2.0)
    }

    pub fn conditions(&self) -> VertexConditions {
        VertexConditions::value_parallel(&self.weights)
    }
}

/// `β = -2/γ`, making `(1, β, 1)` orthogonal to `(1, γ, 1)`.
pub fn fit_symmetric_beta(gamma: f64) -> Result<f64> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::DegenerateSymmetry);
    }
    Ok(-2.0 / gamma)
}

/// Resonance directions of the symmetric junction.
pub fn symmetric_directions(gamma: f64) -> ([f64; 3], [f64; 3]) {
    let r2 = 2f64.sqrt();
    let ns = (2.0 + gamma * gamma).sqrt();
    ([1.0 / r2, 0.0, -1.0 / r2], [1.0 / ns, gamma / ns, 1.0 / ns])
}

/// `S = P⊥ + θ_a P_a + θ_s P_s` with
/// `θ = (ip(λ - λ₂^Q) - α²)/(ip(λ - λ₂^Q) + α²)`.
pub fn symmetric_model_smatrix(lambda: f64, alpha_a: f64, alpha_s: f64, gamma: f64, lambda_q: f64, p: f64) -> SMatrix {
    let (ea, es) = symmetric_directions(gamma);
    let theta = |a2: f64| crate::smatrix::blaschke_theta(lambda, lambda_q, a2, p);
    let pa = CMat::from_fn(3, 3, |i, j| c(ea[i] * ea[j]));
    let ps = CMat::from_fn(3, 3, |i, j| c(es[i] * es[j]));
    let s = eye(3) - &pa - &ps + pa * theta(alpha_a * alpha_a) + ps * theta(alpha_s * alpha_s);
    SMatrix::new(lambda, s, Provenance::JumpStart)
}
