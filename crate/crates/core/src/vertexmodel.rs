//! Solvable star-graph model fitted to the intermediate eigenvalues: the map
//! `Φ_Δ`, its Gram factorization, the boundary parameters `β₀₀`, `β₀₁` and the
//! model scattering matrix.
//!
//! The inner space is identified with the intermediate eigenbasis, so
//! `A = diag(α_r²)` with `α_r² = λ_r^Q`. With `β₀₀ = k_M - β₀₁Q†AQβ₁₀` the
//! model symbol `β₀₀ + β₀₁𝓜(λ)β₁₀` reduces to
//! `k_M + Σ_r ψ_rψ_rᵀ/(λ - λ_r^Q)`.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extension::{make_setup_unchecked, DeficiencySetup, InnerHamiltonian};
use crate::geometry::ChannelSet;
use crate::intermediate::{IntermediateDN, IntermediateEigenvalue};
use crate::linalg::{c, diag, eye, frob, op_norm, solve, CMat};
use crate::smatrix::{mobius, Provenance, SMatrix};

const RANK_TOL: f64 = 1e-12;

/// One intermediate eigenvalue with one residue current.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoleDatum {
    pub lambda: f64,
    pub current: Vec<f64>,
}

/// Flattens eigenvalues of higher multiplicity into rank-one poles.
pub fn poles_from_eigen(eigen: &[IntermediateEigenvalue]) -> Vec<PoleDatum> {
    eigen
        .iter()
        .flat_map(|e| e.currents.iter().map(move |v| PoleDatum { lambda: e.lambda, current: v.clone() }))
        .collect()
}

#[derive(Clone, Debug)]
pub struct PhiMap {
    /// `n × N`, column `r` is `(1 + α_r⁴)^{-1/2} ψ_r`.
    pub phi: CMat,
    pub zero_columns: Vec<usize>,
    pub rank_deficient: bool,
}

pub fn build_phi_map(poles: &[PoleDatum], n_open: usize) -> PhiMap {
    let big_n = poles.len();
    let mut phi = CMat::zeros(n_open, big_n);
    let mut zero_columns = Vec::new();
    for (r, p) in poles.iter().enumerate() {
        let w = (1.0 + p.lambda * p.lambda).powf(-0.5);
        for i in 0..n_open {
            phi[(i, r)] = c(w * p.current[i]);
        }
        if p.current.iter().all(|&x| x == 0.0) {
            zero_columns.push(r);
        }
    }
    let rank = if big_n == 0 { 0 } else { rank_of(&phi) };
    PhiMap { phi, zero_columns, rank_deficient: rank < big_n }
}

fn rank_of(m: &CMat) -> usize {
    let s = crate::linalg::singular_values(m);
    let top = s.first().copied().unwrap_or(0.0);
    s.iter().filter(|&&x| top > 0.0 && x > RANK_TOL * top).count()
}

#[derive(Clone, Debug)]
pub struct GramFactor {
    /// `n × d`.
    pub beta01: CMat,
    /// `N × d`, orthonormal basis of `N_i`; `P_{N_i} = QQ†`.
    pub q: CMat,
    pub d: usize,
    /// `‖Φ - β₀₁Q†‖`.
    pub residual: f64,
}

/// `Φ = UΣV†`; `β₀₁ = U_dΣ_d`, `Q = V_d`.
pub fn gram_factorize(phi: &CMat) -> Result<GramFactor> {
    if phi.ncols() == 0 || phi.nrows() == 0 {
        return Err(Error::EmptyModel);
    }
    let svd = phi.clone().svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let sv = &svd.singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| top > 0.0 && sv[i] > RANK_TOL * top).collect();
    if keep.is_empty() {
        return Err(Error::EmptyModel);
    }
    let d = keep.len();
    let mut beta01 = CMat::zeros(phi.nrows(), d);
    let mut q = CMat::zeros(phi.ncols(), d);
    for (k, &i) in keep.iter().enumerate() {
        beta01.set_column(k, &(u.column(i) * c(sv[i])));
        q.set_column(k, &vt.row(i).adjoint());
    }
    let residual = frob(&(phi - &beta01 * q.adjoint()));
    Ok(GramFactor { beta01, q, d, residual })
}

#[derive(Clone, Debug)]
pub struct VertexModel {
    pub poles: Vec<PoleDatum>,
    pub inner: InnerHamiltonian,
    pub setup: Option<DeficiencySetup>,
    pub beta01: CMat,
    pub beta00: CMat,
    pub k_m: CMat,
    /// Energy at which `k_M = k(Λ)` was taken.
    pub lambda_ref: f64,
    pub gram_residual: f64,
    pub rank_deficient: bool,
}

impl VertexModel {
    pub fn fit(poles: &[PoleDatum], k_m: CMat, lambda_ref: f64) -> Result<Self> {
        let n = k_m.nrows();
        if poles.iter().any(|p| p.current.len() != n) {
            return Err(Error::Input("pole current length differs from the open dimension".into()));
        }
        let alpha2: Vec<f64> = poles.iter().map(|p| p.lambda).collect();
        let inner = InnerHamiltonian::diagonal(&alpha2);
        let phi = build_phi_map(poles, n);
        if poles.is_empty() {
            return Ok(VertexModel {
                poles: Vec::new(),
                inner,
                setup: None,
                beta01: CMat::zeros(n, 0),
                beta00: k_m.clone(),
                k_m,
                lambda_ref,
                gram_residual: 0.0,
                rank_deficient: false,
            });
        }
        let g = gram_factorize(&phi.phi)?;
        let setup = make_setup_unchecked(&inner, &g.q)?;
        if setup.overlap < 1e-10 {
            log::warn!("N_i and N_-i overlap (sine {:e}); the model symbol is still exact", setup.overlap);
        }
        let beta01 = &g.beta01 * (g.q.adjoint() * &setup.q);
        let beta00 = &k_m - &beta01 * setup.q.adjoint() * &inner.a * &setup.q * beta01.adjoint();
        Ok(VertexModel {
            poles: poles.to_vec(),
            inner,
            setup: Some(setup),
            beta01,
            beta00,
            k_m,
            lambda_ref,
            gram_residual: g.residual,
            rank_deficient: phi.rank_deficient,
        })
    }

    pub fn n_open(&self) -> usize {
        self.k_m.nrows()
    }

    pub fn d(&self) -> usize {
        self.beta01.ncols()
    }

    /// `β₀₀ + β₀₁𝓜(λ)β₁₀`.
    pub fn symbol(&self, z: C64) -> Result<CMat> {
        match &self.setup {
            None => Ok(self.beta00.clone()),
            Some(s) => Ok(&self.beta00 + &self.beta01 * s.weyl(z)? * self.beta01.adjoint()),
        }
    }

    /// `k_M + Σ_r ψ_rψ_rᵀ/(λ - λ_r)`, the fitted essential symbol.
    pub fn polar_symbol(&self, z: C64) -> Result<CMat> {
        let mut out = self.k_m.clone();
        for (r, p) in self.poles.iter().enumerate() {
            if (z - p.lambda).norm() == 0.0 {
                return Err(Error::Pole { lambda: z.re, index: r });
            }
            let w = c(1.0) / (z - p.lambda);
            let v = crate::linalg::complexify(&nalgebra::DMatrix::from_column_slice(p.current.len(), 1, &p.current));
            out += &v * v.transpose() * w;
        }
        Ok(out)
    }

    pub fn smatrix(&self, k_plus: &[f64], lambda: f64) -> Result<SMatrix> {
        let s = mobius(k_plus, &self.symbol(c(lambda))?, lambda)?;
        Ok(SMatrix::new(lambda, s, Provenance::Model))
    }

    /// Model S-matrix off the real axis, with `K_+` continued analytically.
    pub fn smatrix_c(&self, k_plus: &[C64], z: C64) -> Result<CMat> {
        let ik = diag(&k_plus.iter().map(|k| k * C64::new(0.0, 1.0)).collect::<Vec<_>>());
        let m = self.symbol(z)?;
        solve(&(&ik + &m), &(&ik - &m)).ok_or(Error::SMatrixSingular(z.re))
    }

    /// Matrix `Λ(λ)` of the vertex condition `U' = Λ(λ) U` on the leads.
    pub fn energy_dependent_bc(&self, lambda: f64) -> Result<CMat> {
        self.polar_symbol(c(lambda))
    }

    /// `max_λ ‖S_model - S_Δ‖` on the given energies.
    pub fn verify_fit(&self, channels: &ChannelSet, grid: &[f64]) -> Result<FitCheck> {
        let mut worst: f64 = 0.0;
        let mut symbol: f64 = 0.0;
        let mut at = f64::NAN;
        for &l in grid {
            let kp = channels.k_plus(l)?;
            let model = self.smatrix(&kp, l)?.s;
            let polar = self.polar_symbol(c(l))?;
            let ess = mobius(&kp, &polar, l)?;
            let defect = op_norm(&(model - ess));
            symbol = symbol.max(frob(&(self.symbol(c(l))? - polar)) / frob(&self.polar_symbol(c(l))?).max(1.0));
            if defect > worst || at.is_nan() {
                worst = defect.max(worst);
                at = l;
            }
        }
        Ok(FitCheck { max_defect: worst, at, symbol_defect: symbol, points: grid.len(), certified: worst < 1e-8 })
    }

    pub fn report(&self, check: Option<FitCheck>) -> ModelReport {
        let pairs = |m: &CMat| -> Vec<Vec<[f64; 2]>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
        };
        ModelReport {
            n: self.poles.len(),
            d: self.d(),
            alpha2: self.poles.iter().map(|p| p.lambda).collect(),
            currents: self.poles.iter().map(|p| p.current.clone()).collect(),
            beta01: pairs(&self.beta01),
            beta00: pairs(&self.beta00),
            k_m: pairs(&self.k_m),
            k_m_taken_at: self.lambda_ref,
            overlap: self.setup.as_ref().map(|s| s.overlap),
            non_overlap: self.setup.as_ref().map_or(true, |s| s.overlap >= 1e-10),
            rank_deficient: self.rank_deficient,
            gram_residual: self.gram_residual,
            fit: check,
        }
    }
}

/// Fit from the pipeline: poles from the intermediate eigenvalues and
/// `k_M = k(Λ)`.
pub fn fit_from_intermediate(idn: &IntermediateDN, eigen: &[IntermediateEigenvalue], lambda_ref: f64) -> Result<VertexModel> {
    let k = idn.k_regular(c(lambda_ref))?;
    let k = (&k + k.transpose()) * c(0.5);
    VertexModel::fit(&poles_from_eigen(eigen), k.map(|z| c(z.re)), lambda_ref)
}

#[derive(Clone, Debug, Serialize)]
pub struct FitCheck {
    pub max_defect: f64,
    pub at: f64,
    pub symbol_defect: f64,
    pub points: usize,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelReport {
    pub n: usize,
    pub d: usize,
    pub alpha2: Vec<f64>,
    pub currents: Vec<Vec<f64>>,
    pub beta01: Vec<Vec<[f64; 2]>>,
    pub beta00: Vec<Vec<[f64; 2]>>,
    pub k_m: Vec<Vec<[f64; 2]>>,
    pub k_m_taken_at: f64,
    pub overlap: Option<f64>,
    pub non_overlap: bool,
    pub rank_deficient: bool,
    pub gram_residual: f64,
    pub fit: Option<FitCheck>,
}

/// Residual of `U' = Λ(λ)U` for `U = I + S`, `U' = iK_+(I - S)`.
pub fn bc_residual(lam: &CMat, s: &CMat, k_plus: &[f64]) -> f64 {
    let n = s.nrows();
    let ik = diag(&k_plus.iter().map(|&k| C64::new(0.0, k)).collect::<Vec<_>>());
    crate::linalg::max_abs(&(ik * (eye(n) - s) - lam * (eye(n) + s)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_poles() -> Vec<PoleDatum> {
        vec![
            PoleDatum { lambda: 4.86, current: vec![0.3, -0.5, 0.2] },
            PoleDatum { lambda: 5.0, current: vec![0.1, 0.4, 0.6] },
        ]
    }

    fn k_m() -> CMat {
        CMat::from_fn(3, 3, |i, j| c(if i == j { -0.4 } else { 0.1 }))
    }

    #[test]
    fn single_pole_phi_is_weighted_current() {
        let p = vec![PoleDatum { lambda: 2.0, current: vec![1.0, 2.0] }];
        let phi = build_phi_map(&p, 2);
        assert!((phi.phi[(1, 0)].re - 2.0 / 5f64.sqrt()).abs() < 1e-15);
        let g = gram_factorize(&phi.phi).unwrap();
        assert_eq!(g.d, 1);
        assert!(g.residual < 1e-14);
    }

    #[test]
    fn zero_current_is_flagged() {
        let p = vec![PoleDatum { lambda: 2.0, current: vec![1.0, 2.0] }, PoleDatum { lambda: 3.0, current: vec![0.0, 0.0] }];
        let phi = build_phi_map(&p, 2);
        assert!(phi.rank_deficient);
        assert_eq!(phi.zero_columns, vec![1]);
        assert!(matches!(gram_factorize(&CMat::zeros(2, 1)), Err(Error::EmptyModel)));
    }

    #[test]
    fn symbol_matches_polar_form() {
        let m = VertexModel::fit(&two_poles(), k_m(), 5.0).unwrap();
        for &l in &[4.5, 4.9, 5.3, 6.0] {
            let a = m.symbol(c(l)).unwrap();
            let b = m.polar_symbol(c(l)).unwrap();
            assert!(frob(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn model_satisfies_its_vertex_condition() {
        let m = VertexModel::fit(&two_poles(), k_m(), 5.0).unwrap();
        let kp = [0.8; 3];
        for &l in &[4.7, 4.95, 5.2] {
            let s = m.smatrix(&kp, l).unwrap();
            assert!(s.unitarity_defect() < 1e-10, "{}", s.unitarity_defect());
            let lam = m.energy_dependent_bc(l).unwrap();
            assert!(bc_residual(&lam, &s.s, &kp) < 1e-10);
        }
    }

    #[test]
    fn no_poles_is_a_constant_model() {
        let m = VertexModel::fit(&[], k_m(), 5.0).unwrap();
        let kp = [1.0, 1.0, 1.0];
        let s = m.smatrix(&kp, 5.0).unwrap().s;
        let want = mobius(&kp, &k_m(), 5.0).unwrap();
        assert!(frob(&(s - want)) < 1e-15);
        let neumann = VertexModel::fit(&[], CMat::zeros(3, 3), 5.0).unwrap();
        assert!(frob(&neumann.energy_dependent_bc(5.0).unwrap()) == 0.0);
    }

    #[test]
    fn model_is_analytic_off_the_axis() {
        let m = VertexModel::fit(&two_poles(), k_m(), 5.0).unwrap();
        let kp = |z: C64| vec![(z - 4.0).sqrt(), (z - 4.2).sqrt(), (z - 3.9).sqrt()];
        let z = C64::new(5.4, 0.3);
        let h = 1e-5;
        let dx = (m.smatrix_c(&kp(z + h), z + h).unwrap() - m.smatrix_c(&kp(z - h), z - h).unwrap()) / c(2.0 * h);
        let ih = C64::new(0.0, h);
        let dy = (m.smatrix_c(&kp(z + ih), z + ih).unwrap() - m.smatrix_c(&kp(z - ih), z - ih).unwrap()) / c(2.0 * h);
        assert!(frob(&(dx * C64::new(0.0, 1.0) - dy)) < 1e-6);
    }
}
