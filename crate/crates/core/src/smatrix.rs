//! Scattering matrices of the junction: exact Möbius forms in `𝓜` and `𝓝`,
//! evanescent amplitudes, the polar approximation with its correction
//! factors, jump-start forms and the low-temperature (Datta) limit.

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::dnmap::Blocks;
use crate::error::{Error, Result};
use crate::intermediate::{IntermediateDN, IntermediateEigenvalue};
use crate::linalg::{c, diag, eye, frob, solve, unitarity_defect, CMat};
use crate::tjunction::{delta_q, psi12_printed, psi21_printed, ALPHA, BETA};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ExactM,
    ExactN,
    Approx,
    JumpStart,
    Datta,
    Model,
}

#[derive(Clone, Debug)]
pub struct SMatrix {
    pub lambda: f64,
    pub s: CMat,
    /// Closed-channel amplitudes, one column per incoming open channel.
    pub evanescent: Option<CMat>,
    pub provenance: Provenance,
}

impl SMatrix {
    pub fn new(lambda: f64, s: CMat, provenance: Provenance) -> Self {
        SMatrix { lambda, s, evanescent: None, provenance }
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.s)
    }

    /// `|S_ij|²`.
    pub fn transmissions(&self) -> Vec<Vec<f64>> {
        (0..self.s.nrows()).map(|i| (0..self.s.ncols()).map(|j| self.s[(i, j)].norm_sqr()).collect()).collect()
    }
}

fn ik(k_plus: &[f64]) -> CMat {
    diag(&k_plus.iter().map(|&k| C64::new(0.0, k)).collect::<Vec<_>>())
}

/// Solves `(iK_+ + 𝓜) S = iK_+ - 𝓜` and certifies the residual.
pub fn mobius(k_plus: &[f64], m: &CMat, lambda: f64) -> Result<CMat> {
    let ik = ik(k_plus);
    let lhs = &ik + m;
    let rhs = &ik - m;
    let s = solve(&lhs, &rhs).ok_or(Error::SMatrixSingular(lambda))?;
    if frob(&(&lhs * &s - &rhs)) > 1e-10 * frob(&rhs).max(1.0) {
        return Err(Error::SMatrixSingular(lambda));
    }
    Ok(s)
}

pub fn smatrix_exact(m: &CMat, k_plus: &[f64], lambda: f64) -> Result<SMatrix> {
    Ok(SMatrix::new(lambda, mobius(k_plus, m, lambda)?, Provenance::ExactM))
}

/// `S = [𝓝 iK_+ + 1]^{-1}[𝓝 iK_+ - 1]`.
pub fn smatrix_from_n(n: &CMat, k_plus: &[f64], lambda: f64) -> Result<SMatrix> {
    let nk = n * ik(k_plus);
    let one = eye(n.nrows());
    let lhs = &nk + &one;
    let rhs = &nk - &one;
    let s = solve(&lhs, &rhs).ok_or(Error::SMatrixSingular(lambda))?;
    if frob(&(&lhs * &s - &rhs)) > 1e-10 * frob(&rhs).max(1.0) {
        return Err(Error::SMatrixSingular(lambda));
    }
    Ok(SMatrix::new(lambda, s, Provenance::ExactN))
}

/// Closed-channel amplitudes `s = -(DN_{--} + K_-)^{-1} DN_{-+}(I + S)`.
pub fn evanescent_amplitudes(blocks: &Blocks, k_minus: &[f64], s: &CMat, lambda: f64) -> Result<CMat> {
    let den = &blocks.mm + diag(&k_minus.iter().map(|&k| c(k)).collect::<Vec<_>>());
    let rhs = -(&blocks.mp * (eye(s.nrows()) + s));
    solve(&den, &rhs).ok_or(Error::DenominatorSingular(lambda))
}

/// Largest residual of both lines of the matching system.
pub fn matching_residual(blocks: &Blocks, k_plus: &[f64], k_minus: &[f64], s: &CMat, ev: &CMat) -> f64 {
    let one = eye(s.nrows());
    let km = diag(&k_minus.iter().map(|&k| c(k)).collect::<Vec<_>>());
    let open = &blocks.pp * (&one + s) + &blocks.pm * ev - ik(k_plus) * (&one - s);
    let closed = &blocks.mp * (&one + s) + &blocks.mm * ev + km * ev;
    crate::linalg::max_abs(&open).max(crate::linalg::max_abs(&closed))
}

/// Exact scattering matrix of the split DN map, with evanescent amplitudes.
pub fn smatrix_pipeline(idn: &IntermediateDN, lambda: f64) -> Result<SMatrix> {
    let kp = idn.channels.k_plus(lambda)?;
    let km = idn.channels.k_minus(lambda)?;
    let m = match idn.compensated_m(c(lambda)) {
        Ok(m) => m,
        Err(Error::IntermediatePole(_)) => return Err(Error::IntermediatePole(lambda)),
        Err(e) => return Err(e),
    };
    let mut out = smatrix_exact(&m, &kp, lambda)?;
    if let Ok(blocks) = idn.rdn.blocks(c(lambda)) {
        out.evanescent = Some(evanescent_amplitudes(&blocks, &km, &out.s, lambda)?);
    }
    Ok(out)
}

/// Rational polar part `𝓜^Δ(λ) = Σ_r ψ_r ψ_rᵀ/(λ - λ_r^Q)`.
pub fn polar_m(eigen: &[IntermediateEigenvalue], lambda: C64, dim: usize) -> CMat {
    let mut out = CMat::zeros(dim, dim);
    for e in eigen {
        let w = c(1.0) / (lambda - e.lambda);
        for v in &e.currents {
            for i in 0..dim {
                for j in 0..dim {
                    out[(i, j)] += w * (v[i] * v[j]);
                }
            }
        }
    }
    out
}

/// The polar approximation and the two factors that turn it into the exact
/// matrix: `S = left · S_approx · right`.
#[derive(Clone, Debug)]
pub struct ApproxFactors {
    pub approx: SMatrix,
    pub left: CMat,
    pub right: CMat,
    pub exact: CMat,
}

pub fn smatrix_approx(idn: &IntermediateDN, eigen: &[IntermediateEigenvalue], lambda: f64) -> Result<ApproxFactors> {
    let kp = idn.channels.k_plus(lambda)?;
    let m = idn.compensated_m(c(lambda))?;
    approx_from_parts(&m, &polar_m(eigen, c(lambda), kp.len()), &kp, lambda)
}

pub fn approx_from_parts(m: &CMat, m_delta: &CMat, k_plus: &[f64], lambda: f64) -> Result<ApproxFactors> {
    let ik = ik(k_plus);
    let rest = m - m_delta;
    let s_approx = mobius(k_plus, m_delta, lambda)?;
    let one = eye(m.nrows());
    let a = solve(&(&ik + m_delta), &rest).ok_or(Error::SMatrixSingular(lambda))?;
    let left = crate::linalg::inverse(&(&one + a)).ok_or(Error::SMatrixSingular(lambda))?;
    let b = solve(&(&ik - m_delta), &rest).ok_or(Error::SMatrixSingular(lambda))?;
    let right = &one - b;
    let exact = mobius(k_plus, m, lambda)?;
    Ok(ApproxFactors { approx: SMatrix::new(lambda, s_approx, Provenance::Approx), left, right, exact })
}

/// `Θ = (ip(λ - λ₁) - α²)/(ip(λ - λ₁) + α²)`.
pub fn blaschke_theta(lambda: f64, lambda1: f64, alpha2: f64, p: f64) -> C64 {
    let x = C64::new(0.0, p * (lambda - lambda1));
    (x - alpha2) / (x + alpha2)
}

fn projector(v: &[f64]) -> CMat {
    let n2: f64 = v.iter().map(|x| x * x).sum();
    CMat::from_fn(v.len(), v.len(), |i, j| c(v[i] * v[j] / n2))
}

/// `S = P₁⊥ + Θ P₁` with `P₁` along `ψ` and `α² = |ψ|²`.
pub fn jump_start_blaschke(lambda: f64, lambda1: f64, psi: &[f64], p: f64) -> SMatrix {
    let alpha2: f64 = psi.iter().map(|x| x * x).sum();
    let pr = projector(psi);
    let s = eye(psi.len()) - &pr + pr * blaschke_theta(lambda, lambda1, alpha2, p);
    SMatrix::new(lambda, s, Provenance::JumpStart)
}

/// Scalar jump-start factor with the regular term kept:
/// `(ip(λ-λ₁) - k(λ-λ₁) - α²)/(ip(λ-λ₁) + k(λ-λ₁) + α²)`.
pub fn theta_with_k(lambda: f64, lambda1: f64, alpha2: f64, p: f64, k: f64) -> C64 {
    let x = lambda - lambda1;
    let num = C64::new(-k * x - alpha2, p * x);
    let den = C64::new(k * x + alpha2, p * x);
    num / den
}

/// Jump-start matrix `[iK + k + Σ_r ψ_rψ_rᵀ/(λ-λ_r)]^{-1}[iK - …]`.
pub fn jump_start(lambda: f64, k_plus: &[f64], poles: &[(f64, Vec<f64>)], k: &CMat) -> Result<SMatrix> {
    if let Some(index) = poles.iter().position(|(l, _)| *l == lambda) {
        return Err(Error::Pole { lambda, index });
    }
    let mut sym = k.clone();
    for (l, v) in poles {
        sym += projector(v) * c(v.iter().map(|x| x * x).sum::<f64>() / (lambda - l));
    }
    Ok(SMatrix::new(lambda, mobius(k_plus, &sym, lambda)?, Provenance::JumpStart))
}

/// `𝓚^Δ_{++} + α₁² P₁/(λ - λ₁^Q)` with the shift from the closed channels.
#[derive(Clone, Debug)]
pub struct ThinM {
    pub m: CMat,
    pub lambda_q: f64,
    pub alpha: f64,
}

pub fn m_thin(lambda: f64, lambda1: f64, open: &[f64], closed: &[f64], k_minus: &[f64], k_pp: &CMat) -> ThinM {
    let shift: f64 = closed.iter().zip(k_minus).map(|(c, k)| c * c / k).sum();
    let lambda_q = lambda1 - shift;
    let alpha2: f64 = open.iter().map(|x| x * x).sum();
    let m = k_pp + projector(open) * c(alpha2 / (lambda - lambda_q));
    ThinM { m, lambda_q, alpha: alpha2.sqrt() }
}

/// The printed three-lead jump-start matrix of the asymmetric junction,
/// in the normalized open-channel basis.
pub fn example4_m(lambda: f64) -> CMat {
    let s = std::f64::consts::PI.sqrt() / 2.0;
    let rows = [psi12_printed().map(|x| s * x), psi21_printed().map(|x| s * x)];
    let nrm = ALPHA * ALPHA + BETA * BETA;
    let p5 = [[BETA * BETA / nrm, BETA * ALPHA / nrm], [BETA * ALPHA / nrm, ALPHA * ALPHA / nrm]];
    let pd = [[ALPHA * ALPHA / nrm, -ALPHA * BETA / nrm], [-ALPHA * BETA / nrm, BETA * BETA / nrm]];
    let dq = delta_q(lambda);
    let mut m = CMat::zeros(3, 3);
    m[(2, 2)] = c(4.0 / (lambda - 8.0));
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let w = p5[a][b] / (lambda - 5.0) + pd[a][b] / (lambda - 5.0 + dq);
                    acc += rows[a][i] * w * rows[b][j];
                }
            }
            m[(i, j)] += c(acc);
        }
    }
    m
}

pub fn smatrix_example4(lambda: f64) -> Result<SMatrix> {
    if !(lambda > 4.0 && lambda < 16.0) {
        return Err(Error::Threshold(lambda));
    }
    let p = (lambda - 4.0).sqrt();
    let s = mobius(&[p; 3], &example4_m(lambda), lambda)?;
    Ok(SMatrix::new(lambda, s, Provenance::JumpStart))
}

/// `S = P₁⊥ - P₁` inside the window `|λ - λ₁| < α₁²/p`.
pub fn datta_limit(lambda: f64, lambda1: f64, psi: &[f64], p: f64) -> Result<SMatrix> {
    let alpha2: f64 = psi.iter().map(|x| x * x).sum();
    let half_width = alpha2 / p;
    if (lambda - lambda1).abs() >= half_width {
        return Err(Error::Window { lambda, half_width });
    }
    let pr = projector(psi);
    let s = eye(psi.len()) - pr * c(2.0);
    Ok(SMatrix::new(lambda, s, Provenance::Datta))
}
