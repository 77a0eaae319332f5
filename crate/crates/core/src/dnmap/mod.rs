//! Rational splitting of the Dirichlet-to-Neumann map, its `P_±` blocks, the
//! raw aggregates `𝓜` and `𝓝`, and thin-junction diagnostics.
//!
//! Sign convention: the polar part is `Σ c_s c_sᵀ/(λ - λ_s)` with `c_s` the
//! outward normal current of `φ_s` projected on the channel modes. With this
//! sign the DN map is decreasing in `λ` on the real axis and its imaginary
//! part is negative in the upper half-plane.

pub mod exact;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ChannelSet, Junction};
use crate::linalg::{c, det, diag, eye, linspace, op_norm, singular_values, solve, CMat};
use crate::spectral::EigenData;

pub use exact::RectangleDn;

/// One eigenvalue together with its full channel current vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Pole {
    pub lambda: f64,
    pub current: Vec<f64>,
}

impl Pole {
    fn dyad(&self, z: C64) -> CMat {
        let n = self.current.len();
        let w = C64::new(1.0, 0.0) / (z - self.lambda);
        CMat::from_fn(n, n, |i, j| w * (self.current[i] * self.current[j]))
    }
}

fn polar_sum(poles: &[Pole], z: C64, dim: usize) -> CMat {
    let mut out = CMat::zeros(dim, dim);
    for p in poles {
        out += p.dyad(z);
    }
    out
}

/// How the regular remainder `𝓚^Δ` is evaluated.
#[derive(Clone, Debug)]
pub enum Regular {
    /// Sum over the tail poles up to the cutoff.
    PoleSum,
    /// Exact rectangle DN map minus the polar part on `Δ`.
    Exact(Arc<RectangleDn>),
}

#[derive(Clone, Debug)]
pub struct RationalDN {
    pub lo: f64,
    pub hi: f64,
    pub lambda_cut: f64,
    pub l_max: usize,
    pub n_leads: usize,
    pub poles: Vec<Pole>,
    pub tail: Vec<Pole>,
    pub regular: Regular,
    /// Samples of `𝓚^Δ` on small circles around the distinct poles in `Δ`
    /// (exact mode only).
    contours: Vec<Contour>,
}

#[derive(Clone, Debug)]
struct Contour {
    center: f64,
    radius: f64,
    samples: Vec<(C64, CMat)>,
}

const CONTOUR_POINTS: usize = 64;

/// The four `P_±` blocks of a channel matrix.
#[derive(Clone, Debug)]
pub struct Blocks {
    pub pp: CMat,
    pub pm: CMat,
    pub mp: CMat,
    pub mm: CMat,
}

pub fn split_dn(data: &EigenData, delta: (f64, f64), lambda_cut: f64, l_max: usize) -> Result<RationalDN> {
    split_with(data, delta, lambda_cut, l_max, Regular::PoleSum)
}

/// Rectangle split with the exact regular part.
pub fn split_rectangle(junction: &Junction, delta: (f64, f64), lambda_cut: f64, l_max: usize) -> Result<RationalDN> {
    let data = EigenData::rectangle(junction, lambda_cut.max(delta.1 + 1.0), l_max);
    let exact = Arc::new(RectangleDn::new(junction, l_max));
    split_with(&data, delta, lambda_cut, l_max, Regular::Exact(exact))
}

pub fn split_with(
    data: &EigenData,
    delta: (f64, f64),
    lambda_cut: f64,
    l_max: usize,
    regular: Regular,
) -> Result<RationalDN> {
    let (lo, hi) = delta;
    if !(lo < hi) {
        return Err(Error::Input(format!("empty interval [{lo}, {hi}]")));
    }
    if !(lambda_cut > hi) {
        return Err(Error::Input(format!("cutoff {lambda_cut} must exceed {hi}")));
    }
    if l_max < 2 || l_max > data.currents.l_max {
        return Err(Error::Input(format!(
            "l_max {l_max} must be in [2, {}] for this data",
            data.currents.l_max
        )));
    }
    let currents = data.currents.truncated(l_max);
    let mut poles = Vec::new();
    let mut tail = Vec::new();
    for (s, &lambda) in data.lambdas.iter().enumerate() {
        let tol = 1e-12 * lambda.abs().max(1.0);
        if (lambda - lo).abs() <= tol || (lambda - hi).abs() <= tol {
            return Err(Error::Split(lambda));
        }
        let pole = Pole { lambda, current: currents.full(s) };
        if lambda > lo && lambda < hi {
            poles.push(pole);
        } else if lambda <= lambda_cut {
            tail.push(pole);
        }
    }
    let mut contours = Vec::new();
    if let Regular::Exact(ex) = &regular {
        let spectrum = ex.spectrum(hi + 50.0);
        let mut centers: Vec<f64> = Vec::new();
        for p in &poles {
            if !centers.iter().any(|&l| (l - p.lambda).abs() < 1e-9) {
                centers.push(p.lambda);
            }
        }
        for center in centers {
            let gap = spectrum
                .iter()
                .filter(|&&e| (e - center).abs() > 1e-9)
                .map(|&e| (e - center).abs())
                .fold(f64::INFINITY, f64::min);
            let radius = (0.5 * gap).min(0.5);
            let samples = (0..CONTOUR_POINTS)
                .into_par_iter()
                .map(|i| {
                    let w = C64::from_polar(radius, 2.0 * PI * (i as f64 + 0.5) / CONTOUR_POINTS as f64);
                    let zeta = w + center;
                    let polar = polar_sum(&poles, zeta, currents.n_leads * l_max);
                    (w, ex.eval(zeta) - polar)
                })
                .collect();
            contours.push(Contour { center, radius, samples });
        }
    }
    Ok(RationalDN { lo, hi, lambda_cut, l_max, n_leads: currents.n_leads, poles, tail, regular, contours })
}

impl RationalDN {
    pub fn dim(&self) -> usize {
        self.n_leads * self.l_max
    }

    pub fn open_index(&self, m: usize) -> usize {
        m * self.l_max
    }

    pub fn closed_indices(&self) -> Vec<usize> {
        (0..self.n_leads).flat_map(|m| (1..self.l_max).map(move |l| m * self.l_max + l)).collect()
    }

    fn check_pole(&self, z: C64) -> Result<()> {
        if z.im != 0.0 {
            return Ok(());
        }
        let hit = |p: &Pole| (z.re - p.lambda).abs() <= 1e-13 * p.lambda.abs().max(1.0);
        if let Some(i) = self.poles.iter().position(hit) {
            return Err(Error::Pole { lambda: z.re, index: i });
        }
        if let Some(i) = self.tail.iter().position(hit) {
            return Err(Error::Pole { lambda: z.re, index: self.poles.len() + i });
        }
        Ok(())
    }

    /// Polar part `DN^Δ(z) = Σ_{λ_s∈Δ} c_s c_sᵀ/(z - λ_s)`.
    pub fn polar(&self, z: C64) -> CMat {
        polar_sum(&self.poles, z, self.dim())
    }

    /// Regular part `𝓚^Δ(z)`, analytic across `Δ`.
    pub fn regular_part(&self, z: C64) -> CMat {
        match &self.regular {
            Regular::PoleSum => {
                let mut out = CMat::zeros(self.dim(), self.dim());
                for p in &self.tail {
                    out += p.dyad(z);
                }
                out
            }
            Regular::Exact(ex) => {
                for ct in &self.contours {
                    if (z - ct.center).norm() < 0.5 * ct.radius {
                        return self.cauchy(ct, z);
                    }
                }
                ex.eval(z) - self.polar(z)
            }
        }
    }

    fn cauchy(&self, ct: &Contour, z: C64) -> CMat {
        let k = ct.samples.len() as f64;
        let mut acc = CMat::zeros(self.dim(), self.dim());
        for (w, f) in &ct.samples {
            acc += f * (w / (w + ct.center - z) / k);
        }
        acc
    }

    pub fn full(&self, z: C64) -> Result<CMat> {
        self.check_pole(z)?;
        Ok(self.polar(z) + self.regular_part(z))
    }

    pub fn frame(&self, full: &CMat) -> Blocks {
        frame(full, self.n_leads, self.l_max)
    }

    pub fn blocks(&self, z: C64) -> Result<Blocks> {
        Ok(self.frame(&self.full(z)?))
    }

    pub fn regular_blocks(&self, z: C64) -> Blocks {
        self.frame(&self.regular_part(z))
    }
}

/// Splits a full channel matrix (index `m * l_max + l - 1`) into `P_±` blocks.
pub fn frame(full: &CMat, n_leads: usize, l_max: usize) -> Blocks {
    let open: Vec<usize> = (0..n_leads).map(|m| m * l_max).collect();
    let closed: Vec<usize> = (0..n_leads).flat_map(|m| (1..l_max).map(move |l| m * l_max + l)).collect();
    let pick = |rows: &[usize], cols: &[usize]| CMat::from_fn(rows.len(), cols.len(), |i, j| full[(rows[i], cols[j])]);
    Blocks {
        pp: pick(&open, &open),
        pm: pick(&open, &closed),
        mp: pick(&closed, &open),
        mm: pick(&closed, &closed),
    }
}

/// Result of a framed aggregate with the conditioning of its denominator.
#[derive(Clone, Debug)]
pub struct Aggregate {
    pub matrix: CMat,
    pub condition: f64,
}

fn condition(m: &CMat) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// `𝓜 = DN_{++} - DN_{+-}(DN_{--} + K_-)^{-1}DN_{-+}`.
pub fn aggregate_m_raw(blocks: &Blocks, k_minus: &[C64], lambda: f64) -> Result<Aggregate> {
    let den = &blocks.mm + diag(k_minus);
    let x = solve(&den, &blocks.mp).ok_or(Error::DenominatorSingular(lambda))?;
    Ok(Aggregate { matrix: &blocks.pp - &blocks.pm * x, condition: condition(&den) })
}

/// `𝓝 = ND_{++} - ND_{+-}K_-(I + ND_{--}K_-)^{-1}ND_{-+}`.
pub fn aggregate_n_raw(blocks: &Blocks, k_minus: &[C64], lambda: f64) -> Result<Aggregate> {
    let k = diag(k_minus);
    let den = eye(k_minus.len()) + &blocks.mm * &k;
    let x = solve(&den, &blocks.mp).ok_or(Error::NeumannThinViolated(lambda))?;
    Ok(Aggregate { matrix: &blocks.pp - &blocks.pm * k * x, condition: condition(&den) })
}

/// Raw `𝓜` straight from a split DN map at a real or complex energy.
pub fn m_raw(rdn: &RationalDN, channels: &ChannelSet, z: C64) -> Result<CMat> {
    let blocks = rdn.blocks(z)?;
    Ok(aggregate_m_raw(&blocks, &channels.k_minus_c(z), z.re)?.matrix)
}

#[derive(Clone, Debug, Serialize)]
pub struct ThinnessReport {
    /// `sup_Δ ‖K_-^{-1} 𝓚^Δ_{--}‖`.
    pub sup_norm: f64,
    pub thin: bool,
    /// `sup_Δ ‖(𝓚^Δ_{--} + K_-)^{-1}‖`.
    pub sup_inverse_norm: f64,
    /// `inf_Δ σ_min(𝓚^Δ_{--} + K_-)`.
    pub min_singular: f64,
    pub zero_set: Vec<f64>,
}

pub fn thinness_report(rdn: &RationalDN, channels: &ChannelSet, points: usize) -> Result<ThinnessReport> {
    let grid = linspace(rdn.lo, rdn.hi, points.max(2));
    let mut sup_norm: f64 = 0.0;
    let mut sup_inv: f64 = 0.0;
    let mut min_sing = f64::INFINITY;
    for &l in &grid {
        let z = c(l);
        let km = channels.k_minus(l)?;
        let reg = rdn.regular_blocks(z);
        let kinv = diag(&km.iter().map(|&k| c(1.0 / k)).collect::<Vec<_>>());
        sup_norm = sup_norm.max(op_norm(&(kinv * &reg.mm)));
        let den = &reg.mm + diag(&km.iter().map(|&k| c(k)).collect::<Vec<_>>());
        let s = singular_values(&den);
        if let Some(&smin) = s.last() {
            min_sing = min_sing.min(smin);
            sup_inv = sup_inv.max(1.0 / smin);
        }
    }
    let f = |l: f64| -> Option<f64> {
        if rdn.poles.iter().any(|p| (p.lambda - l).abs() < 1e-9) {
            return None;
        }
        let z = c(l);
        let km: Vec<C64> = channels.k_minus(l).ok()?.into_iter().map(c).collect();
        let reg = rdn.regular_blocks(z);
        let dn = rdn.frame(&rdn.polar(z));
        let den = &reg.mm + diag(&km);
        let x = solve(&den, &dn.mm)?;
        Some(det(&(eye(km.len()) + x)).re)
    };
    let mut zero_set = Vec::new();
    if !rdn.poles.is_empty() {
        let vals: Vec<Option<f64>> = grid.iter().map(|&l| f(l)).collect();
        for i in 0..grid.len() - 1 {
            let (a, b) = (grid[i], grid[i + 1]);
            if rdn.poles.iter().any(|p| p.lambda >= a - 1e-9 && p.lambda <= b + 1e-9) {
                continue;
            }
            if let (Some(fa), Some(fb)) = (vals[i], vals[i + 1]) {
                if fa == 0.0 {
                    zero_set.push(a);
                } else if fa * fb < 0.0 {
                    let (mut x0, mut x1, mut f0) = (a, b, fa);
                    for _ in 0..200 {
                        let xm = 0.5 * (x0 + x1);
                        let fm = f(xm).unwrap_or(0.0);
                        if fm == 0.0 || (x1 - x0) < 1e-13 {
                            x0 = xm;
                            x1 = xm;
                            break;
                        }
                        if f0 * fm < 0.0 {
                            x1 = xm;
                        } else {
                            x0 = xm;
                            f0 = fm;
                        }
                    }
                    zero_set.push(0.5 * (x0 + x1));
                }
            }
        }
    }
    Ok(ThinnessReport { sup_norm, thin: sup_norm < 1.0, sup_inverse_norm: sup_inv, min_singular: min_sing, zero_set })
}
