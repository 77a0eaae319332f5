//! Single-lead scalar model in the wave-number variable `p`: few-pole
//! scattering matrix, resonances, Blaschke factorization and the split into
//! the resonant pair and the complementary factor.
//!
//! `S(p) = (ip - F(p))/(ip + F(p))` with
//! `F(p) = k + β² Σ_s w_s/(p² - k_s²)` and `w_s = (1 + α_s⁴) q_s`,
//! `α_s² = k_s² + threshold`. The resonances are the `2N + 1` roots of
//! `ip + F(p)`; they come in pairs `k_{-s} = -k̄_s` plus one background root
//! on the imaginary axis.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalarModel {
    /// Renormalized pole positions `k_s > 0`.
    pub k_s: Vec<f64>,
    /// `q_s = |⟨e, e_s⟩|²`; uniform `1/N` when omitted.
    #[serde(default)]
    pub q: Vec<f64>,
    pub beta: f64,
    /// Regular constant `k ≥ 0`.
    pub k: f64,
    /// `π²/δ² + V`, so that `α_s² = k_s² + threshold`.
    #[serde(default)]
    pub threshold: f64,
}

impl ScalarModel {
    pub fn new(k_s: Vec<f64>, q: Option<Vec<f64>>, beta: f64, k: f64, threshold: f64) -> Result<Self> {
        let n = k_s.len();
        let q = q.unwrap_or_else(|| vec![1.0 / n.max(1) as f64; n]);
        let m = ScalarModel { k_s, q, beta, k, threshold };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q.len() != self.k_s.len() {
            return Err(Error::Input("q and k_s differ in length".into()));
        }
        if self.k_s.iter().any(|&k| !(k > 0.0)) || self.beta < 0.0 || self.k < 0.0 {
            return Err(Error::Input("scalar model needs k_s > 0, β ≥ 0, k ≥ 0".into()));
        }
        if self.q.iter().any(|&q| !(0.0..=1.0).contains(&q)) || self.q.iter().sum::<f64>() > 1.0 + 1e-12 {
            return Err(Error::Input("weights q_s must lie in [0, 1] and sum to at most 1".into()));
        }
        for i in 0..self.k_s.len() {
            for j in i + 1..self.k_s.len() {
                if (self.k_s[i] - self.k_s[j]).abs() <= 1e-12 * self.k_s[i].max(self.k_s[j]) {
                    return Err(Error::DegenerateCollision(i, j));
                }
            }
        }
        Ok(())
    }

    /// Fill in uniform weights after deserialization.
    pub fn with_defaults(mut self) -> Result<Self> {
        if self.q.is_empty() && !self.k_s.is_empty() {
            self.q = vec![1.0 / self.k_s.len() as f64; self.k_s.len()];
        }
        self.validate()?;
        Ok(self)
    }

    pub fn weights(&self) -> Vec<f64> {
        self.k_s
            .iter()
            .zip(&self.q)
            .map(|(&k, &q)| {
                let a2 = k * k + self.threshold;
                (1.0 + a2 * a2) * q
            })
            .collect()
    }

    pub fn with_beta(&self, beta: f64) -> Self {
        ScalarModel { beta, ..self.clone() }
    }

    fn krein_sum(&self, p: C64, skip: Option<usize>) -> C64 {
        let w = self.weights();
        let mut acc = C64::new(0.0, 0.0);
        for (s, (&ks, ws)) in self.k_s.iter().zip(w).enumerate() {
            if Some(s) != skip {
                acc += ws / (p * p - ks * ks);
            }
        }
        acc * self.beta * self.beta
    }

    /// `F(p)`.
    pub fn symbol(&self, p: C64) -> C64 {
        self.krein_sum(p, None) + self.k
    }

    /// `ip + F(p)` and its derivative.
    fn denominator(&self, p: C64) -> (C64, C64) {
        let w = self.weights();
        let mut f = I * p + self.k;
        let mut df = I;
        let b2 = self.beta * self.beta;
        for (&ks, ws) in self.k_s.iter().zip(w) {
            let den = p * p - ks * ks;
            f += b2 * ws / den;
            df -= b2 * ws * 2.0 * p / (den * den);
        }
        (f, df)
    }
}

pub fn scalar_smatrix(model: &ScalarModel, p: C64) -> Result<C64> {
    for (s, &ks) in model.k_s.iter().enumerate() {
        if model.beta != 0.0 && ((p * p) - ks * ks).norm() == 0.0 {
            return Err(Error::Pole { lambda: p.re, index: s });
        }
    }
    let f = model.symbol(p);
    let den = I * p + f;
    if den.norm() == 0.0 {
        return Err(Error::Pole { lambda: p.re, index: usize::MAX });
    }
    Ok((I * p - f) / den)
}

#[derive(Clone, Debug, Serialize)]
pub struct Resonance {
    /// Signed origin: `s + 1` for `+k_s`, `-(s + 1)` for `-k_s`, `0` for
    /// the background root.
    pub origin: i64,
    pub k: C64,
    /// `|ip + F(p)|` at the root.
    pub residual: f64,
    /// Residual of the fixed-point equation seeded at `±k_s`.
    pub disp_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResonanceSet {
    pub beta: f64,
    pub resonances: Vec<Resonance>,
    pub symmetry_defect: f64,
    pub continued: bool,
}

impl ResonanceSet {
    pub fn roots(&self) -> Vec<C64> {
        self.resonances.iter().map(|r| r.k).collect()
    }

    pub fn by_origin(&self, origin: i64) -> Option<C64> {
        self.resonances.iter().find(|r| r.origin == origin).map(|r| r.k)
    }
}

/// Right-hand side of `p = σk_s - β²w_s/((p + σk_s)(ip + k + β²Σ_{t≠s}…))`.
fn disp_map(model: &ScalarModel, s: usize, sigma: f64, p: C64) -> C64 {
    let ks = sigma * model.k_s[s];
    let ws = model.weights()[s];
    let rest = I * p + model.k + model.krein_sum(p, Some(s));
    ks - model.beta * model.beta * ws / ((p + ks) * rest)
}

fn newton(model: &ScalarModel, mut p: C64) -> Option<C64> {
    for _ in 0..100 {
        let (f, df) = model.denominator(p);
        if df.norm() == 0.0 {
            return None;
        }
        let step = f / df;
        p -= step;
        if !(p.re.is_finite() && p.im.is_finite()) {
            return None;
        }
        if step.norm() <= 1e-15 * p.norm().max(1.0) {
            break;
        }
    }
    Some(p)
}

fn fixed_point(model: &ScalarModel, s: usize, sigma: f64, seed: C64) -> Option<C64> {
    let mut p = seed;
    let mut last = f64::INFINITY;
    for _ in 0..500 {
        let next = disp_map(model, s, sigma, p);
        let step = (next - p).norm();
        if !step.is_finite() || (step > last && step > 1e-12) {
            return None;
        }
        p = next;
        if step <= 1e-15 * p.norm().max(1.0) {
            return Some(p);
        }
        last = step;
    }
    None
}

fn solve_one(model: &ScalarModel, s: usize, sigma: f64) -> Result<(C64, bool)> {
    let seed = C64::new(sigma * model.k_s[s], 0.0);
    if model.beta == 0.0 {
        return Ok((seed, false));
    }
    if let Some(p) = fixed_point(model, s, sigma, seed).and_then(|p| newton(model, p)) {
        return Ok((p, false));
    }
    let target = model.beta;
    let mut p = seed;
    for j in 0..10 {
        let b = target / 10.0 * 10f64.powf(j as f64 / 9.0);
        let m = model.with_beta(b);
        p = fixed_point(&m, s, sigma, p)
            .and_then(|x| newton(&m, x))
            .or_else(|| newton(&m, p))
            .ok_or_else(|| Error::Continuation(format!("no convergence for k_{s} at β = {b:e}")))?;
    }
    Ok((p, true))
}

/// All `2N + 1` roots of `ip + F(p)`.
pub fn solve_resonances(model: &ScalarModel) -> Result<ResonanceSet> {
    model.validate()?;
    let n = model.k_s.len();
    let jobs: Vec<(usize, f64)> = (0..n).flat_map(|s| [(s, 1.0), (s, -1.0)]).collect();
    let found: Vec<Result<(C64, bool)>> = jobs.par_iter().map(|&(s, sig)| solve_one(model, s, sig)).collect();
    let mut resonances = Vec::with_capacity(2 * n + 1);
    let mut continued = false;
    let mut sum = C64::new(0.0, 0.0);
    for (&(s, sig), r) in jobs.iter().zip(found) {
        let (p, c) = r?;
        continued |= c;
        sum += p;
        let origin = if sig > 0.0 { s as i64 + 1 } else { -(s as i64 + 1) };
        let disp_residual = (p - disp_map(model, s, sig, p)).norm();
        resonances.push(Resonance { origin, k: p, residual: model.denominator(p).0.norm(), disp_residual });
    }
    // The roots of `(ip + k)Π(p² - k_s²) + β²Σ…` sum to `ik`.
    let background = newton(model, I * model.k - sum).ok_or_else(|| Error::Continuation("background root".into()))?;
    resonances.push(Resonance {
        origin: 0,
        k: background,
        residual: model.denominator(background).0.norm(),
        disp_residual: 0.0,
    });
    let scale = model.k_s.iter().cloned().fold(model.k.max(1.0), f64::max);
    for i in 0..resonances.len() {
        for j in i + 1..resonances.len() {
            if (resonances[i].k - resonances[j].k).norm() < 1e-9 * scale {
                return Err(Error::DegenerateCollision(i, j));
            }
        }
    }
    let mut symmetry_defect: f64 = 0.0;
    for s in 1..=n as i64 {
        let (a, b) = (resonances.iter().find(|r| r.origin == s).unwrap().k, resonances.iter().find(|r| r.origin == -s).unwrap().k);
        symmetry_defect = symmetry_defect.max((b + a.conj()).norm());
    }
    Ok(ResonanceSet { beta: model.beta, resonances, symmetry_defect, continued })
}

/// `Π_j (p - k̄_j)/(p - k_j)` over the roots of the denominator.
pub fn blaschke_product(set: &ResonanceSet, p: C64) -> C64 {
    set.resonances.iter().map(|r| (p - r.k.conj()) / (p - r.k)).product()
}

/// Resonant factor of the pair `(k_{s0}, -k̄_{s0})` and the complementary
/// factor over all remaining roots.
pub fn factor_split(set: &ResonanceSet, s0: usize, p: C64) -> Result<(C64, C64)> {
    let origin = s0 as i64 + 1;
    let mut resonant = C64::new(1.0, 0.0);
    let mut analytic = C64::new(1.0, 0.0);
    let mut hits = 0;
    for r in &set.resonances {
        let f = (p - r.k.conj()) / (p - r.k);
        if r.origin.abs() == origin {
            resonant *= f;
            hits += 1;
        } else {
            analytic *= f;
        }
    }
    if hits != 2 {
        return Err(Error::Input(format!("no resonance pair with index {s0}")));
    }
    Ok((resonant, analytic))
}
