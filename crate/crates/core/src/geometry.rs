//! Junction geometry: the rectangular well, its leads, the channel split and
//! the exponents `K_+`, `K_-`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Bottom,
    Top,
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Bottom => "bottom",
            Side::Top => "top",
            Side::Left => "left",
            Side::Right => "right",
        }
    }

    /// True for the sides parametrized by `x` (bottom and top).
    pub fn horizontal(self) -> bool {
        matches!(self, Side::Bottom | Side::Top)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WellSpec {
    pub a: f64,
    pub b: f64,
    #[serde(rename = "V", default)]
    pub v: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeadSpec {
    pub side: Side,
    pub offset: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionSpec {
    pub well: WellSpec,
    pub leads: Vec<LeadSpec>,
    #[serde(rename = "V_lead", default)]
    pub v_lead: f64,
}

impl JunctionSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("junction spec serializes")
    }
}

/// A validated lead. `start` and `end` are coordinates along the side: `x`
/// for bottom/top and `y` for left/right. The cross-section coordinate of the
/// lead is `t = s - start`, `t` in `[0, width]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Lead {
    pub side: Side,
    pub start: f64,
    pub width: f64,
}

impl Lead {
    pub fn end(&self) -> f64 {
        self.start + self.width
    }

    /// Normalized cross-section mode `sqrt(2/δ) sin(π l t/δ)`.
    pub fn mode(&self, l: usize, t: f64) -> f64 {
        (2.0 / self.width).sqrt() * (PI * l as f64 * t / self.width).sin()
    }

    pub fn threshold(&self, l: usize, v_lead: f64) -> f64 {
        let q = PI * l as f64 / self.width;
        q * q + v_lead
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Junction {
    pub a: f64,
    pub b: f64,
    pub v_well: f64,
    pub v_lead: f64,
    pub leads: Vec<Lead>,
    spec: JunctionSpec,
}

const EDGE_TOL: f64 = 1e-12;

pub fn build_junction(spec: JunctionSpec) -> Result<Junction> {
    let JunctionSpec { well, leads, v_lead } = spec.clone();
    if !(well.a > 0.0 && well.b > 0.0) || !well.a.is_finite() || !well.b.is_finite() {
        return Err(Error::Geometry(format!("well sides must be positive, got {} x {}", well.a, well.b)));
    }
    if leads.is_empty() {
        return Err(Error::Geometry("at least one lead is required".into()));
    }
    let mut out = Vec::with_capacity(leads.len());
    for (i, l) in leads.iter().enumerate() {
        let len = if l.side.horizontal() { well.a } else { well.b };
        if !(l.width > 0.0) || !l.width.is_finite() {
            return Err(Error::Geometry(format!("lead {i}: width must be positive")));
        }
        if l.width > len + EDGE_TOL {
            return Err(Error::Geometry(format!("lead {i}: width {} exceeds side length {len}", l.width)));
        }
        if l.offset < -EDGE_TOL || l.offset + l.width > len + EDGE_TOL {
            return Err(Error::Geometry(format!(
                "lead {i}: segment [{}, {}] leaves the {} side [0, {len}]",
                l.offset,
                l.offset + l.width,
                l.side.name()
            )));
        }
        out.push(Lead { side: l.side, start: l.offset, width: l.width });
    }
    for i in 0..out.len() {
        for j in i + 1..out.len() {
            let (p, q) = (&out[i], &out[j]);
            if p.side == q.side {
                let overlap = p.end().min(q.end()) - p.start.max(q.start);
                if overlap > EDGE_TOL {
                    return Err(Error::Geometry(format!("leads {i} and {j} overlap on the {} side", p.side.name())));
                }
            }
        }
    }
    Ok(Junction { a: well.a, b: well.b, v_well: well.v, v_lead, leads: out, spec })
}

impl Junction {
    pub fn from_json(text: &str) -> Result<Self> {
        build_junction(JunctionSpec::from_json(text)?)
    }

    pub fn spec(&self) -> &JunctionSpec {
        &self.spec
    }

    pub fn n_leads(&self) -> usize {
        self.leads.len()
    }

    /// Length of a side (the range of its own coordinate).
    pub fn side_length(&self, side: Side) -> f64 {
        if side.horizontal() {
            self.a
        } else {
            self.b
        }
    }
}

/// Channel thresholds `λ_l^m = π² l²/δ_m² + V_lead` for `l = 1..=l_max`.
///
/// Open channels are indexed by lead. Closed channels are indexed lead-major:
/// `m * (l_max - 1) + (l - 2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub l_max: usize,
    pub thresholds: Vec<Vec<f64>>,
}

pub fn thresholds(junction: &Junction, l_max: usize) -> Result<ChannelSet> {
    if l_max < 2 {
        return Err(Error::Input(format!("l_max must be at least 2, got {l_max}")));
    }
    let thresholds = junction
        .leads
        .iter()
        .map(|lead| (1..=l_max).map(|l| lead.threshold(l, junction.v_lead)).collect())
        .collect();
    Ok(ChannelSet { l_max, thresholds })
}

impl ChannelSet {
    pub fn n_leads(&self) -> usize {
        self.thresholds.len()
    }

    pub fn open_dim(&self) -> usize {
        self.n_leads()
    }

    pub fn closed_dim(&self) -> usize {
        self.n_leads() * (self.l_max - 1)
    }

    pub fn closed_index(&self, m: usize, l: usize) -> usize {
        debug_assert!(l >= 2 && l <= self.l_max);
        m * (self.l_max - 1) + (l - 2)
    }

    /// The interval on which every lead has exactly one open channel.
    pub fn first_band(&self) -> (f64, f64) {
        let lo = self.thresholds.iter().map(|t| t[0]).fold(f64::NEG_INFINITY, f64::max);
        let hi = self.thresholds.iter().map(|t| t[1]).fold(f64::INFINITY, f64::min);
        (lo, hi)
    }

    pub fn in_first_band(&self, lambda: f64) -> bool {
        let (lo, hi) = self.first_band();
        lambda > lo && lambda < hi
    }

    fn check(&self, lambda: f64) -> Result<()> {
        let near = self
            .thresholds
            .iter()
            .flatten()
            .any(|&t| (lambda - t).abs() <= 1e-12 * t.abs().max(1.0));
        if near || !self.in_first_band(lambda) {
            return Err(Error::Threshold(lambda));
        }
        Ok(())
    }

    /// Diagonal of `K_+`: `sqrt(λ - λ_1^m)` per lead.
    pub fn k_plus(&self, lambda: f64) -> Result<Vec<f64>> {
        self.check(lambda)?;
        Ok(self.thresholds.iter().map(|t| (lambda - t[0]).sqrt()).collect())
    }

    /// Diagonal of `K_-`: `sqrt(λ_l^m - λ)` for `l = 2..=l_max`.
    pub fn k_minus(&self, lambda: f64) -> Result<Vec<f64>> {
        self.check(lambda)?;
        Ok(self
            .thresholds
            .iter()
            .flat_map(|t| t[1..].iter().map(move |&tl| (tl - lambda).sqrt()))
            .collect())
    }

    /// Analytic continuation of `K_+` off the real axis (principal branch).
    pub fn k_plus_c(&self, z: C64) -> Vec<C64> {
        self.thresholds.iter().map(|t| (z - t[0]).sqrt()).collect()
    }

    pub fn k_minus_c(&self, z: C64) -> Vec<C64> {
        self.thresholds
            .iter()
            .flat_map(|t| t[1..].iter().map(move |&tl| (C64::new(tl, 0.0) - z).sqrt()))
            .collect()
    }
}

/// The essential spectral interval: a symmetric temperature window around
/// the scaled Fermi level, enclosed in an auxiliary interval `Δ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EssentialInterval {
    pub fermi: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
}

impl EssentialInterval {
    pub fn new(fermi: f64, half_width: f64, lo: f64, hi: f64) -> Result<Self> {
        let e = EssentialInterval { fermi, half_width, lo, hi };
        let (wlo, whi) = e.window();
        if !(half_width >= 0.0 && lo < hi && wlo >= lo && whi <= hi) {
            return Err(Error::Input(format!("window [{wlo}, {whi}] must lie in [{lo}, {hi}]")));
        }
        Ok(e)
    }

    pub fn window(&self) -> (f64, f64) {
        (self.fermi - self.half_width, self.fermi + self.half_width)
    }

    pub fn check_band(&self, channels: &ChannelSet) -> Result<()> {
        let (blo, bhi) = channels.first_band();
        if self.lo <= blo || self.hi >= bhi {
            return Err(Error::Input(format!(
                "interval [{}, {}] is not inside the first band ({blo}, {bhi})",
                self.lo, self.hi
            )));
        }
        Ok(())
    }
}
