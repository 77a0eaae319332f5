//! Dirichlet eigen-data of the rectangular well and the channel projections
//! of its boundary currents.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Junction, Lead, Side};
use crate::linalg::sinc;

/// `φ_mn = (2/√(ab)) sin(mπx/a) sin(nπy/b)` with its eigenvalue.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    pub m: usize,
    pub n: usize,
    pub lambda: f64,
    pub norm: f64,
}

pub fn dirichlet_eigenpairs(junction: &Junction, lambda_cut: f64) -> Vec<EigenPair> {
    let (a, b, v) = (junction.a, junction.b, junction.v_well);
    let norm = 2.0 / (a * b).sqrt();
    let mut out = Vec::new();
    let mut m = 1;
    loop {
        let xm = (m as f64 * PI / a).powi(2);
        if xm + (PI / b).powi(2) + v > lambda_cut {
            break;
        }
        let mut n = 1;
        loop {
            let lambda = xm + (n as f64 * PI / b).powi(2) + v;
            if lambda > lambda_cut {
                break;
            }
            out.push(EigenPair { m, n, lambda, norm });
            n += 1;
        }
        m += 1;
    }
    out.sort_by(|p, q| p.lambda.partial_cmp(&q.lambda).unwrap().then(p.m.cmp(&q.m)));
    out
}

/// Outward normal derivative of `φ_mn` on a side, written as
/// `amp * sin(k s)` in the side coordinate `s` (x on bottom/top, y on
/// left/right). Returns `(amp, k)`.
pub fn normal_current(pair: &EigenPair, side: Side, a: f64, b: f64) -> (f64, f64) {
    let kx = pair.m as f64 * PI / a;
    let ky = pair.n as f64 * PI / b;
    let parity = |k: usize| if k % 2 == 0 { 1.0 } else { -1.0 };
    match side {
        Side::Bottom => (-pair.norm * ky, kx),
        Side::Top => (pair.norm * ky * parity(pair.n), kx),
        Side::Left => (-pair.norm * kx, ky),
        Side::Right => (pair.norm * kx * parity(pair.m), ky),
    }
}

/// `∫_0^δ sin(k (t + shift)) sin(l π t/δ) dt` in closed form.
pub fn sine_overlap(k: f64, shift: f64, l: usize, width: f64) -> f64 {
    let q = PI * l as f64 / width;
    let phase = k * shift;
    let cos_int = |w: f64| width * (phase + 0.5 * w * width).cos() * sinc(0.5 * w * width);
    0.5 * (cos_int(k - q) - cos_int(k + q))
}

/// `⟨∂φ/∂n|_Γ, e_l⟩` over one lead, with `e_l = √(2/δ) sin(π l t/δ)`.
pub fn channel_overlap(junction: &Junction, pair: &EigenPair, lead: &Lead, l: usize) -> f64 {
    let (amp, k) = normal_current(pair, lead.side, junction.a, junction.b);
    amp * (2.0 / lead.width).sqrt() * sine_overlap(k, lead.start, l, lead.width)
}

/// Channel projections `c[s][m][l]` of the normal boundary currents.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentCoefficients {
    pub n_leads: usize,
    pub l_max: usize,
    data: Vec<f64>,
}

impl CurrentCoefficients {
    pub fn from_rows(n_leads: usize, l_max: usize, rows: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * n_leads * l_max);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n_leads {
                return Err(Error::Schema(format!("record {s}: expected {n_leads} leads, found {}", row.len())));
            }
            for (m, modes) in row.iter().enumerate() {
                if modes.len() != l_max {
                    return Err(Error::Schema(format!(
                        "record {s}, lead {m}: expected {l_max} modes, found {}",
                        modes.len()
                    )));
                }
                if modes.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Schema(format!("record {s}, lead {m}: non-finite coefficient")));
                }
                data.extend_from_slice(modes);
            }
        }
        Ok(CurrentCoefficients { n_leads, l_max, data })
    }

    pub fn len(&self) -> usize {
        self.data.len() / (self.n_leads * self.l_max)
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Coefficient for eigenfunction `s`, lead `m`, mode `l >= 1`.
    pub fn get(&self, s: usize, m: usize, l: usize) -> f64 {
        self.data[(s * self.n_leads + m) * self.l_max + (l - 1)]
    }

    /// Full channel vector, index `m * l_max + (l - 1)`.
    pub fn full(&self, s: usize) -> Vec<f64> {
        let w = self.n_leads * self.l_max;
        self.data[s * w..(s + 1) * w].to_vec()
    }

    pub fn open(&self, s: usize) -> Vec<f64> {
        (0..self.n_leads).map(|m| self.get(s, m, 1)).collect()
    }

    /// Closed channels `l = 2..=l_max`, lead-major.
    pub fn closed(&self, s: usize) -> Vec<f64> {
        (0..self.n_leads).flat_map(|m| (2..=self.l_max).map(move |l| self.get(s, m, l))).collect()
    }

    pub fn rows(&self, s: usize) -> Vec<Vec<f64>> {
        (0..self.n_leads).map(|m| (1..=self.l_max).map(|l| self.get(s, m, l)).collect()).collect()
    }

    /// Keeps only the first `l_max` modes.
    pub fn truncated(&self, l_max: usize) -> Self {
        assert!(l_max <= self.l_max);
        let rows = (0..self.len())
            .map(|s| self.rows(s).into_iter().map(|r| r[..l_max].to_vec()).collect())
            .collect();
        CurrentCoefficients::from_rows(self.n_leads, l_max, rows).unwrap()
    }
}

pub fn current_table(pairs: &[EigenPair], junction: &Junction, l_max: usize) -> CurrentCoefficients {
    let rows: Vec<Vec<Vec<f64>>> = pairs
        .par_iter()
        .map(|p| {
            junction
                .leads
                .iter()
                .map(|lead| (1..=l_max).map(|l| channel_overlap(junction, p, lead, l)).collect())
                .collect()
        })
        .collect();
    CurrentCoefficients::from_rows(junction.n_leads(), l_max, rows).unwrap()
}

/// Eigenvalues with their current tables, whatever their origin.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenData {
    pub lambdas: Vec<f64>,
    pub currents: CurrentCoefficients,
    /// `(m, n)` labels for analytic rectangle data.
    pub labels: Vec<Option<(usize, usize)>>,
}

impl EigenData {
    pub fn rectangle(junction: &Junction, lambda_cut: f64, l_max: usize) -> Self {
        let pairs = dirichlet_eigenpairs(junction, lambda_cut);
        let currents = current_table(&pairs, junction, l_max);
        EigenData {
            lambdas: pairs.iter().map(|p| p.lambda).collect(),
            currents,
            labels: pairs.iter().map(|p| Some((p.m, p.n))).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn to_records(&self) -> Vec<EigenRecord> {
        (0..self.len())
            .map(|s| EigenRecord { lambda: self.lambdas[s], currents: self.currents.rows(s) })
            .collect()
    }
}

/// One entry of the eigen-data exchange format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub lambda: f64,
    pub currents: Vec<Vec<f64>>,
}

pub fn import_eigendata(records: &[EigenRecord]) -> Result<EigenData> {
    let first = records.first().ok_or_else(|| Error::Schema("no eigen records".into()))?;
    let n_leads = first.currents.len();
    if n_leads == 0 {
        return Err(Error::Schema("records carry no leads".into()));
    }
    let l_max = first.currents[0].len();
    if l_max < 2 {
        return Err(Error::Schema("at least two modes per lead are required".into()));
    }
    if let Some(s) = records.iter().position(|r| !r.lambda.is_finite()) {
        return Err(Error::Schema(format!("record {s}: non-finite eigenvalue")));
    }
    let rows = records.iter().map(|r| r.currents.clone()).collect();
    let currents = CurrentCoefficients::from_rows(n_leads, l_max, rows)?;
    Ok(EigenData {
        lambdas: records.iter().map(|r| r.lambda).collect(),
        currents,
        labels: vec![None; records.len()],
    })
}

pub fn import_eigendata_json(text: &str) -> Result<EigenData> {
    let records: Vec<EigenRecord> = serde_json::from_str(text)?;
    import_eigendata(&records)
}
