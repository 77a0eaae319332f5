//! Run configuration, pipeline assembly and deterministic energy sweeps.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dnmap::{split_dn, split_rectangle};
use crate::error::{Error, Result};
use crate::geometry::{build_junction, thresholds, ChannelSet, EssentialInterval, Junction, JunctionSpec};
use crate::intermediate::{IntermediateDN, IntermediateEigenvalue};
use crate::linalg::{c, linspace, CMat};
use crate::smatrix::{datta_limit, jump_start, smatrix_approx, smatrix_pipeline, SMatrix};
use crate::spectral::{import_eigendata_json, EigenData};
use crate::tjunction::example4_printed_data;
use crate::vertexmodel::{PoleDatum, VertexModel};

/// Where the eigenfunctions of the well come from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    /// Analytic rectangle eigenfunctions with the exact regular part.
    #[default]
    Rectangle,
    /// The two-level data of the asymmetric T-junction as printed.
    Printed,
    /// Eigen records from a JSON file, relative to the config file.
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub steps: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub junction: JunctionSpec,
    #[serde(default)]
    pub source: Source,
    #[serde(default = "default_l_max")]
    pub l_max: usize,
    #[serde(default = "default_cut")]
    pub lambda_cut: f64,
    pub delta: [f64; 2],
    /// Scaled Fermi level and half-width of the essential interval.
    pub fermi: f64,
    pub half_width: f64,
    pub sweep: SweepSpec,
    /// Fitted model written by `fit`, used by the `model` sweep.
    #[serde(default)]
    pub model: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_l_max() -> usize {
    8
}

fn default_cut() -> f64 {
    40.0
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sweep;
        if !(s.lambda_min < s.lambda_max) || s.steps < 2 {
            return Err(Error::Input(format!(
                "sweep needs lambda_min < lambda_max and steps >= 2, got [{}, {}] with {} steps",
                s.lambda_min, s.lambda_max, s.steps
            )));
        }
        if !(self.delta[0] < self.delta[1]) {
            return Err(Error::Input("delta must be an increasing pair".into()));
        }
        EssentialInterval::new(self.fermi, self.half_width, self.delta[0], self.delta[1])?;
        Ok(())
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        match &self.base_dir {
            Some(b) if p.is_relative() => b.join(p),
            _ => p.to_path_buf(),
        }
    }

    pub fn interval(&self) -> EssentialInterval {
        EssentialInterval { fermi: self.fermi, half_width: self.half_width, lo: self.delta[0], hi: self.delta[1] }
    }

    pub fn grid(&self) -> Vec<f64> {
        linspace(self.sweep.lambda_min, self.sweep.lambda_max, self.sweep.steps)
    }
}

pub struct Pipeline {
    pub config: RunConfig,
    pub junction: Junction,
    pub channels: ChannelSet,
    pub idn: IntermediateDN,
    eigen: OnceLock<Vec<IntermediateEigenvalue>>,
}

impl Pipeline {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.validate()?;
        let junction = build_junction(config.junction.clone())?;
        let delta = (config.delta[0], config.delta[1]);
        let (rdn, l_max) = match &config.source {
            Source::Rectangle => (split_rectangle(&junction, delta, config.lambda_cut, config.l_max)?, config.l_max),
            Source::Printed => {
                let data = example4_printed_data();
                let l = data.currents.l_max;
                (split_dn(&data, delta, config.lambda_cut, l)?, l)
            }
            Source::File(p) => {
                let data: EigenData = import_eigendata_json(&std::fs::read_to_string(config.resolve(p))?)?;
                if data.currents.n_leads != junction.n_leads() {
                    return Err(Error::Schema("eigen-data lead count differs from the junction".into()));
                }
                let l = config.l_max.min(data.currents.l_max);
                (split_dn(&data, delta, config.lambda_cut, l)?, l)
            }
        };
        let channels = thresholds(&junction, l_max)?;
        config.interval().check_band(&channels)?;
        let idn = IntermediateDN::new(rdn, channels.clone())?;
        Ok(Pipeline { config, junction, channels, idn, eigen: OnceLock::new() })
    }

    pub fn eigen(&self) -> Result<&[IntermediateEigenvalue]> {
        if let Some(e) = self.eigen.get() {
            return Ok(e);
        }
        let found = self.idn.intermediate_eigenvalues(401)?;
        Ok(self.eigen.get_or_init(|| found))
    }

    /// `k(Λ)`, symmetrized.
    pub fn k_fermi(&self) -> Result<CMat> {
        let k = self.idn.k_regular(c(self.config.fermi))?;
        Ok(((&k + k.transpose()) * c(0.5)).map(|z| c(z.re)))
    }

    pub fn fit(&self) -> Result<VertexModel> {
        crate::vertexmodel::fit_from_intermediate(&self.idn, self.eigen()?, self.config.fermi)
    }

    /// Eigenvalue nearest to the Fermi level with its currents.
    pub fn resonance_near_fermi(&self) -> Result<&IntermediateEigenvalue> {
        self.eigen()?
            .iter()
            .min_by(|a, b| (a.lambda - self.config.fermi).abs().partial_cmp(&(b.lambda - self.config.fermi).abs()).unwrap())
            .ok_or(Error::EmptyModel)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Approx,
    Jump,
    Datta,
    Model,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Method::Exact,
            "approx" => Method::Approx,
            "jump" => Method::Jump,
            "datta" => Method::Datta,
            "model" => Method::Model,
            _ => return Err(Error::Input(format!("unknown method {s}"))),
        })
    }
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Approx => "approx",
            Method::Jump => "jump",
            Method::Datta => "datta",
            Method::Model => "model",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Row {
    pub lambda: f64,
    pub p: Option<f64>,
    pub s: Option<Vec<Vec<[f64; 2]>>>,
    pub transmissions: Option<Vec<Vec<f64>>>,
    pub unitarity_defect: Option<f64>,
    pub status: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub method: Method,
    pub n_leads: usize,
    pub rows: Vec<Row>,
}

/// Model saved by `fit`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SavedModel {
    pub alpha2: Vec<f64>,
    pub currents: Vec<Vec<f64>>,
    pub k_m: Vec<Vec<[f64; 2]>>,
    pub k_m_taken_at: f64,
}

impl SavedModel {
    pub fn into_model(self) -> Result<VertexModel> {
        let n = self.k_m.len();
        if self.alpha2.len() != self.currents.len() || self.k_m.iter().any(|r| r.len() != n) {
            return Err(Error::Schema("inconsistent model file".into()));
        }
        let k = CMat::from_fn(n, n, |i, j| C64::new(self.k_m[i][j][0], self.k_m[i][j][1]));
        let poles: Vec<PoleDatum> =
            self.alpha2.iter().zip(self.currents).map(|(&lambda, current)| PoleDatum { lambda, current }).collect();
        VertexModel::fit(&poles, k, self.k_m_taken_at)
    }
}

fn row(lambda: f64, p: f64, s: Result<SMatrix>) -> Result<Row> {
    match s {
        Ok(s) => Ok(Row {
            lambda,
            p: Some(p),
            s: Some(
                (0..s.s.nrows()).map(|i| (0..s.s.ncols()).map(|j| [s.s[(i, j)].re, s.s[(i, j)].im]).collect()).collect(),
            ),
            transmissions: Some(s.transmissions()),
            unitarity_defect: Some(s.unitarity_defect()),
            status: "ok",
        }),
        Err(
            Error::Threshold(_)
            | Error::IntermediatePole(_)
            | Error::Pole { .. }
            | Error::Window { .. }
            | Error::DenominatorSingular(_),
        ) => Ok(skipped(lambda, Some(p))),
        Err(e) => Err(e),
    }
}

fn skipped(lambda: f64, p: Option<f64>) -> Row {
    Row { lambda, p, s: None, transmissions: None, unitarity_defect: None, status: "skipped" }
}

/// One row per grid energy, computed in parallel and gathered in order.
pub fn run_sweep(pipe: &Pipeline, method: Method, model: Option<&VertexModel>) -> Result<SweepResult> {
    let grid = pipe.config.grid();
    let n = pipe.channels.n_leads();
    let jump_data = match method {
        Method::Jump => {
            let poles: Vec<(f64, Vec<f64>)> =
                pipe.eigen()?.iter().flat_map(|e| e.currents.iter().map(move |v| (e.lambda, v.clone()))).collect();
            Some((poles, pipe.k_fermi()?))
        }
        _ => None,
    };
    let datta_data = match method {
        Method::Datta => {
            let e = pipe.resonance_near_fermi()?;
            let psi = e.currents.first().cloned().ok_or(Error::EmptyModel)?;
            Some((e.lambda, psi))
        }
        _ => None,
    };
    if method == Method::Approx {
        pipe.eigen()?;
    }
    if method == Method::Model && model.is_none() {
        return Err(Error::Input("the model sweep needs a fitted model".into()));
    }
    let rows: Vec<Result<Row>> = grid
        .par_iter()
        .map(|&l| {
            let kp = match pipe.channels.k_plus(l) {
                Ok(k) => k,
                Err(Error::Threshold(_)) => return Ok(skipped(l, None)),
                Err(e) => return Err(e),
            };
            let s = match method {
                Method::Exact => smatrix_pipeline(&pipe.idn, l),
                Method::Approx => smatrix_approx(&pipe.idn, pipe.eigen()?, l).map(|f| f.approx),
                Method::Jump => {
                    let (poles, k) = jump_data.as_ref().unwrap();
                    jump_start(l, &kp, poles, k)
                }
                Method::Datta => {
                    let (l1, psi) = datta_data.as_ref().unwrap();
                    datta_limit(l, *l1, psi, kp[0])
                }
                Method::Model => model.unwrap().smatrix(&kp, l),
            };
            row(l, kp[0], s)
        })
        .collect();
    Ok(SweepResult { method, n_leads: n, rows: rows.into_iter().collect::<Result<Vec<_>>>()? })
}

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepResult {
    pub fn header(&self) -> Vec<String> {
        let n = self.n_leads;
        let mut h = vec!["lambda".to_string(), "p".to_string()];
        for i in 1..=n {
            for j in 1..=n {
                h.push(format!("re_S{i}{j}"));
                h.push(format!("im_S{i}{j}"));
            }
        }
        for i in 1..=n {
            for j in 1..=n {
                h.push(format!("T{i}{j}"));
            }
        }
        h.push("unitarity_defect".into());
        h.push("status".into());
        h
    }

    pub fn to_csv(&self) -> String {
        let n = self.n_leads;
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.rows {
            let mut cells = vec![fmt(r.lambda), r.p.map_or("nan".into(), fmt)];
            match (&r.s, &r.transmissions) {
                (Some(s), Some(t)) => {
                    for i in 0..n {
                        for j in 0..n {
                            cells.push(fmt(s[i][j][0]));
                            cells.push(fmt(s[i][j][1]));
                        }
                    }
                    for i in 0..n {
                        for j in 0..n {
                            cells.push(fmt(t[i][j]));
                        }
                    }
                }
                _ => cells.extend(std::iter::repeat("nan".to_string()).take(3 * n * n)),
            }
            cells.push(r.unitarity_defect.map_or("nan".into(), fmt));
            cells.push(r.status.into());
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn max_unitarity_defect(&self) -> f64 {
        self.rows.iter().filter_map(|r| r.unitarity_defect).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tjunction::example4_spec;

    fn printed(steps: usize, lo: f64, hi: f64) -> RunConfig {
        RunConfig {
            junction: example4_spec(),
            source: Source::Printed,
            l_max: 2,
            lambda_cut: 40.0,
            delta: [4.2, 5.8],
            fermi: 5.0,
            half_width: 0.5,
            sweep: SweepSpec { lambda_min: lo, lambda_max: hi, steps },
            model: None,
            base_dir: None,
        }
    }

    #[test]
    fn two_steps_are_the_endpoints() {
        let p = Pipeline::new(printed(2, 4.5, 5.5)).unwrap();
        let r = run_sweep(&p, Method::Exact, None).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_eq!(r.rows[0].lambda, 4.5);
        assert_eq!(r.rows[1].lambda, 5.5);
    }

    #[test]
    fn threshold_rows_are_skipped() {
        let mut cfg = printed(5, 3.0, 5.0);
        cfg.delta = [4.2, 5.8];
        let p = Pipeline::new(cfg).unwrap();
        let r = run_sweep(&p, Method::Exact, None).unwrap();
        assert_eq!(r.rows[0].status, "skipped");
        assert_eq!(r.rows[3].status, "ok");
        assert_eq!(r.rows[4].status, "skipped");
        assert!(r.to_csv().lines().nth(1).unwrap().ends_with("skipped"));
    }

    #[test]
    fn model_sweep_needs_a_model() {
        let p = Pipeline::new(printed(3, 4.5, 5.5)).unwrap();
        assert!(matches!(run_sweep(&p, Method::Model, None), Err(Error::Input(_))));
    }

    #[test]
    fn bad_sweep_spec() {
        assert!(printed(1, 4.5, 5.5).validate().is_err());
        assert!(printed(3, 5.5, 4.5).validate().is_err());
    }
}
