//! Command-line frontend.
//!
//! Exit codes: 0 success, 2 input error, 3 usage error, 4 numerical failure.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::dnmap::thinness_report;
use crate::error::Error;
use crate::geometry::{build_junction, JunctionSpec};
use crate::graphvertex::{datta_projection, fit_symmetric_beta};
use crate::linalg::{c, linspace, CMat};
use crate::resonance::{solve_resonances, ScalarModel};
use crate::spectral::EigenData;
use crate::sweep::{run_sweep, Method, Pipeline, RunConfig, SavedModel};
use crate::tjunction::{symmetric_gamma, symmetric_junction};
use crate::vertexmodel::ModelReport;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "junctionlab", version, about = "Scattering on quantum junctions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Channels kept per lead
    #[arg(long, global = true)]
    pub lmax: Option<usize>,
    /// Spectral cutoff for the pole sum
    #[arg(long, global = true)]
    pub lcut: Option<f64>,
    /// Splitting interval as LO:HI
    #[arg(long, global = true)]
    pub delta: Option<String>,
    /// Sweep method: exact, approx, jump, datta, model
    #[arg(long, global = true)]
    pub method: Option<String>,
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Worker threads; falls back to JUNCTIONLAB_THREADS
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Dirichlet eigenvalues of the well with their open-channel currents
    Eig,
    /// Compensated DN map, intermediate eigenvalues and thinness
    Dn,
    /// Scattering matrix over the configured energy grid
    Sweep,
    /// Resonances of a single-lead scalar model
    Resonances,
    /// Fit the solvable vertex model on the essential interval
    Fit,
    /// Datta-Das Sarma vertex of the symmetric junction
    Datta,
    /// Reproduce the tabulated constants
    Golden,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => EXIT_USAGE,
            Failure::Numeric(_) => EXIT_NUMERIC,
            Failure::Lib(e) => match e {
                Error::Geometry(_)
                | Error::Schema(_)
                | Error::Input(_)
                | Error::Io(_)
                | Error::Json(_)
                | Error::Split(_)
                | Error::Threshold(_) => EXIT_INPUT,
                _ => EXIT_NUMERIC,
            },
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage error: {m}"),
            Failure::Numeric(m) => write!(f, "numerical failure: {m}"),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

type Out = std::result::Result<String, Failure>;

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_delta(s: &str) -> std::result::Result<[f64; 2], Failure> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| Failure::Usage(format!("--delta expects LO:HI, got {s}")))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("bad number in --delta: {x}")));
    Ok([p(lo)?, p(hi)?])
}

fn load_config(cli: &Cli) -> std::result::Result<RunConfig, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(l) = cli.lmax {
        cfg.l_max = l;
    }
    if let Some(x) = cli.lcut {
        cfg.lambda_cut = x;
    }
    if let Some(d) = &cli.delta {
        cfg.delta = parse_delta(d)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn json<T: Serialize>(v: &T) -> Out {
    serde_json::to_string_pretty(v).map_err(|e| Failure::Lib(e.into())).map(|s| s + "\n")
}

fn cmd_eig(cli: &Cli) -> Out {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    let spec: JunctionSpec = match value.get("junction") {
        Some(j) => serde_json::from_value(j.clone()).map_err(Error::from)?,
        None => serde_json::from_value(value).map_err(Error::from)?,
    };
    let junction = build_junction(spec)?;
    let cut = cli.lcut.unwrap_or(40.0);
    let data = EigenData::rectangle(&junction, cut, cli.lmax.unwrap_or(2).max(2));
    #[derive(Serialize)]
    struct Entry {
        lambda: f64,
        m: usize,
        n: usize,
        open_currents: Vec<f64>,
    }
    let entries: Vec<Entry> = (0..data.len())
        .map(|s| {
            let (m, n) = data.labels[s].unwrap_or((0, 0));
            Entry { lambda: data.lambdas[s], m, n, open_currents: data.currents.open(s) }
        })
        .collect();
    match cli.format {
        Format::Json => json(&entries),
        Format::Csv => {
            let leads = junction.n_leads();
            let mut out = String::from("lambda,m,n");
            for k in 1..=leads {
                out.push_str(&format!(",c{k}"));
            }
            out.push('\n');
            for e in &entries {
                let cells: Vec<String> = e.open_currents.iter().map(|&x| fmt(x)).collect();
                out.push_str(&format!("{},{},{},{}\n", fmt(e.lambda), e.m, e.n, cells.join(",")));
            }
            Ok(out)
        }
    }
}

fn cmd_dn(cli: &Cli) -> Out {
    let pipe = Pipeline::new(load_config(cli)?)?;
    let eig: Vec<_> = pipe.eigen()?.iter().map(|e| e.report()).collect();
    let thin = thinness_report(&pipe.idn.rdn, &pipe.channels, 101)?;
    let grid = pipe.config.grid();
    let n = pipe.channels.n_leads();
    let rows: Vec<(f64, Option<CMat>)> = grid.iter().map(|&l| (l, pipe.idn.compensated_m(c(l)).ok())).collect();
    match cli.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Dn<'a> {
                intermediate_eigenvalues: Vec<crate::intermediate::EigenvalueReport>,
                thinness: &'a crate::dnmap::ThinnessReport,
                m: Vec<(f64, Option<Vec<Vec<[f64; 2]>>>)>,
            }
            let m = rows
                .iter()
                .map(|(l, m)| {
                    (*l, m.as_ref().map(|m| (0..n).map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()))
                })
                .collect();
            json(&Dn { intermediate_eigenvalues: eig, thinness: &thin, m })
        }
        Format::Csv => {
            let mut out = String::from("lambda");
            for i in 1..=n {
                for j in 1..=n {
                    out.push_str(&format!(",re_M{i}{j},im_M{i}{j}"));
                }
            }
            out.push_str(",status\n");
            for (l, m) in &rows {
                let mut cells = vec![fmt(*l)];
                match m {
                    Some(m) => {
                        for i in 0..n {
                            for j in 0..n {
                                cells.push(fmt(m[(i, j)].re));
                                cells.push(fmt(m[(i, j)].im));
                            }
                        }
                        cells.push("ok".into());
                    }
                    None => {
                        cells.extend(std::iter::repeat("nan".to_string()).take(2 * n * n));
                        cells.push("skipped".into());
                    }
                }
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            Ok(out)
        }
    }
}

fn cmd_sweep(cli: &Cli) -> Out {
    let cfg = load_config(cli)?;
    let method: Method = match &cli.method {
        Some(m) => m.parse().map_err(|_| Failure::Usage(format!("unknown method {m}")))?,
        None => Method::Exact,
    };
    let model = if method == Method::Model {
        let path = cfg.model.as_ref().ok_or_else(|| Failure::Usage("method model needs a fitted model; run fit first".into()))?;
        let path = cfg.resolve(path);
        let text = std::fs::read_to_string(&path)
            .map_err(|_| Failure::Usage(format!("model file {} not found; run fit first", path.display())))?;
        let saved: SavedModel = serde_json::from_str(&text).map_err(Error::from)?;
        Some(saved.into_model()?)
    } else {
        None
    };
    let pipe = Pipeline::new(cfg)?;
    let result = run_sweep(&pipe, method, model.as_ref())?;
    match cli.format {
        Format::Csv => Ok(result.to_csv()),
        Format::Json => Ok(result.to_json()? + "\n"),
    }
}

fn cmd_resonances(cli: &Cli) -> Out {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("--config is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(Error::from)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
    let model: ScalarModel = serde_json::from_value(value.get("scalar").cloned().unwrap_or(value)).map_err(Error::from)?;
    let set = solve_resonances(&model.with_defaults()?)?;
    match cli.format {
        Format::Json => json(&set),
        Format::Csv => {
            let mut out = String::from("origin,re_k,im_k,residual,disp_residual\n");
            for r in &set.resonances {
                out.push_str(&format!("{},{},{},{},{}\n", r.origin, fmt(r.k.re), fmt(r.k.im), fmt(r.residual), fmt(r.disp_residual)));
            }
            Ok(out)
        }
    }
}

fn cmd_fit(cli: &Cli) -> Out {
    let pipe = Pipeline::new(load_config(cli)?)?;
    let model = pipe.fit()?;
    let (lo, hi) = pipe.config.interval().window();
    let grid: Vec<f64> = linspace(lo, hi, 201)
        .into_iter()
        .filter(|l| model.poles.iter().all(|p| (l - p.lambda).abs() > 1e-6))
        .collect();
    let check = model.verify_fit(&pipe.channels, &grid)?;
    let report: ModelReport = model.report(Some(check));
    json(&report)
}

fn cmd_datta(cli: &Cli) -> Out {
    let junction = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(Error::from)?;
            let value: serde_json::Value = serde_json::from_str(&text).map_err(Error::from)?;
            let spec: JunctionSpec =
                serde_json::from_value(value.get("junction").cloned().unwrap_or(value)).map_err(Error::from)?;
            build_junction(spec)?
        }
        None => symmetric_junction(),
    };
    let gamma = symmetric_gamma(&junction);
    let beta = fit_symmetric_beta(gamma)?;
    let v = datta_projection(beta, 3);
    let k = [1.0; 3];
    let residual = v.conditions().residual(&v.s, &k);
    let printed: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| v.s_printed()[(i, j)].re).collect()).collect();
    #[derive(Serialize)]
    struct Datta<'a> {
        gamma: f64,
        beta: f64,
        orthogonality: f64,
        vertex: &'a crate::graphvertex::DattaVertex,
        s_swapped_conditions: Vec<Vec<f64>>,
        condition_residual: f64,
    }
    json(&Datta { gamma, beta, orthogonality: 2.0 + beta * gamma, vertex: &v, s_swapped_conditions: printed, condition_residual: residual })
}

fn cmd_golden(cli: &Cli) -> Out {
    let r = crate::golden::run();
    let text = match cli.format {
        Format::Json => r.to_json() + "\n",
        Format::Csv => {
            let mut out = String::from("name,expected,computed,tolerance,pass\n");
            for ch in &r.checks {
                out.push_str(&format!("{},{},{},{},{}\n", ch.name, fmt(ch.expected), fmt(ch.computed), fmt(ch.tolerance), ch.pass));
            }
            out
        }
    };
    if r.all_pass() {
        Ok(text)
    } else {
        print!("{text}");
        Err(Failure::Numeric(format!("golden checks failed: {}", r.failed.join(", "))))
    }
}

fn thread_count(cli: &Cli) -> std::result::Result<Option<usize>, Failure> {
    if let Some(n) = cli.threads {
        return Ok(Some(n));
    }
    match std::env::var("JUNCTIONLAB_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Failure::Usage(format!("JUNCTIONLAB_THREADS must be a number, got {v}"))),
        Err(_) => Ok(None),
    }
}

pub fn execute(cli: &Cli) -> Out {
    let body = || match cli.command {
        Command::Eig => cmd_eig(cli),
        Command::Dn => cmd_dn(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::Resonances => cmd_resonances(cli),
        Command::Fit => cmd_fit(cli),
        Command::Datta => cmd_datta(cli),
        Command::Golden => cmd_golden(cli),
    };
    match thread_count(cli)? {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Failure::Usage(e.to_string()))?;
            pool.install(body)
        }
        None => body(),
    }
}

/// Parses, runs and reports; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(text) => {
            let written = match &cli.out {
                Some(p) => std::fs::write(p, text.as_bytes()),
                None => std::io::stdout().write_all(text.as_bytes()),
            };
            match written {
                Ok(()) => 0,
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => 0,
                Err(e) => {
                    eprintln!("junctionlab: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(f) => {
            eprintln!("junctionlab: {f}");
            f.code()
        }
    }
}
