//! Fit the solvable vertex model on the essential interval of the
//! asymmetric junction and certify it against the essential scattering
//! matrix.

use junctionlab::linalg::linspace;
use junctionlab::sweep::{Pipeline, RunConfig};

fn main() -> junctionlab::Result<()> {
    let cfg = RunConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example4.json"))?;
    let pipe = Pipeline::new(cfg)?;
    let model = pipe.fit()?;
    let (lo, hi) = pipe.config.interval().window();
    let grid: Vec<f64> = linspace(lo, hi, 201).into_iter().filter(|l| model.poles.iter().all(|p| (l - p.lambda).abs() > 1e-6)).collect();
    let check = model.verify_fit(&pipe.channels, &grid)?;
    let report = model.report(Some(check));
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
