//! Drive the library from a JSON run configuration, as the command-line
//! tool does, and print the Landauer conductance sum over the sweep.

use junctionlab::sweep::{run_sweep, Method, Pipeline, RunConfig};

fn main() -> junctionlab::Result<()> {
    let path = std::env::args().nth(1).map(std::path::PathBuf::from).unwrap_or_else(|| {
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example4_printed.json")
    });
    let pipe = Pipeline::new(RunConfig::load(&path)?)?;
    let result = run_sweep(&pipe, Method::Approx, None)?;
    for row in result.rows.iter().step_by(20) {
        match &row.transmissions {
            Some(t) => {
                let g: f64 = (0..t.len()).flat_map(|i| (0..t.len()).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| t[i][j]).sum();
                println!("lambda {:.3}  sum of transmissions {g:.6}", row.lambda);
            }
            None => println!("lambda {:.3}  {}", row.lambda, row.status),
        }
    }
    println!("max unitarity defect {:.2e}", result.max_unitarity_defect());
    Ok(())
}
