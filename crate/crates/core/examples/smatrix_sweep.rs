//! Transmission through the asymmetric T-junction near its resonances:
//! exact, approximate and jump-start scattering matrices side by side.

use junctionlab::linalg::linspace;
use junctionlab::smatrix::{jump_start, smatrix_approx, smatrix_pipeline};
use junctionlab::sweep::{Pipeline, RunConfig};

fn main() -> junctionlab::Result<()> {
    let cfg = RunConfig::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data/example4.json"))?;
    let pipe = Pipeline::new(cfg)?;
    let eigen = pipe.eigen()?;
    let poles: Vec<(f64, Vec<f64>)> = eigen.iter().flat_map(|e| e.currents.iter().map(move |v| (e.lambda, v.clone()))).collect();
    let k = pipe.k_fermi()?;
    println!("{:>8} {:>10} {:>10} {:>10}  (|S_12|^2)", "lambda", "exact", "approx", "jump");
    for l in linspace(4.8, 5.05, 26) {
        let kp = pipe.channels.k_plus(l)?;
        let t = |s: &junctionlab::linalg::CMat| s[(0, 1)].norm_sqr();
        let exact = smatrix_pipeline(&pipe.idn, l)?;
        let approx = smatrix_approx(&pipe.idn, eigen, l)?.approx;
        let jump = jump_start(l, &kp, &poles, &k)?;
        println!("{l:>8.3} {:>10.6} {:>10.6} {:>10.6}", t(&exact.s), t(&approx.s), t(&jump.s));
    }
    Ok(())
}
