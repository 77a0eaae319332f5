//! Resonances of a three-pole scalar model, the Blaschke product and the
//! growth of the widths with the coupling.

use junctionlab::linalg::c;
use junctionlab::resonance::{blaschke_product, factor_split, scalar_smatrix, solve_resonances, ScalarModel};

fn main() -> junctionlab::Result<()> {
    let model = ScalarModel::new(vec![1.0, 1.7, 2.4], Some(vec![0.5, 0.3, 0.2]), 0.4, 0.8, 0.0)?;
    let set = solve_resonances(&model)?;
    for r in &set.resonances {
        println!("origin {:>2}  k = {:.10}", r.origin, r.k);
    }
    for p in [0.5, 1.3, 2.0, 3.0] {
        let s = scalar_smatrix(&model, c(p))?;
        let (res, rest) = factor_split(&set, 0, c(p))?;
        println!("p = {p}: S = {s:.6}, Blaschke = {:.6}, resonant x rest = {:.6}", blaschke_product(&set, c(p)), res * rest);
    }
    println!("width of the first resonance against beta:");
    for beta in [0.01, 0.02, 0.04, 0.08] {
        let k = solve_resonances(&model.with_beta(beta))?.by_origin(1).unwrap();
        println!("  beta {beta:<5} Im k = {:.4e}", k.im);
    }
    Ok(())
}
