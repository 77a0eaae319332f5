//! Sensitivity of the exact scattering matrix to the number of closed
//! channels kept per lead and to the spectral cutoff.

use junctionlab::dnmap::split_rectangle;
use junctionlab::geometry::thresholds;
use junctionlab::intermediate::IntermediateDN;
use junctionlab::linalg::{linspace, max_abs};
use junctionlab::smatrix::smatrix_pipeline;
use junctionlab::tjunction::example4_junction;

fn main() -> junctionlab::Result<()> {
    let j = example4_junction();
    let build = |l: usize, cut: f64| -> junctionlab::Result<IntermediateDN> {
        IntermediateDN::new(split_rectangle(&j, (4.2, 5.8), cut, l)?, thresholds(&j, l)?)
    };
    let grid = linspace(4.5, 5.5, 41);
    let levels = [(8, 40.0), (16, 80.0), (32, 80.0), (64, 80.0)];
    let idns: Vec<IntermediateDN> = levels.iter().map(|&(l, cut)| build(l, cut)).collect::<Result<_, _>>()?;
    let mut prev = f64::NAN;
    for i in 0..levels.len() - 1 {
        let mut worst: f64 = 0.0;
        for &l in &grid {
            if let (Ok(a), Ok(b)) = (smatrix_pipeline(&idns[i], l), smatrix_pipeline(&idns[i + 1], l)) {
                worst = worst.max(max_abs(&(a.s - b.s)));
            }
        }
        println!("l_max {:>2} -> {:>2}: max |dS| = {worst:.3e}  ratio {:.2}", levels[i].0, levels[i + 1].0, prev / worst);
        prev = worst;
    }
    Ok(())
}
