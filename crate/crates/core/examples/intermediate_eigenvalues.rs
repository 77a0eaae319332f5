//! Eigenvalues of the intermediate Hamiltonian for the asymmetric T-junction.

use std::time::Instant;

use junctionlab::dnmap::split_rectangle;
use junctionlab::geometry::thresholds;
use junctionlab::intermediate::IntermediateDN;
use junctionlab::tjunction::example4_junction;

fn main() -> junctionlab::Result<()> {
    let t = Instant::now();
    let j = example4_junction();
    let l_max = 8;
    let rdn = split_rectangle(&j, (4.2, 5.8), 40.0, l_max)?;
    let idn = IntermediateDN::new(rdn, thresholds(&j, l_max)?)?;
    println!("split in {:?}", t.elapsed());
    let eig = idn.intermediate_eigenvalues(401)?;
    for e in &eig {
        println!("lambda = {:.12}  multiplicity {}  currents {:?}", e.lambda, e.multiplicity, e.currents);
    }
    println!("total {:?}", t.elapsed());
    Ok(())
}
