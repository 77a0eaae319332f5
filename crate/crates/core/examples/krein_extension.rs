//! A finite symplectic extension: Weyl function, Krein resolvent and the
//! eigenvalues of the extended operator.

use junctionlab::extension::{imaginary_part_eigenvalues, make_setup, InnerHamiltonian};
use junctionlab::linalg::{c, frob, CMat};
use junctionlab::C64;

fn main() -> junctionlab::Result<()> {
    let a = InnerHamiltonian::diagonal(&[-1.5, -0.4, 0.3, 1.1, 2.6]);
    let basis = CMat::from_fn(5, 2, |i, j| C64::new((((i + 1) * (j + 2)) as f64).sin(), 0.1 * i as f64));
    let setup = make_setup(&a, &basis)?;
    println!("principal-angle sine between N_i and N_-i: {:.4}", setup.overlap);
    let m = CMat::from_row_slice(2, 2, &[c(0.7), c(-0.2), c(-0.2), c(1.3)]);
    for z in [C64::new(0.5, 0.3), C64::new(-1.0, 1.0), C64::new(2.0, 0.05)] {
        let w = setup.weyl(z)?;
        println!("Im eig Weyl({z}) = {:?}", imaginary_part_eigenvalues(&w));
    }
    let (z, u) = (C64::new(0.2, 0.7), C64::new(-0.9, -0.4));
    let (rz, ru) = (setup.krein_resolvent(&m, z)?, setup.krein_resolvent(&m, u)?);
    println!("resolvent identity defect {:.2e}", frob(&(&rz - &ru - &rz * &ru * (z - u))));
    println!("extension eigenvalues {:?}", setup.extension_eigenvalues(&m)?);
    Ok(())
}
