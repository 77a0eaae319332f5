//! Datta-Das Sarma vertex fitted to the symmetric junction, and the
//! low-temperature limit of the jump-start matrix.

use junctionlab::linalg::max_abs;
use junctionlab::graphvertex::{datta_projection, fit_symmetric_beta};
use junctionlab::smatrix::{datta_limit, jump_start_blaschke};
use junctionlab::tjunction::{symmetric_gamma, symmetric_junction};

fn main() -> junctionlab::Result<()> {
    let gamma = symmetric_gamma(&symmetric_junction());
    let beta = fit_symmetric_beta(gamma)?;
    println!("gamma = {gamma:.12}, beta = {beta:.12}, 2 + beta*gamma = {:e}", 2.0 + beta * gamma);
    let v = datta_projection(beta, 3);
    println!("P_beta = {:.6}", v.p.map(|z| z.re));
    println!("S = 2P - I = {:.6}", v.s.map(|z| z.re));
    println!("plug-back residual {:.2e}", v.conditions().residual(&v.s, &[1.0; 3]));

    let psi = [0.8, -0.3, 0.5];
    let (l1, p) = (5.0, 1.0);
    let jump = jump_start_blaschke(l1, l1, &psi, p);
    let datta = datta_limit(l1, l1, &psi, p)?;
    println!("at the resonance |S_jump - S_datta| = {:.2e}", max_abs(&(jump.s - datta.s)));
    Ok(())
}
