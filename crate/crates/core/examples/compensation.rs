//! Raw aggregate map versus the compensated Krein formula on the printed
//! two-level data. The raw map is 0/0 at the well eigenvalue 5, which
//! here is also an intermediate eigenvalue.

use junctionlab::dnmap::{m_raw, split_dn};
use junctionlab::geometry::thresholds;
use junctionlab::intermediate::IntermediateDN;
use junctionlab::linalg::{c, frob};
use junctionlab::tjunction::{example4_junction, example4_printed_data};

fn main() -> junctionlab::Result<()> {
    let ch = thresholds(&example4_junction(), 2)?;
    let idn = IntermediateDN::new(split_dn(&example4_printed_data(), (4.2, 5.8), 40.0, 2)?, ch.clone())?;
    println!("{:>8} {:>14} {:>14}", "lambda", "|M|", "rel. gap");
    for l in [4.3, 4.6, 4.9, 4.99, 5.0, 5.01, 5.3, 5.7] {
        let comp = match idn.compensated_m(c(l)) {
            Ok(m) => m,
            Err(e) => {
                println!("{l:>8.3} {:>14} {:>14}  ({e})", "pole", "");
                continue;
            }
        };
        match m_raw(&idn.rdn, &ch, c(l)) {
            Ok(raw) => println!("{l:>8.3} {:>14.6e} {:>14.3e}", frob(&comp), frob(&(&raw - &comp)) / frob(&raw)),
            Err(e) => println!("{l:>8.3} {:>14.6e} {:>14}  ({e})", frob(&comp), "raw undefined"),
        }
    }
    Ok(())
}
