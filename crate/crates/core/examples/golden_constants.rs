//! Reproduce the tabulated constants of the two T-junctions.

fn main() {
    let r = junctionlab::golden::run();
    for c in &r.checks {
        let mark = if c.pass { "ok  " } else { "FAIL" };
        println!("{mark} {:<28} expected {:>20.15} computed {:>20.15}", c.name, c.expected, c.computed);
    }
    println!("{} passed, failed: {:?}", r.passed, r.failed);
}
