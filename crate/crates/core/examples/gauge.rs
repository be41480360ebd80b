//! Regularizing three gauges and printing the checks on each.

use jet_closure::symfun::{regularize, GaugeFn, RegularizeOptions};
use jet_closure::Result;

fn main() -> Result<()> {
    for (name, param) in [("sqrt", None), ("minpow", Some(0.3)), ("invlog", None)] {
        let g = GaugeFn::by_name(name, param)?;
        let r = regularize(&g.name, g.value(), &RegularizeOptions::default())?;
        println!("{}: {}", g.name, if r.passed() { "all checks pass" } else { "some checks fail" });
        for c in &r.checks {
            println!("  [{}] {}: {}", if c.pass { "ok" } else { "no" }, c.name, c.detail);
        }
    }
    Ok(())
}
