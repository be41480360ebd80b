//! Negligibility certificates: y³/z at the poles passes for every ε tried,
//! while xy along the diagonal fails with a witness point.

use jet_closure::geometry::Direction;
use jet_closure::symfun::{parse_expr, Params};
use jet_closure::verifier::{check_negligible, NegligibleOptions};
use jet_closure::Result;

fn main() -> Result<()> {
    let p = Params::new();
    let poles = vec![Direction::axis(3, 2, 1.0), Direction::axis(3, 2, -1.0)];
    let cert = check_negligible(&parse_expr("y^3/z", 3, &p)?, &poles, 3, 2, &NegligibleOptions::default())?;
    println!("y^3/z at (0, 0, ±1), m = 2: {:?}", cert.verdict);
    for a in &cert.attempts {
        println!("  ε = {:<6} δ = {:.2e}  r = {:.2e}  {:?}", a.eps, a.delta, a.r, a.verdict);
    }

    let diag = vec![Direction::new(vec![1.0, 1.0])?];
    let bad = check_negligible(&parse_expr("x*y", 2, &p)?, &diag, 2, 2, &NegligibleOptions::default())?;
    println!("xy along (1, 1), m = 2: {:?}", bad.verdict);
    if let Some(w) = bad.attempts.iter().find_map(|a| a.witness.as_ref()) {
        println!("  witness at {:?}", w.point);
    }
    Ok(())
}
