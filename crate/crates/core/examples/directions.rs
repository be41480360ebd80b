//! Allowed directions of several ideals, and a forbidden-direction
//! certificate on the whole sphere.

use jet_closure::directions::{allow_overapprox, whole_sphere_certificate, ForbidOptions};
use jet_closure::ideal::JetIdeal;
use jet_closure::jetring::RingSignature;
use jet_closure::Result;

fn main() -> Result<()> {
    let cases = [(2, 2, "x^2 + y^2"), (2, 2, "x*y"), (2, 3, "x^2; y^2 - x*z"), (3, 2, "x*(x^2 + y^2)")];
    for (m, n, gens) in cases {
        let ideal = JetIdeal::parse_list(RingSignature::new(m, n)?, gens)?;
        let allow = allow_overapprox(&ideal)?;
        let dirs: Vec<_> = allow.directions().into_iter().map(|d| d.0).collect();
        println!("Allow(⟨{gens}⟩_{m}) = {dirs:?}  exact = {}", allow.exact);
    }

    let ideal = JetIdeal::parse_list(RingSignature::new(2, 2)?, "x^2 + y^2")?;
    match whole_sphere_certificate(ideal.generators(), &ForbidOptions { budget: 6 })?.certificate() {
        Some(c) => println!(
            "⟨x² + y²⟩ forbids every direction: c = {} at depth {} over {} patches",
            c.c, c.max_depth, c.patches
        ),
        None => println!("no whole-sphere certificate within the budget"),
    }
    Ok(())
}
