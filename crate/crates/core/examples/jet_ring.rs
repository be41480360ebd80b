//! Arithmetic in the ring of m-jets: truncated products, composition with a
//! diffeo-jet, and the order of vanishing.

use jet_closure::jetring::{jet_compose, jet_parse, DiffeoJet, RingSignature};
use jet_closure::Result;

fn main() -> Result<()> {
    let sig = RingSignature::new(3, 2)?;
    let p = jet_parse("x + y^2", sig)?;
    let q = jet_parse("x^2 - x*y", sig)?;
    println!("m = 3, n = 2");
    println!("  ({p}) · ({q}) = {}", p.mul(&q)?);
    println!("  ({p})^2 = {}", p.pow(2));

    let x = jet_parse("x", sig)?;
    println!("  x^3 · x = {}", x.pow(3).mul(&x)?);

    let phi = DiffeoJet::new(vec![jet_parse("x + y^2", sig)?, jet_parse("y - x^2", sig)?])?;
    let r = jet_parse("x*y", sig)?;
    let composed = jet_compose(&r, &phi)?;
    println!("  (x*y)∘φ = {composed}");
    println!("  order before {:?}, after {:?}", r.order_of_vanishing(), composed.order_of_vanishing());
    println!("  lowest part of {composed}: {}", composed.lowest_homogeneous_part()?);
    Ok(())
}
