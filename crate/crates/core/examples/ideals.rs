//! Ideals of jets: bases, membership, and images under a diffeo-jet.

use jet_closure::ideal::JetIdeal;
use jet_closure::jetring::{jet_parse, DiffeoJet, RingSignature};
use jet_closure::Result;

fn main() -> Result<()> {
    let sig = RingSignature::new(2, 3)?;
    let ideal = JetIdeal::parse_list(sig, "x^2; y^2 - x*z")?;
    println!("I = ⟨x², y² − xz⟩ in the 2-jets of 3 variables");
    println!("  dim I = {}", ideal.dim());
    for b in ideal.basis_jets() {
        println!("  basis: {b}");
    }
    for t in ["x*y", "x^2 + y^2 - x*z", "x*z - y^2"] {
        println!("  {t} ∈ I: {}", ideal.contains(&jet_parse(t, sig)?)?);
    }
    println!("  closed under multiplication: {}", ideal.is_multiplicatively_closed());

    for m in 1..=6 {
        let d = JetIdeal::parse_list(RingSignature::new(m, 1)?, "x")?.dim();
        println!("  dim ⟨x⟩_{m} = {d}");
    }

    let phi = DiffeoJet::new(vec![jet_parse("x + z^2", sig)?, jet_parse("y", sig)?, jet_parse("z + x*y", sig)?])?;
    let image = ideal.transform(&phi)?;
    println!("  image under φ has dim {}", image.dim());
    for g in image.generators() {
        println!("  generator: {g}");
    }
    Ok(())
}
