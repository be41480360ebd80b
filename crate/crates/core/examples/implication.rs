//! Strong implication certificates: xy lies in the closure of ⟨x², y² − xz⟩₂
//! although not in the ideal, and the cubes from ⟨x(x² + y²)⟩₃.

use jet_closure::cli::corpus::{cubic_cert, XY_CERT};
use jet_closure::verifier::{check_strong_global, ImplicationCertificate, ImplicationOptions};
use jet_closure::Result;

fn main() -> Result<()> {
    let opts = ImplicationOptions::default();
    let cert = ImplicationCertificate::from_json(XY_CERT)?;
    let r = check_strong_global(&cert, &opts)?;
    println!("{} from {}: {} ({:?})", r.target, r.ideal, r.label, r.verdict);
    for d in &r.directions {
        let zero = d.residual.as_ref().is_some_and(|res| res.exact_zero);
        println!("  ω = {:?}: {:?}, residual exactly zero: {zero}", d.omega.0, d.verdict);
    }
    for c in &r.conclusions {
        println!("  ⇒ {c}");
    }

    for target in ["x^3", "x^2*y", "x*y^2"] {
        let cert = ImplicationCertificate::from_json(&cubic_cert(target))?;
        let r = check_strong_global(&cert, &opts)?;
        println!("{target}: {} ({:?})", r.label, r.verdict);
    }
    Ok(())
}
