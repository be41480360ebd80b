//! The annulus conditions C, C* and C** for the xy certificate, and a short
//! scale-coherence sweep comparing C with C*.

use jet_closure::cli::corpus::XY_CERT;
use jet_closure::directions::allow_overapprox;
use jet_closure::jetring::Jet;
use jet_closure::verifier::{check_annulus_condition, scale_coherence, BoxOptions, ConditionVariant, ImplicationCertificate};
use jet_closure::Result;

fn main() -> Result<()> {
    let cert = ImplicationCertificate::from_json(XY_CERT)?;
    let Some(data) = cert.annulus.as_ref() else {
        println!("certificate carries no annulus data");
        return Ok(());
    };
    let qs: Vec<Jet> = cert.terms.iter().map(|t| t.q.clone()).collect();
    let omega = allow_overapprox(&cert.ideal)?.directions();
    let opts = BoxOptions::default();
    for v in [ConditionVariant::C, ConditionVariant::CStar, ConditionVariant::CStarStar] {
        let r = check_annulus_condition(v, data, &cert.target, &qs, &omega, &opts)?;
        print!("{v:?}: {:?} after {} boxes", r.verdict, r.bounds.boxes);
        match r.c_hat {
            Some(c) => println!(", Ĉ = {c:.1}"),
            None => println!(),
        }
    }

    let sweep = BoxOptions { max_total_boxes: 150_000, ..Default::default() };
    let coh = scale_coherence(data, &cert.target, &qs, &omega, 8, 1, &sweep)?;
    for d in &coh.draws {
        println!("  A = {:.2e}  ε = {:.2e}  C {:?}  C* {:?}", d.a, d.eps, d.c, d.c_star);
    }
    println!("C and C* agree on all draws: {}", coh.agree);
    Ok(())
}
