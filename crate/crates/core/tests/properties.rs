//! Property tests for the invariants the verifiers rely on.

use jet_closure::cli::corpus::{cubic_cert, XY_CERT};
use jet_closure::directions::{allow_overapprox, certificate_holds_at, whole_sphere_certificate, ForbidOptions};
use jet_closure::geometry::Direction;
use jet_closure::ideal::JetIdeal;
use jet_closure::jetring::{jet_parse, Jet, MultiIndex, RingSignature};
use jet_closure::rational::{q_frac, Q};
use jet_closure::symfun::{parse_expr, Params};
use jet_closure::verifier::{
    check_flat, check_flat_tame_product, check_negligible_at, check_strong_global, check_tame, ImplicationCertificate,
    ImplicationOptions, NegligibleOptions, Region, SampleOptions, Verdict,
};
use proptest::prelude::*;

fn sig(m: u32, n: usize) -> RingSignature {
    RingSignature::new(m, n).unwrap()
}

prop_compose! {
    fn small_q()(a in -9i64..=9, b in 1i64..=5) -> Q {
        q_frac(a, b)
    }
}

/// A random jet in the given signature with up to `max_terms` terms and no
/// constant term.
fn jet(s: RingSignature, max_terms: usize) -> impl Strategy<Value = Jet> {
    let monos: Vec<MultiIndex> = MultiIndex::all_up_to(s.n, s.m).into_iter().filter(|a| a.degree() > 0).collect();
    let k = monos.len();
    prop::collection::vec((0..k, small_q()), 0..=max_terms)
        .prop_map(move |ts| Jet::from_terms(s, ts.into_iter().map(|(i, c)| (monos[i].clone(), c))).unwrap())
}

fn sig_and_jets(count: usize) -> impl Strategy<Value = (RingSignature, Vec<Jet>)> {
    (1u32..=4, 1usize..=3).prop_flat_map(move |(m, n)| {
        let s = sig(m, n);
        (Just(s), prop::collection::vec(jet(s, 6), count))
    })
}

fn poles() -> Vec<Direction> {
    vec![Direction::axis(3, 2, 1.0), Direction::axis(3, 2, -1.0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_print_parse_round_trip((s, js) in sig_and_jets(1)) {
        let j = &js[0];
        prop_assert_eq!(&jet_parse(&j.to_string(), s).unwrap(), j);
    }

    #[test]
    fn ring_axioms((_, js) in sig_and_jets(3)) {
        let (a, b, c) = (&js[0], &js[1], &js[2]);
        prop_assert_eq!(a.mul(b).unwrap(), b.mul(a).unwrap());
        prop_assert_eq!(a.mul(b).unwrap().mul(c).unwrap(), a.mul(&b.mul(c).unwrap()).unwrap());
        prop_assert_eq!(a.mul(&b.add(c).unwrap()).unwrap(), a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap());
    }

    #[test]
    fn ideals_absorb_products((s, js) in sig_and_jets(3)) {
        let ideal = JetIdeal::from_generators(s, js[..2].to_vec()).unwrap();
        for g in ideal.generators() {
            prop_assert!(ideal.contains(&g.mul(&js[2]).unwrap()).unwrap());
        }
        prop_assert!(ideal.is_multiplicatively_closed());
    }

    #[test]
    fn expression_print_parse_round_trip(
        k in 3i32..=6,
        c in -5i64..=5,
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
        z in 0.2f64..1.0,
    ) {
        let p = Params::new();
        let e = parse_expr(&format!("{c}*y^{k}/z + x*y/norm(x, z) - theta(norm(x, y), 1/2)"), 3, &p).unwrap();
        let back = parse_expr(&e.to_string(), 3, &p).unwrap();
        let (a, b) = (e.eval_f64(&[x, y, z]).unwrap(), back.eval_f64(&[x, y, z]).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn whole_sphere_certificate_holds(k in 1u32..=2, a in 1i64..=4, b in 1i64..=4, t in 0.0f64..std::f64::consts::TAU) {
        let ideal = JetIdeal::parse_list(sig(2 * k, 2), &format!("{a}*x^{} + {b}*y^{}", 2 * k, 2 * k)).unwrap();
        prop_assert!(allow_overapprox(&ideal).unwrap().is_empty());
        let out = whole_sphere_certificate(ideal.generators(), &ForbidOptions { budget: 6 }).unwrap();
        let c = out.certificate().unwrap();
        prop_assert!(certificate_holds_at(ideal.generators(), c.c_value, &[t.cos(), t.sin()]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn negligibility_is_monotone_in_eps(k in 3i32..=5, e1 in -3i32..=0, bump in 1i32..=2) {
        let f = parse_expr(&format!("y^{k}/z"), 3, &Params::new()).unwrap();
        let opts = NegligibleOptions::default();
        let eps = 10f64.powi(e1);
        let delta = eps / 20.0;
        let lo = check_negligible_at(&f, &poles(), 3, 2, eps, delta, 1.0, &opts).unwrap();
        let hi = check_negligible_at(&f, &poles(), 3, 2, eps * 10f64.powi(bump), delta, 1.0, &opts).unwrap();
        if lo.verdict == Verdict::Pass {
            prop_assert_eq!(hi.verdict, Verdict::Pass);
        }
    }

    #[test]
    fn flat_times_tame_is_flat(k in 4i32..=6, tame in prop::sample::select(vec!["y/z", "x/z", "x*y/z^2"]), seed in 0u64..1000) {
        let p = Params::new();
        let region = Region::Cone { omega: poles(), delta: 0.1, r: 1.0 };
        let opts = SampleOptions { seed, ..Default::default() };
        let f = check_flat(&parse_expr(&format!("y^{k}/z"), 3, &p).unwrap(), &region, 2, &opts).unwrap();
        let s = check_tame(&parse_expr(tame, 3, &p).unwrap(), &region, 2, &opts).unwrap();
        prop_assert_eq!(f.verdict, Verdict::Pass);
        prop_assert_eq!(s.verdict, Verdict::Pass);
        let prod = check_flat_tame_product(&f, &s, &opts).unwrap();
        prop_assert_eq!(prod.verdict, Verdict::Pass);
        prop_assert!(prod.leibniz_consistent);
    }

    #[test]
    fn empty_allow_passes_vacuously((s, js) in (2u32..=3, 2usize..=3).prop_flat_map(|(m, n)| {
        let s = sig(m, n);
        (Just(s), prop::collection::vec(jet(s, 5), 1))
    })) {
        let gens = if s.n == 2 { "x^2 + y^2" } else { "x^2 + y^2 + z^2" };
        let target = if js[0].is_zero() { Jet::variable(s, 0) } else { js[0].clone() };
        let text = format!(
            r#"{{ "ideal": {{ "m": {}, "n": {}, "generators": ["{gens}"] }}, "target": "{target}", "terms": [], "F": "0" }}"#,
            s.m, s.n
        );
        let cert = ImplicationCertificate::from_json(&text).unwrap();
        let r = check_strong_global(&cert, &ImplicationOptions::default()).unwrap();
        prop_assert_eq!(r.label, "pass-vacuous");
    }

    #[test]
    fn verdict_meet_is_order_independent(vs in prop::collection::vec(
        prop::sample::select(vec![Verdict::Fail, Verdict::Inconclusive, Verdict::Pass]), 0..8), rot in 0usize..8) {
        let mut turned = vs.clone();
        if !turned.is_empty() {
            let r = rot % turned.len();
            turned.rotate_left(r);
        }
        turned.reverse();
        prop_assert_eq!(Verdict::all(vs.iter().copied()), Verdict::all(turned));
    }
}

#[test]
fn corpus_certificates_have_exact_zero_residuals() {
    let texts = [XY_CERT.to_string(), cubic_cert("x^3"), cubic_cert("x^2*y"), cubic_cert("x*y^2")];
    for text in texts {
        let cert = ImplicationCertificate::from_json(&text).unwrap();
        let r = check_strong_global(&cert, &ImplicationOptions::default()).unwrap();
        for d in r.directions.iter().filter(|d| !d.trivial) {
            assert!(d.residual.as_ref().is_some_and(|res| res.exact_zero), "{}: {:?}", r.target, d.omega);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let cert = ImplicationCertificate::from_json(XY_CERT).unwrap();
    let run = || serde_json::to_string(&check_strong_global(&cert, &ImplicationOptions::default()).unwrap()).unwrap();
    assert_eq!(run(), run());
}
