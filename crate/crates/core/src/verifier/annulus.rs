//! The annulus-scale conditions C, C* and C**.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::cover::{annulus_boxes, certify_plateau, verify_bounds, BoundOutcome, BoundSpec, BoxOptions, DomeRegion, Everywhere};
use super::Verdict;
use crate::error::{Error, Result};
use crate::geometry::Direction;
use crate::interval::Interval;
use crate::jetring::{Jet, MultiIndex};
use crate::rational::{from_f64_decimal, parse_decimal, pow_q, to_f64, Q};
use crate::symfun::{is_identically_zero, on_plateau, parse_expr, Expr, Params};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConditionVariant {
    #[serde(rename = "C")]
    C,
    #[serde(rename = "C*")]
    CStar,
    #[serde(rename = "C**")]
    CStarStar,
}

impl fmt::Display for ConditionVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionVariant::C => "C",
            ConditionVariant::CStar => "C*",
            ConditionVariant::CStarStar => "C**",
        })
    }
}

impl FromStr for ConditionVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "C" => Ok(ConditionVariant::C),
            "C*" | "CSTAR" => Ok(ConditionVariant::CStar),
            "C**" | "CSTARSTAR" => Ok(ConditionVariant::CStarStar),
            _ => Err(Error::Invalid(format!("unknown condition `{s}`; expected C, C* or C**"))),
        }
    }
}

/// A number written either as a JSON number or as a decimal/fraction string.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NumDoc {
    Num(f64),
    Text(String),
}

impl NumDoc {
    fn value(&self) -> Result<Q> {
        match self {
            NumDoc::Num(x) => from_f64_decimal(*x),
            NumDoc::Text(s) => parse_decimal(s),
        }
    }
}

/// The annulus part of a certificate. `F` and `S` may use the names `A`,
/// `eps`, `delta`, `r` and `rho`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AnnulusDoc {
    #[serde(rename = "A")]
    pub a: NumDoc,
    pub eps: NumDoc,
    pub delta: NumDoc,
    pub r: NumDoc,
    pub rho: NumDoc,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "S")]
    pub s: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusData {
    #[serde(serialize_with = "ser_q")]
    pub a: Q,
    #[serde(serialize_with = "ser_q")]
    pub eps: Q,
    #[serde(serialize_with = "ser_q")]
    pub delta: Q,
    #[serde(serialize_with = "ser_q")]
    pub r: Q,
    #[serde(serialize_with = "ser_q")]
    pub rho: Q,
    pub f_text: String,
    pub s_text: Vec<String>,
}

fn ser_q<S: serde::Serializer>(x: &Q, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(to_f64(x))
}

impl AnnulusData {
    pub fn new(a: Q, eps: Q, delta: Q, r: Q, rho: Q, f_text: &str, s_text: &[&str]) -> Result<Self> {
        let d = AnnulusData {
            a,
            eps,
            delta,
            r,
            rho,
            f_text: f_text.to_string(),
            s_text: s_text.iter().map(|s| s.to_string()).collect(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn from_doc(doc: &AnnulusDoc) -> Result<Self> {
        let d = AnnulusData {
            a: doc.a.value()?,
            eps: doc.eps.value()?,
            delta: doc.delta.value()?,
            r: doc.r.value()?,
            rho: doc.rho.value()?,
            f_text: doc.f.clone(),
            s_text: doc.s.clone(),
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        let zero = Q::from_integer(0.into());
        for (name, v) in [("A", &self.a), ("eps", &self.eps), ("delta", &self.delta), ("r", &self.r), ("rho", &self.rho)] {
            if *v <= zero {
                return Err(Error::Invalid(format!("{name} must be positive")));
            }
        }
        if self.rho > self.r {
            return Err(Error::Invalid(format!("rho = {} exceeds r = {}", to_f64(&self.rho), to_f64(&self.r))));
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params::from([
            ("A".to_string(), self.a.clone()),
            ("eps".to_string(), self.eps.clone()),
            ("delta".to_string(), self.delta.clone()),
            ("r".to_string(), self.r.clone()),
            ("rho".to_string(), self.rho.clone()),
        ])
    }

    pub fn f(&self, n: usize) -> Result<Expr> {
        parse_expr(&self.f_text, n, &self.params())
    }

    pub fn s(&self, n: usize) -> Result<Vec<Expr>> {
        self.s_text.iter().map(|t| parse_expr(t, n, &self.params())).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnulusReport {
    pub variant: ConditionVariant,
    pub params: AnnulusData,
    pub bounds: BoundOutcome,
    /// Cutoff plateau certification on the identity region.
    pub identity_plateau: Option<BoundOutcome>,
    /// The identity residual is the zero rational function on the plateau.
    pub residual_zero: bool,
    /// χ ≡ 1 on the identity region (C** only).
    pub chi_one: Option<bool>,
    /// Measured ‖χ‖_{C^m} (C** only).
    pub c_chi: Option<f64>,
    /// Ĉ = 2^m·C_χ, so that C* with constant A gives C** with ĈA + Ĉ.
    pub c_hat: Option<f64>,
    pub verdict: Verdict,
}

/// χ ∈ C³ with χ = 1 for 1/2 ≤ |x| ≤ 2 and χ = 0 outside 1/4 < |x| < 4.
pub fn chi_cutoff(n: usize) -> Expr {
    let r = Expr::norm((0..n).collect());
    Expr::prod(vec![
        Expr::cutoff(r.clone(), Expr::constant(Q::new(1.into(), 2.into()))),
        Expr::cutoff_complement(r, Expr::constant(Q::new(1.into(), 16.into()))),
    ])
}

fn derivative_specs(label: &str, e: &Expr, n: usize, m: u32, bound: impl Fn(u32) -> f64) -> Result<Vec<BoundSpec>> {
    MultiIndex::all_up_to(n, m)
        .into_iter()
        .map(|alpha| {
            Ok(BoundSpec {
                label: format!("|∂^{:?} {label}|", alpha.0),
                expr: e.derive(&alpha)?,
                bound: bound(alpha.degree()),
            })
        })
        .collect()
}

struct Identity {
    plateau: Option<BoundOutcome>,
    zero: bool,
    verdict: Verdict,
}

/// The residual vanishes for inner < |x| < outer with x/|x| within δ of Ω.
/// The cover is shrunk by a relative 10⁻⁹ so that closed boxes stay inside
/// the open annulus.
fn identity(res: &Expr, n: usize, inner: f64, outer: f64, omega: &[Direction], delta: f64, opts: &BoxOptions) -> Result<Identity> {
    if omega.is_empty() {
        return Ok(Identity { plateau: None, zero: true, verdict: Verdict::Pass });
    }
    let zero = is_identically_zero(&on_plateau(res), n)?;
    let cuts = res.cutoffs();
    let plateau = if cuts.is_empty() {
        None
    } else {
        let roots = annulus_boxes(n, inner * (1.0 + 1e-9), outer * (1.0 - 1e-9))?;
        Some(certify_plateau(&cuts, roots, &DomeRegion { omega, delta }, opts))
    };
    let mut verdict = plateau.as_ref().map_or(Verdict::Pass, |p| p.verdict);
    if !zero {
        verdict = verdict.meet(Verdict::Inconclusive);
    }
    Ok(Identity { plateau, zero, verdict })
}

fn residual(p: &Expr, terms: &[(Expr, Expr)], f: &Expr) -> Expr {
    let mut parts = vec![p.clone(), f.clone().neg()];
    parts.extend(terms.iter().map(|(s, q)| Expr::prod(vec![s.clone(), q.clone()]).neg()));
    Expr::sum(parts)
}

/// Verifies the bounds and the identity of the chosen condition for the
/// functions in `data`, with the jets p and Q_l and the direction set Ω.
pub fn check_annulus_condition(
    variant: ConditionVariant,
    data: &AnnulusData,
    p: &Jet,
    qs: &[Jet],
    omega: &[Direction],
    opts: &BoxOptions,
) -> Result<AnnulusReport> {
    let sig = p.sig();
    let (n, m) = (sig.n, sig.m);
    data.validate()?;
    if qs.len() != data.s_text.len() {
        return Err(Error::Invalid(format!("{} functions S for {} jets Q", data.s_text.len(), qs.len())));
    }
    for w in omega {
        if w.n() != n {
            return Err(Error::DimensionMismatch { expected: n, got: w.n() });
        }
    }
    let f = data.f(n)?;
    let ss = data.s(n)?;
    let (a, eps, rho) = (to_f64(&data.a), to_f64(&data.eps), to_f64(&data.rho));
    let delta = to_f64(&data.delta);
    let pe = Expr::from_jet(p);
    let qe: Vec<Expr> = qs.iter().map(Expr::from_jet).collect();
    let mut report = AnnulusReport {
        variant,
        params: data.clone(),
        bounds: BoundOutcome { verdict: Verdict::Pass, records: vec![], witness: None, unresolved: 0, boxes: 0, max_depth: 0 },
        identity_plateau: None,
        residual_zero: false,
        chi_one: None,
        c_chi: None,
        c_hat: None,
        verdict: Verdict::Inconclusive,
    };
    let mut specs = Vec::new();
    let id;
    match variant {
        ConditionVariant::C => {
            specs.extend(derivative_specs("F", &f, n, m, |k| eps * rho.powi(m as i32 - k as i32))?);
            for (l, s) in ss.iter().enumerate() {
                specs.extend(derivative_specs(&format!("S_{}", l + 1), s, n, m, |k| a * rho.powi(-(k as i32)))?);
            }
            report.bounds = verify_bounds(&specs, annulus_boxes(n, rho / 4.0, 4.0 * rho)?, &Everywhere, opts);
            let terms: Vec<(Expr, Expr)> = ss.into_iter().zip(qe).collect();
            id = identity(&residual(&pe, &terms, &f), n, rho / 2.0, 2.0 * rho, omega, delta, opts)?;
        }
        ConditionVariant::CStar | ConditionVariant::CStarStar => {
            let eps_rho_m = &data.eps * pow_q(&data.rho, m);
            let ft = Expr::prod(vec![Expr::constant(eps_rho_m.recip()), f.scale_vars(&data.rho)]);
            let st: Vec<Expr> =
                ss.iter().map(|s| Expr::prod(vec![Expr::constant(data.a.recip()), s.scale_vars(&data.rho)])).collect();
            let q_rho: Vec<Expr> = qe.iter().map(|q| q.scale_vars(&data.rho)).collect();
            let p_rho = pe.scale_vars(&data.rho);
            let terms: Vec<(Expr, Expr)> = st
                .iter()
                .zip(&q_rho)
                .map(|(s, q)| (Expr::prod(vec![Expr::constant(data.a.clone()), s.clone()]), q.clone()))
                .collect();
            let scaled_f = Expr::prod(vec![Expr::constant(eps_rho_m.clone()), ft.clone()]);
            id = identity(&residual(&p_rho, &terms, &scaled_f), n, 0.5, 2.0, omega, delta, opts)?;
            if variant == ConditionVariant::CStar {
                specs.extend(derivative_specs("F̃", &ft, n, m, |_| 1.0)?);
                for (l, s) in st.iter().enumerate() {
                    specs.extend(derivative_specs(&format!("S̃_{}", l + 1), s, n, m, |_| 1.0)?);
                }
            } else {
                let chi = chi_cutoff(n);
                let (chi_ok, c_chi) = chi_norm(&chi, n, m, opts)?;
                let c_hat = 2f64.powi(m as i32) * c_chi;
                let bound = c_hat * a + c_hat;
                specs.extend(derivative_specs("F*", &Expr::prod(vec![chi.clone(), ft]), n, m, |_| bound)?);
                for (l, s) in st.iter().enumerate() {
                    let s_star = Expr::prod(vec![Expr::constant(data.a.clone()), chi.clone(), s.clone()]);
                    specs.extend(derivative_specs(&format!("S*_{}", l + 1), &s_star, n, m, |_| bound)?);
                }
                // F* = χF̃ and S* = AχS̃ turn the C* identity into the C**
                // identity wherever χ = 1; χ is radial, so it suffices to
                // evaluate it on the segment t·e₁ with 1/2 < t < 2
                let mut seg = vec![Interval::ZERO; n];
                seg[0] = Interval::new(0.5 * (1.0 + 1e-9), 2.0 * (1.0 - 1e-9));
                let chi_one = matches!(chi.eval_interval(&seg), Ok(v) if v.lo == 1.0 && v.hi == 1.0);
                report.c_chi = Some(c_chi);
                report.c_hat = Some(c_hat);
                report.chi_one = Some(chi_one);
                if !chi_ok {
                    report.c_chi = None;
                }
            }
            report.bounds = verify_bounds(&specs, annulus_boxes(n, 0.25, 4.0)?, &Everywhere, opts);
        }
    }
    report.identity_plateau = id.plateau;
    report.residual_zero = id.zero;
    let chi_ok = match (report.chi_one, report.c_chi) {
        (None, _) | (Some(true), Some(_)) => Verdict::Pass,
        _ => Verdict::Inconclusive,
    };
    report.verdict = Verdict::all([report.bounds.verdict, id.verdict, chi_ok]);
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceDraw {
    pub a: f64,
    pub eps: f64,
    pub delta: f64,
    pub rho: f64,
    pub c: Verdict,
    pub c_star: Verdict,
    pub agree: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CoherenceReport {
    pub draws: Vec<CoherenceDraw>,
    pub agree: bool,
    pub passes: usize,
    pub fails: usize,
    pub inconclusive: usize,
}

fn dec(x: f64) -> Result<Q> {
    from_f64_decimal(x)
}

/// Verified bound for ‖χ‖_{C^m} on the annulus 1/4 < |x| < 4: a loose cap
/// first, then smaller caps while they still verify on a small budget.
fn chi_norm(chi: &Expr, n: usize, m: u32, opts: &BoxOptions) -> Result<(bool, f64)> {
    let run = |cap: f64, opts: &BoxOptions| -> Result<(bool, f64)> {
        let specs = derivative_specs("χ", chi, n, m, |_| cap)?;
        let out = verify_bounds(&specs, annulus_boxes(n, 0.25, 4.0)?, &Everywhere, opts);
        Ok((out.verdict == Verdict::Pass, out.records.iter().map(|r| r.sup_bound).fold(0.0, f64::max)))
    };
    let (ok, mut best) = run(1e6, opts)?;
    let tight = BoxOptions { max_total_boxes: opts.max_total_boxes.min(40_000), ..opts.clone() };
    if !ok {
        return Ok((false, best));
    }
    for _ in 0..6 {
        match run(best * 0.6, &tight)? {
            (true, sup) if sup < best => best = sup,
            _ => break,
        }
    }
    Ok((true, best))
}

/// Runs C and C* on `draws` random perturbations of `data`: A·10^{U(−10,0)},
/// ε·10^{U(−1,1)}, δ·10^{U(−1,1)} and ρ = r·U(0.05, 1).
pub fn scale_coherence(
    data: &AnnulusData,
    p: &Jet,
    qs: &[Jet],
    omega: &[Direction],
    draws: usize,
    seed: u64,
    opts: &BoxOptions,
) -> Result<CoherenceReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(draws);
    for _ in 0..draws {
        let a = to_f64(&data.a) * 10f64.powf(rng.gen_range(-10.0..0.0));
        let eps = to_f64(&data.eps) * 10f64.powf(rng.gen_range(-1.0..1.0));
        let delta = to_f64(&data.delta) * 10f64.powf(rng.gen_range(-1.0..1.0));
        let rho = to_f64(&data.r) * rng.gen_range(0.05..1.0);
        let mut d = data.clone();
        d.a = dec(a)?;
        d.eps = dec(eps)?;
        d.delta = dec(delta)?;
        d.rho = dec(rho)?.min(d.r.clone());
        let c = check_annulus_condition(ConditionVariant::C, &d, p, qs, omega, opts)?.verdict;
        let c_star = check_annulus_condition(ConditionVariant::CStar, &d, p, qs, omega, opts)?.verdict;
        out.push(CoherenceDraw { a, eps, delta, rho, c, c_star, agree: c == c_star });
    }
    Ok(CoherenceReport {
        agree: out.iter().all(|d| d.agree),
        passes: out.iter().filter(|d| d.c.is_pass()).count(),
        fails: out.iter().filter(|d| d.c == Verdict::Fail).count(),
        inconclusive: out.iter().filter(|d| d.c == Verdict::Inconclusive).count(),
        draws: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetring::{jet_parse, RingSignature};
    use crate::rational::q_frac;

    const F: &str = "y^3/z*theta(norm(x, y), delta*rho)";
    const S1: &str = "-(y/z)*theta(norm(x, y), norm(z))";

    fn setup(eps: Q, s1: &str) -> (AnnulusData, Jet, Vec<Jet>, Vec<Direction>) {
        let sig = RingSignature::new(2, 3).unwrap();
        let delta = &eps * q_frac(1, 1_000_000_000);
        let rho = &delta / Q::from_integer(2.into());
        let data = AnnulusData::new(Q::from_integer(1_000_000_000.into()), eps, delta.clone(), delta, rho, F, &[s1]).unwrap();
        let p = jet_parse("x*y", sig).unwrap();
        let q = jet_parse("y^2 - x*z", sig).unwrap();
        let omega = vec![Direction::axis(3, 2, 1.0), Direction::axis(3, 2, -1.0)];
        (data, p, vec![q], omega)
    }

    #[test]
    fn intro_data_satisfies_all_three() {
        let (d, p, qs, om) = setup(q_frac(1, 1000), S1);
        for v in [ConditionVariant::C, ConditionVariant::CStar, ConditionVariant::CStarStar] {
            let r = check_annulus_condition(v, &d, &p, &qs, &om, &Default::default()).unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{v}: {}", serde_json::to_string(&r).unwrap());
            assert!(r.residual_zero);
        }
    }

    #[test]
    fn literal_s1_is_singular() {
        let (d, p, qs, om) = setup(q_frac(1, 1000), "-(y/z)*theta(norm(x, y), rho)");
        let r = check_annulus_condition(ConditionVariant::C, &d, &p, &qs, &om, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert!(r.bounds.witness.unwrap().label.contains("S_1"));
    }

    #[test]
    fn small_a_fails() {
        let (mut d, p, qs, om) = setup(q_frac(1, 1000), S1);
        d.a = q_frac(1, 10);
        let r = check_annulus_condition(ConditionVariant::C, &d, &p, &qs, &om, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn rho_above_r_is_invalid() {
        let (mut d, ..) = setup(q_frac(1, 1000), S1);
        d.rho = &d.r * Q::from_integer(2.into());
        assert!(d.validate().is_err());
        assert!("C**".parse::<ConditionVariant>().is_ok() && "D".parse::<ConditionVariant>().is_err());
    }
}
