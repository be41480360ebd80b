//! Strong directional and global implication certificates.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::annulus::{AnnulusData, AnnulusDoc};
use super::cover::{certify_plateau, BoundOutcome, BoxOptions, DomeRegion, RadialBox};
use super::negligible::{check_negligible, NegligibilityCertificate, NegligibleOptions};
use super::{Verdict, Witness};
use crate::directions::{allow_overapprox, AllowResult, DirectionSet, PatchStatus};
use crate::error::{Error, Result};
use crate::geometry::{dist_to_set, dome_cover, Direction, SpherePatch};
use crate::ideal::{IdealDoc, JetIdeal};
use crate::interval::Interval;
use crate::jetring::{jet_parse, Jet, MultiIndex};
use crate::rational::Q;
use crate::symfun::{is_identically_zero, on_plateau, parse_expr, Expr, Params};

/// One term S_l·Q_l with its declared tameness constant C_l.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TermDoc {
    #[serde(rename = "Q")]
    pub q: String,
    #[serde(rename = "S")]
    pub s: String,
    #[serde(rename = "C")]
    pub c: f64,
}

/// The JSON form of an implication certificate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CertificateDoc {
    pub ideal: IdealDoc,
    pub target: String,
    #[serde(default)]
    pub terms: Vec<TermDoc>,
    #[serde(rename = "F")]
    pub f: String,
    /// `"global"` or a list of directions, each an array of numbers.
    #[serde(default = "global_scope")]
    pub scope: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub annulus: Option<AnnulusDoc>,
}

fn global_scope() -> serde_json::Value {
    serde_json::Value::String("global".into())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Global,
    Directions(Vec<Direction>),
}

#[derive(Clone, Debug)]
pub struct Term {
    pub q: Jet,
    pub s: Expr,
    pub c: f64,
}

#[derive(Clone, Debug)]
pub struct ImplicationCertificate {
    pub doc: CertificateDoc,
    pub ideal: JetIdeal,
    pub target: Jet,
    pub terms: Vec<Term>,
    pub f: Expr,
    pub scope: Scope,
    pub annulus: Option<AnnulusData>,
}

fn parse_scope(v: &serde_json::Value, n: usize) -> Result<Scope> {
    let bad = || Error::Invalid(format!("scope must be \"global\" or a list of directions, got {v}"));
    match v {
        serde_json::Value::String(s) if s == "global" => Ok(Scope::Global),
        serde_json::Value::Array(items) => {
            let mut dirs = Vec::new();
            for it in items {
                let coords: Vec<f64> = match it {
                    serde_json::Value::Array(c) => c.iter().map(|x| x.as_f64().ok_or_else(bad)).collect::<Result<_>>()?,
                    serde_json::Value::String(s) => s
                        .trim_matches(|c| c == '(' || c == ')')
                        .split(',')
                        .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
                        .collect::<Result<_>>()?,
                    _ => return Err(bad()),
                };
                if coords.len() != n {
                    return Err(Error::DimensionMismatch { expected: n, got: coords.len() });
                }
                dirs.push(Direction::new(coords)?);
            }
            Ok(Scope::Directions(dirs))
        }
        _ => Err(bad()),
    }
}

impl ImplicationCertificate {
    pub fn from_doc(doc: &CertificateDoc) -> Result<Self> {
        let ideal = JetIdeal::from_doc(&doc.ideal)?;
        let sig = ideal.sig();
        let n = sig.n;
        let target = jet_parse(&doc.target, sig)?;
        let params = Params::new();
        let terms = doc
            .terms
            .iter()
            .map(|t| {
                if !(t.c > 0.0) {
                    return Err(Error::Invalid(format!("tameness constant must be positive, got {}", t.c)));
                }
                Ok(Term { q: jet_parse(&t.q, sig)?, s: parse_expr(&t.s, n, &params)?, c: t.c })
            })
            .collect::<Result<Vec<_>>>()?;
        let f = parse_expr(&doc.f, n, &params)?;
        let scope = parse_scope(&doc.scope, n)?;
        let annulus = doc.annulus.as_ref().map(AnnulusData::from_doc).transpose()?;
        if let Some(a) = &annulus {
            if a.s_text.len() != terms.len() {
                return Err(Error::Invalid(format!(
                    "annulus data lists {} functions S but the certificate has {} terms",
                    a.s_text.len(),
                    terms.len()
                )));
            }
        }
        Ok(ImplicationCertificate { doc: doc.clone(), ideal, target, terms, f, scope, annulus })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CertificateDoc = serde_json::from_str(text).map_err(|e| Error::Parse { pos: e.column(), msg: e.to_string() })?;
        Self::from_doc(&doc)
    }

    pub fn n(&self) -> usize {
        self.ideal.sig().n
    }

    pub fn m(&self) -> u32 {
        self.ideal.sig().m
    }

    fn check_members(&self) -> Result<()> {
        for t in &self.terms {
            if !self.ideal.contains(&t.q)? {
                return Err(Error::NotMember(t.q.to_string()));
            }
        }
        if !self.target.constant_term().is_zero() {
            return Err(Error::NonzeroConstant(self.target.to_string()));
        }
        Ok(())
    }

    /// p − Σ S_l·Q_l − F.
    pub fn residual(&self) -> Expr {
        let mut parts = vec![Expr::from_jet(&self.target)];
        for t in &self.terms {
            parts.push(Expr::prod(vec![t.s.clone(), Expr::from_jet(&t.q)]).neg());
        }
        parts.push(self.f.clone().neg());
        Expr::sum(parts)
    }

    /// `⟨g₁, g₂, …⟩ₘ` in math notation, generators in the order written.
    pub fn ideal_label(&self) -> String {
        let gens: Vec<String> = self.doc.ideal.generators.iter().map(|g| math_notation(g)).collect();
        let sub: String = self.m().to_string().chars().map(|c| SUBSCRIPTS[c.to_digit(10).unwrap() as usize]).collect();
        format!("⟨{}⟩{sub}", gens.join(", "))
    }

    /// "p ∈ cl(I)" in math notation.
    pub fn membership_label(&self) -> String {
        format!("{} ∈ cl({})", math_notation(&self.target.to_string()), self.ideal_label())
    }
}

const SUPERSCRIPTS: [char; 10] = ['⁰', '¹', '²', '³', '⁴', '⁵', '⁶', '⁷', '⁸', '⁹'];
const SUBSCRIPTS: [char; 10] = ['₀', '₁', '₂', '₃', '₄', '₅', '₆', '₇', '₈', '₉'];

/// `y^2 - x*z` ↦ `y² − xz`.
pub fn math_notation(text: &str) -> String {
    let mut out = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '*' => {}
            '-' => out.push('−'),
            '^' => {
                while let Some(d) = chars.peek().and_then(|d| d.to_digit(10)) {
                    out.push(SUPERSCRIPTS[d as usize]);
                    chars.next();
                }
            }
            _ => out.push(c),
        }
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct ImplicationOptions {
    pub negligible: NegligibleOptions,
    pub boxes: BoxOptions,
    /// δ_ω is tried at 1/4, 1/8, … this many times.
    pub delta_halvings: u32,
}

impl Default for ImplicationOptions {
    fn default() -> Self {
        ImplicationOptions { negligible: Default::default(), boxes: Default::default(), delta_halvings: 10 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TameRecord {
    pub s: String,
    pub declared: f64,
    /// Interval bound on max_α sup |∂^α S(x)|·|x|^{|α|} over the cone.
    pub measured: Option<f64>,
    pub per_order: Vec<f64>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRecord {
    pub expr: String,
    /// p − ΣS_lQ_l − F with every cutoff on its plateau is the zero
    /// rational function.
    pub exact_zero: bool,
    pub plateau: Option<BoundOutcome>,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DirectionalReport {
    pub omega: Direction,
    pub delta_omega: f64,
    pub r_omega: f64,
    /// ω is forbidden: F = p, S = 0 works and the certificate is not used.
    pub trivial: bool,
    pub local_allow: Vec<Direction>,
    pub negligibility: Option<NegligibilityCertificate>,
    pub tameness: Vec<TameRecord>,
    pub residual: Option<ResidualRecord>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

fn dome_patches(n: usize, w: &Direction, delta: f64) -> Result<Vec<SpherePatch>> {
    dome_cover(n, std::slice::from_ref(w), delta, (delta / 4.0).min(0.05))
}

/// sup of |e| over directions in the patches, refining where the
/// enclosure is undefined; None if it stays undefined.
fn patch_sup(e: &Expr, patches: &[SpherePatch], keep: &dyn Fn(&SpherePatch) -> bool) -> Option<f64> {
    if e.is_zero() {
        return Some(0.0);
    }
    let mut sup = 0.0f64;
    let mut stack: Vec<(SpherePatch, u32)> = patches.iter().map(|p| (p.clone(), 0)).collect();
    while let Some((p, k)) = stack.pop() {
        match e.eval_interval(&p.enclosure()) {
            Ok(v) if v.mag().is_finite() => sup = sup.max(v.mag()),
            _ if k < 16 => stack.extend(p.split().into_iter().filter(|c| keep(c)).map(|c| (c, k + 1))),
            _ => return None,
        }
    }
    Some(sup)
}

fn is_degree(e: &Expr, d: i64) -> bool {
    e.homogeneous_degree() == Some(Q::from_integer(d.into()))
}

/// |∂^α S| ≤ C|x|^{−|α|} on Γ(ω, δ, r) for S homogeneous of degree 0,
/// where it reduces to a sup over the dome.
fn tame_record(t: &Term, n: usize, m: u32, w: &Direction, patches: &[SpherePatch], keep: &dyn Fn(&SpherePatch) -> bool) -> Result<Option<TameRecord>> {
    let mut rec = TameRecord {
        s: t.s.to_string(),
        declared: t.c,
        measured: None,
        per_order: vec![0.0; m as usize + 1],
        verdict: Verdict::Inconclusive,
        witness: None,
    };
    if t.s.is_zero() {
        rec.measured = Some(0.0);
        rec.verdict = Verdict::Pass;
        return Ok(Some(rec));
    }
    if !is_degree(&t.s, 0) || t.s.has_gauge() {
        return Ok(Some(rec));
    }
    for alpha in MultiIndex::all_up_to(n, m) {
        let d = t.s.derive(&alpha)?;
        let Some(sup) = patch_sup(&d, patches, keep) else {
            // S is not C^m on this cone
            return Ok(None);
        };
        let slot = &mut rec.per_order[alpha.degree() as usize];
        *slot = slot.max(sup);
        if sup > t.c * (1.0 + 1e-9) && rec.witness.is_none() {
            if let Ok(v) = d.eval_f64(&w.0) {
                if v.abs() > t.c * (1.0 + 1e-9) {
                    rec.witness = Some(Witness {
                        label: format!("|∂^{:?} S(x)|·|x|^{} ≤ C", alpha.0, alpha.degree()),
                        point: w.0.clone(),
                        value: v.abs(),
                        bound: t.c,
                    });
                }
            }
        }
    }
    let measured = rec.per_order.iter().copied().fold(0.0, f64::max);
    rec.measured = Some(measured);
    rec.verdict = if measured <= t.c * (1.0 + 1e-9) {
        Verdict::Pass
    } else if rec.witness.is_some() {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(Some(rec))
}

/// F ∈ C^m on the cone: every derivative of every homogeneous piece has a
/// finite enclosure on the dome. Non-homogeneous F is left to the
/// negligibility check.
fn f_is_defined(f: &Expr, n: usize, m: u32, patches: &[SpherePatch], keep: &dyn Fn(&SpherePatch) -> bool) -> Result<bool> {
    let Some(pieces) = f.homogeneous_split() else { return Ok(true) };
    for (_, t) in pieces {
        for alpha in MultiIndex::all_up_to(n, m) {
            if patch_sup(&t.derive(&alpha)?, patches, keep).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn residual_record(cert: &ImplicationCertificate, w: &Direction, delta: f64, patches: &[SpherePatch], opts: &BoxOptions) -> Result<ResidualRecord> {
    let n = cert.n();
    let res = cert.residual();
    let exact_zero = is_identically_zero(&on_plateau(&res), n)?;
    let cuts = res.cutoffs();
    let mut verdict = Verdict::Pass;
    let mut plateau = None;
    if !cuts.is_empty() {
        if cuts.iter().any(|c| c.arg.homogeneous_degree().is_none() || c.arg.homogeneous_degree() != c.scale.homogeneous_degree()) {
            verdict = Verdict::Inconclusive;
        } else {
            // degree-0 cutoff arguments depend on the direction only
            let roots: Vec<RadialBox> = patches.iter().map(|p| RadialBox::new(p.clone(), Interval::point(1.0))).collect();
            let omega = [w.clone()];
            let out = certify_plateau(&cuts, roots, &DomeRegion { omega: &omega, delta }, opts);
            verdict = out.verdict;
            plateau = Some(out);
        }
    }
    let mut witness = None;
    if !exact_zero {
        // look for a nonzero value at half radius over the dome
        let probes = std::iter::once(w.clone()).chain(patches.iter().flat_map(|p| p.grid(3))).filter(|d| d.dist(w) < delta);
        for d in probes {
            let x: Vec<f64> = d.0.iter().map(|c| c * 0.5).collect();
            if let Ok(v) = res.eval_f64(&x) {
                if v.abs() > 1e-9 {
                    witness = Some(Witness { label: "p − ΣS_lQ_l − F = 0".into(), point: x, value: v.abs(), bound: 0.0 });
                    break;
                }
            }
        }
        verdict = if witness.is_some() { Verdict::Fail } else { verdict.meet(Verdict::Inconclusive) };
    }
    Ok(ResidualRecord { expr: res.to_string(), exact_zero, plateau, verdict, witness })
}

/// Allowed directions within δ of ω, or None when the allowed set near ω
/// is not known to be a finite set of points.
fn local_allow(allow: &AllowResult, w: &Direction, delta: f64) -> Option<Vec<Direction>> {
    if let DirectionSet::Sphere { patches, isolated: false, .. } = &allow.set {
        if patches.iter().any(|p| p.status == PatchStatus::CandidateAllowed && p.patch.dist_lower(&w.0) < delta) {
            return None;
        }
    }
    Some(allow.directions().into_iter().filter(|d| d.dist(w) < delta).collect())
}

/// Checks that I strongly implies p in the direction ω: Q_l ∈ I, F
/// negligible for Allow(I) ∩ D(ω, δ_ω), |∂^α S_l| ≤ C_l|x|^{−|α|} and
/// p = ΣS_lQ_l + F on Γ(ω, δ_ω, 1).
pub fn check_strong_directional(cert: &ImplicationCertificate, w: &Direction, opts: &ImplicationOptions) -> Result<DirectionalReport> {
    let (n, m) = (cert.n(), cert.m());
    if w.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: w.n() });
    }
    cert.check_members()?;
    let allow = allow_overapprox(&cert.ideal)?;
    let mut report = DirectionalReport {
        omega: w.clone(),
        delta_omega: 0.25,
        r_omega: 1.0,
        trivial: false,
        local_allow: Vec::new(),
        negligibility: None,
        tameness: Vec::new(),
        residual: None,
        verdict: Verdict::Inconclusive,
        notes: Vec::new(),
    };
    for step in 0..=opts.delta_halvings {
        let delta = 0.25 * 0.5f64.powi(step as i32);
        report.delta_omega = delta;
        let Some(local) = local_allow(&allow, w, delta) else {
            report.notes.push(format!("allowed set within δ = {delta} of ω is not certified to be isolated points"));
            continue;
        };
        if local.is_empty() {
            report.trivial = true;
            report.verdict = Verdict::Pass;
            report.notes.push("ω is forbidden: F = p and S = 0 work on a cone without allowed directions".into());
            return Ok(report);
        }
        let patches = dome_patches(n, w, delta)?;
        let keep = |p: &SpherePatch| p.dist_lower(&w.0) < delta;
        let mut tame = Vec::new();
        let mut defined = f_is_defined(&cert.f, n, m, &patches, &keep)?;
        for t in &cert.terms {
            match tame_record(t, n, m, w, &patches, &keep)? {
                Some(r) => tame.push(r),
                None => defined = false,
            }
        }
        if !defined {
            report.notes.push(format!("certificate functions are not C^{m} on the cone with δ = {delta}"));
            continue;
        }
        let residual = residual_record(cert, w, delta, &patches, &opts.boxes)?;
        let neg = check_negligible(&cert.f, &local, n, m, &opts.negligible)?;
        let verdict = Verdict::all(tame.iter().map(|t| t.verdict).chain([residual.verdict, neg.verdict]));
        for t in &tame {
            if t.verdict != Verdict::Pass && t.measured.is_none() {
                report.notes.push(format!("{} is not homogeneous of degree 0; tameness left unverified", t.s));
            }
        }
        report.local_allow = local;
        report.tameness = tame;
        report.residual = Some(residual);
        report.negligibility = Some(neg);
        report.verdict = verdict;
        return Ok(report);
    }
    report.verdict = Verdict::Inconclusive;
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalReport {
    pub ideal: String,
    pub target: String,
    pub allow: serde_json::Value,
    pub vacuous: bool,
    pub directions: Vec<DirectionalReport>,
    pub verdict: Verdict,
    pub label: &'static str,
    /// Theorem-backed conclusions drawn from a passing verdict.
    pub conclusions: Vec<String>,
    pub notes: Vec<String>,
}

/// Runs the directional check for every allowed direction. A pass means I
/// strongly implies p in every allowed direction, hence strongly implies p,
/// hence implies p: p ∈ cl(I).
pub fn check_strong_global(cert: &ImplicationCertificate, opts: &ImplicationOptions) -> Result<GlobalReport> {
    cert.check_members()?;
    let allow = allow_overapprox(&cert.ideal)?;
    let mut report = GlobalReport {
        ideal: cert.ideal_label(),
        target: cert.target.to_string(),
        allow: allow.to_json(),
        vacuous: false,
        directions: Vec::new(),
        verdict: Verdict::Inconclusive,
        label: "inconclusive",
        conclusions: Vec::new(),
        notes: Vec::new(),
    };
    let member = cert.ideal.contains(&cert.target)?;
    let conclude = |report: &mut GlobalReport| {
        report.conclusions.push(cert.membership_label());
        if !member {
            report.conclusions.push("ideal not closed".into());
        }
    };
    if allow.is_empty() {
        report.vacuous = true;
        report.verdict = Verdict::Pass;
        report.label = Verdict::Pass.label(true);
        report.notes.push("Allow(I) is empty, so every jet of 𝒫₀^m is implied".into());
        conclude(&mut report);
        return Ok(report);
    }
    if let DirectionSet::Sphere { isolated: false, .. } = &allow.set {
        report.notes.push("allowed set is not certified to be isolated points".into());
        return Ok(report);
    }
    let allowed = allow.directions();
    let targets = match &cert.scope {
        Scope::Global => allowed,
        Scope::Directions(list) => {
            for a in &allowed {
                if dist_to_set(&a.0, list) > 1e-9 {
                    return Err(Error::UncoveredDirection(format!("{:?}", a.0)));
                }
            }
            list.clone()
        }
    };
    for w in &targets {
        report.directions.push(check_strong_directional(cert, w, opts)?);
    }
    report.verdict = Verdict::all(report.directions.iter().map(|d| d.verdict));
    report.label = report.verdict.label(false);
    if report.verdict.is_pass() {
        conclude(&mut report);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xy_cert(scope: &str) -> ImplicationCertificate {
        ImplicationCertificate::from_json(&format!(
            r#"{{"ideal": {{"m": 2, "n": 3, "generators": ["x^2", "y^2 - x*z"]}},
                "target": "x*y",
                "terms": [{{"Q": "y^2 - x*z", "S": "-y/z", "C": 10}}],
                "F": "y^3/z", "scope": {scope}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn xy_certificate_passes_globally() {
        let r = check_strong_global(&xy_cert(r#""global""#), &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{}", serde_json::to_string_pretty(&r).unwrap());
        assert_eq!(r.directions.len(), 2);
        assert!(r.conclusions.iter().any(|c| c == "ideal not closed"));
        let d = &r.directions[0];
        assert!(d.residual.as_ref().unwrap().exact_zero);
        assert!(d.tameness[0].measured.unwrap() <= 10.0);
    }

    #[test]
    fn labels_use_math_notation() {
        let c = xy_cert(r#""global""#);
        assert_eq!(c.membership_label(), "xy ∈ cl(⟨x², y² − xz⟩₂)");
        assert_eq!(math_notation("x^12*y - 3*z"), "x¹²y − 3z");
    }

    #[test]
    fn missing_pole_is_uncovered() {
        let e = check_strong_global(&xy_cert("[[0, 0, 1]]"), &Default::default()).unwrap_err();
        assert_eq!(e.code(), "uncovered_direction");
    }

    #[test]
    fn forbidden_direction_is_trivial() {
        let r = check_strong_directional(&xy_cert(r#""global""#), &Direction::axis(3, 0, 1.0), &Default::default()).unwrap();
        assert!(r.trivial && r.verdict.is_pass());
    }

    #[test]
    fn non_member_is_rejected() {
        let cert = ImplicationCertificate::from_json(
            r#"{"ideal": {"m": 2, "n": 3, "generators": ["x^2", "y^2 - x*z"]},
                "target": "x*y", "terms": [{"Q": "x*y", "S": "1", "C": 1}], "F": "0"}"#,
        )
        .unwrap();
        let e = check_strong_global(&cert, &Default::default()).unwrap_err();
        assert_eq!(e.code(), "not_member");
    }

    #[test]
    fn wrong_identity_fails() {
        let cert = ImplicationCertificate::from_json(
            r#"{"ideal": {"m": 2, "n": 3, "generators": ["x^2", "y^2 - x*z"]},
                "target": "x*y", "terms": [{"Q": "y^2 - x*z", "S": "y/z", "C": 10}], "F": "y^3/z"}"#,
        )
        .unwrap();
        let r = check_strong_global(&cert, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
    }
}
