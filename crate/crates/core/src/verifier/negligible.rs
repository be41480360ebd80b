//! Negligibility of F for a finite direction set Ω.
//!
//! F is split into structurally homogeneous pieces T_j of degree d_j. On
//! the cone x = tω, 0 < t < r, ∂^α T_j(x) = t^{d_j−|α|}·∂^α T_j(ω), so
//!
//!   |∂^α F(x)| / |x|^{m−|α|} ≤ Σ_j r^{d_j−m}·H_{α,j},   H_{α,j} = sup_{D(Ω,δ)} |∂^α T_j|
//!
//! whenever every piece with d_j < m has H = 0. The sups are interval
//! bounds over a cover of the dome. The Taylor condition is discharged from
//! these bounds: inside one convex cone by Taylor's theorem, and between
//! two cones by |x − y| ≥ σ·max(|x|, |y|) where σ comes from the angular gap.

use serde::Serialize;

use super::{Verdict, Witness};
use crate::error::{Error, Result};
use crate::geometry::{dome_cover, Direction, SpherePatch};
use crate::interval::Interval;
use crate::jetring::MultiIndex;
use crate::rational::{to_f64, Q};
use crate::symfun::Expr;

#[derive(Clone, Debug, Serialize)]
pub struct NegligibleOptions {
    pub eps_grid: Vec<f64>,
    /// Number of δ values tried per ε.
    pub delta_steps: usize,
    /// r is tried at 1, 1/2, …, 2^{−r_halvings}.
    pub r_halvings: i32,
    /// Extra subdivision allowed below the dome cover when an enclosure
    /// is undefined.
    pub refine_depth: u32,
    /// Relative slack on bound comparisons.
    pub tolerance: f64,
}

impl Default for NegligibleOptions {
    fn default() -> Self {
        NegligibleOptions {
            eps_grid: vec![1.0, 0.1, 0.01, 0.001],
            delta_steps: 24,
            r_halvings: 60,
            refine_depth: 24,
            tolerance: 1e-9,
        }
    }
}

/// Condition (a) for one multi-index: sup of |∂^α F|/|x|^{m−|α|}.
#[derive(Clone, Debug, Serialize)]
pub struct AlphaBound {
    pub alpha: Vec<u32>,
    pub sup_ratio: f64,
    pub bound: f64,
}

/// Condition (b) for one multi-index: bounds on the Taylor remainder ratio
/// |R_α(x, y)| / |x − y|^{m−|α|} for x, y in one cone and in two cones.
#[derive(Clone, Debug, Serialize)]
pub struct TaylorBound {
    pub alpha: Vec<u32>,
    pub within: f64,
    pub across: Option<f64>,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NegligibleAttempt {
    pub eps: f64,
    pub delta: f64,
    pub r: f64,
    pub verdict: Verdict,
    pub cond_a: Vec<AlphaBound>,
    pub cond_b: Vec<TaylorBound>,
    pub witness: Option<Witness>,
    /// δ values tried before this one was accepted (or the search ended).
    pub delta_tries: usize,
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct NegligibilityCertificate {
    pub f: String,
    pub m: u32,
    pub omega: Vec<Direction>,
    pub vacuous: bool,
    pub attempts: Vec<NegligibleAttempt>,
    pub verdict: Verdict,
    pub label: &'static str,
}

/// Homogeneous pieces with the dome sups of all their derivatives.
struct Analysis {
    degrees: Vec<f64>,
    alphas: Vec<MultiIndex>,
    /// h[a][j]: bound on sup over the dome of |∂^{alphas[a]} T_j|;
    /// None where no finite enclosure was found.
    h: Vec<Vec<Option<f64>>>,
}

fn split(f: &Expr) -> Option<Vec<(Q, Expr)>> {
    if f.has_gauge() {
        return None;
    }
    f.homogeneous_split()
}

fn dome_sup(e: &Expr, patches: &[SpherePatch], meets: &dyn Fn(&SpherePatch) -> bool, extra: u32) -> Option<f64> {
    if e.is_zero() {
        return Some(0.0);
    }
    let mut sup = 0.0f64;
    let mut stack: Vec<(SpherePatch, u32)> = patches.iter().map(|p| (p.clone(), 0)).collect();
    while let Some((p, k)) = stack.pop() {
        match e.eval_interval(&p.enclosure()) {
            Ok(v) if v.mag().is_finite() => sup = sup.max(v.mag()),
            _ if k < extra => stack.extend(p.split().into_iter().filter(|c| meets(c)).map(|c| (c, k + 1))),
            _ => return None,
        }
    }
    Some(sup)
}

fn analyze(pieces: &[(Q, Expr)], n: usize, m: u32, omega: &[Direction], delta: f64, extra: u32) -> Result<Analysis> {
    let patches = dome_cover(n, omega, delta, (delta / 2.0).min(0.125))?;
    let meets = |p: &SpherePatch| omega.iter().any(|w| p.dist_lower(&w.0) < delta);
    let alphas = MultiIndex::all_up_to(n, m);
    let mut h = vec![vec![None; pieces.len()]; alphas.len()];
    for (j, (_, t)) in pieces.iter().enumerate() {
        for (a, alpha) in alphas.iter().enumerate() {
            let d = t.derive(alpha)?;
            h[a][j] = dome_sup(&d, &patches, &meets, extra);
        }
    }
    Ok(Analysis { degrees: pieces.iter().map(|(d, _)| to_f64(d)).collect(), alphas, h })
}

/// sup over the cone Γ(Ω, δ, r) of |∂^α F|/|x|^{m−|α|}, per α.
fn ratio_bounds(an: &Analysis, m: u32, r: f64) -> Vec<f64> {
    an.h
        .iter()
        .map(|row| {
            row.iter().zip(&an.degrees).fold(0.0, |acc, (h, &d)| match h {
                None => f64::INFINITY,
                Some(h) if *h == 0.0 => acc,
                Some(_) if d < m as f64 => f64::INFINITY,
                Some(h) => acc + r.powf(d - m as f64) * h,
            })
        })
        .collect()
}

/// max_{|v|=1} Π |v_i|^{γ_i} = Π (γ_i/k)^{γ_i/2}.
fn mono_weight(gamma: &MultiIndex) -> f64 {
    let k = gamma.degree() as f64;
    gamma
        .0
        .iter()
        .filter(|&&g| g > 0)
        .map(|&g| (g as f64 / k).powf(g as f64 / 2.0))
        .product()
}

/// Angular gap factor σ between the cones of distinct directions; None if
/// two domes may touch.
fn separation(omega: &[Direction], delta: f64) -> Option<Option<f64>> {
    let half = 2.0 * (delta / 2.0).min(1.0).asin();
    let mut sigma: Option<f64> = None;
    for (i, a) in omega.iter().enumerate() {
        for b in &omega[i + 1..] {
            let phi = 2.0 * (a.dist(b) / 2.0).min(1.0).asin();
            let psi = phi - 2.0 * half;
            if psi <= 0.0 {
                return None;
            }
            let s = if psi < std::f64::consts::FRAC_PI_2 { psi.sin() } else { 1.0 };
            sigma = Some(sigma.map_or(s, |t: f64| t.min(s)));
        }
    }
    Some(sigma)
}

struct Evaluation {
    cond_a: Vec<AlphaBound>,
    cond_b: Vec<TaylorBound>,
    ok: bool,
    note: Option<String>,
}

fn evaluate(an: &Analysis, n: usize, m: u32, omega: &[Direction], eps: f64, delta: f64, r: f64, tol: f64) -> Evaluation {
    let ratios = ratio_bounds(an, m, r);
    let limit = eps * (1.0 + tol);
    let index = |b: &MultiIndex| an.alphas.iter().position(|a| a == b).expect("all multi-indices present");
    let cond_a: Vec<AlphaBound> = an
        .alphas
        .iter()
        .zip(&ratios)
        .map(|(a, &s)| AlphaBound { alpha: a.0.clone(), sup_ratio: s, bound: eps })
        .collect();
    let mut ok = ratios.iter().all(|&s| s <= limit);
    let mut note = None;
    let convex = delta < 0.25;
    let sep = separation(omega, delta);
    if !convex {
        ok = false;
        note = Some("δ ≥ 1/4: cones are not certified convex".into());
    }
    if sep.is_none() {
        ok = false;
        note = Some("domes of distinct directions may overlap".into());
    }
    let sigma = sep.flatten();
    let mut cond_b = Vec::new();
    for alpha in &an.alphas {
        let k = m - alpha.degree();
        // Taylor remainder inside one convex cone
        let within: f64 = 2.0
            * MultiIndex::of_degree(n, k)
                .iter()
                .map(|g| ratios[index(&alpha.add(g))] * mono_weight(g) / g.factorial() as f64)
                .sum::<f64>();
        // points in different cones
        let across = sigma.map(|s| {
            ratios[index(alpha)] * s.powi(-(k as i32))
                + MultiIndex::all_up_to(n, k)
                    .iter()
                    .map(|g| {
                        let w = if g.degree() == 0 { 1.0 } else { mono_weight(g) };
                        ratios[index(&alpha.add(g))] * s.powi(-((k - g.degree()) as i32)) * w / g.factorial() as f64
                    })
                    .sum::<f64>()
        });
        ok &= within <= limit && across.is_none_or(|v| v <= limit);
        cond_b.push(TaylorBound { alpha: alpha.0.clone(), within, across, bound: eps });
    }
    Evaluation { cond_a, cond_b, ok, note }
}

/// A point on a centre ray where condition (a) fails, when the homogeneous
/// structure shows that it fails for every choice of δ and r.
fn ray_witness(f: &Expr, pieces: &[(Q, Expr)], n: usize, m: u32, omega: &[Direction], eps: f64) -> Result<Option<Witness>> {
    for w in omega {
        for alpha in MultiIndex::all_up_to(n, m) {
            let mut low = false;
            let mut lead = 0.0;
            for (d, t) in pieces {
                let d = to_f64(d);
                if d > m as f64 {
                    continue;
                }
                let v = match t.derive(&alpha)?.eval_f64(&w.0) {
                    Ok(v) => v,
                    Err(_) => continue,
                };
                if d < m as f64 && v != 0.0 {
                    low = true;
                } else if d == m as f64 {
                    lead += v;
                }
            }
            if !low && lead.abs() <= eps * (1.0 + 1e-6) {
                continue;
            }
            let df = f.derive(&alpha)?;
            let k = (m - alpha.degree()) as i32;
            for i in 1..=200 {
                let t = 2f64.powi(-i);
                let x: Vec<f64> = w.0.iter().map(|c| c * t).collect();
                let xi: Vec<Interval> = x.iter().map(|&c| Interval::point(c)).collect();
                let Ok(v) = df.eval_interval(&xi) else { continue };
                let bound = eps * t.powi(k);
                if v.mig() > bound * (1.0 + 1e-9) {
                    return Ok(Some(Witness {
                        label: format!("|∂^{:?} F(x)| ≤ ε|x|^{}", alpha.0, k),
                        point: x,
                        value: v.mig(),
                        bound,
                    }));
                }
            }
        }
    }
    Ok(None)
}

fn delta_ladder(eps: f64, steps: usize) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for d in [eps / 20.0, eps / 40.0, eps * eps / 20.0, eps * eps / 40.0] {
        let d = d.min(0.125);
        if !out.contains(&d) {
            out.push(d);
        }
    }
    while out.len() < steps {
        let next = out.iter().copied().fold(f64::INFINITY, f64::min) / 2.0;
        out.push(next);
    }
    out.truncate(steps);
    out
}

fn attempt(
    eps: f64,
    delta: f64,
    r: f64,
    verdict: Verdict,
    ev: Option<Evaluation>,
    tries: usize,
    note: Option<String>,
) -> NegligibleAttempt {
    let (cond_a, cond_b, ev_note) = match ev {
        Some(e) => (e.cond_a, e.cond_b, e.note),
        None => (Vec::new(), Vec::new(), None),
    };
    NegligibleAttempt { eps, delta, r, verdict, cond_a, cond_b, witness: None, delta_tries: tries, note: note.or(ev_note) }
}

fn check_dims(omega: &[Direction], n: usize) -> Result<()> {
    if let Some(w) = omega.iter().find(|w| w.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: w.n() });
    }
    Ok(())
}

/// Checks conditions (a) and (b) for one ε at fixed (δ, r).
pub fn check_negligible_at(
    f: &Expr,
    omega: &[Direction],
    n: usize,
    m: u32,
    eps: f64,
    delta: f64,
    r: f64,
    opts: &NegligibleOptions,
) -> Result<NegligibleAttempt> {
    check_dims(omega, n)?;
    if omega.is_empty() {
        return Ok(attempt(eps, delta, r, Verdict::Pass, None, 0, Some("Ω is empty".into())));
    }
    let Some(pieces) = split(f) else {
        return Ok(attempt(eps, delta, r, Verdict::Inconclusive, None, 0, Some("F is not a sum of homogeneous pieces".into())));
    };
    let an = analyze(&pieces, n, m, omega, delta, opts.refine_depth)?;
    let ev = evaluate(&an, n, m, omega, eps, delta, r, opts.tolerance);
    let verdict = if ev.ok { Verdict::Pass } else { Verdict::Inconclusive };
    Ok(attempt(eps, delta, r, verdict, Some(ev), 1, None))
}

/// For each ε in the grid, searches the δ ladder (ε/20, ε/40, ε²/20, ε²/40,
/// then halving) and r ∈ {1, 1/2, …} for a cone on which (a) and (b) are
/// proven. Fails with a witness when the lowest-order behaviour on a
/// centre ray already violates (a).
pub fn check_negligible(f: &Expr, omega: &[Direction], n: usize, m: u32, opts: &NegligibleOptions) -> Result<NegligibilityCertificate> {
    check_dims(omega, n)?;
    let vacuous = omega.is_empty();
    let mut attempts = Vec::new();
    let pieces = split(f);
    for &eps in &opts.eps_grid {
        if !(eps > 0.0) {
            return Err(Error::Invalid(format!("ε must be positive, got {eps}")));
        }
        if vacuous {
            attempts.push(attempt(eps, 1.0, 1.0, Verdict::Pass, None, 0, Some("Ω is empty".into())));
            continue;
        }
        let Some(pieces) = &pieces else {
            attempts.push(attempt(eps, 0.0, 0.0, Verdict::Inconclusive, None, 0, Some("F is not a sum of homogeneous pieces".into())));
            continue;
        };
        if let Some(w) = ray_witness(f, pieces, n, m, omega, eps)? {
            let mut a = attempt(eps, 0.0, 0.0, Verdict::Fail, None, 0, Some("fails on a centre ray for every δ and r".into()));
            a.witness = Some(w);
            attempts.push(a);
            continue;
        }
        let mut found = None;
        let mut last = None;
        for (i, delta) in delta_ladder(eps, opts.delta_steps).into_iter().enumerate() {
            let an = analyze(pieces, n, m, omega, delta, opts.refine_depth)?;
            for h in 0..=opts.r_halvings {
                let r = 2f64.powi(-h);
                let ev = evaluate(&an, n, m, omega, eps, delta, r, opts.tolerance);
                if ev.ok {
                    found = Some(attempt(eps, delta, r, Verdict::Pass, Some(ev), i + 1, None));
                    break;
                }
                if h == opts.r_halvings {
                    last = Some(attempt(eps, delta, r, Verdict::Inconclusive, Some(ev), i + 1, Some("δ ladder exhausted".into())));
                }
            }
            if found.is_some() {
                break;
            }
        }
        attempts.push(found.or(last).expect("ladder is nonempty"));
    }
    let verdict = Verdict::all(attempts.iter().map(|a| a.verdict));
    Ok(NegligibilityCertificate {
        f: f.to_string(),
        m,
        omega: omega.to_vec(),
        vacuous,
        attempts,
        verdict,
        label: verdict.label(vacuous),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{parse_expr, Params};

    fn e(s: &str, n: usize) -> Expr {
        parse_expr(s, n, &Params::new()).unwrap()
    }

    fn poles() -> Vec<Direction> {
        vec![Direction::axis(3, 2, 1.0), Direction::axis(3, 2, -1.0)]
    }

    #[test]
    fn weights() {
        assert_eq!(mono_weight(&MultiIndex(vec![2, 0])), 1.0);
        assert!((mono_weight(&MultiIndex(vec![1, 1])) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_shape() {
        let l = delta_ladder(0.1, 6);
        assert_eq!(l.len(), 6);
        assert!((l[0] - 0.005).abs() < 1e-15 && (l[2] - 0.0005).abs() < 1e-15);
        let one = delta_ladder(1.0, 4);
        assert_eq!(one[0], 0.05);
        assert!(one.windows(2).all(|w| w[0] != w[1]));
    }

    #[test]
    fn y3_over_z_at_the_poles() {
        let f = e("y^3/z", 3);
        let opts = NegligibleOptions { eps_grid: vec![0.1], ..Default::default() };
        let c = check_negligible(&f, &poles(), 3, 2, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Pass, "{:?}", c.attempts);
        let a = &c.attempts[0];
        assert_eq!(a.delta, 0.005);
        assert!(a.cond_a.iter().all(|b| b.sup_ratio <= 0.1));
    }

    #[test]
    fn flat_jet_is_negligible_anywhere() {
        let dirs = vec![Direction::new(vec![1.0, 2.0, -1.0]).unwrap()];
        let c = check_negligible(&e("x^4", 3), &dirs, 3, 3, &Default::default()).unwrap();
        assert_eq!(c.verdict, Verdict::Pass);
    }

    #[test]
    fn xy_on_the_diagonal_fails() {
        let dirs = vec![Direction::new(vec![1.0, 1.0]).unwrap()];
        let opts = NegligibleOptions { eps_grid: vec![0.1], ..Default::default() };
        let c = check_negligible(&e("x*y", 2), &dirs, 2, 2, &opts).unwrap();
        assert_eq!(c.verdict, Verdict::Fail);
        let w = c.attempts[0].witness.as_ref().unwrap();
        let x = &w.point;
        assert!((x[0] * x[1]).abs() > 0.1 * (x[0] * x[0] + x[1] * x[1]));
    }

    #[test]
    fn empty_direction_set_is_vacuous() {
        let c = check_negligible(&e("x*y", 2), &[], 2, 2, &Default::default()).unwrap();
        assert_eq!(c.label, "pass-vacuous");
    }
}
