use num_traits::{One, Zero};
use serde::Serialize;

use super::allow::homogeneous_on_patch;
use crate::error::{Error, Result};
use crate::geometry::{sphere_cover, Direction, SpherePatch};
use crate::interval::Interval;
use crate::jetring::{Jet, Order};
use crate::rational::{format_q, to_f64, Q};

/// Proof that Σ_l |Q_l(x)| > c·|x|^m on the cone Γ(ω, δ, r) (or on the
/// punctured ball of radius r when `omega` is `None`).
#[derive(Clone, Debug, Serialize)]
pub struct ForbiddenCertificate {
    pub q: Vec<String>,
    pub m: u32,
    pub omega: Option<Vec<f64>>,
    /// Exact power of two.
    pub c: String,
    pub c_value: f64,
    /// `None` for the whole sphere.
    pub delta: Option<f64>,
    pub r: f64,
    /// Smallest verified lower bound for Σ max(L_l, 0) over the cover.
    pub achieved_bound: f64,
    pub max_depth: u32,
    pub patches: usize,
}

#[derive(Clone, Debug)]
pub struct ForbidOptions {
    /// Maximum subdivision depth per attempt.
    pub budget: u32,
}

impl Default for ForbidOptions {
    fn default() -> Self {
        ForbidOptions { budget: 24 }
    }
}

#[derive(Clone, Debug)]
pub enum ForbidOutcome {
    Found(ForbiddenCertificate),
    /// Budget exhausted; this is not a disproof.
    NotFound { attempts: usize },
}

impl ForbidOutcome {
    pub fn certificate(&self) -> Option<&ForbiddenCertificate> {
        match self {
            ForbidOutcome::Found(c) => Some(c),
            ForbidOutcome::NotFound { .. } => None,
        }
    }
}

/// Homogeneous parts (k, h_k) of a jet with order k ≥ 1.
struct Parts {
    parts: Vec<(u32, Jet)>,
}

impl Parts {
    fn new(q: &Jet) -> Result<Self> {
        let k = match q.order_of_vanishing() {
            Order::Finite(0) => return Err(Error::OrderZero),
            Order::MoreThanM => return Err(Error::ZeroJet),
            Order::Finite(k) => k,
        };
        let parts = (k..=q.sig().m)
            .map(|d| (d, q.homogeneous_part(d)))
            .filter(|(_, h)| !h.is_zero())
            .collect();
        Ok(Parts { parts })
    }

    /// Lower bound for L = |h_k(ω)| − Σ_{j>k} r^{j−k}|h_j(ω)| on the patch;
    /// for x = tω, 0 < t < r ≤ 1 this gives |Q(x)| ≥ t^k·L ≥ t^m·L when L > 0.
    fn lower(&self, p: &SpherePatch, r: f64) -> f64 {
        let (k, h) = &self.parts[0];
        let mut acc = Interval::point(homogeneous_on_patch(h, *k, p).mig());
        for (j, hj) in &self.parts[1..] {
            let mag = homogeneous_on_patch(hj, *j, p).mag();
            let rk = Interval::point(r).powi((j - k) as i32).unwrap();
            acc = acc - rk * Interval::point(mag);
        }
        acc.lo
    }
}

struct Attempt {
    min_bound: f64,
    max_depth: u32,
    patches: usize,
}

fn verify_region(
    parts: &[Parts],
    roots: Vec<SpherePatch>,
    dome: Option<(&Direction, f64)>,
    r: f64,
    budget: u32,
    threshold: f64,
) -> Option<Attempt> {
    let meets = |p: &SpherePatch| dome.is_none_or(|(w, d)| p.dist_lower(&w.0) < d);
    let mut work: Vec<SpherePatch> = roots.into_iter().filter(|p| meets(p)).collect();
    let mut att = Attempt { min_bound: f64::INFINITY, max_depth: 0, patches: 0 };
    while let Some(p) = work.pop() {
        let lb: f64 = parts.iter().map(|q| q.lower(&p, r).max(0.0)).sum();
        if lb > threshold {
            att.min_bound = att.min_bound.min(lb);
            att.max_depth = att.max_depth.max(p.depth);
            att.patches += 1;
        } else if p.depth < budget {
            work.extend(p.split().into_iter().filter(|c| meets(c)));
        } else {
            return None;
        }
    }
    Some(att)
}

/// Largest power of two strictly below `x` (> 0).
fn power_of_two_below(x: f64) -> Q {
    let mut e = x.log2().floor() as i32;
    if 2f64.powi(e) >= x {
        e -= 1;
    }
    let two = Q::from_integer(2.into());
    if e >= 0 {
        crate::rational::pow_q(&two, e as u32)
    } else {
        Q::one() / crate::rational::pow_q(&two, (-e) as u32)
    }
}

fn check_inputs(q: &[Jet]) -> Result<Vec<Parts>> {
    let first = q.first().ok_or_else(|| Error::Invalid("need at least one jet".into()))?;
    for j in q {
        first.sig().check_same(&j.sig())?;
    }
    q.iter().map(Parts::new).collect()
}

fn certificate(q: &[Jet], omega: Option<&Direction>, delta: Option<f64>, r: f64, att: Attempt) -> ForbiddenCertificate {
    let c = power_of_two_below(att.min_bound);
    ForbiddenCertificate {
        q: q.iter().map(Jet::to_string).collect(),
        m: q[0].sig().m,
        omega: omega.map(|w| w.0.clone()),
        c_value: to_f64(&c),
        c: format_q(&c),
        delta,
        r,
        achieved_bound: att.min_bound,
        max_depth: att.max_depth,
        patches: att.patches,
    }
}

/// Verifies positivity, then keeps doubling the target constant while the
/// depth budget allows, so c is not limited by coarse first enclosures.
fn verify_best(
    parts: &[Parts],
    n: usize,
    dome: Option<(&Direction, f64)>,
    r: f64,
    budget: u32,
) -> Result<Option<Attempt>> {
    let Some(mut best) = verify_region(parts, sphere_cover(n, 0)?, dome, r, budget, 0.0) else {
        return Ok(None);
    };
    loop {
        let target = 2.0 * to_f64(&power_of_two_below(best.min_bound));
        match verify_region(parts, sphere_cover(n, 0)?, dome, r, budget, target) {
            Some(a) => best = a,
            None => return Ok(Some(best)),
        }
    }
}

fn r_ladder() -> impl Iterator<Item = f64> {
    (0..=10).map(|i| 2f64.powi(-i))
}

/// Searches (δ, r) ladders for a certificate that ω is a forbidden
/// direction for the jets `q`.
pub fn forbidden_certificate_search(q: &[Jet], omega: &Direction, opts: &ForbidOptions) -> Result<ForbidOutcome> {
    let parts = check_inputs(q)?;
    let n = q[0].sig().n;
    if omega.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: omega.n() });
    }
    if n == 1 {
        return Err(Error::UnsupportedDimension(1));
    }
    let mut attempts = 0;
    for r in r_ladder() {
        for e in 0..=20 {
            let delta = 2f64.powi(-e);
            attempts += 1;
            if let Some(att) = verify_best(&parts, n, Some((omega, delta)), r, opts.budget)? {
                return Ok(ForbidOutcome::Found(certificate(q, Some(omega), Some(delta), r, att)));
            }
        }
    }
    Ok(ForbidOutcome::NotFound { attempts })
}

/// Certificate valid on the whole punctured ball of radius r, which shows
/// every direction is forbidden.
pub fn whole_sphere_certificate(q: &[Jet], opts: &ForbidOptions) -> Result<ForbidOutcome> {
    let parts = check_inputs(q)?;
    let n = q[0].sig().n;
    let mut attempts = 0;
    for r in r_ladder() {
        attempts += 1;
        if let Some(att) = verify_best(&parts, n, None, r, opts.budget)? {
            return Ok(ForbidOutcome::Found(certificate(q, None, None, r, att)));
        }
    }
    Ok(ForbidOutcome::NotFound { attempts })
}

/// Pointwise spot check of a certificate: Σ|Q_l(x)| > c|x|^m at `x`.
pub fn certificate_holds_at(q: &[Jet], c: f64, x: &[f64]) -> bool {
    let m = q[0].sig().m as i32;
    let lhs: f64 = q.iter().map(|j| j.eval_f64(x).unwrap().abs()).sum();
    let nx = crate::geometry::norm(x);
    !c.is_zero() && lhs > c * nx.powi(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetring::{jet_parse, RingSignature};

    fn jets(m: u32, n: usize, qs: &[&str]) -> Vec<Jet> {
        let s = RingSignature::new(m, n).unwrap();
        qs.iter().map(|q| jet_parse(q, s).unwrap()).collect()
    }

    #[test]
    fn circle_norm_whole_sphere() {
        let q = jets(2, 2, &["x^2 + y^2"]);
        let out = whole_sphere_certificate(&q, &ForbidOptions { budget: 6 }).unwrap();
        let c = out.certificate().expect("certificate");
        assert_eq!(c.c, "1/2");
        assert_eq!(c.r, 1.0);
        assert!(c.max_depth <= 6);
        let single = forbidden_certificate_search(&q, &Direction::axis(2, 0, 1.0), &Default::default()).unwrap();
        assert_eq!(single.certificate().unwrap().c, "1/2");
    }

    #[test]
    fn pole_free_direction() {
        let q = jets(2, 3, &["x^2", "y^2 - x*z"]);
        let out = forbidden_certificate_search(&q, &Direction::axis(3, 0, 1.0), &Default::default()).unwrap();
        assert!(out.certificate().is_some());
    }

    #[test]
    fn allowed_axis_not_found() {
        let q = jets(2, 2, &["x*y"]);
        let out = forbidden_certificate_search(&q, &Direction::axis(2, 0, 1.0), &ForbidOptions { budget: 12 }).unwrap();
        assert!(matches!(out, ForbidOutcome::NotFound { .. }));
    }

    #[test]
    fn higher_order_terms_shrink_r() {
        // x^2 - x^3 on ω = (1, 0): L = 1 − r at depth → needs r < 1
        let q = jets(3, 2, &["x^2 + y^2 - 4*x^3"]);
        let out = forbidden_certificate_search(&q, &Direction::axis(2, 0, 1.0), &Default::default()).unwrap();
        let c = out.certificate().unwrap();
        assert!(c.r < 1.0);
        for t in [0.01, 0.1, 0.9 * c.r] {
            assert!(certificate_holds_at(&q, c.c_value, &[t, 0.0]));
        }
    }
}
