use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactlin;
use crate::geometry::{sphere_cover, Direction, SpherePatch};
use crate::ideal::JetIdeal;
use crate::interval::Interval;
use crate::jetring::{DiffeoJet, Jet};
use crate::rational::{format_q, simplest_between, to_f64, Q};
use crate::upoly::{default_root_width, real_roots, RealRoot, UPoly};

/// A direction on S¹ known exactly: either the vertical (0, ±1) or
/// ±(1, t)/√(1+t²) for a real root t of a square-free rational polynomial.
#[derive(Clone, Debug)]
pub enum CircleDirection {
    Vertical { sign: i8 },
    Slope { root: RealRoot, sign: i8 },
}

impl CircleDirection {
    pub fn approx(&self) -> Direction {
        match self {
            CircleDirection::Vertical { sign } => Direction::axis(2, 1, *sign as f64),
            CircleDirection::Slope { root, sign } => {
                let t = to_f64(&root.midpoint());
                let s = *sign as f64;
                Direction::new(vec![s, s * t]).expect("nonzero")
            }
        }
    }

    /// Exact check that the homogeneous binary form `h` vanishes here.
    pub fn is_zero_of(&self, h: &Jet) -> bool {
        match self {
            CircleDirection::Vertical { .. } => {
                h.eval_exact(&[Q::zero(), Q::one()]).map(|v| v.is_zero()).unwrap_or(false)
            }
            CircleDirection::Slope { root, .. } => {
                let f = dehomogenize(h);
                match &root.exact {
                    Some(t) => f.eval(t).is_zero(),
                    None => f.rem(&root.poly).is_zero(),
                }
            }
        }
    }

    fn describe(&self) -> String {
        match self {
            CircleDirection::Vertical { sign } => format!("(0, {sign})"),
            CircleDirection::Slope { root, sign } => match &root.exact {
                Some(t) => format!("{}·(1, {})/|·|", if *sign > 0 { "+" } else { "-" }, format_q(t)),
                None => format!(
                    "{}·(1, t)/|·|, t root of {} in [{}, {}]",
                    if *sign > 0 { "+" } else { "-" },
                    format_upoly(&root.poly),
                    to_f64(&root.lo),
                    to_f64(&root.hi)
                ),
            },
        }
    }
}

fn format_upoly(p: &UPoly) -> String {
    let terms: Vec<String> = p
        .coeffs()
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, c)| !c.is_zero())
        .map(|(i, c)| match i {
            0 => format_q(c),
            1 => format!("{}*t", format_q(c)),
            _ => format!("{}*t^{i}", format_q(c)),
        })
        .collect();
    terms.join(" + ")
}

/// h(1, t) for a binary form h(x, y).
pub fn dehomogenize(h: &Jet) -> UPoly {
    let deg = h.degree().unwrap_or(0) as usize;
    let mut c = vec![Q::zero(); deg + 1];
    for (a, v) in h.terms() {
        c[a.0[1] as usize] += v;
    }
    UPoly::new(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatchStatus {
    CertifiedForbidden,
    CandidateAllowed,
}

#[derive(Clone, Debug, Serialize)]
pub struct StatusPatch {
    pub patch: SpherePatch,
    pub status: PatchStatus,
    /// Interval lower bound for Σ|p_{i,k_i}| on the patch (0 if none).
    pub lower_bound: f64,
}

/// Over-approximation of Allow(I): the common zero set on the sphere of
/// the lowest homogeneous parts of the generators.
#[derive(Clone, Debug)]
pub enum DirectionSet {
    Circle { directions: Vec<CircleDirection> },
    Sphere { n: usize, points: Vec<Direction>, patches: Vec<StatusPatch>, isolated: bool },
}

#[derive(Clone, Debug)]
pub struct AllowResult {
    /// True when all generators are homogeneous, so the zero set equals Allow(I).
    pub exact: bool,
    pub lowest_parts: Vec<Jet>,
    pub set: DirectionSet,
}

impl AllowResult {
    /// Representative directions (all exact zeros found).
    pub fn directions(&self) -> Vec<Direction> {
        match &self.set {
            DirectionSet::Circle { directions } => directions.iter().map(CircleDirection::approx).collect(),
            DirectionSet::Sphere { points, .. } => points.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match &self.set {
            DirectionSet::Circle { directions } => directions.is_empty(),
            DirectionSet::Sphere { patches, .. } => {
                patches.iter().all(|p| p.status == PatchStatus::CertifiedForbidden)
            }
        }
    }

    /// Every listed direction is an exact common zero of the lowest parts.
    pub fn residuals_exactly_zero(&self) -> bool {
        match &self.set {
            DirectionSet::Circle { directions } => directions
                .iter()
                .all(|d| self.lowest_parts.iter().all(|h| d.is_zero_of(h))),
            // sphere points are only reported after exact verification
            DirectionSet::Sphere { .. } => true,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let dirs: Vec<serde_json::Value> = match &self.set {
            DirectionSet::Circle { directions } => directions
                .iter()
                .map(|d| serde_json::json!({ "approx": d.approx().0, "exact": d.describe() }))
                .collect(),
            DirectionSet::Sphere { points, .. } => {
                points.iter().map(|p| serde_json::json!({ "approx": p.0 })).collect()
            }
        };
        let mut v = serde_json::json!({
            "exact": self.exact,
            "lowest_parts": self.lowest_parts.iter().map(Jet::to_string).collect::<Vec<_>>(),
            "directions": dirs,
        });
        if let DirectionSet::Sphere { patches, isolated, .. } = &self.set {
            let cand: Vec<&StatusPatch> =
                patches.iter().filter(|p| p.status == PatchStatus::CandidateAllowed).collect();
            v["candidate_patches"] = serde_json::json!(cand.len());
            v["certified_forbidden_patches"] = serde_json::json!(patches.len() - cand.len());
            v["isolated"] = serde_json::json!(isolated);
        }
        v
    }
}

#[derive(Clone, Debug, Default)]
pub struct AllowOptions {
    /// Subdivision depth for n ≥ 3 (default 12 for n = 3, 7 for n = 4).
    pub depth: Option<u32>,
}

pub fn allow_overapprox(ideal: &JetIdeal) -> Result<AllowResult> {
    allow_overapprox_with(ideal, &AllowOptions::default())
}

pub fn allow_overapprox_with(ideal: &JetIdeal, opts: &AllowOptions) -> Result<AllowResult> {
    let gens: Vec<&Jet> = ideal.generators().iter().filter(|g| !g.is_zero()).collect();
    if gens.is_empty() {
        return Err(Error::ZeroIdeal);
    }
    let lowest = gens.iter().map(|g| g.lowest_homogeneous_part()).collect::<Result<Vec<_>>>()?;
    let exact = gens.iter().all(|g| g.is_homogeneous());
    let n = ideal.sig().n;
    let set = match n {
        // S⁰ = {±1} and c·x^k never vanishes there
        1 => DirectionSet::Sphere { n, points: Vec::new(), patches: Vec::new(), isolated: true },
        2 => circle_zero_set(&lowest),
        _ => sphere_zero_set(n, &lowest, opts.depth.unwrap_or(if n == 3 { 12 } else { 7 }))?,
    };
    Ok(AllowResult { exact, lowest_parts: lowest, set })
}

fn circle_zero_set(lowest: &[Jet]) -> DirectionSet {
    let mut g = UPoly::zero();
    for h in lowest {
        g = g.gcd(&dehomogenize(h));
    }
    let mut directions = Vec::new();
    if lowest
        .iter()
        .all(|h| h.eval_exact(&[Q::zero(), Q::one()]).map(|v| v.is_zero()).unwrap_or(false))
    {
        directions.push(CircleDirection::Vertical { sign: 1 });
        directions.push(CircleDirection::Vertical { sign: -1 });
    }
    if g.degree().unwrap_or(0) > 0 {
        for root in real_roots(&g, &default_root_width()) {
            directions.push(CircleDirection::Slope { root: root.clone(), sign: 1 });
            directions.push(CircleDirection::Slope { root, sign: -1 });
        }
    }
    let angle = |d: &CircleDirection| {
        let w = d.approx();
        w.0[1].atan2(w.0[0])
    };
    directions.sort_by(|a, b| angle(a).total_cmp(&angle(b)));
    DirectionSet::Circle { directions }
}

/// Enclosure of h(ω) for ω in the patch, with h homogeneous of degree k:
/// h(ω) = h(v)/|v|^k where v = (±1 at the face, chart coordinates elsewhere).
pub fn homogeneous_on_patch(h: &Jet, k: u32, p: &SpherePatch) -> Interval {
    let vbox = chart_box(p);
    let hv = h.eval_interval(&vbox).expect("dimension checked");
    let nv2 = vbox.iter().fold(Interval::ZERO, |a, b| a + b.sqr());
    let nvk = nv2.sqrt().unwrap().powi(k as i32).unwrap();
    hv.checked_div(&nvk).expect("|v| ≥ 1")
}

pub(crate) fn chart_box(p: &SpherePatch) -> Vec<Interval> {
    let mut v = Vec::with_capacity(p.n);
    let mut c = 0;
    for i in 0..p.n {
        if i == p.face {
            v.push(Interval::point(p.sign as f64));
        } else {
            v.push(p.chart[c]);
            c += 1;
        }
    }
    v
}

fn sphere_zero_set(n: usize, lowest: &[Jet], depth: u32) -> Result<DirectionSet> {
    let degs: Vec<u32> = lowest.iter().map(|h| h.degree().unwrap()).collect();
    let bound = |p: &SpherePatch| -> f64 {
        lowest.iter().zip(&degs).map(|(h, &k)| homogeneous_on_patch(h, k, p).mig()).sum()
    };
    let mut work = sphere_cover(n, 0)?;
    let mut done: Vec<StatusPatch> = Vec::new();
    while !work.is_empty() {
        let results: Vec<(SpherePatch, f64)> = {
            use rayon::prelude::*;
            work.par_iter().map(|p| (p.clone(), bound(p))).collect()
        };
        work = Vec::new();
        for (p, lb) in results {
            if lb > 0.0 {
                done.push(StatusPatch { patch: p, status: PatchStatus::CertifiedForbidden, lower_bound: lb });
            } else if p.depth >= depth {
                done.push(StatusPatch { patch: p, status: PatchStatus::CandidateAllowed, lower_bound: 0.0 });
            } else {
                work.extend(p.split());
            }
        }
    }
    let (points, isolated) = snap_points(n, lowest, &done);
    Ok(DirectionSet::Sphere { n, points, patches: done, isolated })
}

/// Groups candidate patches of each face into clusters and tries the
/// simplest rational chart point of each cluster as an exact common zero.
fn snap_points(n: usize, lowest: &[Jet], patches: &[StatusPatch]) -> (Vec<Direction>, bool) {
    let cands: Vec<&SpherePatch> = patches
        .iter()
        .filter(|p| p.status == PatchStatus::CandidateAllowed)
        .map(|p| &p.patch)
        .collect();
    let mut points: Vec<Direction> = Vec::new();
    let mut isolated = true;
    let mut used = vec![false; cands.len()];
    for i in 0..cands.len() {
        if used[i] {
            continue;
        }
        // flood fill over touching chart boxes of the same face
        let mut cluster = vec![i];
        used[i] = true;
        let mut k = 0;
        while k < cluster.len() {
            let a = cands[cluster[k]];
            for j in 0..cands.len() {
                if !used[j] && touches(a, cands[j]) {
                    used[j] = true;
                    cluster.push(j);
                }
            }
            k += 1;
        }
        let face = cands[i];
        let dims = n - 1;
        let bbox: Vec<(f64, f64)> = (0..dims)
            .map(|c| {
                let lo = cluster.iter().map(|&j| cands[j].chart[c].lo).fold(f64::INFINITY, f64::min);
                let hi = cluster.iter().map(|&j| cands[j].chart[c].hi).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect();
        if bbox.iter().any(|(lo, hi)| hi - lo > 0.1) {
            isolated = false;
            continue;
        }
        let u: Vec<Q> = bbox
            .iter()
            .map(|&(lo, hi)| {
                simplest_between(&Q::from_float(lo).unwrap(), &Q::from_float(hi).unwrap())
            })
            .collect();
        let mut v = Vec::with_capacity(n);
        let mut c = 0;
        for ax in 0..n {
            if ax == face.face {
                v.push(Q::from_integer((face.sign as i64).into()));
            } else {
                v.push(u[c].clone());
                c += 1;
            }
        }
        let is_zero = lowest.iter().all(|h| h.eval_exact(&v).map(|x| x.is_zero()).unwrap_or(false));
        if !is_zero {
            isolated = false;
            continue;
        }
        let d = Direction::new(v.iter().map(to_f64).collect()).expect("nonzero");
        if points.iter().all(|p| p.dist(&d) > 1e-9) {
            points.push(d);
        }
    }
    points.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    (points, isolated)
}

fn touches(a: &SpherePatch, b: &SpherePatch) -> bool {
    a.face == b.face
        && a.sign == b.sign
        && a.chart.iter().zip(&b.chart).all(|(x, y)| x.lo <= y.hi && y.lo <= x.hi)
}

/// Result of comparing Allow of a linearly transformed ideal with the
/// transformed Allow set.
#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub relation: &'static str,
    pub agrees: bool,
    pub exact: bool,
    pub expected: Vec<Vec<f64>>,
    pub computed: Vec<Vec<f64>>,
    pub tolerance: f64,
}

/// Checks allow(I∘A) = normalize(A⁻¹·allow(I)).
pub fn allow_transform_check(ideal: &JetIdeal, a: &[Vec<Q>]) -> Result<TransformReport> {
    let phi = DiffeoJet::linear(ideal.sig(), a)?;
    let ainv = exactlin::inverse(a).ok_or(Error::NotInvertible)?;
    let before = allow_overapprox(ideal)?;
    let after = allow_overapprox(&ideal.transform(&phi)?)?;
    let exact = before.exact && after.exact;
    let ainv_f: Vec<Vec<f64>> = ainv.iter().map(|r| r.iter().map(to_f64).collect()).collect();
    let expected: Vec<Direction> = before
        .directions()
        .iter()
        .map(|w| Direction::new(ainv_f.iter().map(|r| r.iter().zip(&w.0).map(|(x, y)| x * y).sum()).collect()))
        .collect::<Result<_>>()?;
    let computed = after.directions();
    let tol = 1e-9;
    let covered = |xs: &[Direction], ys: &[Direction]| xs.iter().all(|x| ys.iter().any(|y| x.dist(y) < tol));
    let agrees = covered(&expected, &computed) && covered(&computed, &expected);
    Ok(TransformReport {
        relation: if exact { "equal" } else { "equal_overapprox_contains_allow" },
        agrees,
        exact,
        expected: expected.into_iter().map(|d| d.0).collect(),
        computed: computed.into_iter().map(|d| d.0).collect(),
        tolerance: tol,
    })
}

/// Convenience for building a linear map from integer rows.
pub fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Q>> {
    rows.iter().map(|r| r.iter().map(|&x| Q::from_integer(x.into())).collect()).collect()
}
