use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;
use serde::Serialize;

use super::Verdict;
use crate::error::{Error, Result};
use crate::geometry::{dist_to_set, norm, sphere_cover, Direction, SpherePatch};
use crate::interval::Interval;
use crate::symfun::{CutoffNode, Expr, Tape};

/// Radial pieces are not split below this relative width; the bounds
/// checked here are scale-covariant, so angular refinement does the work.
const MIN_RADIAL_REL: f64 = 1.0 / 32.0;
const ROOT_CHUNK: usize = 8;

/// Points t·ω with t in an interval and ω in a sphere patch.
#[derive(Clone, Debug)]
pub struct RadialBox {
    pub patch: SpherePatch,
    pub t: Interval,
    pub splits: u32,
}

impl RadialBox {
    pub fn new(patch: SpherePatch, t: Interval) -> Self {
        RadialBox { patch, t, splits: 0 }
    }

    pub fn enclosure(&self) -> Vec<Interval> {
        self.patch.enclosure().into_iter().map(|e| e * self.t).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        let w = self.patch.center();
        w.0.iter().map(|c| c * self.t.mid()).collect()
    }

    /// Bisects the radial interval or the patch, whichever is relatively
    /// wider.
    pub fn split(&self) -> Vec<RadialBox> {
        if self.radial_splittable() && self.radial_rel() > self.patch.diameter_bound() {
            self.split_radial()
        } else {
            self.split_patch()
        }
    }

    fn radial_rel(&self) -> f64 {
        self.t.width() / self.t.hi.max(f64::MIN_POSITIVE)
    }

    fn radial_splittable(&self) -> bool {
        self.radial_rel() > MIN_RADIAL_REL
    }

    fn split_radial(&self) -> Vec<RadialBox> {
        let (a, b) = self.t.bisect();
        [a, b].into_iter().map(|t| RadialBox { patch: self.patch.clone(), t, splits: self.splits + 1 }).collect()
    }

    fn split_patch(&self) -> Vec<RadialBox> {
        self.patch.split().into_iter().map(|patch| RadialBox { patch, t: self.t, splits: self.splits + 1 }).collect()
    }

    /// The same patch at the single radius t.mid().
    fn thin(&self) -> RadialBox {
        RadialBox { patch: self.patch.clone(), t: Interval::point(self.t.mid()), splits: self.splits }
    }
}

/// Boxes covering inner ≤ |x| ≤ outer, split into dyadic radial pieces.
pub fn annulus_boxes(n: usize, inner: f64, outer: f64) -> Result<Vec<RadialBox>> {
    let mut radii = vec![inner];
    while radii.last().unwrap() * 2.0 < outer {
        let next = radii.last().unwrap() * 2.0;
        radii.push(next);
    }
    radii.push(outer);
    let patches = sphere_cover(n, 1)?;
    Ok(radii
        .windows(2)
        .flat_map(|w| patches.iter().map(move |p| RadialBox::new(p.clone(), Interval::new(w[0], w[1]))))
        .collect())
}

/// The set on which a bound or plateau is certified. Boxes that miss it
/// are dropped; counterexamples must lie inside it.
pub trait BoxRegion: Sync {
    fn meets(&self, b: &RadialBox) -> bool;
    fn contains(&self, x: &[f64]) -> bool;
}

/// No restriction beyond the root boxes.
pub struct Everywhere;

impl BoxRegion for Everywhere {
    fn meets(&self, _: &RadialBox) -> bool {
        true
    }

    fn contains(&self, _: &[f64]) -> bool {
        true
    }
}

/// Points whose direction lies within δ of Ω.
pub struct DomeRegion<'a> {
    pub omega: &'a [Direction],
    pub delta: f64,
}

impl BoxRegion for DomeRegion<'_> {
    fn meets(&self, b: &RadialBox) -> bool {
        self.omega.iter().any(|w| b.patch.dist_lower(&w.0) < self.delta)
    }

    fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        r > 0.0 && dist_to_set(&x.iter().map(|v| v / r).collect::<Vec<_>>(), self.omega) < self.delta
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BoxOptions {
    /// Maximum number of splits along any branch.
    pub max_depth: u32,
    /// Box budget per root.
    pub max_boxes: usize,
    /// Box budget over all roots; roots left when it runs out count as
    /// unresolved.
    pub max_total_boxes: usize,
    /// Relative slack on bound comparisons.
    pub tolerance: f64,
}

impl Default for BoxOptions {
    fn default() -> Self {
        BoxOptions { max_depth: 120, max_boxes: 200_000, max_total_boxes: 1_000_000, tolerance: 1e-9 }
    }
}

pub(crate) enum Check {
    /// Proven on the box, with the measured quantity.
    Ok(f64),
    /// Undecided; the score (enclosure over bound, ∞ when undefined)
    /// orders the refinement.
    Refine(f64),
    /// Disproved at the box centre, with the measured quantity (NaN when
    /// the function is undefined there).
    Violated(f64),
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub label: String,
    pub point: Vec<f64>,
    pub value: f64,
    pub bound: f64,
}

struct DriveResult {
    measure: Vec<f64>,
    violated: Option<(usize, Vec<f64>, f64)>,
    unresolved: usize,
    boxes: usize,
    max_depth: u32,
}

impl DriveResult {
    fn new(k: usize) -> Self {
        DriveResult { measure: vec![0.0; k], violated: None, unresolved: 0, boxes: 0, max_depth: 0 }
    }

    fn merge(mut self, o: DriveResult) -> Self {
        for (a, b) in self.measure.iter_mut().zip(&o.measure) {
            *a = a.max(*b);
        }
        self.violated = self.violated.or(o.violated);
        self.unresolved += o.unresolved;
        self.boxes += o.boxes;
        self.max_depth = self.max_depth.max(o.max_depth);
        self
    }
}

/// Adaptive subdivision: each box carries the checks still open on it.
/// `check(open, box, false)` runs the interval tests of the open checks;
/// for those it cannot decide, `check(undecided, box, true)` looks for a
/// counterexample at the box centre. Results follow the order of the list.
fn drive<C>(k: usize, roots: Vec<RadialBox>, region: &dyn BoxRegion, opts: &BoxOptions, check: C) -> DriveResult
where
    C: Fn(&[usize], &RadialBox, bool) -> Vec<Check> + Sync,
{
    let roots: Vec<RadialBox> = roots.into_iter().filter(|b| region.meets(b)).collect();
    let mut total = DriveResult::new(k);
    // fixed-size chunks keep the result independent of the thread count
    for chunk in roots.chunks(ROOT_CHUNK) {
        if total.violated.is_some() || total.boxes >= opts.max_total_boxes {
            total.unresolved += chunk.len();
            continue;
        }
        let budget = opts.max_boxes.min((opts.max_total_boxes - total.boxes) / chunk.len()).max(1);
        let part = chunk
            .par_iter()
            .map(|root| drive_root(k, root.clone(), region, opts, budget, &check))
            .reduce(|| DriveResult::new(k), DriveResult::merge);
        total = total.merge(part);
    }
    total
}

/// A box awaiting refinement; the heap pops the highest score first and,
/// among equal scores, the most recent box.
struct Pending {
    score: f64,
    seq: u64,
    b: RadialBox,
    open: Vec<usize>,
}

impl PartialEq for Pending {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Pending {
    fn cmp(&self, o: &Self) -> Ordering {
        self.score.total_cmp(&o.score).then(self.seq.cmp(&o.seq))
    }
}

/// Best-first refinement of one root: the box whose enclosure overshoots
/// its bound the most is split first, so violations surface early.
fn drive_root<C>(k: usize, root: RadialBox, region: &dyn BoxRegion, opts: &BoxOptions, budget: usize, check: &C) -> DriveResult
where
    C: Fn(&[usize], &RadialBox, bool) -> Vec<Check> + Sync,
{
    let mut res = DriveResult::new(k);
    let mut seq = 0u64;
    let mut heap = BinaryHeap::new();
    heap.push(Pending { score: 0.0, seq, b: root, open: (0..k).collect() });
    while let Some(Pending { b, open, .. }) = heap.pop() {
        res.boxes += 1;
        res.max_depth = res.max_depth.max(b.splits);
        let leaf = b.splits >= opts.max_depth || res.boxes >= budget;
        let mut again = Vec::new();
        let mut score = 0f64;
        let mut undecided = Vec::new();
        let mut scores = Vec::new();
        for (&i, c) in open.iter().zip(check(&open, &b, false)) {
            match c {
                Check::Ok(v) => res.measure[i] = res.measure[i].max(v),
                Check::Violated(v) => {
                    res.violated.get_or_insert((i, b.center(), v));
                }
                Check::Refine(r) => {
                    undecided.push(i);
                    scores.push(r);
                }
            }
        }
        if res.violated.is_none() && !undecided.is_empty() {
            let inside = region.contains(&b.center());
            for ((&i, r), c) in undecided.iter().zip(scores).zip(check(&undecided, &b, true)) {
                match c {
                    Check::Violated(v) if inside => {
                        res.violated.get_or_insert((i, b.center(), v));
                    }
                    _ if leaf => res.unresolved += 1,
                    _ => {
                        score = score.max(r);
                        again.push(i);
                    }
                }
            }
        }
        if res.violated.is_some() {
            break;
        }
        if res.boxes >= budget {
            // whatever is still queued is undecided
            res.unresolved += heap.iter().map(|p| p.open.len()).sum::<usize>();
            break;
        }
        if !again.is_empty() {
            // split the radius only when the patch alone would pass and
            // halving the patch would not
            let patch = b.split_patch();
            let passes = |c: &RadialBox| matches!(check(&again[..1], c, false)[0], Check::Ok(_));
            let radial = b.radial_splittable() && passes(&b.thin()) && !patch.iter().all(passes);
            let children = if radial { b.split_radial() } else { patch };
            for c in children {
                if region.meets(&c) {
                    seq += 1;
                    heap.push(Pending { score, seq, b: c, open: again.clone() });
                }
            }
        }
    }
    res
}

fn verdict_of(r: &DriveResult) -> Verdict {
    if r.violated.is_some() {
        Verdict::Fail
    } else if r.unresolved > 0 {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    }
}

/// |expr| ≤ bound on a region.
#[derive(Clone, Debug)]
pub struct BoundSpec {
    pub label: String,
    pub expr: Expr,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundRecord {
    pub label: String,
    pub bound: f64,
    /// Largest proven enclosure magnitude over the cover.
    pub sup_bound: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundOutcome {
    pub verdict: Verdict,
    pub records: Vec<BoundRecord>,
    pub witness: Option<Witness>,
    pub unresolved: usize,
    pub boxes: usize,
    pub max_depth: u32,
}

impl BoundOutcome {
    pub fn max_ratio(&self) -> f64 {
        self.records.iter().map(|r| r.ratio).fold(0.0, f64::max)
    }
}

/// Proves each |spec.expr| ≤ spec.bound on the part of the boxes in `region`,
/// subdividing where an enclosure is too wide or undefined.
pub fn verify_bounds(
    specs: &[BoundSpec],
    roots: Vec<RadialBox>,
    region: &dyn BoxRegion,
    opts: &BoxOptions,
) -> BoundOutcome {
    let tol = 1.0 + opts.tolerance;
    let tape = Tape::new(&specs.iter().map(|s| &s.expr).collect::<Vec<_>>());
    let res = drive(specs.len(), roots, region, opts, |open, b, leaf| {
        if leaf {
            let x = b.center();
            let mut memo = tape.memo();
            return open
                .iter()
                .map(|&i| match tape.eval(i, &x, &mut memo) {
                    Ok(v) if v.abs() > specs[i].bound * tol => Check::Violated(v.abs()),
                    Err(Error::Domain(_)) => Check::Violated(f64::NAN),
                    _ => Check::Refine(0.0),
                })
                .collect();
        }
        let x = b.enclosure();
        let mut memo = tape.memo();
        open.iter()
            .map(|&i| {
                let bound = specs[i].bound;
                match tape.eval(i, &x, &mut memo) {
                    Ok(v) if v.mag() <= bound * tol => Check::Ok(v.mag()),
                    Ok(v) => Check::Refine(v.mag() / bound),
                    Err(_) => Check::Refine(f64::INFINITY),
                }
            })
            .collect()
    });
    let verdict = verdict_of(&res);
    let records = specs
        .iter()
        .zip(&res.measure)
        .map(|(s, &m)| BoundRecord { label: s.label.clone(), bound: s.bound, sup_bound: m, ratio: m / s.bound })
        .collect();
    let witness = res.violated.map(|(i, point, value)| Witness {
        label: specs[i].label.clone(),
        point,
        value,
        bound: specs[i].bound,
    });
    BoundOutcome { verdict, records, witness, unresolved: res.unresolved, boxes: res.boxes, max_depth: res.max_depth }
}

/// Proves that every cutoff sits on its plateau (argument ≤ a·scale) over
/// the part of the boxes in `region`, so θ ≡ 1 and 1 − θ ≡ 0 there.
pub fn certify_plateau(
    cutoffs: &[&CutoffNode],
    roots: Vec<RadialBox>,
    region: &dyn BoxRegion,
    opts: &BoxOptions,
) -> BoundOutcome {
    let res = drive(cutoffs.len(), roots, region, opts, |open, b, leaf| {
        let x = b.center();
        let enc = b.enclosure();
        open.iter()
            .map(|&i| {
                let c = cutoffs[i];
                if leaf {
                    return match (c.arg.eval_f64(&x), c.scale.eval_f64(&x)) {
                        (Ok(a), Ok(s)) if s > 0.0 && a / s > c.spec.a => Check::Violated(a / s),
                        _ => Check::Refine(0.0),
                    };
                }
                match (c.arg.eval_interval(&enc), c.scale.eval_interval(&enc)) {
                    (Ok(a), Ok(s)) if s.lo > 0.0 && a.hi <= c.spec.a * s.lo => Check::Ok(a.hi / s.lo),
                    (Ok(a), Ok(s)) if s.lo > 0.0 => Check::Refine(a.hi / (c.spec.a * s.lo)),
                    _ => Check::Refine(f64::INFINITY),
                }
            })
            .collect()
    });
    let verdict = verdict_of(&res);
    let records = cutoffs
        .iter()
        .zip(&res.measure)
        .map(|(c, &m)| BoundRecord {
            label: format!("plateau {}", Expr::Cutoff(Box::new((*c).clone()))),
            bound: c.spec.a,
            sup_bound: m,
            ratio: m / c.spec.a,
        })
        .collect();
    let witness = res.violated.map(|(i, point, value)| Witness {
        label: "cutoff argument leaves the plateau".into(),
        point,
        value,
        bound: cutoffs[i].spec.a,
    });
    BoundOutcome { verdict, records, witness, unresolved: res.unresolved, boxes: res.boxes, max_depth: res.max_depth }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{parse_expr, Params};

    fn e(s: &str) -> Expr {
        parse_expr(s, 3, &Params::new()).unwrap()
    }

    #[test]
    fn annulus_cover_is_complete() {
        let boxes = annulus_boxes(3, 0.25, 4.0).unwrap();
        assert_eq!(boxes.len(), 4 * 24);
        let x = [0.3, -1.2, 2.0];
        let r = crate::geometry::norm(&x);
        let w: Vec<f64> = x.iter().map(|v| v / r).collect();
        assert!(boxes.iter().any(|b| b.t.contains(r) && b.patch.contains_direction(&w)));
    }

    #[test]
    fn bounds_pass_and_fail() {
        let specs = vec![BoundSpec { label: "x".into(), expr: e("x*y*z"), bound: 1.0 }];
        let ok = verify_bounds(&specs, annulus_boxes(3, 0.5, 1.0).unwrap(), &Everywhere, &Default::default());
        assert_eq!(ok.verdict, Verdict::Pass);
        assert!(ok.max_ratio() <= 1.0);
        let tight = vec![BoundSpec { label: "x".into(), expr: e("x^2"), bound: 0.5 }];
        let bad = verify_bounds(&tight, annulus_boxes(3, 0.5, 1.0).unwrap(), &Everywhere, &Default::default());
        assert_eq!(bad.verdict, Verdict::Fail);
        let w = bad.witness.unwrap();
        assert!(w.point[0].powi(2) > 0.5);
    }

    #[test]
    fn plateau_near_axis() {
        let s = e("-(y/z)*theta(norm(x, y), norm(z))");
        let cuts = s.cutoffs();
        let pole = crate::geometry::Direction::axis(3, 2, 1.0);
        let omega = [pole];
        let dome = DomeRegion { omega: &omega, delta: 0.1 };
        let out = certify_plateau(&cuts, annulus_boxes(3, 0.5, 2.0).unwrap(), &dome, &Default::default());
        assert_eq!(out.verdict, Verdict::Pass);
    }
}
