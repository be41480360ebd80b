use serde::Serialize;

use super::Direction;
use crate::error::{Error, Result};
use crate::interval::Interval;

/// A box in the chart of one cube face, mapped to the sphere by central
/// projection: u ↦ (sign·e_face + Σ u_j e_j) / |…|.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpherePatch {
    pub n: usize,
    pub face: usize,
    pub sign: i8,
    pub chart: Vec<Interval>,
    pub depth: u32,
}

fn others(n: usize, face: usize) -> impl Iterator<Item = usize> {
    (0..n).filter(move |&i| i != face)
}

impl SpherePatch {
    pub fn face_root(n: usize, face: usize, sign: i8) -> Self {
        SpherePatch { n, face, sign, chart: vec![Interval::new(-1.0, 1.0); n - 1], depth: 0 }
    }

    /// Rigorous enclosure of every direction in the patch, per coordinate.
    pub fn enclosure(&self) -> Vec<Interval> {
        let sq: Vec<Interval> = self.chart.iter().map(Interval::sqr).collect();
        let total = sq.iter().fold(Interval::ZERO, |a, &b| a + b);
        let mut out = vec![Interval::ZERO; self.n];
        // face coordinate: sign / sqrt(1 + S), decreasing in S
        let s_lo = Interval::point(total.lo);
        let s_hi = Interval::point(total.hi);
        let big = (Interval::ONE + s_lo).sqrt().unwrap().recip().unwrap();
        let small = (Interval::ONE + s_hi).sqrt().unwrap().recip().unwrap();
        let face_mag = Interval::new(small.lo, big.hi.min(1.0));
        out[self.face] = if self.sign > 0 { face_mag } else { -face_mag };
        for (c, j) in others(self.n, self.face).enumerate() {
            let rest = sq
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != c)
                .fold(Interval::ZERO, |a, (_, &b)| a + b);
            let u = self.chart[c];
            // u / sqrt(1 + u² + R): increasing in u, magnitude decreasing in R
            let f = |x: f64, r: f64| {
                let xi = Interval::point(x);
                xi.checked_div(&(Interval::ONE + xi.sqr() + Interval::point(r)).sqrt().unwrap())
                    .unwrap()
            };
            let lo = f(u.lo, if u.lo >= 0.0 { rest.hi } else { rest.lo }).lo.max(-1.0);
            let hi = f(u.hi, if u.hi >= 0.0 { rest.lo } else { rest.hi }).hi.min(1.0);
            out[j] = Interval::new(lo, hi);
        }
        out
    }

    /// The direction at chart coordinates `u`.
    pub fn point_at(&self, u: &[f64]) -> Direction {
        let mut v = vec![0.0; self.n];
        v[self.face] = self.sign as f64;
        for (c, j) in others(self.n, self.face).enumerate() {
            v[j] = u[c];
        }
        Direction::new(v).expect("cube point is nonzero")
    }

    pub fn center(&self) -> Direction {
        let u: Vec<f64> = self.chart.iter().map(Interval::mid).collect();
        self.point_at(&u)
    }

    /// Upper bound on the chordal diameter of the patch.
    pub fn diameter_bound(&self) -> f64 {
        self.enclosure().iter().map(|i| i.width() * i.width()).sum::<f64>().sqrt()
    }

    /// Lower bound on dist(ω, patch).
    pub fn dist_lower(&self, w: &[f64]) -> f64 {
        let enc = self.enclosure();
        enc.iter()
            .zip(w)
            .map(|(i, &x)| {
                let d = if x < i.lo { i.lo - x } else if x > i.hi { x - i.hi } else { 0.0 };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Upper bound on max_{ω′ ∈ patch} dist(ω, ω′).
    pub fn dist_upper(&self, w: &[f64]) -> f64 {
        let enc = self.enclosure();
        enc.iter()
            .zip(w)
            .map(|(i, &x)| {
                let d = (x - i.lo).abs().max((i.hi - x).abs());
                d * d
            })
            .sum::<f64>()
            .sqrt()
            * (1.0 + 1e-12)
    }

    /// Bisects every chart coordinate.
    pub fn split(&self) -> Vec<SpherePatch> {
        let mut out = vec![self.chart.clone()];
        for c in 0..self.chart.len() {
            out = out
                .into_iter()
                .flat_map(|ch| {
                    let (a, b) = ch[c].bisect();
                    let mut l = ch.clone();
                    let mut r = ch;
                    l[c] = a;
                    r[c] = b;
                    [l, r]
                })
                .collect();
        }
        out.into_iter()
            .map(|chart| SpherePatch { n: self.n, face: self.face, sign: self.sign, chart, depth: self.depth + 1 })
            .collect()
    }

    /// Whether the direction `w` lies in the patch (closed box in the chart).
    pub fn contains_direction(&self, w: &[f64]) -> bool {
        let f = w[self.face] * self.sign as f64;
        if f <= 0.0 {
            return false;
        }
        others(self.n, self.face)
            .enumerate()
            .all(|(c, j)| {
                let u = w[j] / f;
                self.chart[c].lo - 1e-15 <= u && u <= self.chart[c].hi + 1e-15
            })
    }

    /// Directions sampled on a regular grid of `k` points per chart axis.
    pub fn grid(&self, k: usize) -> Vec<Direction> {
        let d = self.chart.len();
        let mut out = Vec::new();
        let total = k.pow(d as u32);
        for idx in 0..total {
            let mut rem = idx;
            let u: Vec<f64> = self
                .chart
                .iter()
                .map(|iv| {
                    let t = rem % k;
                    rem /= k;
                    let s = if k == 1 { 0.5 } else { t as f64 / (k - 1) as f64 };
                    iv.lo + s * iv.width()
                })
                .collect();
            out.push(self.point_at(&u));
        }
        out
    }
}

fn check_dim(n: usize) -> Result<()> {
    if !(2..=4).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    Ok(())
}

/// Cover of S^{n−1} by 2n faces, each split `depth` times along every
/// chart axis: 2n · 2^{(n−1)·depth} patches.
pub fn sphere_cover(n: usize, depth: u32) -> Result<Vec<SpherePatch>> {
    check_dim(n)?;
    let mut patches: Vec<SpherePatch> = (0..n)
        .flat_map(|f| [1i8, -1].map(|s| SpherePatch::face_root(n, f, s)))
        .collect();
    for _ in 0..depth {
        patches = patches.iter().flat_map(SpherePatch::split).collect();
    }
    Ok(patches)
}

/// Patches (chordal diameter ≤ `max_diam`) covering the dome D(Ω, δ);
/// every patch kept may meet the dome and every direction of the dome
/// lies in some kept patch.
pub fn dome_cover(n: usize, omega: &[Direction], delta: f64, max_diam: f64) -> Result<Vec<SpherePatch>> {
    check_dim(n)?;
    if omega.is_empty() {
        return Ok(Vec::new());
    }
    let meets = |p: &SpherePatch| omega.iter().any(|w| p.dist_lower(&w.0) < delta);
    let mut work: Vec<SpherePatch> = sphere_cover(n, 0)?.into_iter().filter(|p| meets(p)).collect();
    let mut out = Vec::new();
    while let Some(p) = work.pop() {
        if p.diameter_bound() <= max_diam || p.depth >= 60 {
            out.push(p);
        } else {
            work.extend(p.split().into_iter().filter(|c| meets(c)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cover_counts() {
        assert_eq!(sphere_cover(2, 0).unwrap().len(), 4);
        assert_eq!(sphere_cover(3, 1).unwrap().len(), 24);
        assert_eq!(sphere_cover(4, 1).unwrap().len(), 64);
        assert!(matches!(sphere_cover(5, 0), Err(Error::UnsupportedDimension(5))));
    }

    #[test]
    fn enclosures_contain_sampled_directions() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=4 {
            for p in sphere_cover(n, 2).unwrap() {
                let enc = p.enclosure();
                for _ in 0..20 {
                    let u: Vec<f64> = p.chart.iter().map(|i| rng.gen_range(i.lo..=i.hi)).collect();
                    let w = p.point_at(&u);
                    for (iv, x) in enc.iter().zip(&w.0) {
                        assert!(iv.contains(*x), "{iv} misses {x}");
                    }
                    assert!(p.contains_direction(&w.0));
                }
            }
        }
    }

    #[test]
    fn dome_cover_reaches_pole() {
        let pole = vec![Direction::axis(3, 2, 1.0)];
        let cover = dome_cover(3, &pole, 0.01, 0.0025).unwrap();
        assert!(!cover.is_empty());
        assert!(cover.iter().any(|p| p.contains_direction(&[0.0, 0.0, 1.0])));
        assert!(cover.iter().all(|p| p.dist_lower(&pole[0].0) < 0.01));
    }
}
