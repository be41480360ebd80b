use std::sync::{Arc, OnceLock};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::interval::Interval;
use crate::jetring::binomial;
use crate::rational::{q, to_f64, Q};
use crate::upoly::{real_roots, UPoly};

/// A C^q cutoff θ on [0, ∞): θ = 1 on [0, a], θ = 0 on [b, ∞), and
/// θ(u) = 1 − S((u − a)/(b − a)) in between, where S is the smoothstep
/// polynomial of degree 2q + 1 (S(0) = 0, S(1) = 1, S^{(j)}(0) = S^{(j)}(1) = 0
/// for 1 ≤ j ≤ q).
#[derive(Debug, Serialize)]
pub struct CutoffSpec {
    pub q: u32,
    pub a: f64,
    pub b: f64,
    /// Exact coefficients of S^{(k)}, k = 0..=q, increasing degree.
    #[serde(skip)]
    derivs: Vec<UPoly>,
    #[serde(skip)]
    derivs_f64: Vec<Vec<f64>>,
    /// Rigorous bounds on max|S^{(k)}| over [0, 1], k = 0..=q.
    s_bounds: Vec<f64>,
    /// Rigorous bounds on sup|θ^{(k)}|, k = 0..=q.
    pub bounds: Vec<f64>,
}

impl CutoffSpec {
    pub fn new(q_order: u32, a: f64, b: f64) -> Self {
        assert!(0.0 <= a && a < b, "cutoff needs 0 ≤ a < b");
        let qi = q_order as u64;
        let mut s = vec![Q::zero(); 2 * q_order as usize + 2];
        for j in 0..=qi {
            let c = binomial(qi + j, j) as i64 * binomial(2 * qi + 1, qi - j) as i64;
            let sign = if j % 2 == 0 { 1 } else { -1 };
            s[(qi + 1 + j) as usize] = q(sign * c);
        }
        let mut derivs = vec![UPoly::new(s)];
        for k in 1..=q_order as usize {
            let d = derivs[k - 1].derivative();
            derivs.push(d);
        }
        let derivs_f64: Vec<Vec<f64>> =
            derivs.iter().map(|p| p.coeffs().iter().map(to_f64).collect()).collect();
        let s_bounds: Vec<f64> = derivs.iter().map(max_abs_on_unit).collect();
        let w = b - a;
        let bounds = s_bounds
            .iter()
            .enumerate()
            .map(|(k, &m)| if k == 0 { 1.0 } else { up(m / w.powi(k as i32)) })
            .collect();
        CutoffSpec { q: q_order, a, b, derivs, derivs_f64, s_bounds, bounds }
    }

    /// The default cutoff: C³, equal to 1 on [0, 4] and supported in [0, 8].
    pub fn standard() -> Arc<CutoffSpec> {
        static STD: OnceLock<Arc<CutoffSpec>> = OnceLock::new();
        STD.get_or_init(|| Arc::new(CutoffSpec::new(3, 4.0, 8.0))).clone()
    }

    pub fn smoothstep(&self) -> &UPoly {
        &self.derivs[0]
    }

    fn s_eval(&self, k: usize, t: f64) -> f64 {
        self.derivs_f64[k].iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    fn s_eval_interval(&self, k: usize, t: Interval) -> Interval {
        let horner = self.derivs_f64[k]
            .iter()
            .rev()
            .fold(Interval::ZERO, |acc, &c| acc * t + Interval::point(c));
        let m = self.s_bounds[k];
        Interval::new(horner.lo.max(-m), horner.hi.min(m))
    }

    /// θ^{(k)}(u).
    pub fn eval(&self, k: u32, u: f64) -> f64 {
        if u <= self.a {
            return if k == 0 { 1.0 } else { 0.0 };
        }
        if u >= self.b {
            return 0.0;
        }
        let w = self.b - self.a;
        let t = (u - self.a) / w;
        let v = self.s_eval(k as usize, t) / w.powi(k as i32);
        if k == 0 {
            1.0 - v
        } else {
            -v
        }
    }

    /// Enclosure of θ^{(k)} over `u`.
    pub fn eval_interval(&self, k: u32, u: Interval) -> Interval {
        let mut parts: Vec<Interval> = Vec::new();
        if u.lo <= self.a {
            parts.push(if k == 0 { Interval::ONE } else { Interval::ZERO });
        }
        if u.hi >= self.b {
            parts.push(Interval::ZERO);
        }
        let lo = u.lo.max(self.a);
        let hi = u.hi.min(self.b);
        if lo < hi || (lo == hi && lo > self.a && lo < self.b) {
            let w = Interval::point(self.b - self.a);
            let t = (Interval::new(lo, hi) - Interval::point(self.a)).checked_div(&w).unwrap();
            let t = Interval::new(t.lo.max(0.0), t.hi.min(1.0));
            let s = self.s_eval_interval(k as usize, t);
            let v = s.checked_div(&w.powi(k as i32).unwrap()).unwrap();
            parts.push(if k == 0 { Interval::ONE - v } else { -v });
        }
        let mut it = parts.into_iter();
        let first = it.next().expect("some piece is nonempty");
        it.fold(first, |acc, p| acc.hull(&p))
    }

    /// sup|θ^{(k)}|.
    pub fn bound(&self, k: u32) -> f64 {
        self.bounds[k as usize]
    }
}

fn up(x: f64) -> f64 {
    x.next_up()
}

/// Rigorous upper bound of max |p| on [0, 1]: the maximum over the endpoints
/// and the isolated critical points, each inflated by a derivative bound
/// times the isolating width.
fn max_abs_on_unit(p: &UPoly) -> f64 {
    let width = Q::new(1.into(), num_bigint::BigInt::from(1u64 << 40));
    let mut cands = vec![p.eval(&Q::zero()).abs(), p.eval(&q(1)).abs()];
    let dp = p.derivative();
    let slope: Q = dp.coeffs().iter().map(Signed::abs).sum();
    if !dp.is_zero() {
        for r in real_roots(&dp, &width) {
            if r.hi < Q::zero() || r.lo > q(1) {
                continue;
            }
            let mid = r.midpoint();
            cands.push(p.eval(&mid).abs() + &slope * (&r.hi - &r.lo));
        }
    }
    let m = cands.into_iter().max().unwrap();
    to_f64(&m).next_up()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_coefficients() {
        let s = CutoffSpec::new(3, 4.0, 8.0);
        let c: Vec<Q> = s.smoothstep().coeffs().to_vec();
        assert_eq!(c, vec![q(0), q(0), q(0), q(0), q(35), q(-84), q(70), q(-20)]);
        assert_eq!(s.smoothstep().eval(&q(1)), q(1));
    }

    #[test]
    fn plateau_support_and_bounds() {
        let s = CutoffSpec::standard();
        assert_eq!(s.eval(0, 1.0), 1.0);
        assert_eq!(s.eval(0, 4.0), 1.0);
        assert_eq!(s.eval(0, 8.0), 0.0);
        assert_eq!(s.eval(1, 2.0), 0.0);
        // |θ'| ≤ (35/16)/4
        assert!((s.bound(1) - 35.0 / 64.0).abs() < 1e-9);
        for k in 0..=3 {
            assert!(s.bound(k) <= 100.0);
            for i in 0..=4000 {
                let u = 3.0 + 6.0 * i as f64 / 4000.0;
                let v = s.eval(k, u);
                assert!(v.abs() <= s.bound(k));
                assert!(s.eval_interval(k, Interval::point(u)).contains(v));
            }
        }
    }

    #[test]
    fn continuity_at_knots() {
        let s = CutoffSpec::standard();
        for k in 0..=3 {
            let left = s.eval(k, 4.0 - 1e-9);
            let right = s.eval(k, 4.0 + 1e-9);
            assert!((left - right).abs() < 1e-6, "k={k}");
            let left = s.eval(k, 8.0 - 1e-9);
            assert!(left.abs() < 1e-6, "k={k}");
        }
    }

    #[test]
    fn interval_encloses_samples() {
        let s = CutoffSpec::standard();
        let u = Interval::new(3.5, 6.25);
        for k in 0..=3 {
            let e = s.eval_interval(k, u);
            for i in 0..=100 {
                let x = u.lo + u.width() * i as f64 / 100.0;
                assert!(e.contains(s.eval(k, x)));
            }
        }
    }
}
