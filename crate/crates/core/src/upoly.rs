//! Univariate polynomials over ℚ: gcd, Sturm sequences and real root
//! isolation.

use num_traits::{One, Signed, Zero};

use crate::rational::{q, q_frac, simplest_between, Q};

/// Coefficients in increasing degree, with no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UPoly(Vec<Q>);

impl UPoly {
    pub fn new(mut coeffs: Vec<Q>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UPoly(coeffs)
    }

    pub fn zero() -> Self {
        UPoly(Vec::new())
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn lead(&self) -> Q {
        self.0.last().cloned().unwrap_or_else(Q::zero)
    }

    pub fn eval(&self, t: &Q) -> Q {
        self.0.iter().rev().fold(Q::zero(), |acc, c| acc * t + c)
    }

    pub fn derivative(&self) -> UPoly {
        UPoly::new(
            self.0.iter().enumerate().skip(1).map(|(i, c)| c * q(i as i64)).collect(),
        )
    }

    pub fn monic(&self) -> UPoly {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead().recip();
        UPoly(self.0.iter().map(|c| c * &l).collect())
    }

    /// Quotient and remainder.
    pub fn div_rem(&self, d: &UPoly) -> (UPoly, UPoly) {
        assert!(!d.is_zero(), "division by the zero polynomial");
        let mut r = self.0.clone();
        let dd = d.0.len() - 1;
        if r.len() < d.0.len() {
            return (UPoly::zero(), self.clone());
        }
        let mut quo = vec![Q::zero(); r.len() - dd];
        let lead_inv = d.lead().recip();
        for i in (0..quo.len()).rev() {
            let c = &r[i + dd] * &lead_inv;
            if !c.is_zero() {
                for (j, dc) in d.0.iter().enumerate() {
                    r[i + j] -= &c * dc;
                }
            }
            quo[i] = c;
        }
        r.truncate(dd);
        (UPoly::new(quo), UPoly::new(r))
    }

    pub fn rem(&self, d: &UPoly) -> UPoly {
        self.div_rem(d).1
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &UPoly) -> UPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// p / gcd(p, p′): same roots, all simple.
    pub fn square_free(&self) -> UPoly {
        if self.degree().unwrap_or(0) == 0 {
            return self.monic();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.monic()
    }

    pub fn sturm_sequence(&self) -> Vec<UPoly> {
        let mut seq = vec![self.clone(), self.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].rem(&seq[n - 1]);
            if r.is_zero() {
                break;
            }
            seq.push(UPoly(r.0.iter().map(|c| -c.clone()).collect()));
        }
        seq
    }

    /// Cauchy bound: every real root lies in (−B, B).
    pub fn root_bound(&self) -> Q {
        let l = self.lead().abs();
        let max = self.0[..self.0.len() - 1].iter().map(|c| c.abs() / &l).max().unwrap_or_else(Q::zero);
        max + Q::one()
    }
}

fn sign_changes(seq: &[UPoly], t: &Q) -> usize {
    let signs: Vec<i8> = seq
        .iter()
        .map(|p| {
            let v = p.eval(t);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// A real root of a square-free polynomial, isolated in `[lo, hi]`
/// (a single point when the root is rational and was detected exactly).
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub poly: UPoly,
    pub lo: Q,
    pub hi: Q,
    pub exact: Option<Q>,
}

impl RealRoot {
    pub fn midpoint(&self) -> Q {
        match &self.exact {
            Some(v) => v.clone(),
            None => (&self.lo + &self.hi) / q(2),
        }
    }

    /// Shrinks the isolating interval to width ≤ `width` by bisection.
    pub fn refine(&mut self, width: &Q) {
        if self.exact.is_some() {
            return;
        }
        let slo = self.poly.eval(&self.lo).signum();
        while &(&self.hi - &self.lo) > width {
            let mid = (&self.lo + &self.hi) / q(2);
            let v = self.poly.eval(&mid);
            if v.is_zero() {
                self.lo = mid.clone();
                self.hi = mid.clone();
                self.exact = Some(mid);
                return;
            }
            if v.signum() == slo {
                self.lo = mid;
            } else {
                self.hi = mid;
            }
        }
    }
}

/// Isolates every real root of `p` (any multiplicity), refined to width
/// at most `width`; rational roots are recognised and reported exactly.
pub fn real_roots(p: &UPoly, width: &Q) -> Vec<RealRoot> {
    let sf = p.square_free();
    if sf.degree().unwrap_or(0) == 0 {
        return Vec::new();
    }
    let seq = sf.sturm_sequence();
    let b = sf.root_bound();
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&seq, &lo) - sign_changes(&seq, &hi);
        if count == 0 {
            continue;
        }
        if count == 1 {
            out.push(isolate_one(&sf, lo, hi, width));
            continue;
        }
        let mid = (&lo + &hi) / q(2);
        stack.push((mid.clone(), hi));
        stack.push((lo, mid));
    }
    out.sort_by(|a, b| a.midpoint().cmp(&b.midpoint()));
    out
}

/// `(lo, hi]` holds exactly one root of square-free `sf`.
fn isolate_one(sf: &UPoly, lo: Q, hi: Q, width: &Q) -> RealRoot {
    if sf.eval(&hi).is_zero() {
        return RealRoot { poly: sf.clone(), lo: hi.clone(), hi: hi.clone(), exact: Some(hi) };
    }
    // lo itself is not a root counted in (lo, hi]; nudge inward if it is one
    let mut lo = lo;
    if sf.eval(&lo).is_zero() {
        let mut step = (&hi - &lo) / q(2);
        while sf.eval(&(&lo + &step)).is_zero()
            || sf.eval(&(&lo + &step)).signum() == sf.eval(&hi).signum()
        {
            step /= q(2);
        }
        lo += step;
    }
    let mut root = RealRoot { poly: sf.clone(), lo, hi, exact: None };
    root.refine(&q_frac(1, 1 << 20));
    // try the simplest rational in the interval
    let cand = simplest_between(&root.lo, &root.hi);
    if sf.eval(&cand).is_zero() {
        root.lo = cand.clone();
        root.hi = cand.clone();
        root.exact = Some(cand);
        return root;
    }
    root.refine(width);
    root
}

/// 10⁻³⁰ as an exact rational.
pub fn default_root_width() -> Q {
    Q::new(One::one(), num_bigint::BigInt::from(10).pow(30))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(cs: &[i64]) -> UPoly {
        UPoly::new(cs.iter().map(|&c| q(c)).collect())
    }

    #[test]
    fn gcd_and_division() {
        // (t-1)(t+2) and (t-1)(t-3)
        let a = p(&[-2, 1, 1]);
        let b = p(&[3, -4, 1]);
        assert_eq!(a.gcd(&b), p(&[-1, 1]));
        let (quo, r) = a.div_rem(&p(&[-1, 1]));
        assert_eq!(quo, p(&[2, 1]));
        assert!(r.is_zero());
    }

    #[test]
    fn rational_roots_exact() {
        // t(t-1)^2(2t+1)
        let f = UPoly::new(vec![q(0), q(1), q(0), q(-3), q(2)]);
        let w = default_root_width();
        let roots = real_roots(&f, &w);
        let vals: Vec<Q> = roots.iter().map(|r| r.exact.clone().unwrap()).collect();
        assert_eq!(vals, vec![q_frac(-1, 2), q(0), q(1)]);
    }

    #[test]
    fn irrational_roots_isolated() {
        let f = p(&[-2, 0, 1]);
        let w = default_root_width();
        let roots = real_roots(&f, &w);
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert!(r.exact.is_none());
            assert!(&r.hi - &r.lo <= w);
            assert!(f.eval(&r.lo).signum() != f.eval(&r.hi).signum());
        }
        assert!(real_roots(&p(&[1, 0, 1]), &w).is_empty());
    }
}
