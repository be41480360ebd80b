//! Closed intervals over `f64` with outward rounding.
//!
//! Every arithmetic result is widened by one ulp on each side, which makes
//! the enclosures sound regardless of the rounding mode in effect.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::rational::{to_f64, Q};

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

#[inline]
fn down(x: f64) -> f64 {
    if x == 0.0 {
        -f64::from_bits(1)
    } else {
        x.next_down()
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        x.next_up()
    }
}

impl Interval {
    pub const ZERO: Interval = Interval { lo: 0.0, hi: 0.0 };
    pub const ONE: Interval = Interval { lo: 1.0, hi: 1.0 };

    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "inverted interval [{lo}, {hi}]");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        Interval { lo: x, hi: x }
    }

    /// Enclosure of an exact rational.
    pub fn from_q(x: &Q) -> Self {
        let f = to_f64(x);
        let back = Q::from_float(f);
        match back {
            Some(b) if &b == x => Interval::point(f),
            _ => Interval { lo: down(f), hi: up(f) },
        }
    }

    fn widen(lo: f64, hi: f64) -> Self {
        Interval { lo: down(lo), hi: up(hi) }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && 0.0 <= self.hi
    }

    pub fn is_zero(&self) -> bool {
        self.lo == 0.0 && self.hi == 0.0
    }

    /// Smallest absolute value over the interval.
    pub fn mig(&self) -> f64 {
        if self.contains_zero() {
            0.0
        } else {
            self.lo.abs().min(self.hi.abs())
        }
    }

    /// Largest absolute value over the interval.
    pub fn mag(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn abs(&self) -> Self {
        if self.lo >= 0.0 {
            *self
        } else if self.hi <= 0.0 {
            Interval { lo: -self.hi, hi: -self.lo }
        } else {
            Interval { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn hull(&self, other: &Interval) -> Self {
        Interval { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn sqr(&self) -> Self {
        let a = self.abs();
        if a.lo == 0.0 && a.hi == 0.0 {
            return Interval::ZERO;
        }
        let lo = if a.lo == 0.0 { 0.0 } else { down(a.lo * a.lo).max(0.0) };
        Interval { lo, hi: up(a.hi * a.hi) }
    }

    pub fn sqrt(&self) -> Option<Self> {
        if self.hi < 0.0 {
            return None;
        }
        let lo = if self.lo <= 0.0 { 0.0 } else { down(self.lo.sqrt()).max(0.0) };
        Some(Interval { lo, hi: up(self.hi.sqrt()) })
    }

    /// `None` when the divisor contains zero.
    pub fn checked_div(&self, rhs: &Interval) -> Option<Self> {
        if rhs.contains_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Interval::ZERO);
        }
        let c = [self.lo / rhs.lo, self.lo / rhs.hi, self.hi / rhs.lo, self.hi / rhs.hi];
        Some(Self::widen(min4(c), max4(c)))
    }

    pub fn recip(&self) -> Option<Self> {
        Interval::ONE.checked_div(self)
    }

    /// Integer power; negative exponents need a zero-free base.
    pub fn powi(&self, k: i32) -> Option<Self> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        if k == 0 {
            return Some(Interval::ONE);
        }
        let point_pow = |x: f64| {
            let mut acc = Interval::point(x);
            for _ in 1..k {
                acc = acc * Interval::point(x);
            }
            acc
        };
        if k % 2 == 0 {
            let a = self.abs();
            let lo = if a.lo == 0.0 { 0.0 } else { point_pow(a.lo).lo.max(0.0) };
            Some(Interval { lo, hi: point_pow(a.hi).hi })
        } else {
            Some(Interval { lo: point_pow(self.lo).lo, hi: point_pow(self.hi).hi })
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        *self * Interval::point(c)
    }

    pub fn bisect(&self) -> (Interval, Interval) {
        let m = self.mid();
        (Interval { lo: self.lo, hi: m }, Interval { lo: m, hi: self.hi })
    }
}

fn min4(c: [f64; 4]) -> f64 {
    c.iter().copied().fold(f64::INFINITY, f64::min)
}

fn max4(c: [f64; 4]) -> f64 {
    c.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

impl Add for Interval {
    type Output = Interval;
    fn add(self, rhs: Interval) -> Interval {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let mut out = Interval::widen(self.lo + rhs.lo, self.hi + rhs.hi);
        if self.lo >= 0.0 && rhs.lo >= 0.0 {
            out.lo = out.lo.max(0.0);
        }
        if self.hi <= 0.0 && rhs.hi <= 0.0 {
            out.hi = out.hi.min(0.0);
        }
        out
    }
}

impl Sub for Interval {
    type Output = Interval;
    fn sub(self, rhs: Interval) -> Interval {
        self + (-rhs)
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Interval {
    type Output = Interval;
    fn mul(self, rhs: Interval) -> Interval {
        if self.is_zero() || rhs.is_zero() {
            return Interval::ZERO;
        }
        if self == Interval::ONE {
            return rhs;
        }
        if rhs == Interval::ONE {
            return self;
        }
        let c = [self.lo * rhs.lo, self.lo * rhs.hi, self.hi * rhs.lo, self.hi * rhs.hi];
        let mut out = Interval::widen(min4(c), max4(c));
        let (pos_a, neg_a) = (self.lo >= 0.0, self.hi <= 0.0);
        let (pos_b, neg_b) = (rhs.lo >= 0.0, rhs.hi <= 0.0);
        if (pos_a && pos_b) || (neg_a && neg_b) {
            out.lo = out.lo.max(0.0);
        }
        if (pos_a && neg_b) || (neg_a && pos_b) {
            out.hi = out.hi.min(0.0);
        }
        out
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q_frac;

    #[test]
    fn arithmetic_encloses_point_results() {
        let a = Interval::new(1.0, 2.0);
        let b = Interval::new(-3.0, 0.5);
        let p = a * b;
        assert!(p.lo <= -6.0 && p.hi >= 1.0);
        let s = a + b;
        assert!(s.lo <= -2.0 && s.hi >= 2.5);
        assert!(a.checked_div(&b).is_none());
        let d = b.checked_div(&a).unwrap();
        assert!(d.lo <= -3.0 && d.hi >= 0.5);
    }

    #[test]
    fn even_powers_are_nonnegative() {
        let a = Interval::new(-2.0, 1.0);
        let s = a.powi(2).unwrap();
        assert_eq!(s.lo, 0.0);
        assert!(s.hi >= 4.0);
        let c = a.powi(3).unwrap();
        assert!(c.lo <= -8.0 && c.hi >= 1.0);
        assert!(a.powi(-1).is_none());
    }

    #[test]
    fn rational_enclosure_contains_value() {
        let third = Interval::from_q(&q_frac(1, 3));
        assert!(third.lo < third.hi);
        assert!(third.contains(1.0 / 3.0));
        assert_eq!(Interval::from_q(&q_frac(1, 4)), Interval::point(0.25));
    }

    #[test]
    fn mig_and_mag() {
        let a = Interval::new(-3.0, -1.0);
        assert_eq!(a.mig(), 1.0);
        assert_eq!(a.mag(), 3.0);
        assert_eq!(Interval::new(-1.0, 2.0).mig(), 0.0);
    }
}
