use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Signed, ToPrimitive};

use super::cutoff::CutoffSpec;
use super::expr::{CutoffNode, Expr, GaugeNode, Num};
use super::gauge::GaugeFn;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::{to_f64, Q};

/// Scalar domain for evaluation: plain floats or sound intervals.
pub trait Val: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self> {
    fn num(c: &Num) -> Self;
    fn from_f64(x: f64) -> Self;
    fn zero() -> Self;
    fn lo(&self) -> f64;
    fn hi(&self) -> f64;
    fn div(self, d: Self) -> Result<Self>;
    fn powi(self, k: i32) -> Result<Self>;
    fn rpow(self, p: &Q) -> Result<Self>;
    fn sqr(self) -> Self;
    fn cutoff(spec: &CutoffSpec, k: u32, u: Self) -> Self;
    fn gauge(g: &GaugeFn, k: u32, t: Self) -> Result<Self>;
}

fn domain(msg: &str) -> Error {
    Error::Domain(msg.to_string())
}

impl Val for f64 {
    fn num(c: &Num) -> Self {
        c.f
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn zero() -> Self {
        0.0
    }
    fn lo(&self) -> f64 {
        *self
    }
    fn hi(&self) -> f64 {
        *self
    }
    fn div(self, d: Self) -> Result<Self> {
        if d == 0.0 {
            return Err(domain("division by zero"));
        }
        Ok(self / d)
    }
    fn powi(self, k: i32) -> Result<Self> {
        if k < 0 && self == 0.0 {
            return Err(domain("negative power of zero"));
        }
        Ok(f64::powi(self, k))
    }
    fn rpow(self, p: &Q) -> Result<Self> {
        if self < 0.0 || (self == 0.0 && p.is_negative()) {
            return Err(domain("fractional power of a non-positive base"));
        }
        if *p.denom() == 2.into() {
            let k = p.numer().to_i32().ok_or_else(|| domain("exponent too large"))?;
            return Ok(self.sqrt().powi(k));
        }
        Ok(self.powf(to_f64(p)))
    }
    fn sqr(self) -> Self {
        self * self
    }
    fn cutoff(spec: &CutoffSpec, k: u32, u: Self) -> Self {
        spec.eval(k, u)
    }
    fn gauge(g: &GaugeFn, k: u32, t: Self) -> Result<Self> {
        g.eval(k, t)
    }
}

impl Val for Interval {
    fn num(c: &Num) -> Self {
        c.iv
    }
    fn from_f64(x: f64) -> Self {
        Interval::point(x)
    }
    fn zero() -> Self {
        Interval::ZERO
    }
    fn lo(&self) -> f64 {
        self.lo
    }
    fn hi(&self) -> f64 {
        self.hi
    }
    fn div(self, d: Self) -> Result<Self> {
        self.checked_div(&d).ok_or_else(|| domain("division by an interval containing 0"))
    }
    fn powi(self, k: i32) -> Result<Self> {
        Interval::powi(&self, k).ok_or_else(|| domain("negative power of an interval containing 0"))
    }
    fn rpow(self, p: &Q) -> Result<Self> {
        if self.lo < 0.0 || (self.lo <= 0.0 && p.is_negative()) {
            return Err(domain("fractional power of an interval reaching below 0"));
        }
        if *p.denom() == 2.into() {
            let k = p.numer().to_i32().ok_or_else(|| domain("exponent too large"))?;
            let s = self.sqrt().ok_or_else(|| domain("square root of a negative interval"))?;
            return Val::powi(s, k);
        }
        // monotone in the base; widened by a relative margin for powf
        let e = to_f64(p);
        let (a, b) = (self.lo.powf(e), self.hi.powf(e));
        let slack = 8.0 * f64::EPSILON;
        Ok(Interval::new(a.min(b) * (1.0 - slack), a.max(b) * (1.0 + slack)))
    }
    fn sqr(self) -> Self {
        Interval::sqr(&self)
    }
    fn cutoff(spec: &CutoffSpec, k: u32, u: Self) -> Self {
        spec.eval_interval(k, u)
    }
    fn gauge(g: &GaugeFn, k: u32, t: Self) -> Result<Self> {
        g.eval_interval(k, t)
    }
}

/// Whether a cutoff factor vanishes identically given enclosures of its
/// argument and (non-negative) scale, decided without dividing. A zero
/// scale with a positive argument counts as u = +∞.
fn cutoff_hard_zero<V: Val>(spec: &CutoffSpec, rising: bool, order: u32, a: V, s: V) -> bool {
    let beyond = a.lo() > 0.0 && a.lo() >= spec.b * s.hi();
    let plateau = s.lo() > 0.0 && a.hi() <= spec.a * s.lo();
    match (rising, order) {
        (false, 0) => beyond,
        (true, 0) => plateau,
        _ => beyond || plateau,
    }
}

/// A cutoff factor from its argument and scale; the flag reports an
/// identically-zero factor.
pub(crate) fn cutoff_value<V: Val>(spec: &CutoffSpec, rising: bool, order: u32, a: V, s: V) -> Result<(V, bool)> {
    if s.lo() < 0.0 {
        return Err(domain("cutoff scale must be positive"));
    }
    if cutoff_hard_zero(spec, rising, order, a, s) {
        return Ok((V::zero(), true));
    }
    if s.lo() <= 0.0 {
        return Err(domain("cutoff scale must be positive"));
    }
    if order == 0 && a.hi() <= spec.a * s.lo() {
        return Ok((if rising { V::zero() } else { V::from_f64(1.0) }, false));
    }
    let u = a.div(s)?;
    let v = V::cutoff(spec, order, u);
    Ok(match (rising, order) {
        (false, _) => (v, false),
        (true, 0) => (V::from_f64(1.0) - v, false),
        (true, _) => (-v, false),
    })
}

fn eval_cutoff<V: Val>(c: &CutoffNode, x: &[V]) -> Result<(V, bool)> {
    let a = eval(&c.arg, x)?;
    let s = eval(&c.scale, x)?;
    cutoff_value(&c.spec, c.rising, c.order, a, s)
}

fn eval_gauge<V: Val>(g: &GaugeNode, x: &[V]) -> Result<V> {
    let t = eval(&g.arg, x)?;
    V::gauge(&g.gauge, g.order, t)
}

/// Evaluates `e` at a point or over a box.
///
/// In a product, a cutoff factor that vanishes identically on the input
/// makes the product 0 even where the other factors are undefined.
pub fn eval<V: Val>(e: &Expr, x: &[V]) -> Result<V> {
    match e {
        Expr::Const(c) => Ok(V::num(c)),
        Expr::Var(i) => x.get(*i).copied().ok_or(Error::DimensionMismatch { expected: i + 1, got: x.len() }),
        Expr::Sum(v) => {
            let mut acc = V::zero();
            for t in v {
                acc = acc + eval(t, x)?;
            }
            Ok(acc)
        }
        Expr::Prod(v) => {
            let mut first_err = None;
            let mut cut_vals = Vec::new();
            for f in v {
                if let Expr::Cutoff(c) = f {
                    match eval_cutoff(c, x) {
                        Ok((_, true)) => return Ok(V::zero()),
                        Ok((val, false)) => cut_vals.push(val),
                        Err(err) => {
                            first_err.get_or_insert(err);
                        }
                    }
                }
            }
            if let Some(err) = first_err {
                return Err(err);
            }
            let mut acc = cut_vals.into_iter().fold(V::from_f64(1.0), |a, b| a * b);
            for f in v {
                if !matches!(f, Expr::Cutoff(_)) {
                    acc = acc * eval(f, x)?;
                }
            }
            Ok(acc)
        }
        Expr::Pow(b, k) => eval(b, x)?.powi(*k),
        Expr::RPow(b, p) => eval(b, x)?.rpow(p),
        Expr::Abs2(s) => {
            let mut acc = V::zero();
            for &i in s {
                let xi = x.get(i).copied().ok_or(Error::DimensionMismatch { expected: i + 1, got: x.len() })?;
                acc = acc + xi.sqr();
            }
            Ok(acc)
        }
        Expr::Cutoff(c) => eval_cutoff(c, x).map(|(v, _)| v),
        Expr::Gauge(g) => eval_gauge(g, x),
    }
}

impl Expr {
    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        eval(self, x)
    }

    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval> {
        eval(self, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{parse_expr, Params};

    fn p(s: &str) -> Expr {
        parse_expr(s, 3, &Params::default()).unwrap()
    }

    #[test]
    fn point_values() {
        assert!((p("y^3/z").eval_f64(&[0.0, 0.1, 1.0]).unwrap() - 0.001).abs() < 1e-15);
        assert_eq!(p("theta(x, 1/2)").eval_f64(&[0.5, 0.0, 0.0]).unwrap(), 1.0);
        assert!(p("y/z").eval_f64(&[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn interval_quotient() {
        let e = p("y/z");
        let b = [Interval::point(0.0), Interval::new(0.0, 0.1), Interval::new(1.0, 2.0)];
        let v = e.eval_interval(&b).unwrap();
        assert!(v.lo >= -1e-15 && v.hi <= 0.1 + 1e-15);
        let bad = [Interval::point(0.0), Interval::new(0.0, 0.1), Interval::new(-1.0, 2.0)];
        assert_eq!(e.eval_interval(&bad).unwrap_err().code(), "domain");
    }

    #[test]
    fn cutoff_shields_singularity() {
        // −(y/z)·θ(|(x,y)|/|z|) vanishes where |(x,y)| ≥ 8|z|, including z = 0
        let s = p("-(y/z)*theta(norm(x, y), norm(z))");
        assert_eq!(s.eval_f64(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        let b = [Interval::new(0.5, 1.0), Interval::new(0.5, 1.0), Interval::new(-0.01, 0.01)];
        assert!(s.eval_interval(&b).unwrap().is_zero());
        let ds = s.partial(2).unwrap();
        assert_eq!(ds.eval_f64(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        // the bare quotient has no such protection
        assert!(p("-(y/z)").eval_f64(&[0.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn norms() {
        let e = p("norm(x, y, z)");
        assert!((e.eval_f64(&[3.0, 4.0, 12.0]).unwrap() - 13.0).abs() < 1e-14);
        let d = e.partial(0).unwrap();
        assert!((d.eval_f64(&[3.0, 4.0, 12.0]).unwrap() - 3.0 / 13.0).abs() < 1e-14);
        assert!(d.eval_f64(&[0.0, 0.0, 0.0]).is_err());
    }
}
