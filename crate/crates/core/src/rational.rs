//! Small helpers around [`BigRational`].

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // numerator/denominator overflow f64 separately; scale by bit lengths
        let n = x.numer();
        let d = x.denom();
        let shift = n.bits() as i64 - d.bits() as i64;
        let (nn, dd) = if shift > 0 {
            (n.clone(), d << (shift as usize))
        } else {
            (n << ((-shift) as usize), d.clone())
        };
        let r = Q::new(nn, dd).to_f64().unwrap_or(0.0);
        r * 2f64.powi(shift as i32)
    })
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Invalid(format!("non-finite number {x}")))
}

/// Exact rational value of the shortest decimal representation of `x`
/// (so `0.001` becomes `1/1000`, not the nearest binary fraction).
pub fn from_f64_decimal(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::Invalid(format!("non-finite number {x}")));
    }
    parse_decimal(&format!("{x:e}"))
}

/// Parses `123`, `-1/2`, `0.25`, `1e-12`, `2.5E3`.
pub fn parse_decimal(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Invalid(format!("not a number: `{s}`"));
    if let Some((a, b)) = s.split_once('/') {
        let a = parse_decimal(a)?;
        let b = parse_decimal(b)?;
        if b.is_zero() {
            return Err(Error::Invalid(format!("zero denominator in `{s}`")));
        }
        return Ok(a / b);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Q::from_integer(digits.parse::<BigInt>().map_err(|_| bad())?);
    let scale = exp - frac_part.len() as i64;
    let ten = Q::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= pow_q(&ten, scale as u32);
    } else {
        value /= pow_q(&ten, (-scale) as u32);
    }
    Ok(if neg { -value } else { value })
}

pub fn pow_q(x: &Q, k: u32) -> Q {
    let mut acc = Q::one();
    for _ in 0..k {
        acc *= x;
    }
    acc
}

/// `p/q` or `p` for integers.
pub fn format_q(x: &Q) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

/// Simplest rational (smallest denominator) in the closed interval `[lo, hi]`,
/// found by walking the Stern–Brocot tree via continued fractions.
pub fn simplest_between(lo: &Q, hi: &Q) -> Q {
    debug_assert!(lo <= hi);
    if lo.is_negative() && hi.is_positive() || lo.is_zero() || hi.is_zero() {
        return Q::zero();
    }
    if hi.is_negative() {
        return -simplest_between(&-hi.clone(), &-lo.clone());
    }
    simplest_positive(lo, hi)
}

fn simplest_positive(lo: &Q, hi: &Q) -> Q {
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    if fl.clone() + Q::one() <= *hi {
        return fl + Q::one();
    }
    // both in (fl, fl+1): recurse on reciprocals of fractional parts
    let a = lo - &fl;
    let b = hi - &fl;
    let inner = simplest_positive(&b.recip(), &a.recip());
    fl + inner.recip()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_parse_exactly() {
        assert_eq!(parse_decimal("0.001").unwrap(), q_frac(1, 1000));
        assert_eq!(parse_decimal("1e-12").unwrap(), q_frac(1, 1_000_000_000_000));
        assert_eq!(parse_decimal("-3/4").unwrap(), q_frac(-3, 4));
        assert_eq!(parse_decimal("2.5E3").unwrap(), q(2500));
        assert!(parse_decimal("abc").is_err());
        assert_eq!(from_f64_decimal(1e-3).unwrap(), q_frac(1, 1000));
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_between(&q_frac(1, 3), &q_frac(1, 2)), q_frac(1, 2));
        assert_eq!(simplest_between(&q_frac(-1, 10), &q_frac(1, 10)), q(0));
        assert_eq!(
            simplest_between(&q_frac(333, 1000), &q_frac(334, 1000)),
            q_frac(1, 3)
        );
        assert_eq!(simplest_between(&q_frac(-7, 2), &q_frac(-13, 4)), q_frac(-7, 2));
    }

    #[test]
    fn huge_rationals_convert() {
        let big = pow_q(&q(10), 400) / pow_q(&q(10), 399);
        assert_eq!(to_f64(&big), 10.0);
        let tiny = q(1) / pow_q(&q(2), 1100);
        assert_eq!(to_f64(&tiny), 0.0);
    }
}
