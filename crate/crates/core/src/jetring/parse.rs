use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::jet::Jet;
use super::monomial::{MultiIndex, RingSignature};
use crate::error::{Error, Result};
use crate::rational::{format_q, Q};
use crate::syntax::{self, Ast};

/// Sparse polynomial used during parsing (no degree bound).
pub(crate) type Poly = BTreeMap<MultiIndex, Q>;

fn poly_const(n: usize, c: Q) -> Poly {
    let mut p = Poly::new();
    if !c.is_zero() {
        p.insert(MultiIndex::zero(n), c);
    }
    p
}

fn poly_add(a: &Poly, b: &Poly, sign: i64) -> Poly {
    let mut out = a.clone();
    for (k, v) in b {
        let e = out.entry(k.clone()).or_insert_with(Q::zero);
        if sign < 0 {
            *e -= v;
        } else {
            *e += v;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            *out.entry(ka.add(kb)).or_insert_with(Q::zero) += va * vb;
        }
    }
    out.retain(|_, v| !v.is_zero());
    out
}

fn as_constant(p: &Poly, n: usize) -> Option<Q> {
    match p.len() {
        0 => Some(Q::zero()),
        1 => p.get(&MultiIndex::zero(n)).cloned(),
        _ => None,
    }
}

/// Expands an AST into a polynomial in the given variables.
pub(crate) fn expand(ast: &Ast, names: &[String]) -> Result<Poly> {
    let n = names.len();
    Ok(match ast {
        Ast::Num(v) => poly_const(n, v.clone()),
        Ast::Ident(name, pos) => match names.iter().position(|v| v == name) {
            Some(i) => {
                let mut p = Poly::new();
                p.insert(MultiIndex::unit(n, i), Q::one());
                p
            }
            None => {
                return Err(Error::Parse {
                    pos: *pos,
                    msg: format!("unknown variable `{name}` (expected one of {})", names.join(", ")),
                })
            }
        },
        Ast::Call(name, _, pos) => {
            return Err(Error::Parse {
                pos: *pos,
                msg: format!("function `{name}` is not allowed in a polynomial"),
            })
        }
        Ast::Neg(a) => poly_add(&Poly::new(), &expand(a, names)?, -1),
        Ast::Add(a, b) => poly_add(&expand(a, names)?, &expand(b, names)?, 1),
        Ast::Sub(a, b) => poly_add(&expand(a, names)?, &expand(b, names)?, -1),
        Ast::Mul(a, b) => poly_mul(&expand(a, names)?, &expand(b, names)?),
        Ast::Div(a, b, pos) => {
            let d = as_constant(&expand(b, names)?, n).ok_or_else(|| Error::Parse {
                pos: *pos,
                msg: "division is only allowed by a constant in a polynomial".into(),
            })?;
            if d.is_zero() {
                return Err(Error::Parse { pos: *pos, msg: "division by zero".into() });
            }
            let inv = d.recip();
            expand(a, names)?.into_iter().map(|(k, v)| (k, v * &inv)).collect()
        }
        Ast::Pow(a, k, pos) => {
            if *k < 0 {
                return Err(Error::Parse { pos: *pos, msg: "negative exponent in a polynomial".into() });
            }
            let base = expand(a, names)?;
            let mut acc = poly_const(n, Q::one());
            for _ in 0..*k {
                acc = poly_mul(&acc, &base);
            }
            acc
        }
    })
}

/// Parses a polynomial into a jet of the given signature. Terms of degree
/// greater than m are rejected with [`Error::DegreeOverflow`].
pub fn jet_parse(text: &str, sig: RingSignature) -> Result<Jet> {
    let ast = syntax::parse(text)?;
    let poly = expand(&ast, &sig.variable_names())?;
    Jet::from_terms(sig, poly)
}

/// Same as [`jet_parse`] but drops terms of degree greater than m.
pub fn jet_parse_truncating(text: &str, sig: RingSignature) -> Result<Jet> {
    let ast = syntax::parse(text)?;
    let poly = expand(&ast, &sig.variable_names())?;
    Ok(Jet::truncated_from_terms(sig, poly))
}

/// Renders `c·x^α` with `c ≥ 0` expected (sign handled by the caller).
pub fn format_monomial(c: &Q, alpha: &MultiIndex, names: &[String]) -> String {
    let vars: Vec<String> = alpha
        .0
        .iter()
        .zip(names)
        .filter(|(&a, _)| a > 0)
        .map(|(&a, v)| if a == 1 { v.clone() } else { format!("{v}^{a}") })
        .collect();
    if vars.is_empty() {
        return format_q(c);
    }
    let body = vars.join("*");
    if c.is_one() {
        body
    } else if c == &-Q::one() {
        format!("-{body}")
    } else if c.is_negative() {
        format!("-{}*{body}", format_q(&c.abs()))
    } else {
        format!("{}*{body}", format_q(c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_frac};

    fn sig(m: u32, n: usize) -> RingSignature {
        RingSignature::new(m, n).unwrap()
    }

    #[test]
    fn expands_products() {
        let p = jet_parse("x*(x^2+y^2)", sig(3, 2)).unwrap();
        assert_eq!(p.to_string(), "x^3 + x*y^2");
        assert_eq!(p.coeff(&MultiIndex(vec![1, 2])), q(1));
    }

    #[test]
    fn rational_coefficients() {
        let p = jet_parse("1/2*z^3 - x*y", sig(3, 3)).unwrap();
        assert_eq!(p.terms().count(), 2);
        assert_eq!(p.coeff(&MultiIndex(vec![0, 0, 3])), q_frac(1, 2));
        assert_eq!(p.to_string(), "1/2*z^3 - x*y");
    }

    #[test]
    fn degree_overflow_names_term() {
        match jet_parse("x + x^4", sig(3, 2)) {
            Err(Error::DegreeOverflow { term, degree, m }) => {
                assert_eq!(term, "x^4");
                assert_eq!((degree, m), (4, 3));
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(jet_parse_truncating("x + x^4", sig(3, 2)).unwrap().to_string(), "x");
    }

    #[test]
    fn unknown_variable_has_position() {
        match jet_parse("x + q", sig(2, 2)) {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn round_trip_display() {
        for s in ["x^2 - y^2", "-x + 3/4*x*y - 2*y^2", "0", "y^2 - x*z"] {
            let n = if s.contains('z') { 3 } else { 2 };
            let p = jet_parse(s, sig(3, n)).unwrap();
            assert_eq!(jet_parse(&p.to_string(), sig(3, n)).unwrap(), p);
        }
    }

    #[test]
    fn many_variables() {
        let p = jet_parse("x1*x5 + x6^2", sig(2, 6)).unwrap();
        assert_eq!(p.to_string(), "x1*x5 + x6^2");
    }
}
