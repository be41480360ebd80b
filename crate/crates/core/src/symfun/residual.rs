//! Exact zero test for expressions built from rational functions and
//! sub-vector norms.
//!
//! Every norm |x_S| becomes a fresh symbol t_S subject to t_S² = Σ_{i∈S} x_i²,
//! and anything else non-rational (gauges, other fractional powers, unresolved
//! cutoffs) becomes an opaque symbol. A numerator that reduces to the zero
//! polynomial proves the expression vanishes wherever it is defined; a
//! nonzero numerator is inconclusive.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::expr::{CutoffNode, Expr};
use crate::error::{Error, Result};
use crate::rational::Q;

type Mono = Vec<u32>;

#[derive(Clone, Debug, PartialEq)]
struct Poly(BTreeMap<Mono, Q>);

impl Poly {
    fn constant(c: Q, nvars: usize) -> Poly {
        let mut m = BTreeMap::new();
        if !c.is_zero() {
            m.insert(vec![0; nvars], c);
        }
        Poly(m)
    }

    fn symbol(i: usize, nvars: usize, power: u32) -> Poly {
        let mut e = vec![0; nvars];
        e[i] = power;
        Poly(BTreeMap::from([(e, Q::one())]))
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &other.0 {
            let e = out.entry(m.clone()).or_insert_with(Q::zero);
            *e += c;
            if e.is_zero() {
                out.remove(m);
            }
        }
        Poly(out)
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out: BTreeMap<Mono, Q> = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &other.0 {
                let m: Mono = ma.iter().zip(mb).map(|(a, b)| a + b).collect();
                let e = out.entry(m).or_insert_with(Q::zero);
                *e += ca * cb;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Poly(out)
    }

    fn pow(&self, k: u32, nvars: usize) -> Poly {
        let mut acc = Poly::constant(Q::one(), nvars);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Atom {
    Norm(Vec<usize>),
    Opaque(String),
}

struct Ctx {
    n: usize,
    atoms: Vec<Atom>,
}

impl Ctx {
    fn nvars(&self) -> usize {
        self.n + self.atoms.len()
    }

    fn collect(&mut self, e: &Expr) {
        match e {
            Expr::Const(_) | Expr::Var(_) | Expr::Abs2(_) => {}
            Expr::Sum(v) | Expr::Prod(v) => v.iter().for_each(|t| self.collect(t)),
            Expr::Pow(b, _) => self.collect(b),
            Expr::RPow(b, p) => match (&**b, norm_power(p)) {
                (Expr::Abs2(s), Some(_)) => self.intern(Atom::Norm(sorted(s))),
                _ => self.intern(Atom::Opaque(e.to_string())),
            },
            Expr::Cutoff(_) | Expr::Gauge(_) => self.intern(Atom::Opaque(e.to_string())),
        };
    }

    fn intern(&mut self, a: Atom) {
        if !self.atoms.contains(&a) {
            self.atoms.push(a);
        }
    }

    fn atom_index(&self, a: &Atom) -> usize {
        self.n + self.atoms.iter().position(|b| b == a).expect("collected atom")
    }

    fn abs2(&self, s: &[usize]) -> Poly {
        let nv = self.nvars();
        s.iter().fold(Poly::constant(Q::zero(), nv), |acc, &i| acc.add(&Poly::symbol(i, nv, 2)))
    }

    /// Rewrites t_S^{2k+e} as t_S^e·(Σ x_i²)^k.
    fn reduce(&self, p: &Poly) -> Poly {
        let nv = self.nvars();
        let mut out = Poly::constant(Q::zero(), nv);
        for (m, c) in &p.0 {
            let mut mono = m.clone();
            let mut factor = Poly::constant(c.clone(), nv);
            for (k, a) in self.atoms.iter().enumerate() {
                if let Atom::Norm(s) = a {
                    let idx = self.n + k;
                    let e = mono[idx];
                    if e >= 2 {
                        mono[idx] = e % 2;
                        factor = factor.mul(&self.abs2(s).pow(e / 2, nv));
                    }
                }
            }
            out = out.add(&factor.mul(&Poly(BTreeMap::from([(mono, Q::one())]))));
        }
        out
    }

    fn rat(&self, e: &Expr) -> Result<(Poly, Poly)> {
        let nv = self.nvars();
        let one = || Poly::constant(Q::one(), nv);
        Ok(match e {
            Expr::Const(c) => (Poly::constant(c.q.clone(), nv), one()),
            Expr::Var(i) => (Poly::symbol(*i, nv, 1), one()),
            Expr::Abs2(s) => (self.abs2(s), one()),
            Expr::Sum(v) => {
                let mut acc = (Poly::constant(Q::zero(), nv), one());
                for t in v {
                    let (a, b) = self.rat(t)?;
                    acc = if acc.1 == b {
                        (self.reduce(&acc.0.add(&a)), b)
                    } else {
                        (self.reduce(&acc.0.mul(&b).add(&a.mul(&acc.1))), self.reduce(&acc.1.mul(&b)))
                    };
                }
                acc
            }
            Expr::Prod(v) => {
                let mut acc = (one(), one());
                for t in v {
                    let (a, b) = self.rat(t)?;
                    acc = (self.reduce(&acc.0.mul(&a)), self.reduce(&acc.1.mul(&b)));
                }
                acc
            }
            Expr::Pow(b, k) => {
                let (a, d) = self.rat(b)?;
                let (a, d) = if *k < 0 {
                    if a.is_zero() {
                        return Err(Error::Domain("negative power of an identically zero expression".into()));
                    }
                    (d, a)
                } else {
                    (a, d)
                };
                (self.reduce(&a.pow(k.unsigned_abs(), nv)), self.reduce(&d.pow(k.unsigned_abs(), nv)))
            }
            Expr::RPow(b, p) => match (&**b, norm_power(p)) {
                (Expr::Abs2(s), Some(j)) => {
                    let t = Poly::symbol(self.atom_index(&Atom::Norm(sorted(s))), nv, j.unsigned_abs());
                    let t = self.reduce(&t);
                    if j >= 0 {
                        (t, one())
                    } else {
                        (one(), t)
                    }
                }
                _ => (Poly::symbol(self.atom_index(&Atom::Opaque(e.to_string())), nv, 1), one()),
            },
            Expr::Cutoff(_) | Expr::Gauge(_) => {
                (Poly::symbol(self.atom_index(&Atom::Opaque(e.to_string())), nv, 1), one())
            }
        })
    }
}

fn sorted(s: &[usize]) -> Vec<usize> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

/// 2p when it is an integer.
fn norm_power(p: &Q) -> Option<i32> {
    let two_p = p * Q::from_integer(2.into());
    two_p.is_integer().then(|| two_p.to_integer().try_into().ok()).flatten()
}

/// Whether `e` is provably identically zero as a function of x_0..x_{n−1}.
pub fn is_identically_zero(e: &Expr, n: usize) -> Result<bool> {
    let mut ctx = Ctx { n, atoms: Vec::new() };
    ctx.collect(e);
    let (num, den) = ctx.rat(e)?;
    if den.is_zero() {
        return Err(Error::Domain("denominator vanishes identically".into()));
    }
    Ok(ctx.reduce(&num).is_zero())
}

/// Replaces every cutoff by its plateau value: θ → 1, 1 − θ → 0 and all
/// cutoff derivatives → 0. This is the expression's value on the region
/// where each cutoff argument lies on its plateau.
pub fn on_plateau(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) | Expr::Abs2(_) => e.clone(),
        Expr::Sum(v) => Expr::sum(v.iter().map(on_plateau).collect()),
        Expr::Prod(v) => Expr::prod(v.iter().map(on_plateau).collect()),
        Expr::Pow(b, k) => on_plateau(b).pow(*k),
        Expr::RPow(b, p) => on_plateau(b).rpow(p.clone()),
        Expr::Cutoff(c) => {
            let CutoffNode { rising, order, .. } = **c;
            if order == 0 && !rising {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Expr::Gauge(g) => {
            let mut g = (**g).clone();
            g.arg = on_plateau(&g.arg);
            Expr::Gauge(Box::new(g))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{parse_expr, Params};

    fn z(s: &str, n: usize) -> bool {
        is_identically_zero(&parse_expr(s, n, &Params::new()).unwrap(), n).unwrap()
    }

    #[test]
    fn rational_identities() {
        assert!(z("x*y - (-y/z)*(y^2 - x*z) - y^3/z", 3));
        assert!(z("x^3 - (x^2/(x^2+y^2))*x*(x^2+y^2)", 2));
        assert!(!z("x*y - y^3/z", 3));
        assert!(z("1/(x+y) - 1/(y+x)", 2));
    }

    #[test]
    fn norm_relation() {
        assert!(z("norm(x, y)^2 - x^2 - y^2", 2));
        assert!(z("norm(y, x)^3 - norm(x, y)*abs2(x, y)", 2));
        assert!(z("norm(x, y)^(-2)*(x^2 + y^2) - 1", 2));
        assert!(!z("norm(x, y) - x", 2));
    }

    #[test]
    fn plateau_substitution() {
        let e = parse_expr("x*theta(norm(x, y), norm(z)) + y*thetac(x, 1)", 3, &Params::new()).unwrap();
        let p = on_plateau(&e);
        assert!(is_identically_zero(&p.sub(Expr::var(0)), 3).unwrap());
    }
}
