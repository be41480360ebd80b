use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::cutoff::CutoffSpec;
use super::gauge::GaugeFn;
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::jetring::{variable_names, Jet};
use crate::rational::{format_q, pow_q, to_f64, Q};

/// An exact rational constant with cached floating and interval forms.
#[derive(Clone, Debug)]
pub struct Num {
    pub q: Q,
    pub f: f64,
    pub iv: Interval,
}

impl Num {
    pub fn new(q: Q) -> Self {
        Num { f: to_f64(&q), iv: Interval::from_q(&q), q }
    }
}

impl PartialEq for Num {
    fn eq(&self, other: &Self) -> bool {
        self.q == other.q
    }
}

/// θ^{(order)}(arg / scale), or its complement.
#[derive(Clone, Debug)]
pub struct CutoffNode {
    pub spec: Arc<CutoffSpec>,
    /// Complement: order 0 means 1 − θ, order k ≥ 1 means −θ^{(k)}.
    pub rising: bool,
    pub order: u32,
    pub arg: Expr,
    pub scale: Expr,
}

#[derive(Clone, Debug)]
pub struct GaugeNode {
    pub gauge: Arc<GaugeFn>,
    pub order: u32,
    pub arg: Expr,
}

/// Symbolic real function of x_0..x_{n−1}, closed under differentiation.
#[derive(Clone, Debug)]
pub enum Expr {
    Const(Num),
    Var(usize),
    Sum(Vec<Expr>),
    Prod(Vec<Expr>),
    Pow(Box<Expr>, i32),
    /// base^p for a rational p; the base must be positive where evaluated.
    RPow(Box<Expr>, Q),
    /// Σ_{i ∈ S} x_i².
    Abs2(Vec<usize>),
    Cutoff(Box<CutoffNode>),
    Gauge(Box<GaugeNode>),
}

impl Expr {
    pub fn constant(q: Q) -> Expr {
        Expr::Const(Num::new(q))
    }

    pub fn int(k: i64) -> Expr {
        Expr::constant(Q::from_integer(k.into()))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(i: usize) -> Expr {
        Expr::Var(i)
    }

    pub fn as_const(&self) -> Option<&Q> {
        match self {
            Expr::Const(c) => Some(&c.q),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const().is_some_and(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_const().is_some_and(One::is_one)
    }

    /// Flattened sum with constants folded.
    pub fn sum(terms: Vec<Expr>) -> Expr {
        let mut c = Q::zero();
        let mut out = Vec::new();
        for t in terms {
            match t {
                Expr::Const(k) => c += k.q,
                Expr::Sum(inner) => {
                    for u in inner {
                        match u {
                            Expr::Const(k) => c += k.q,
                            u => out.push(u),
                        }
                    }
                }
                t => out.push(t),
            }
        }
        if !c.is_zero() {
            out.push(Expr::constant(c));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out),
        }
    }

    /// Flattened product with constants folded to the front.
    pub fn prod(factors: Vec<Expr>) -> Expr {
        let mut c = Q::one();
        let mut out = Vec::new();
        let mut stack: Vec<Expr> = factors;
        stack.reverse();
        while let Some(f) = stack.pop() {
            match f {
                Expr::Const(k) => c *= k.q,
                Expr::Prod(inner) => stack.extend(inner.into_iter().rev()),
                f => out.push(f),
            }
        }
        if c.is_zero() {
            return Expr::zero();
        }
        if out.is_empty() {
            return Expr::constant(c);
        }
        if !c.is_one() {
            out.insert(0, Expr::constant(c));
        }
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expr::Prod(out)
        }
    }

    pub fn pow(self, k: i32) -> Expr {
        match (self, k) {
            (_, 0) => Expr::one(),
            (e, 1) => e,
            (Expr::Const(c), k) => {
                if k < 0 && c.q.is_zero() {
                    Expr::Pow(Box::new(Expr::Const(c)), k)
                } else if k > 0 {
                    Expr::constant(pow_q(&c.q, k as u32))
                } else {
                    Expr::constant(pow_q(&c.q.recip(), k.unsigned_abs()))
                }
            }
            (Expr::Pow(b, j), k) => b.pow(j * k),
            (Expr::RPow(b, p), k) => b.rpow(p * Q::from_integer(k.into())),
            (e, k) => Expr::Pow(Box::new(e), k),
        }
    }

    pub fn rpow(self, p: Q) -> Expr {
        if p.is_integer() {
            let k: i64 = p.to_integer().try_into().expect("small exponent");
            return self.pow(k as i32);
        }
        match self {
            Expr::RPow(b, p0) => b.rpow(p0 * p),
            Expr::Pow(b, j) => b.rpow(p * Q::from_integer(j.into())),
            e => Expr::RPow(Box::new(e), p),
        }
    }

    pub fn neg(self) -> Expr {
        Expr::prod(vec![Expr::int(-1), self])
    }

    pub fn div(self, d: Expr) -> Expr {
        Expr::prod(vec![self, d.pow(-1)])
    }

    pub fn sub(self, b: Expr) -> Expr {
        Expr::sum(vec![self, b.neg()])
    }

    /// √(Σ_{i ∈ S} x_i²).
    pub fn norm(vars: Vec<usize>) -> Expr {
        Expr::RPow(Box::new(Expr::Abs2(vars)), Q::new(1.into(), 2.into()))
    }

    pub fn cutoff(arg: Expr, scale: Expr) -> Expr {
        Expr::cutoff_with(CutoffSpec::standard(), false, 0, arg, scale)
    }

    /// 1 − θ(arg / scale).
    pub fn cutoff_complement(arg: Expr, scale: Expr) -> Expr {
        Expr::cutoff_with(CutoffSpec::standard(), true, 0, arg, scale)
    }

    pub fn cutoff_with(spec: Arc<CutoffSpec>, rising: bool, order: u32, arg: Expr, scale: Expr) -> Expr {
        Expr::Cutoff(Box::new(CutoffNode { spec, rising, order, arg, scale }))
    }

    pub fn gauge(gauge: Arc<GaugeFn>, arg: Expr) -> Expr {
        Expr::Gauge(Box::new(GaugeNode { gauge, order: 0, arg }))
    }

    /// The polynomial of a jet.
    pub fn from_jet(j: &Jet) -> Expr {
        Expr::sum(
            j.terms()
                .map(|(alpha, c)| {
                    let mut f = vec![Expr::constant(c.clone())];
                    for (i, &k) in alpha.0.iter().enumerate() {
                        if k > 0 {
                            f.push(Expr::var(i).pow(k as i32));
                        }
                    }
                    Expr::prod(f)
                })
                .collect(),
        )
    }

    /// The function x ↦ e(c·x).
    pub fn scale_vars(&self, c: &Q) -> Expr {
        match self {
            Expr::Const(_) => self.clone(),
            Expr::Var(_) => Expr::prod(vec![Expr::constant(c.clone()), self.clone()]),
            Expr::Sum(v) => Expr::sum(v.iter().map(|t| t.scale_vars(c)).collect()),
            Expr::Prod(v) => Expr::prod(v.iter().map(|t| t.scale_vars(c)).collect()),
            Expr::Pow(b, k) => b.scale_vars(c).pow(*k),
            Expr::RPow(b, p) => b.scale_vars(c).rpow(p.clone()),
            Expr::Abs2(_) => Expr::prod(vec![Expr::constant(c * c), self.clone()]),
            Expr::Cutoff(n) => {
                let mut n = (**n).clone();
                n.arg = n.arg.scale_vars(c);
                n.scale = n.scale.scale_vars(c);
                Expr::Cutoff(Box::new(n))
            }
            Expr::Gauge(g) => {
                let mut g = (**g).clone();
                g.arg = g.arg.scale_vars(c);
                Expr::Gauge(Box::new(g))
            }
        }
    }

    /// Order-0 cutoff nodes, outermost first.
    pub fn cutoffs(&self) -> Vec<&CutoffNode> {
        let mut out = Vec::new();
        self.collect_cutoffs(&mut out);
        out
    }

    fn collect_cutoffs<'a>(&'a self, out: &mut Vec<&'a CutoffNode>) {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::Abs2(_) => {}
            Expr::Sum(v) | Expr::Prod(v) => v.iter().for_each(|t| t.collect_cutoffs(out)),
            Expr::Pow(b, _) | Expr::RPow(b, _) => b.collect_cutoffs(out),
            Expr::Cutoff(c) => {
                out.push(c);
                c.arg.collect_cutoffs(out);
                c.scale.collect_cutoffs(out);
            }
            Expr::Gauge(g) => g.arg.collect_cutoffs(out),
        }
    }

    /// Largest variable index used, plus one.
    pub fn arity(&self) -> usize {
        match self {
            Expr::Const(_) => 0,
            Expr::Var(i) => i + 1,
            Expr::Sum(v) | Expr::Prod(v) => v.iter().map(Expr::arity).max().unwrap_or(0),
            Expr::Pow(b, _) | Expr::RPow(b, _) => b.arity(),
            Expr::Abs2(s) => s.iter().map(|i| i + 1).max().unwrap_or(0),
            Expr::Cutoff(c) => c.arg.arity().max(c.scale.arity()),
            Expr::Gauge(g) => g.arg.arity(),
        }
    }

    pub fn has_gauge(&self) -> bool {
        match self {
            Expr::Gauge(_) => true,
            Expr::Const(_) | Expr::Var(_) | Expr::Abs2(_) => false,
            Expr::Sum(v) | Expr::Prod(v) => v.iter().any(Expr::has_gauge),
            Expr::Pow(b, _) | Expr::RPow(b, _) => b.has_gauge(),
            Expr::Cutoff(c) => c.arg.has_gauge() || c.scale.has_gauge(),
        }
    }

    /// Structural homogeneity degree, if the expression is visibly
    /// positively homogeneous. Cutoffs of a ratio of equal degrees count as
    /// degree 0; gauges are never homogeneous.
    pub fn homogeneous_degree(&self) -> Option<Q> {
        match self {
            Expr::Const(c) => (!c.q.is_zero()).then(Q::zero),
            Expr::Var(_) => Some(Q::one()),
            Expr::Abs2(_) => Some(Q::from_integer(2.into())),
            Expr::Sum(v) => {
                let mut d: Option<Q> = None;
                for t in v {
                    let dt = t.homogeneous_degree()?;
                    match &d {
                        None => d = Some(dt),
                        Some(d0) if *d0 == dt => {}
                        Some(_) => return None,
                    }
                }
                d
            }
            Expr::Prod(v) => v.iter().map(Expr::homogeneous_degree).sum(),
            Expr::Pow(b, k) => b.homogeneous_degree().map(|d| d * Q::from_integer((*k).into())),
            Expr::RPow(b, p) => b.homogeneous_degree().map(|d| d * p),
            Expr::Cutoff(c) => {
                let a = c.arg.homogeneous_degree()?;
                let s = c.scale.homogeneous_degree()?;
                (a == s).then(Q::zero)
            }
            Expr::Gauge(_) => None,
        }
    }

    /// Top-level summands (the expression itself if it is not a sum).
    pub fn terms(&self) -> Vec<Expr> {
        match self {
            Expr::Sum(v) => v.clone(),
            e if e.is_zero() => Vec::new(),
            e => vec![e.clone()],
        }
    }

    /// Splits into homogeneous pieces of distinct degrees, sorted by degree.
    /// `None` when some summand is not structurally homogeneous.
    pub fn homogeneous_split(&self) -> Option<Vec<(Q, Expr)>> {
        let mut groups: Vec<(Q, Vec<Expr>)> = Vec::new();
        for t in self.terms() {
            let d = t.homogeneous_degree()?;
            match groups.iter_mut().find(|(d0, _)| *d0 == d) {
                Some((_, g)) => g.push(t),
                None => groups.push((d, vec![t])),
            }
        }
        groups.sort_by(|a, b| a.0.cmp(&b.0));
        Some(groups.into_iter().map(|(d, g)| (d, Expr::sum(g))).collect())
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut s = String::new();
        self.write(&mut s, names, 0);
        s
    }

    fn write(&self, s: &mut String, names: &[String], prec: u8) {
        use std::fmt::Write;
        let name = |i: &usize| names.get(*i).cloned().unwrap_or_else(|| format!("x{i}"));
        match self {
            Expr::Const(c) => {
                let t = format_q(&c.q);
                if (c.q.is_negative() || !c.q.is_integer()) && prec > 0 {
                    let _ = write!(s, "({t})");
                } else {
                    s.push_str(&t);
                }
            }
            Expr::Var(i) => s.push_str(&name(i)),
            Expr::Sum(v) => {
                if prec > 0 {
                    s.push('(');
                }
                for (k, t) in v.iter().enumerate() {
                    if k > 0 {
                        s.push_str(" + ");
                    }
                    t.write(s, names, 1);
                }
                if prec > 0 {
                    s.push(')');
                }
            }
            Expr::Prod(v) => {
                if prec > 1 {
                    s.push('(');
                }
                for (k, t) in v.iter().enumerate() {
                    if k > 0 {
                        s.push('*');
                    }
                    t.write(s, names, 2);
                }
                if prec > 1 {
                    s.push(')');
                }
            }
            Expr::Pow(b, k) => {
                b.write(s, names, 3);
                if *k < 0 {
                    let _ = write!(s, "^({k})");
                } else {
                    let _ = write!(s, "^{k}");
                }
            }
            Expr::RPow(b, p) => {
                s.push_str("pow(");
                b.write(s, names, 0);
                let _ = write!(s, ", {})", format_q(p));
            }
            Expr::Abs2(vs) => {
                let _ = write!(s, "abs2({})", vs.iter().map(name).collect::<Vec<_>>().join(", "));
            }
            Expr::Cutoff(c) => {
                let base = if c.rising { "thetac" } else { "theta" };
                let ticks = "'".repeat(c.order as usize);
                let _ = write!(s, "{base}{ticks}(");
                c.arg.write(s, names, 0);
                s.push_str(", ");
                c.scale.write(s, names, 0);
                s.push(')');
            }
            Expr::Gauge(g) => {
                let ticks = "'".repeat(g.order as usize);
                let _ = write!(s, "gauge{ticks}({}, ", g.gauge.name);
                g.arg.write(s, names, 0);
                s.push(')');
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&variable_names(self.arity().max(1))))
    }
}

/// Checks that `order` derivatives are available from a node of class C^s.
pub(crate) fn check_smoothness(node: &str, order: u32, smoothness: u32) -> Result<()> {
    if order > smoothness {
        return Err(Error::Smoothness { node: node.to_string(), order, smoothness });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn folding() {
        let e = Expr::prod(vec![Expr::int(2), Expr::var(0), Expr::prod(vec![Expr::int(3), Expr::var(1)])]);
        match &e {
            Expr::Prod(v) => {
                assert_eq!(v.len(), 3);
                assert_eq!(v[0].as_const(), Some(&q(6)));
            }
            _ => panic!("{e:?}"),
        }
        assert!(Expr::prod(vec![Expr::zero(), Expr::var(0)]).is_zero());
        assert!(Expr::sum(vec![Expr::int(1), Expr::int(-1)]).is_zero());
        assert!(matches!(Expr::var(0).pow(2).pow(-1), Expr::Pow(_, -2)));
    }

    #[test]
    fn homogeneity() {
        let y3z = Expr::var(1).pow(3).div(Expr::var(2));
        assert_eq!(y3z.homogeneous_degree(), Some(q(2)));
        let cut = Expr::cutoff(Expr::norm(vec![0, 1]), Expr::norm(vec![2]));
        assert_eq!(cut.homogeneous_degree(), Some(q(0)));
        let fixed = Expr::cutoff(Expr::norm(vec![0, 1]), Expr::int(1));
        assert_eq!(fixed.homogeneous_degree(), None);
        let mixed = Expr::sum(vec![Expr::var(0).pow(2), Expr::var(1).pow(3)]);
        let split = mixed.homogeneous_split().unwrap();
        assert_eq!(split.len(), 2);
        assert_eq!(split[0].0, q(2));
    }
}
