use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::monomial::{MonomialTable, MultiIndex, RingSignature};
use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::rational::Q;

/// An element of 𝒫^m(ℝⁿ): a polynomial of degree ≤ m with exact rational
/// coefficients, stored densely in graded lexicographic order.
#[derive(Clone)]
pub struct Jet {
    table: Arc<MonomialTable>,
    coeffs: Vec<Q>,
}

/// Order of vanishing at the origin.
#[derive(Clone, Copy, PartialEq, Eq, Debug, PartialOrd, Ord)]
pub enum Order {
    Finite(u32),
    /// The zero jet.
    MoreThanM,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Finite(k) => write!(f, "{k}"),
            Order::MoreThanM => f.write_str("more_than_m"),
        }
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.table.sig == other.table.sig && self.coeffs == other.coeffs
    }
}

impl Eq for Jet {}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet[m={}, n={}]({})", self.sig().m, self.sig().n, self)
    }
}

impl Jet {
    pub fn zero(sig: RingSignature) -> Self {
        let table = sig.table();
        let coeffs = vec![Q::zero(); table.len()];
        Jet { table, coeffs }
    }

    pub fn one(sig: RingSignature) -> Self {
        let mut j = Jet::zero(sig);
        j.coeffs[0] = Q::one();
        j
    }

    pub fn constant(sig: RingSignature, c: Q) -> Self {
        let mut j = Jet::zero(sig);
        j.coeffs[0] = c;
        j
    }

    /// The coordinate function xᵢ.
    pub fn variable(sig: RingSignature, i: usize) -> Self {
        Jet::monomial(sig, &MultiIndex::unit(sig.n, i), Q::one())
            .expect("degree-1 monomial always fits")
    }

    pub fn monomial(sig: RingSignature, alpha: &MultiIndex, c: Q) -> Result<Self> {
        if alpha.n() != sig.n {
            return Err(Error::DimensionMismatch { expected: sig.n, got: alpha.n() });
        }
        let mut j = Jet::zero(sig);
        match j.table.index_of(alpha) {
            Some(i) => {
                j.coeffs[i] = c;
                Ok(j)
            }
            None => Err(Error::DegreeOverflow {
                term: super::parse::format_monomial(&c, alpha, &sig.variable_names()),
                degree: alpha.degree(),
                m: sig.m,
            }),
        }
    }

    /// Builds a jet from (multi-index, coefficient) terms; terms of degree
    /// greater than m are an error.
    pub fn from_terms<I>(sig: RingSignature, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Q)>,
    {
        let mut j = Jet::zero(sig);
        for (alpha, c) in terms {
            if c.is_zero() {
                continue;
            }
            match j.table.index_of(&alpha) {
                Some(i) => j.coeffs[i] += c,
                None => {
                    return Err(Error::DegreeOverflow {
                        term: super::parse::format_monomial(&c, &alpha, &sig.variable_names()),
                        degree: alpha.degree(),
                        m: sig.m,
                    })
                }
            }
        }
        Ok(j)
    }

    /// Builds a jet from terms, discarding those of degree > m.
    pub fn truncated_from_terms<I>(sig: RingSignature, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Q)>,
    {
        let mut j = Jet::zero(sig);
        for (alpha, c) in terms {
            if let Some(i) = j.table.index_of(&alpha) {
                j.coeffs[i] += c;
            }
        }
        j
    }

    /// Coordinates in the monomial basis (length binomial(m+n, n)).
    pub fn from_coeffs(sig: RingSignature, coeffs: Vec<Q>) -> Result<Self> {
        let table = sig.table();
        if coeffs.len() != table.len() {
            return Err(Error::DimensionMismatch { expected: table.len(), got: coeffs.len() });
        }
        Ok(Jet { table, coeffs })
    }

    pub fn sig(&self) -> RingSignature {
        self.table.sig
    }

    pub fn table(&self) -> &MonomialTable {
        &self.table
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Q {
        self.table.index_of(alpha).map(|i| self.coeffs[i].clone()).unwrap_or_else(Q::zero)
    }

    pub fn constant_term(&self) -> &Q {
        &self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Nonzero terms in graded lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Q)> {
        self.table
            .monomials
            .iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
    }

    /// Largest degree carrying a nonzero coefficient (`None` for zero).
    pub fn degree(&self) -> Option<u32> {
        self.terms().map(|(a, _)| a.degree()).max()
    }

    pub fn order_of_vanishing(&self) -> Order {
        self.terms()
            .map(|(a, _)| a.degree())
            .min()
            .map(Order::Finite)
            .unwrap_or(Order::MoreThanM)
    }

    /// The homogeneous component of degree `d`.
    pub fn homogeneous_part(&self, d: u32) -> Jet {
        let mut out = Jet::zero(self.sig());
        if d <= self.sig().m {
            for i in self.table.degree_range(d) {
                out.coeffs[i] = self.coeffs[i].clone();
            }
        }
        out
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms().map(|(a, _)| a.degree());
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// p_k, the nonzero homogeneous part of least degree k ≥ 1.
    pub fn lowest_homogeneous_part(&self) -> Result<Jet> {
        match self.order_of_vanishing() {
            Order::MoreThanM => Err(Error::ZeroJet),
            Order::Finite(0) => Err(Error::OrderZero),
            Order::Finite(k) => Ok(self.homogeneous_part(k)),
        }
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.sig().check_same(&other.sig())?;
        Ok(Jet {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.sig().check_same(&other.sig())?;
        Ok(Jet {
            table: self.table.clone(),
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn neg(&self) -> Jet {
        self.scale(&-Q::one())
    }

    pub fn scale(&self, c: &Q) -> Jet {
        Jet { table: self.table.clone(), coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Jet product J^m(p·q): the polynomial product with every term of
    /// degree > m dropped.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.sig().check_same(&other.sig())?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Jet) -> Jet {
        let t = &self.table;
        let mut out = vec![Q::zero(); t.len()];
        let nz: Vec<usize> = (0..t.len()).filter(|&j| !other.coeffs[j].is_zero()).collect();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for &j in &nz {
                if let Some(k) = t.product_index(i, j) {
                    out[k] += a * &other.coeffs[j];
                }
            }
        }
        Jet { table: self.table.clone(), coeffs: out }
    }

    pub fn pow(&self, k: u32) -> Jet {
        let mut acc = Jet::one(self.sig());
        for _ in 0..k {
            acc = acc.mul_unchecked(self);
        }
        acc
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &[Q]) -> Result<Q> {
        self.check_point_len(x.len())?;
        let mut acc = Q::zero();
        for (alpha, c) in self.terms() {
            let mut term = c.clone();
            for (xi, &a) in x.iter().zip(&alpha.0) {
                for _ in 0..a {
                    term *= xi;
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Floating-point value.
    pub fn eval_f64(&self, x: &[f64]) -> Result<f64> {
        self.check_point_len(x.len())?;
        Ok(self
            .terms()
            .map(|(alpha, c)| {
                crate::rational::to_f64(c)
                    * x.iter().zip(&alpha.0).map(|(xi, &a)| xi.powi(a as i32)).product::<f64>()
            })
            .sum())
    }

    /// Interval enclosure over a box.
    pub fn eval_interval(&self, x: &[Interval]) -> Result<Interval> {
        self.check_point_len(x.len())?;
        let mut acc = Interval::ZERO;
        for (alpha, c) in self.terms() {
            let mut term = Interval::from_q(c);
            for (xi, &a) in x.iter().zip(&alpha.0) {
                if a > 0 {
                    term = term * xi.powi(a as i32).expect("nonnegative power");
                }
            }
            acc = acc + term;
        }
        Ok(acc)
    }

    fn check_point_len(&self, len: usize) -> Result<()> {
        if len != self.sig().n {
            return Err(Error::DimensionMismatch { expected: self.sig().n, got: len });
        }
        Ok(())
    }

    /// Coordinates of this jet in 𝒫₀^m (constant term dropped).
    pub fn reduced_coords(&self) -> Vec<Q> {
        self.coeffs[1..].to_vec()
    }

    pub fn from_reduced_coords(sig: RingSignature, coords: &[Q]) -> Result<Jet> {
        let mut coeffs = Vec::with_capacity(coords.len() + 1);
        coeffs.push(Q::zero());
        coeffs.extend_from_slice(coords);
        Jet::from_coeffs(sig, coeffs)
    }

    /// ∂/∂xᵢ as a jet of the same signature (degree drops by one).
    pub fn partial(&self, i: usize) -> Jet {
        let sig = self.sig();
        let terms = self.terms().filter(|(a, _)| a.0[i] > 0).map(|(a, c)| {
            let mut b = a.clone();
            b.0[i] -= 1;
            (b, c * Q::from_integer(a.0[i].into()))
        });
        Jet::truncated_from_terms(sig, terms.collect::<Vec<_>>())
    }

    /// Same polynomial viewed in another order (must still fit).
    pub fn with_order(&self, m: u32) -> Result<Jet> {
        let sig = RingSignature::new(m, self.sig().n)?;
        Jet::from_terms(sig, self.terms().map(|(a, c)| (a.clone(), c.clone())).collect::<Vec<_>>())
    }
}

impl fmt::Display for Jet {
    /// Descending degree, graded lexicographic within a degree; `0` for zero.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.sig().variable_names();
        let mut out = String::new();
        let m = self.sig().m;
        for d in (0..=m).rev() {
            for i in self.table.degree_range(d) {
                let c = &self.coeffs[i];
                if c.is_zero() {
                    continue;
                }
                let body = super::parse::format_monomial(&c.abs(), &self.table.monomials[i], &names);
                if out.is_empty() {
                    if c.is_negative() {
                        out.push('-');
                    }
                } else if c.is_negative() {
                    out.push_str(" - ");
                } else {
                    out.push_str(" + ");
                }
                out.push_str(&body);
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}
