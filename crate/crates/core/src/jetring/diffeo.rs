use num_traits::Zero;

use super::jet::Jet;
use super::monomial::{MultiIndex, RingSignature};
use crate::error::{Error, Result};
use crate::exactlin;
use crate::rational::Q;

/// The m-jet of a diffeomorphism fixing the origin: n component jets with
/// zero constant terms and invertible linear part.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoJet {
    components: Vec<Jet>,
}

impl DiffeoJet {
    pub fn new(components: Vec<Jet>) -> Result<Self> {
        let sig = components
            .first()
            .map(Jet::sig)
            .ok_or_else(|| Error::Invalid("diffeomorphism needs n components".into()))?;
        if components.len() != sig.n {
            return Err(Error::DimensionMismatch { expected: sig.n, got: components.len() });
        }
        for c in &components {
            sig.check_same(&c.sig())?;
            if !c.constant_term().is_zero() {
                return Err(Error::NonzeroConstant(c.to_string()));
            }
        }
        let d = DiffeoJet { components };
        if exactlin::inverse(&d.linear_part()).is_none() {
            return Err(Error::NotInvertible);
        }
        Ok(d)
    }

    pub fn identity(sig: RingSignature) -> Self {
        DiffeoJet { components: (0..sig.n).map(|i| Jet::variable(sig, i)).collect() }
    }

    /// x ↦ A·x.
    pub fn linear(sig: RingSignature, a: &[Vec<Q>]) -> Result<Self> {
        if a.len() != sig.n || a.iter().any(|r| r.len() != sig.n) {
            return Err(Error::DimensionMismatch { expected: sig.n, got: a.len() });
        }
        let components = a
            .iter()
            .map(|row| {
                let terms = row
                    .iter()
                    .enumerate()
                    .map(|(j, c)| (MultiIndex::unit(sig.n, j), c.clone()));
                Jet::from_terms(sig, terms.collect::<Vec<_>>())
            })
            .collect::<Result<Vec<_>>>()?;
        DiffeoJet::new(components)
    }

    pub fn sig(&self) -> RingSignature {
        self.components[0].sig()
    }

    pub fn components(&self) -> &[Jet] {
        &self.components
    }

    /// The Jacobian at 0: `a[i][j]` = coefficient of x_j in component i.
    pub fn linear_part(&self) -> Vec<Vec<Q>> {
        let n = self.sig().n;
        self.components
            .iter()
            .map(|c| (0..n).map(|j| c.coeff(&MultiIndex::unit(n, j))).collect())
            .collect()
    }

    pub fn is_linear(&self) -> bool {
        self.components.iter().all(|c| c.terms().all(|(a, _)| a.degree() == 1))
    }

    /// J^m(p∘φ).
    pub fn pullback(&self, p: &Jet) -> Result<Jet> {
        let sig = self.sig();
        sig.check_same(&p.sig())?;
        let m = sig.m;
        // powers[i][k] = φ_i^k, k ≤ m
        let powers: Vec<Vec<Jet>> = self
            .components
            .iter()
            .map(|c| {
                let mut v = vec![Jet::one(sig)];
                for k in 1..=m as usize {
                    let next = v[k - 1].mul_unchecked(c);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = Jet::zero(sig);
        for (alpha, c) in p.terms() {
            let mut term = Jet::constant(sig, c.clone());
            for (i, &a) in alpha.0.iter().enumerate() {
                if a > 0 {
                    term = term.mul_unchecked(&powers[i][a as usize]);
                }
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// The jet of φ∘ψ (apply ψ first, then φ).
    pub fn compose(&self, psi: &DiffeoJet) -> Result<DiffeoJet> {
        let comps = self
            .components
            .iter()
            .map(|c| psi.pullback(c))
            .collect::<Result<Vec<_>>>()?;
        DiffeoJet::new(comps)
    }

    /// The jet of φ⁻¹, by fixed-point iteration ψ ← A⁻¹(x − N∘ψ), which
    /// gains one correct degree per step.
    pub fn inverse(&self) -> Result<DiffeoJet> {
        let sig = self.sig();
        let a = self.linear_part();
        let ainv = exactlin::inverse(&a).ok_or(Error::NotInvertible)?;
        let nonlinear: Vec<Jet> = self
            .components
            .iter()
            .map(|c| c.sub(&c.homogeneous_part(1)))
            .collect::<Result<_>>()?;
        let apply_ainv = |v: &[Jet]| -> Result<Vec<Jet>> {
            (0..sig.n)
                .map(|i| {
                    let mut acc = Jet::zero(sig);
                    for (j, vj) in v.iter().enumerate() {
                        if !ainv[i][j].is_zero() {
                            acc = acc.add(&vj.scale(&ainv[i][j]))?;
                        }
                    }
                    Ok(acc)
                })
                .collect()
        };
        let x: Vec<Jet> = (0..sig.n).map(|i| Jet::variable(sig, i)).collect();
        let mut psi = DiffeoJet { components: apply_ainv(&x)? };
        for _ in 1..sig.m {
            let rhs = x
                .iter()
                .zip(&nonlinear)
                .map(|(xi, ni)| xi.sub(&psi.pullback(ni)?))
                .collect::<Result<Vec<_>>>()?;
            psi = DiffeoJet { components: apply_ainv(&rhs)? };
        }
        DiffeoJet::new(psi.components)
    }
}

/// J^m(p∘φ).
pub fn jet_compose(p: &Jet, phi: &DiffeoJet) -> Result<Jet> {
    phi.pullback(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jetring::{jet_parse, Order};
    use crate::rational::q;

    fn sig(m: u32, n: usize) -> RingSignature {
        RingSignature::new(m, n).unwrap()
    }

    fn phi(s: RingSignature, comps: &[&str]) -> DiffeoJet {
        DiffeoJet::new(comps.iter().map(|c| jet_parse(c, s).unwrap()).collect()).unwrap()
    }

    #[test]
    fn substitution_examples() {
        let s = sig(2, 2);
        let f = phi(s, &["x + y^2", "y"]);
        assert_eq!(jet_compose(&jet_parse("x", s).unwrap(), &f).unwrap().to_string(), "y^2 + x");
        let sq = jet_compose(&jet_parse("x^2", s).unwrap(), &f).unwrap();
        assert_eq!(sq.to_string(), "x^2");
        assert_eq!(sq.order_of_vanishing(), Order::Finite(2));
        let lin = phi(s, &["2*x", "y"]);
        assert_eq!(jet_compose(&jet_parse("x", s).unwrap(), &lin).unwrap().to_string(), "2*x");
    }

    #[test]
    fn degree_can_change() {
        let s = sig(3, 2);
        let f = phi(s, &["x + y^2", "y"]);
        let p = jet_parse("x", s).unwrap();
        let img = jet_compose(&p, &f).unwrap();
        assert_eq!(p.degree(), Some(1));
        assert_eq!(img.degree(), Some(2));
    }

    #[test]
    fn rejects_singular_linear_part() {
        let s = sig(2, 2);
        let comps = vec![jet_parse("x + y", s).unwrap(), jet_parse("2*x + 2*y", s).unwrap()];
        assert_eq!(DiffeoJet::new(comps), Err(Error::NotInvertible));
        let comps = vec![jet_parse("1 + x", s).unwrap(), jet_parse("y", s).unwrap()];
        assert!(matches!(DiffeoJet::new(comps), Err(Error::NonzeroConstant(_))));
    }

    #[test]
    fn inverse_round_trip() {
        let s = sig(4, 2);
        let f = phi(s, &["x + y^2 - x*y^3", "y + 2*x^2"]);
        let g = f.inverse().unwrap();
        assert_eq!(f.compose(&g).unwrap(), DiffeoJet::identity(s));
        assert_eq!(g.compose(&f).unwrap(), DiffeoJet::identity(s));
        let lin = DiffeoJet::linear(s, &[vec![q(1), q(2)], vec![q(0), q(3)]]).unwrap();
        let p = jet_parse("x^2*y - y^3 + x", s).unwrap();
        let back = jet_compose(&jet_compose(&p, &lin).unwrap(), &lin.inverse().unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
