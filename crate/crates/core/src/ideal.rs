//! Ideals of 𝒫₀^m(ℝⁿ).

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::Subspace;
use crate::jetring::{jet_compose, jet_parse, DiffeoJet, Jet, MultiIndex, RingSignature};

/// An ideal given by generators, together with its canonical basis as a
/// subspace of the reduced coordinate space of 𝒫₀^m(ℝⁿ).
#[derive(Clone, Debug)]
pub struct JetIdeal {
    sig: RingSignature,
    generators: Vec<Jet>,
    basis: Subspace,
}

impl PartialEq for JetIdeal {
    /// Ideals are equal when their bases agree; generators are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig && self.basis == other.basis
    }
}

/// `{ "m": …, "n": …, "generators": [ "<poly>", … ] }`
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IdealDoc {
    pub m: u32,
    pub n: usize,
    pub generators: Vec<String>,
}

fn reduced_dim(sig: RingSignature) -> usize {
    sig.monomial_count() - 1
}

impl JetIdeal {
    /// ⟨gens⟩_m: the span of all J^m(x^β·g) with |β| ≤ m − 1.
    pub fn from_generators(sig: RingSignature, gens: Vec<Jet>) -> Result<Self> {
        for g in &gens {
            sig.check_same(&g.sig())?;
            if !g.constant_term().is_zero() {
                return Err(Error::NonzeroConstant(g.to_string()));
            }
        }
        let monomials = MultiIndex::all_up_to(sig.n, sig.m - 1);
        let mut vectors = Vec::new();
        for g in &gens {
            for beta in &monomials {
                let mono = Jet::monomial(sig, beta, num_traits::One::one())?;
                let prod = mono.mul_unchecked(g);
                if !prod.is_zero() {
                    vectors.push(prod.reduced_coords());
                }
            }
        }
        let basis = Subspace::span(reduced_dim(sig), vectors)?;
        Ok(JetIdeal { sig, generators: gens, basis })
    }

    pub fn parse(sig: RingSignature, gens: &[&str]) -> Result<Self> {
        let jets = gens.iter().map(|g| jet_parse(g, sig)).collect::<Result<Vec<_>>>()?;
        JetIdeal::from_generators(sig, jets)
    }

    /// Parses `"p1;p2;…"`.
    pub fn parse_list(sig: RingSignature, gens: &str) -> Result<Self> {
        let parts: Vec<&str> = gens.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
        JetIdeal::parse(sig, &parts)
    }

    pub fn from_doc(doc: &IdealDoc) -> Result<Self> {
        let sig = RingSignature::new(doc.m, doc.n)?;
        let gens: Vec<&str> = doc.generators.iter().map(String::as_str).collect();
        JetIdeal::parse(sig, &gens)
    }

    pub fn to_doc(&self) -> IdealDoc {
        IdealDoc {
            m: self.sig.m,
            n: self.sig.n,
            generators: self.generators.iter().map(Jet::to_string).collect(),
        }
    }

    fn from_basis(sig: RingSignature, basis: Subspace) -> Result<Self> {
        let generators = basis
            .basis()
            .iter()
            .map(|v| Jet::from_reduced_coords(sig, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(JetIdeal { sig, generators, basis })
    }

    pub fn sig(&self) -> RingSignature {
        self.sig
    }

    pub fn generators(&self) -> &[Jet] {
        &self.generators
    }

    pub fn basis(&self) -> &Subspace {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.dim() == 0
    }

    /// Basis elements as jets.
    pub fn basis_jets(&self) -> Vec<Jet> {
        self.basis
            .basis()
            .iter()
            .map(|v| Jet::from_reduced_coords(self.sig, v).expect("basis vector has reduced length"))
            .collect()
    }

    pub fn contains(&self, p: &Jet) -> Result<bool> {
        self.sig.check_same(&p.sig())?;
        if !p.constant_term().is_zero() {
            return Ok(false);
        }
        self.basis.contains(&p.reduced_coords())
    }

    pub fn sum(&self, other: &JetIdeal) -> Result<JetIdeal> {
        self.sig.check_same(&other.sig)?;
        let mut out = JetIdeal::from_basis(self.sig, self.basis.sum(&other.basis)?)?;
        out.generators = self.generators.iter().chain(&other.generators).cloned().collect();
        Ok(out)
    }

    pub fn intersect(&self, other: &JetIdeal) -> Result<JetIdeal> {
        self.sig.check_same(&other.sig)?;
        JetIdeal::from_basis(self.sig, self.basis.intersect(&other.basis)?)
    }

    /// The ideal generated by the pulled-back generators g∘φ.
    pub fn transform(&self, phi: &DiffeoJet) -> Result<JetIdeal> {
        let gens = self
            .generators
            .iter()
            .map(|g| jet_compose(g, phi))
            .collect::<Result<Vec<_>>>()?;
        JetIdeal::from_generators(self.sig, gens)
    }

    /// Checks x_i·b ∈ I for every basis jet b and every variable x_i.
    pub fn is_multiplicatively_closed(&self) -> bool {
        let vars: Vec<Jet> = (0..self.sig.n).map(|i| Jet::variable(self.sig, i)).collect();
        self.basis_jets().iter().all(|b| {
            vars.iter().all(|x| self.contains(&x.mul_unchecked(b)).unwrap_or(false))
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(m: u32, n: usize) -> RingSignature {
        RingSignature::new(m, n).unwrap()
    }

    #[test]
    fn principal_ideal_of_x() {
        for m in 1..=6 {
            let i = JetIdeal::parse(sig(m, 1), &["x"]).unwrap();
            assert_eq!(i.dim(), m as usize);
        }
    }

    #[test]
    fn membership_examples() {
        let s = sig(2, 3);
        let i = JetIdeal::parse(s, &["x^2", "y^2 - x*z"]).unwrap();
        assert_eq!(i.dim(), 2);
        assert!(!i.contains(&jet_parse("x*y", s).unwrap()).unwrap());
        assert!(i.contains(&Jet::zero(s)).unwrap());
        assert!(i.contains(&jet_parse("3*x^2 + y^2 - x*z", s).unwrap()).unwrap());
        let j = JetIdeal::parse(sig(3, 1), &["x"]).unwrap();
        assert!(j.contains(&jet_parse("x^3", sig(3, 1)).unwrap()).unwrap());
    }

    #[test]
    fn rejects_units() {
        assert!(matches!(
            JetIdeal::parse(sig(2, 2), &["1 + x"]),
            Err(Error::NonzeroConstant(_))
        ));
    }

    #[test]
    fn sum_and_intersection() {
        let s = sig(2, 2);
        let ix = JetIdeal::parse(s, &["x"]).unwrap();
        let iy = JetIdeal::parse(s, &["y"]).unwrap();
        let sum = ix.sum(&iy).unwrap();
        for p in ["x", "y", "x^2", "x*y", "y^2"] {
            assert!(sum.contains(&jet_parse(p, s).unwrap()).unwrap());
        }
        let cap = ix.intersect(&iy).unwrap();
        assert_eq!(cap, JetIdeal::parse(s, &["x*y"]).unwrap());
        assert!(cap.is_multiplicatively_closed());
    }

    #[test]
    fn transform_examples() {
        let s = sig(2, 2);
        let ix = JetIdeal::parse(s, &["x"]).unwrap();
        let phi = DiffeoJet::new(vec![jet_parse("x + y^2", s).unwrap(), jet_parse("y", s).unwrap()])
            .unwrap();
        assert_eq!(ix.transform(&phi).unwrap(), JetIdeal::parse(s, &["x + y^2"]).unwrap());
        let swap = DiffeoJet::new(vec![jet_parse("y", s).unwrap(), jet_parse("x", s).unwrap()]).unwrap();
        let ixy = JetIdeal::parse(s, &["x*y"]).unwrap();
        assert_eq!(ixy.transform(&swap).unwrap(), ixy);
    }

    #[test]
    fn doc_round_trip() {
        let doc: IdealDoc =
            serde_json::from_str(r#"{"m":2,"n":3,"generators":["x^2","y^2-x*z"]}"#).unwrap();
        let i = JetIdeal::from_doc(&doc).unwrap();
        assert_eq!(i.to_doc().generators, vec!["x^2", "-x*z + y^2"]);
    }
}
