use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

/// Exponent vector α of a monomial x^α.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// α! = Π αᵢ!
    pub fn factorial(&self) -> u64 {
        self.0.iter().map(|&a| (1..=a as u64).product::<u64>()).product()
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All multi-indices with |α| ≤ max_degree in graded lexicographic order.
    pub fn all_up_to(n: usize, max_degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for d in 0..=max_degree {
            out.extend(Self::of_degree(n, d));
        }
        out
    }

    /// Multi-indices of exactly degree `d`, lexicographically descending
    /// (x² before xy before y²).
    pub fn of_degree(n: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n];
        fill(&mut cur, 0, d, &mut out);
        out
    }
}

fn fill(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        cur[pos] = a;
        fill(cur, pos + 1, remaining - a, out);
    }
    cur[pos] = 0;
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// The pair (m, n) naming the ring 𝒫^m(ℝⁿ).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RingSignature {
    pub m: u32,
    pub n: usize,
}

impl RingSignature {
    pub fn new(m: u32, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidSignature(format!(
                "need m ≥ 1 and n ≥ 1, got m={m}, n={n}"
            )));
        }
        if n > 16 || m > 32 {
            return Err(Error::InvalidSignature(format!(
                "signature (m={m}, n={n}) is beyond the supported size"
            )));
        }
        Ok(RingSignature { m, n })
    }

    /// binomial(m+n, n)
    pub fn monomial_count(&self) -> usize {
        binomial(self.m as u64 + self.n as u64, self.n as u64) as usize
    }

    pub fn table(&self) -> Arc<MonomialTable> {
        MonomialTable::get(*self)
    }

    /// Variable names: `x,y,z,w` for n ≤ 4, otherwise `x1..xn`.
    pub fn variable_names(&self) -> Vec<String> {
        variable_names(self.n)
    }

    pub fn check_same(&self, other: &RingSignature) -> Result<()> {
        if self != other {
            return Err(Error::SignatureMismatch(self.m, self.n, other.m, other.n));
        }
        Ok(())
    }
}

pub fn variable_names(n: usize) -> Vec<String> {
    if n <= 4 {
        ["x", "y", "z", "w"][..n].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=n).map(|i| format!("x{i}")).collect()
    }
}

pub fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Precomputed monomial basis and multiplication table for one signature.
#[derive(Debug)]
pub struct MonomialTable {
    pub sig: RingSignature,
    pub monomials: Vec<MultiIndex>,
    index: HashMap<MultiIndex, usize>,
    /// `product[i * len + j]` is the index of monomial_i · monomial_j, or
    /// `u32::MAX` when the product has degree > m.
    product: Vec<u32>,
    /// First index of each degree block; `degree_start[d]..degree_start[d+1]`.
    pub degree_start: Vec<usize>,
}

impl MonomialTable {
    fn build(sig: RingSignature) -> Self {
        let monomials = MultiIndex::all_up_to(sig.n, sig.m);
        let index: HashMap<MultiIndex, usize> =
            monomials.iter().cloned().enumerate().map(|(i, a)| (a, i)).collect();
        let len = monomials.len();
        let mut product = vec![u32::MAX; len * len];
        for (i, a) in monomials.iter().enumerate() {
            for (j, b) in monomials.iter().enumerate() {
                if a.degree() + b.degree() <= sig.m {
                    product[i * len + j] = index[&a.add(b)] as u32;
                }
            }
        }
        let mut degree_start = vec![0usize; sig.m as usize + 2];
        for d in 0..=sig.m as usize {
            degree_start[d + 1] =
                degree_start[d] + MultiIndex::of_degree(sig.n, d as u32).len();
        }
        MonomialTable { sig, monomials, index, product, degree_start }
    }

    pub fn get(sig: RingSignature) -> Arc<MonomialTable> {
        static CACHE: OnceLock<Mutex<HashMap<RingSignature, Arc<MonomialTable>>>> =
            OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("monomial table cache poisoned");
        guard.entry(sig).or_insert_with(|| Arc::new(MonomialTable::build(sig))).clone()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn index_of(&self, alpha: &MultiIndex) -> Option<usize> {
        self.index.get(alpha).copied()
    }

    #[inline]
    pub fn product_index(&self, i: usize, j: usize) -> Option<usize> {
        let p = self.product[i * self.len() + j];
        (p != u32::MAX).then_some(p as usize)
    }

    pub fn degree_of(&self, i: usize) -> u32 {
        self.monomials[i].degree()
    }

    pub fn degree_range(&self, d: u32) -> std::ops::Range<usize> {
        self.degree_start[d as usize]..self.degree_start[d as usize + 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_binomial() {
        for m in 1..=5 {
            for n in 1..=4 {
                let sig = RingSignature::new(m, n).unwrap();
                assert_eq!(sig.table().len(), sig.monomial_count());
            }
        }
        assert_eq!(RingSignature::new(3, 2).unwrap().monomial_count(), 10);
    }

    #[test]
    fn graded_lex_order() {
        let t = RingSignature::new(2, 2).unwrap().table();
        let names: Vec<_> = t.monomials.iter().map(|a| a.0.clone()).collect();
        assert_eq!(
            names,
            vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]
        );
    }

    #[test]
    fn invalid_signatures_rejected() {
        assert!(RingSignature::new(0, 2).is_err());
        assert!(RingSignature::new(2, 0).is_err());
    }

    #[test]
    fn product_table_truncates() {
        let t = RingSignature::new(2, 1).unwrap().table();
        // x · x = x², x · x² truncated
        assert_eq!(t.product_index(1, 1), Some(2));
        assert_eq!(t.product_index(1, 2), None);
    }
}
