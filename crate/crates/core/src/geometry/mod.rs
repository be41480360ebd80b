//! Directions, domes, cones and annuli, plus sphere covers and a
//! tangent-direction estimator for sampled sets.

mod sphere;
mod tangent;

pub use sphere::{dome_cover, sphere_cover, SpherePatch};
pub use tangent::{estimate_tangent_directions, parse_points_csv, TangentOptions};

use serde::Serialize;

use crate::error::{Error, Result};

/// A unit vector; constructors normalise and reject the zero vector.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Direction(pub Vec<f64>);

impl Direction {
    pub fn new(v: Vec<f64>) -> Result<Self> {
        let norm = norm(&v);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Domain("the zero vector has no direction".into()));
        }
        Ok(Direction(v.into_iter().map(|x| x / norm).collect()))
    }

    pub fn axis(n: usize, i: usize, sign: f64) -> Self {
        let mut v = vec![0.0; n];
        v[i] = sign.signum();
        Direction(v)
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Direction {
        Direction(self.0.iter().map(|x| -x).collect())
    }

    /// Chordal distance |ω − ω′|.
    pub fn dist(&self, other: &Direction) -> f64 {
        dist(&self.0, &other.0)
    }
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// dist(ω, Ω); +∞ for empty Ω.
pub fn dist_to_set(w: &[f64], omega: &[Direction]) -> f64 {
    omega.iter().map(|o| dist(w, &o.0)).fold(f64::INFINITY, f64::min)
}

/// Whether x/|x| lies in the dome D(Ω, δ) = {ω : dist(ω, Ω) < δ}.
pub fn dome_membership(x: &[f64], omega: &[Direction], delta: f64) -> Result<bool> {
    let d = Direction::new(x.to_vec())?;
    Ok(dist_to_set(&d.0, omega) < delta)
}

/// Γ(Ω, δ, r) = { x : 0 < |x| < r, dist(x/|x|, Ω) < δ }.
#[derive(Clone, Debug, Serialize)]
pub struct Cone {
    pub omega: Vec<Direction>,
    pub delta: f64,
    pub r: f64,
}

impl Cone {
    pub fn new(omega: Vec<Direction>, delta: f64, r: f64) -> Self {
        Cone { omega, delta, r }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let nx = norm(x);
        nx > 0.0 && nx < self.r && dist_to_set(&x.iter().map(|v| v / nx).collect::<Vec<_>>(), &self.omega) < self.delta
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }
}

/// Ann_K(r) = { x : r/K < |x| < K·r }.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Annulus {
    pub k: f64,
    pub r: f64,
}

impl Annulus {
    pub fn new(k: f64, r: f64) -> Result<Self> {
        if !(k >= 1.0 && r > 0.0) {
            return Err(Error::Invalid(format!("annulus needs K ≥ 1 and r > 0, got K={k}, r={r}")));
        }
        Ok(Annulus { k, r })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let nx = norm(x);
        self.r / self.k < nx && nx < self.k * self.r
    }

    pub fn inner(&self) -> f64 {
        self.r / self.k
    }

    pub fn outer(&self) -> f64 {
        self.k * self.r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dome_examples() {
        let pole = vec![Direction::axis(3, 2, 1.0)];
        assert!(dome_membership(&[0.0, 0.0, 1.0], &pole, 0.1).unwrap());
        assert!(!dome_membership(&[1.0, 0.0, 0.0], &pole, 0.5).unwrap());
        assert!(!dome_membership(&[1.0, 2.0, 3.0], &[], 10.0).unwrap());
        assert!(dome_membership(&[0.0, 0.0, 0.0], &pole, 0.1).is_err());
    }

    #[test]
    fn cone_and_annulus() {
        let c = Cone::new(vec![Direction::axis(2, 0, 1.0)], 0.1, 1.0);
        assert!(c.contains(&[0.5, 0.01]));
        assert!(!c.contains(&[1.5, 0.0]));
        assert!(!c.contains(&[0.0, 0.0]));
        let a = Annulus::new(4.0, 1.0).unwrap();
        assert!(a.contains(&[0.3, 0.0]) && !a.contains(&[0.2, 0.0]) && !a.contains(&[4.0, 0.0]));
    }
}
