//! Sampled flatness and tameness: ∂^α F = o(|x|^{m−|α|}) and
//! ∂^α S = O(|x|^{−|α|}) judged from a trend over dyadic shells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::Verdict;
use crate::error::{Error, Result};
use crate::geometry::{norm, Direction};
use crate::jetring::binomial;
use crate::symfun::Expr;

/// Where a flatness or tameness claim is made.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    /// ℝⁿ ∖ {0}.
    Punctured { n: usize },
    /// Γ(Ω, δ, r).
    Cone { omega: Vec<Direction>, delta: f64, r: f64 },
}

impl Region {
    pub fn n(&self) -> usize {
        match self {
            Region::Punctured { n } => *n,
            Region::Cone { omega, .. } => omega.first().map_or(0, Direction::n),
        }
    }

    fn outer_radius(&self) -> f64 {
        match self {
            Region::Punctured { .. } => 1.0,
            Region::Cone { r, .. } => r.min(1.0),
        }
    }

    /// Unit directions and radial fractions in (1/2, 1], reused on every
    /// shell so homogeneous functions scale exactly from shell to shell.
    fn base_points(&self, count: usize, seed: u64) -> Result<Vec<(Vec<f64>, f64)>> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Invalid("region has no directions".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let unit = |rng: &mut ChaCha8Rng| loop {
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = norm(&v);
            if (0.1..=1.0).contains(&r) {
                return v.into_iter().map(|x| x / r).collect::<Vec<f64>>();
            }
        };
        let mut out = Vec::with_capacity(count);
        for i in 0..count {
            let w = match self {
                Region::Punctured { .. } => unit(&mut rng),
                Region::Cone { omega, delta, .. } => {
                    // ω + s·v with v ⟂ ω and s < δ stays within chordal distance δ
                    let o = &omega[i % omega.len()].0;
                    let v = unit(&mut rng);
                    let dot: f64 = v.iter().zip(o).map(|(a, b)| a * b).sum();
                    let perp: Vec<f64> = v.iter().zip(o).map(|(a, b)| a - dot * b).collect();
                    let pn = norm(&perp);
                    let s = delta * rng.gen_range(0.0..1.0);
                    let raw: Vec<f64> = o
                        .iter()
                        .zip(&perp)
                        .map(|(a, p)| a + if pn > 0.0 { s * p / pn } else { 0.0 })
                        .collect();
                    let rn = norm(&raw);
                    raw.into_iter().map(|x| x / rn).collect()
                }
            };
            out.push((w, rng.gen_range(0.5..=1.0)));
        }
        Ok(out)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SampleOptions {
    pub first_shell: u32,
    pub last_shell: u32,
    pub points_per_shell: usize,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions { first_shell: 4, last_shell: 24, points_per_shell: 48, seed: 0 }
    }
}

/// Shell k holds |x| ∈ (R·2^{−k−1}, R·2^{−k}].
#[derive(Clone, Debug, Serialize)]
pub struct ShellRow {
    pub k: u32,
    pub radius: f64,
    /// Largest sampled ratio for each derivative order |α| = 0..m.
    pub sup_by_order: Vec<f64>,
    pub sup: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct FlatnessReport {
    pub expr: String,
    #[serde(skip)]
    pub func: Expr,
    pub region: Region,
    pub m: u32,
    pub shells: Vec<ShellRow>,
    pub identically_zero: bool,
    pub verdict: Verdict,
    pub contract: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct TamenessReport {
    pub expr: String,
    #[serde(skip)]
    pub func: Expr,
    pub region: Region,
    pub m: u32,
    pub shells: Vec<ShellRow>,
    /// Largest sampled |∂^α S(x)|·|x|^{|α|}.
    pub constant: f64,
    pub verdict: Verdict,
    pub contract: &'static str,
}

const FLAT_CONTRACT: &str = "pass: shell sups strictly decrease over the last 8 shells and the final one is below 1e-3 of the first (or all samples vanish); fail: no decay from first to last shell";
const TAME_CONTRACT: &str = "pass: all sampled ratios finite and the max over the last 8 shells is at most twice the max over the first 8";

/// Per-shell, per-order sups of |∂^α f(x)|·|x|^{weight(|α|)}.
fn sweep(f: &Expr, region: &Region, m: u32, opts: &SampleOptions, weight: impl Fn(u32) -> i32) -> Result<Vec<ShellRow>> {
    let n = region.n();
    let derivs = f.all_derivatives(n, m)?;
    let base = region.base_points(opts.points_per_shell, opts.seed)?;
    let outer = region.outer_radius();
    let mut rows = Vec::new();
    for k in opts.first_shell..=opts.last_shell {
        let radius = outer * 2f64.powi(-(k as i32));
        let mut sup_by_order = vec![0.0f64; m as usize + 1];
        for (w, frac) in &base {
            let t = radius * frac;
            let x: Vec<f64> = w.iter().map(|c| c * t).collect();
            for (alpha, d) in &derivs {
                if d.is_zero() {
                    continue;
                }
                let order = alpha.degree();
                let v = d.eval_f64(&x)?.abs() * t.powi(weight(order));
                let slot = &mut sup_by_order[order as usize];
                *slot = if v.is_nan() { f64::INFINITY } else { slot.max(v) };
            }
        }
        let sup = sup_by_order.iter().copied().fold(0.0, f64::max);
        rows.push(ShellRow { k, radius, sup_by_order, sup });
    }
    Ok(rows)
}

fn check_shells(opts: &SampleOptions) -> Result<()> {
    if opts.last_shell < opts.first_shell + 15 {
        return Err(Error::Invalid("flatness and tameness trends need at least 16 shells".into()));
    }
    Ok(())
}

/// Samples |∂^α F(x)|/|x|^{m−|α|} over dyadic shells of the region.
pub fn check_flat(f: &Expr, region: &Region, m: u32, opts: &SampleOptions) -> Result<FlatnessReport> {
    check_shells(opts)?;
    let shells = sweep(f, region, m, opts, |a| a as i32 - m as i32)?;
    let sups: Vec<f64> = shells.iter().map(|r| r.sup).collect();
    let identically_zero = sups.iter().all(|&s| s == 0.0);
    let tail = &sups[sups.len() - 8..];
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    let (first, last) = (sups[0], sups[sups.len() - 1]);
    let verdict = if identically_zero || (decreasing && last.is_finite() && last < 1e-3 * first) {
        Verdict::Pass
    } else if !last.is_finite() || last >= first {
        Verdict::Fail
    } else {
        Verdict::Inconclusive
    };
    Ok(FlatnessReport {
        expr: f.to_string(),
        func: f.clone(),
        region: region.clone(),
        m,
        shells,
        identically_zero,
        verdict,
        contract: FLAT_CONTRACT,
    })
}

/// Samples |∂^α S(x)|·|x|^{|α|} over dyadic shells of the region.
pub fn check_tame(s: &Expr, region: &Region, m: u32, opts: &SampleOptions) -> Result<TamenessReport> {
    check_shells(opts)?;
    let shells = sweep(s, region, m, opts, |a| a as i32)?;
    let sups: Vec<f64> = shells.iter().map(|r| r.sup).collect();
    let head = sups[..8].iter().copied().fold(0.0, f64::max);
    let tail = sups[sups.len() - 8..].iter().copied().fold(0.0, f64::max);
    let constant = sups.iter().copied().fold(0.0, f64::max);
    let verdict = if constant.is_finite() && tail <= 2.0 * head { Verdict::Pass } else { Verdict::Fail };
    Ok(TamenessReport {
        expr: s.to_string(),
        func: s.clone(),
        region: region.clone(),
        m,
        shells,
        constant,
        verdict,
        contract: TAME_CONTRACT,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct LeibnizRow {
    pub k: u32,
    pub measured: f64,
    /// max_d Σ_j C(d, j)·tame_j·flat_{d−j} from the input reports.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductReport {
    pub product: FlatnessReport,
    pub leibniz: Vec<LeibnizRow>,
    pub leibniz_consistent: bool,
    pub verdict: Verdict,
}

/// Checks that S·F is flat when F is flat and S is tame on the same region,
/// and cross-checks the sampled product against the Leibniz bound built from
/// the two input reports (valid because all three use the same points).
pub fn check_flat_tame_product(f: &FlatnessReport, s: &TamenessReport, opts: &SampleOptions) -> Result<ProductReport> {
    if f.region != s.region {
        return Err(Error::RegionMismatch("flat and tame reports were computed on different regions".into()));
    }
    if f.m != s.m {
        return Err(Error::Invalid(format!("order mismatch: flat m = {}, tame m = {}", f.m, s.m)));
    }
    if f.verdict != Verdict::Pass || s.verdict != Verdict::Pass {
        return Err(Error::Invalid(format!(
            "product check needs passing inputs (flat: {}, tame: {})",
            f.verdict.label(false),
            s.verdict.label(false)
        )));
    }
    if f.shells.len() != s.shells.len() {
        return Err(Error::RegionMismatch("flat and tame reports sample different shells".into()));
    }
    let prod = Expr::prod(vec![s.func.clone(), f.func.clone()]);
    let product = check_flat(&prod, &f.region, f.m, opts)?;
    let mut leibniz = Vec::new();
    for ((pr, fr), sr) in product.shells.iter().zip(&f.shells).zip(&s.shells) {
        let bound = (0..=f.m)
            .map(|d| {
                (0..=d)
                    .map(|j| binomial(d as u64, j as u64) as f64 * sr.sup_by_order[j as usize] * fr.sup_by_order[(d - j) as usize])
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        leibniz.push(LeibnizRow { k: pr.k, measured: pr.sup, bound });
    }
    let leibniz_consistent = leibniz.iter().all(|r| r.measured <= r.bound * (1.0 + 1e-9) + f64::MIN_POSITIVE);
    let verdict = if leibniz_consistent { product.verdict } else { Verdict::Fail };
    Ok(ProductReport { product, leibniz, leibniz_consistent, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::{parse_expr, Params};

    fn e(s: &str, n: usize) -> Expr {
        parse_expr(s, n, &Params::new()).unwrap()
    }

    #[test]
    fn cubic_is_flat_to_order_two() {
        let r = check_flat(&e("x^3", 2), &Region::Punctured { n: 2 }, 2, &Default::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        let ratio = r.shells[1].sup / r.shells[0].sup;
        assert!((ratio - 0.5).abs() < 1e-9, "{ratio}");
        let xy = check_flat(&e("x*y", 2), &Region::Punctured { n: 2 }, 2, &Default::default()).unwrap();
        assert_eq!(xy.verdict, Verdict::Fail);
    }

    #[test]
    fn tame_examples() {
        let p2 = Region::Punctured { n: 2 };
        let s = check_tame(&e("x^2/(x^2+y^2)", 2), &p2, 3, &Default::default()).unwrap();
        assert_eq!(s.verdict, Verdict::Pass);
        let bad = check_tame(&e("1/norm()", 2), &p2, 1, &Default::default()).unwrap();
        assert_eq!(bad.verdict, Verdict::Fail);
    }

    #[test]
    fn product_with_leibniz() {
        let p2 = Region::Punctured { n: 2 };
        let opts = SampleOptions::default();
        let f = check_flat(&e("x^4", 2), &p2, 3, &opts).unwrap();
        let s = check_tame(&e("x^2/(x^2+y^2)", 2), &p2, 3, &opts).unwrap();
        let r = check_flat_tame_product(&f, &s, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Pass);
        assert!(r.leibniz_consistent);
        let other = Region::Cone { omega: vec![Direction::axis(2, 0, 1.0)], delta: 0.1, r: 1.0 };
        let s2 = check_tame(&e("x^2/(x^2+y^2)", 2), &other, 3, &opts).unwrap();
        assert_eq!(check_flat_tame_product(&f, &s2, &opts).unwrap_err().code(), "region_mismatch");
    }
}
