use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::Interval;

type DerivFn = dyn Fn(u32, f64) -> f64 + Send + Sync;

/// A positive scale function g on (0, ∞) with derivatives up to
/// `smoothness`, usable inside expressions as `gauge(name, e)`.
pub struct GaugeFn {
    pub name: String,
    pub smoothness: u32,
    /// When set, every tabulated derivative is monotone on (0, ∞), which
    /// makes interval evaluation by endpoints sound.
    pub monotone: bool,
    f: Arc<DerivFn>,
}

impl fmt::Debug for GaugeFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GaugeFn({}, C^{})", self.name, self.smoothness)
    }
}

impl GaugeFn {
    pub fn new(name: impl Into<String>, smoothness: u32, monotone: bool, f: impl Fn(u32, f64) -> f64 + Send + Sync + 'static) -> Self {
        GaugeFn { name: name.into(), smoothness, monotone, f: Arc::new(f) }
    }

    /// g^{(k)}(t).
    pub fn eval(&self, k: u32, t: f64) -> Result<f64> {
        if t <= 0.0 || t.is_nan() {
            return Err(Error::Domain(format!("gauge {} needs t > 0, got {t}", self.name)));
        }
        if k > self.smoothness {
            return Err(Error::Smoothness { node: format!("gauge({})", self.name), order: k, smoothness: self.smoothness });
        }
        Ok((self.f)(k, t))
    }

    pub fn eval_interval(&self, k: u32, t: Interval) -> Result<Interval> {
        if !self.monotone {
            return Err(Error::Invalid(format!("gauge {} has no interval enclosure", self.name)));
        }
        if t.lo <= 0.0 {
            return Err(Error::Domain(format!("gauge {} needs t > 0, got {t}", self.name)));
        }
        let a = self.eval(k, t.lo)?;
        let b = self.eval(k, t.hi)?;
        let slack = 4.0 * f64::EPSILON * a.abs().max(b.abs());
        Ok(Interval::new(a.min(b) - slack, a.max(b) + slack))
    }

    /// t^p: derivatives p(p−1)…(p−k+1)·t^{p−k}, each monotone.
    pub fn power(p: f64) -> GaugeFn {
        let name = if p == 0.5 { "sqrt".to_string() } else { format!("pow{p}") };
        GaugeFn::new(name, 3, true, move |k, t| {
            let c: f64 = (0..k).map(|i| p - i as f64).product();
            c * t.powf(p - k as f64)
        })
    }

    /// 1/(1 + log(1/t)) on (0, 1), extended by 1 beyond t = 1.
    ///
    /// With s = log t and h(s) = (1 − s)^{−1}, the t-derivatives are
    /// t^{−k}·Σ_j s(k, j)·h^{(j)}(s), s(k, j) the signed Stirling numbers.
    pub fn inv_log() -> GaugeFn {
        GaugeFn::new("invlog", 3, false, |k, t| {
            if t >= 1.0 {
                return if k == 0 { 1.0 } else { 0.0 };
            }
            let s = t.ln();
            let h = |j: u32| -> f64 {
                let fact: f64 = (1..=j).map(f64::from).product();
                fact * (1.0 - s).powi(-(j as i32) - 1)
            };
            let stirling: &[f64] = match k {
                0 => &[1.0],
                1 => &[0.0, 1.0],
                2 => &[0.0, -1.0, 1.0],
                _ => &[0.0, 2.0, -3.0, 1.0],
            };
            let sum: f64 = stirling.iter().enumerate().map(|(j, c)| c * h(j as u32)).sum();
            sum * t.powi(-(k as i32))
        })
    }

    /// min(1, t^p); only continuous at t = 1.
    pub fn clamped_power(p: f64) -> GaugeFn {
        GaugeFn::new(format!("minpow{p}"), 0, true, move |_, t| t.powf(p).min(1.0))
    }

    /// Registered gauges by name: `sqrt`, `invlog`, `pow` (with a parameter),
    /// `minpow` (with a parameter).
    pub fn by_name(name: &str, param: Option<f64>) -> Result<GaugeFn> {
        match (name, param) {
            ("sqrt", None) => Ok(GaugeFn::power(0.5)),
            ("invlog", None) => Ok(GaugeFn::inv_log()),
            ("pow", Some(p)) if p > 0.0 => Ok(GaugeFn::power(p)),
            ("minpow", Some(p)) if p > 0.0 => Ok(GaugeFn::clamped_power(p)),
            _ => Err(Error::Invalid(format!("unknown gauge `{name}`"))),
        }
    }

    pub fn value(&self) -> impl Fn(f64) -> f64 + '_ {
        move |t| (self.f)(0, t)
    }
}

/// Log grid and quadrature settings for [`regularize`].
#[derive(Clone, Debug, Serialize)]
pub struct RegularizeOptions {
    /// Grid points per octave.
    pub per_octave: u32,
    /// Grid covers 2^{min_exp} ..= 2^{max_exp}.
    pub min_exp: i32,
    pub max_exp: i32,
}

impl Default for RegularizeOptions {
    fn default() -> Self {
        RegularizeOptions { per_octave: 16, min_exp: -61, max_exp: 2 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Tabulated regularization g ↦ g̃ ↦ g* ↦ g⁺ = C″·g* on a log grid.
#[derive(Clone, Debug, Serialize)]
pub struct Regularized {
    pub gauge: String,
    pub t: Vec<f64>,
    pub g: Vec<f64>,
    pub g_tilde: Vec<f64>,
    /// g* and its first two derivatives (quadrature of the differentiated
    /// kernel); NaN where the kernel support leaves the grid.
    pub g_star: [Vec<f64>; 3],
    pub g_plus: Vec<f64>,
    /// ∫ φ(v) dv / v.
    pub kernel_mass: f64,
    /// C′_k = 4·∫ v^{k−1}·|φ^{(k)}(v)| dv.
    pub c_prime: [f64; 3],
    /// C″ = 4 / kernel_mass, so that C″·g* ≥ g̃ ≥ g.
    pub c_double_prime: f64,
    pub max_doubling_ratio: f64,
    pub checks: Vec<GaugeCheck>,
}

impl Regularized {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// ψ(w) = exp(−1/(1 − w²)) on (−1, 1) and its first two derivatives.
fn psi(k: u32, w: f64) -> f64 {
    if w.abs() >= 1.0 {
        return 0.0;
    }
    let d = 1.0 - w * w;
    let p = (-1.0 / d).exp();
    let a1 = -2.0 * w / (d * d);
    let a2 = -(2.0 + 6.0 * w * w) / (d * d * d);
    match k {
        0 => p,
        1 => p * a1,
        _ => p * (a1 * a1 + a2),
    }
}

/// The mollifier φ(u) = ψ(log₂ u), supported in [½, 2], and its
/// u-derivatives.
pub fn mollifier(k: u32, u: f64) -> f64 {
    if u <= 0.5 || u >= 2.0 {
        return 0.0;
    }
    let l2 = std::f64::consts::LN_2;
    let w = u.log2();
    match k {
        0 => psi(0, w),
        1 => psi(1, w) / (u * l2),
        _ => (psi(2, w) / l2 - psi(1, w)) / (u * u * l2),
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += c * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Regularizes a positive gauge (clamped to ≤ 1) and checks the resulting
/// properties on the grid.
pub fn regularize(name: &str, g: impl Fn(f64) -> f64, opts: &RegularizeOptions) -> Result<Regularized> {
    let k = opts.per_octave as i32;
    let idx: Vec<i32> = (opts.min_exp * k..=opts.max_exp * k).collect();
    let t: Vec<f64> = idx.iter().map(|&i| 2f64.powf(i as f64 / k as f64)).collect();
    let mut gs = Vec::with_capacity(t.len());
    for &ti in &t {
        let v = g(ti);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Domain(format!("gauge sample g({ti:e}) = {v} is not positive")));
        }
        gs.push(v.min(1.0));
    }
    let n = t.len();
    let g_tilde: Vec<f64> = t
        .iter()
        .map(|&ti| t.iter().zip(&gs).map(|(&s, &gv)| 2.0 * ti / (ti + s) * gv).fold(0.0, f64::max))
        .collect();

    // g*^{(j)}(t) = ∫ s^{−j} φ^{(j)}(t/s) g̃(s) ds/s; with s = t·2^{−w} the
    // nodes w ∈ [−1, 1] at step 1/K land on grid points.
    let l2 = std::f64::consts::LN_2;
    let mut g_star = [vec![f64::NAN; n], vec![f64::NAN; n], vec![f64::NAN; n]];
    for i in k as usize..n - k as usize {
        for (j, out) in g_star.iter_mut().enumerate() {
            let mut acc = 0.0;
            for step in -k..=k {
                let s_idx = (i as i32 - step) as usize;
                let s = t[s_idx];
                let weight = if step == -k || step == k {
                    1.0
                } else if (step + k) % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                let u = t[i] / s;
                acc += weight * s.powi(-(j as i32)) * mollifier(j as u32, u) * g_tilde[s_idx];
            }
            out[i] = acc * l2 / (3.0 * k as f64);
        }
    }
    let kernel_mass = simpson(|v| mollifier(0, v) / v, 0.5, 2.0, 4096);
    let c_prime = [0u32, 1, 2].map(|j| 4.0 * simpson(|v| v.powi(j as i32 - 1) * mollifier(j, v).abs(), 0.5, 2.0, 4096));
    let c_double_prime = 4.0 / kernel_mass;
    let g_plus: Vec<f64> = g_star[0].iter().map(|v| c_double_prime * v).collect();

    let mut checks = Vec::new();
    let dominates = gs.iter().zip(&g_tilde).all(|(a, b)| b >= a);
    checks.push(GaugeCheck { name: "g_tilde >= g".into(), pass: dominates, detail: format!("{n} grid points") });

    let mut max_ratio: f64 = 0.0;
    for i in 0..n {
        for j in i..n.min(i + k as usize + 1) {
            let r = (g_tilde[i] / g_tilde[j]).max(g_tilde[j] / g_tilde[i]);
            max_ratio = max_ratio.max(r);
        }
    }
    checks.push(GaugeCheck {
        name: "quasi-doubling".into(),
        pass: max_ratio <= 4.0,
        detail: format!("max ratio over pairs with t1/t2 in [1/2, 2] is {max_ratio:.6}"),
    });

    let interior: Vec<usize> = (k as usize + 1..n - k as usize - 1).collect();
    let mut worst = [0f64; 3];
    for &i in &interior {
        let (tm, t0, tp) = (t[i - 1], t[i], t[i + 1]);
        let (gm, g0, gp) = (g_star[0][i - 1], g_star[0][i], g_star[0][i + 1]);
        let d1 = (gp - gm) / (tp - tm);
        let d2 = 2.0 * ((gp - g0) / (tp - t0) - (g0 - gm) / (t0 - tm)) / (tp - tm);
        for (j, d) in [g0, d1, d2].into_iter().enumerate() {
            let bound = c_prime[j] * t0.powi(-(j as i32)) * g_tilde[i];
            worst[j] = worst[j].max(d.abs() / bound);
        }
    }
    for (j, w) in worst.iter().enumerate() {
        checks.push(GaugeCheck {
            name: format!("|D^{j} g*| <= C'_{j} t^-{j} g_tilde"),
            pass: *w <= 1.0,
            detail: format!("finite differences, worst ratio {w:.4}, C'_{j} = {:.6}", c_prime[j]),
        });
    }

    let plus_dominates = interior.iter().all(|&i| g_plus[i] >= gs[i] * (1.0 - 1e-12));
    checks.push(GaugeCheck { name: "g_plus >= g".into(), pass: plus_dominates, detail: format!("C'' = {c_double_prime:.6}") });

    // g⁺ along the finest 20 dyadic scales with a full kernel support
    let first = interior.first().copied().unwrap_or(0);
    if first + 20 * k as usize >= n {
        return Err(Error::Invalid("gauge grid spans fewer than 20 octaves".into()));
    }
    let trend: Vec<f64> = (0..=20).map(|d| g_plus[first + d * k as usize]).collect();
    let monotone = trend.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-12));
    let decays = trend[0] < trend[20];
    checks.push(GaugeCheck {
        name: "g_plus -> 0".into(),
        pass: monotone && decays,
        detail: format!("g+ at 2^-20 steps from t = {:e}: {:e} .. {:e}", t[first], trend[0], trend[20]),
    });

    Ok(Regularized {
        gauge: name.to_string(),
        t,
        g: gs,
        g_tilde,
        g_star,
        g_plus,
        kernel_mass,
        c_prime,
        c_double_prime,
        max_doubling_ratio: max_ratio,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_is_its_own_envelope() {
        let r = regularize("sqrt", f64::sqrt, &Default::default()).unwrap();
        for (i, &t) in r.t.iter().enumerate() {
            if t <= 1.0 {
                assert!((r.g_tilde[i] - t.sqrt()).abs() <= 1e-6 * t.sqrt());
            }
        }
        assert!(r.passed(), "{:#?}", r.checks);
    }

    #[test]
    fn listed_gauges_regularize() {
        let inv = GaugeFn::inv_log();
        let gauges: Vec<(&str, Box<dyn Fn(f64) -> f64>)> = vec![
            ("minpow", Box::new(|t: f64| t.powf(0.3).min(1.0))),
            ("invlog", Box::new(move |t| inv.eval(0, t).unwrap())),
        ];
        for (name, g) in gauges {
            let r = regularize(name, g, &Default::default()).unwrap();
            assert!(r.passed(), "{name}: {:#?}", r.checks);
        }
    }

    #[test]
    fn kernel_support_and_sign() {
        assert_eq!(mollifier(0, 0.5), 0.0);
        assert_eq!(mollifier(0, 2.0), 0.0);
        for i in 1..100 {
            let u = 0.5 + 1.5 * i as f64 / 100.0;
            assert!(mollifier(0, u) > 0.0);
        }
        // derivative against central differences
        for u in [0.7, 1.0, 1.3, 1.8] {
            let h = 1e-6;
            let fd = (mollifier(0, u + h) - mollifier(0, u - h)) / (2.0 * h);
            assert!((fd - mollifier(1, u)).abs() < 1e-6);
            let fd2 = (mollifier(1, u + h) - mollifier(1, u - h)) / (2.0 * h);
            assert!((fd2 - mollifier(2, u)).abs() < 1e-5);
        }
    }

    #[test]
    fn gauge_derivatives() {
        for g in [GaugeFn::power(0.5), GaugeFn::inv_log(), GaugeFn::power(0.3)] {
            for t in [0.01, 0.2, 0.7] {
                for k in 0..3 {
                    let h = 1e-6 * t;
                    let fd = (g.eval(k, t + h).unwrap() - g.eval(k, t - h).unwrap()) / (2.0 * h);
                    let exact = g.eval(k + 1, t).unwrap();
                    assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} k={k} t={t}", g.name);
                }
            }
        }
        assert!(GaugeFn::clamped_power(0.3).eval(1, 0.5).is_err());
        assert!(GaugeFn::power(0.5).eval(0, 0.0).is_err());
    }

    #[test]
    fn nonpositive_rejected() {
        assert!(regularize("zero", |_| 0.0, &Default::default()).is_err());
    }
}
