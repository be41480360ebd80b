use num_traits::One;

use super::expr::{check_smoothness, CutoffNode, Expr, GaugeNode};
use crate::error::Result;
use crate::jetring::MultiIndex;
use crate::rational::Q;

impl Expr {
    /// ∂/∂x_i.
    pub fn partial(&self, i: usize) -> Result<Expr> {
        Ok(match self {
            Expr::Const(_) => Expr::zero(),
            Expr::Var(j) => {
                if *j == i {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Sum(v) => Expr::sum(v.iter().map(|t| t.partial(i)).collect::<Result<_>>()?),
            Expr::Prod(v) => {
                let mut terms = Vec::new();
                for (k, f) in v.iter().enumerate() {
                    let d = f.partial(i)?;
                    if d.is_zero() {
                        continue;
                    }
                    let mut factors = v.clone();
                    factors[k] = d;
                    terms.push(Expr::prod(factors));
                }
                Expr::sum(terms)
            }
            Expr::Pow(b, k) => {
                let d = b.partial(i)?;
                if d.is_zero() {
                    return Ok(Expr::zero());
                }
                Expr::prod(vec![Expr::int(*k as i64), (**b).clone().pow(k - 1), d])
            }
            Expr::RPow(b, p) => {
                let d = b.partial(i)?;
                if d.is_zero() {
                    return Ok(Expr::zero());
                }
                Expr::prod(vec![Expr::constant(p.clone()), (**b).clone().rpow(p - Q::one()), d])
            }
            Expr::Abs2(s) => {
                if s.contains(&i) {
                    Expr::prod(vec![Expr::int(2), Expr::var(i)])
                } else {
                    Expr::zero()
                }
            }
            Expr::Cutoff(c) => {
                let da = c.arg.partial(i)?;
                let ds = c.scale.partial(i)?;
                if da.is_zero() && ds.is_zero() {
                    return Ok(Expr::zero());
                }
                check_smoothness("cutoff", c.order + 1, c.spec.q)?;
                let next = Expr::Cutoff(Box::new(CutoffNode { order: c.order + 1, ..(**c).clone() }));
                // d/dx (a/s) = a'/s − a·s'/s²
                let inner = Expr::sum(vec![
                    Expr::prod(vec![da, c.scale.clone().pow(-1)]),
                    Expr::prod(vec![Expr::int(-1), c.arg.clone(), ds, c.scale.clone().pow(-2)]),
                ]);
                Expr::prod(vec![next, inner])
            }
            Expr::Gauge(g) => {
                let da = g.arg.partial(i)?;
                if da.is_zero() {
                    return Ok(Expr::zero());
                }
                check_smoothness(&format!("gauge({})", g.gauge.name), g.order + 1, g.gauge.smoothness)?;
                let next = Expr::Gauge(Box::new(GaugeNode { order: g.order + 1, ..(**g).clone() }));
                Expr::prod(vec![next, da])
            }
        })
    }

    /// ∂^α.
    pub fn derive(&self, alpha: &MultiIndex) -> Result<Expr> {
        let mut e = self.clone();
        for (i, &k) in alpha.0.iter().enumerate() {
            for _ in 0..k {
                if e.is_zero() {
                    return Ok(e);
                }
                e = e.partial(i)?;
            }
        }
        Ok(e)
    }

    /// All ∂^α with |α| ≤ m, in graded-lex order of α.
    pub fn all_derivatives(&self, n: usize, m: u32) -> Result<Vec<(MultiIndex, Expr)>> {
        let mut out: Vec<(MultiIndex, Expr)> = vec![(MultiIndex(vec![0; n]), self.clone())];
        let mut frontier = vec![0usize];
        for _ in 0..m {
            let mut next = Vec::new();
            for &idx in &frontier {
                let (alpha, e) = out[idx].clone();
                // extend only in the last nonzero coordinate onward, so each
                // multi-index is produced once
                let start = alpha.0.iter().rposition(|&a| a > 0).unwrap_or(0);
                for i in start..n {
                    let mut beta = alpha.clone();
                    beta.0[i] += 1;
                    let d = if e.is_zero() { Expr::zero() } else { e.partial(i)? };
                    out.push((beta, d));
                    next.push(out.len() - 1);
                }
            }
            frontier = next;
        }
        out.sort_by(|a, b| {
            let da: u32 = a.0 .0.iter().sum();
            let db: u32 = b.0 .0.iter().sum();
            da.cmp(&db).then_with(|| b.0 .0.cmp(&a.0 .0))
        });
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symfun::parse_expr;

    fn p(s: &str) -> Expr {
        parse_expr(s, 3, &Default::default()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn y_cubed_over_z() {
        let f = p("y^3/z");
        let x = [0.3, 0.2, 1.5];
        let fy = f.partial(1).unwrap();
        let fz = f.partial(2).unwrap();
        assert!(close(fy.eval_f64(&x).unwrap(), 3.0 * 0.04 / 1.5));
        assert!(close(fz.eval_f64(&x).unwrap(), -0.008 / 2.25));
        assert!(f.partial(0).unwrap().is_zero());
        assert!(p("7").partial(0).unwrap().is_zero());
    }

    #[test]
    fn all_derivatives_count() {
        let d = p("x*y*z").all_derivatives(3, 2).unwrap();
        assert_eq!(d.len(), 10);
        assert_eq!(d[0].0 .0, vec![0, 0, 0]);
        assert_eq!(d[1].0 .0, vec![1, 0, 0]);
        assert_eq!(d[4].0 .0, vec![2, 0, 0]);
    }

    #[test]
    fn cutoff_smoothness_limit() {
        let f = p("theta(x, 1)");
        let d3 = f.derive(&MultiIndex(vec![3, 0, 0])).unwrap();
        assert!(!d3.is_zero());
        let err = f.derive(&MultiIndex(vec![4, 0, 0])).unwrap_err();
        assert_eq!(err.code(), "smoothness");
    }
}
