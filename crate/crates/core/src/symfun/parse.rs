use std::collections::BTreeMap;
use std::sync::Arc;

use super::expr::Expr;
use super::gauge::GaugeFn;
use crate::error::{Error, Result};
use crate::jetring::variable_names;
use crate::rational::{to_f64, Q};
use crate::syntax::{parse, Ast};

/// Named constants substituted while parsing (`delta`, `rho`, `eps`, …).
pub type Params = BTreeMap<String, Q>;

struct Ctx<'a> {
    names: Vec<String>,
    params: &'a Params,
}

fn err(pos: usize, msg: impl Into<String>) -> Error {
    Error::Parse { pos, msg: msg.into() }
}

impl Ctx<'_> {
    fn var_list(&self, args: &[Ast], pos: usize) -> Result<Vec<usize>> {
        if args.is_empty() {
            return Ok((0..self.names.len()).collect());
        }
        args.iter()
            .map(|a| match a {
                Ast::Ident(name, p) => {
                    self.names.iter().position(|v| v == name).ok_or_else(|| err(*p, format!("`{name}` is not a variable")))
                }
                _ => Err(err(pos, "expected variable names")),
            })
            .collect()
    }

    fn constant(&self, a: &Ast, pos: usize) -> Result<Q> {
        let e = self.build(a)?;
        e.as_const().cloned().ok_or_else(|| err(pos, "expected a constant"))
    }

    fn build(&self, a: &Ast) -> Result<Expr> {
        Ok(match a {
            Ast::Num(q) => Expr::constant(q.clone()),
            Ast::Ident(name, pos) => {
                if let Some(i) = self.names.iter().position(|v| v == name) {
                    Expr::var(i)
                } else if let Some(q) = self.params.get(name) {
                    Expr::constant(q.clone())
                } else {
                    return Err(err(*pos, format!("unknown identifier `{name}`")));
                }
            }
            Ast::Neg(e) => self.build(e)?.neg(),
            Ast::Add(a, b) => Expr::sum(vec![self.build(a)?, self.build(b)?]),
            Ast::Sub(a, b) => self.build(a)?.sub(self.build(b)?),
            Ast::Mul(a, b) => Expr::prod(vec![self.build(a)?, self.build(b)?]),
            Ast::Div(a, b, pos) => {
                let d = self.build(b)?;
                if d.is_zero() {
                    return Err(err(*pos, "division by zero"));
                }
                self.build(a)?.div(d)
            }
            Ast::Pow(b, k, pos) => {
                let k = i32::try_from(*k).map_err(|_| err(*pos, "exponent too large"))?;
                let base = self.build(b)?;
                if k < 0 && base.is_zero() {
                    return Err(err(*pos, "negative power of zero"));
                }
                base.pow(k)
            }
            Ast::Call(name, args, pos) => self.call(name, args, *pos)?,
        })
    }

    fn arity(name: &str, args: &[Ast], want: &[usize], pos: usize) -> Result<()> {
        if !want.contains(&args.len()) {
            return Err(err(pos, format!("`{name}` takes {want:?} arguments, got {}", args.len())));
        }
        Ok(())
    }

    fn call(&self, name: &str, args: &[Ast], pos: usize) -> Result<Expr> {
        match name {
            "abs2" => Ok(Expr::Abs2(self.var_list(args, pos)?)),
            "norm" => Ok(Expr::norm(self.var_list(args, pos)?)),
            "sqrt" => {
                Self::arity(name, args, &[1], pos)?;
                Ok(self.build(&args[0])?.rpow(Q::new(1.into(), 2.into())))
            }
            "pow" => {
                Self::arity(name, args, &[2], pos)?;
                Ok(self.build(&args[0])?.rpow(self.constant(&args[1], pos)?))
            }
            "theta" | "thetac" => {
                Self::arity(name, args, &[2], pos)?;
                let arg = self.build(&args[0])?;
                let scale = self.build(&args[1])?;
                if scale.as_const().is_some_and(|c| *c <= Q::from_integer(0.into())) {
                    return Err(err(pos, "cutoff scale must be positive"));
                }
                Ok(if name == "theta" { Expr::cutoff(arg, scale) } else { Expr::cutoff_complement(arg, scale) })
            }
            "gauge" => {
                Self::arity(name, args, &[2, 3], pos)?;
                let Ast::Ident(gname, _) = &args[0] else {
                    return Err(err(pos, "gauge name expected"));
                };
                let param = match args.get(2) {
                    Some(a) => Some(to_f64(&self.constant(a, pos)?)),
                    None => None,
                };
                let g = GaugeFn::by_name(gname, param).map_err(|e| err(pos, e.to_string()))?;
                Ok(Expr::gauge(Arc::new(g), self.build(&args[1])?))
            }
            _ => Err(err(pos, format!("unknown function `{name}`"))),
        }
    }
}

/// Parses a scalar expression in `n` variables (named x, y, z, w or
/// x1..xn). Beyond the polynomial grammar it accepts `/`, `abs2(vars)`,
/// `norm(vars)` (all variables when empty), `sqrt(e)`, `pow(e, q)`,
/// `theta(e, s)` = θ(e/s), `thetac(e, s)` = 1 − θ(e/s) and
/// `gauge(name, e[, p])`.
pub fn parse_expr(text: &str, n: usize, params: &Params) -> Result<Expr> {
    let ast = parse(text)?;
    Ctx { names: variable_names(n), params }.build(&ast)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn grammar() {
        let mut params = Params::new();
        params.insert("rho".into(), q(2));
        let e = parse_expr("x^2/rho + norm(x, y)^2 - abs2(x, y)", 2, &params).unwrap();
        assert!((e.eval_f64(&[1.0, 2.0]).unwrap() - 0.5).abs() < 1e-12);
        let g = parse_expr("gauge(sqrt, z) + gauge(pow, z, 1/3)", 3, &params).unwrap();
        assert!((g.eval_f64(&[0.0, 0.0, 8.0]).unwrap() - (8f64.sqrt() + 2.0)).abs() < 1e-12);
    }

    #[test]
    fn errors_have_positions() {
        let e = parse_expr("x + foo", 2, &Params::new()).unwrap_err();
        assert_eq!(e, Error::Parse { pos: 4, msg: "unknown identifier `foo`".into() });
        assert!(parse_expr("theta(x)", 2, &Params::new()).is_err());
        assert!(parse_expr("x/0", 2, &Params::new()).is_err());
        assert!(parse_expr("gauge(nope, x)", 2, &Params::new()).is_err());
    }
}
