//! Several expressions flattened into one graph with shared subexpressions,
//! so that a batch of related functions (typically all derivatives of one
//! function) is evaluated with each distinct node computed once.

use std::collections::HashMap;
use std::sync::Arc;

use super::cutoff::CutoffSpec;
use super::eval::{cutoff_value, Val};
use super::expr::{Expr, Num};
use super::gauge::GaugeFn;
use crate::error::{Error, Result};
use crate::rational::Q;

#[derive(Clone, Debug)]
enum Node {
    Const(Num),
    Var(usize),
    Sum(Vec<usize>),
    /// Cutoff factors are kept apart: one that vanishes identically makes
    /// the product 0 even where the other factors are undefined.
    Prod { cutoffs: Vec<usize>, others: Vec<usize> },
    Pow(usize, i32),
    RPow(usize, Q),
    Abs2(Vec<usize>),
    Cutoff { spec: Arc<CutoffSpec>, rising: bool, order: u32, arg: usize, scale: usize },
    Gauge { gauge: Arc<GaugeFn>, order: u32, arg: usize },
}

#[derive(Clone, Debug)]
pub struct Tape {
    nodes: Vec<Node>,
    roots: Vec<usize>,
}

#[derive(Default)]
struct Builder {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
}

impl Builder {
    fn intern(&mut self, key: String, node: Node) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.nodes.push(node);
        self.index.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    fn add(&mut self, e: &Expr) -> usize {
        match e {
            Expr::Const(c) => self.intern(format!("c{}", c.q), Node::Const(c.clone())),
            Expr::Var(i) => self.intern(format!("v{i}"), Node::Var(*i)),
            Expr::Sum(v) => {
                let ids: Vec<usize> = v.iter().map(|t| self.add(t)).collect();
                self.intern(format!("s{ids:?}"), Node::Sum(ids))
            }
            Expr::Prod(v) => {
                let (cuts, rest): (Vec<&Expr>, Vec<&Expr>) = v.iter().partition(|f| matches!(f, Expr::Cutoff(_)));
                let cutoffs: Vec<usize> = cuts.into_iter().map(|f| self.add(f)).collect();
                let others: Vec<usize> = rest.into_iter().map(|f| self.add(f)).collect();
                self.intern(format!("p{cutoffs:?}{others:?}"), Node::Prod { cutoffs, others })
            }
            Expr::Pow(b, k) => {
                let b = self.add(b);
                self.intern(format!("w{b},{k}"), Node::Pow(b, *k))
            }
            Expr::RPow(b, p) => {
                let b = self.add(b);
                self.intern(format!("r{b},{p}"), Node::RPow(b, p.clone()))
            }
            Expr::Abs2(s) => {
                let vars: Vec<usize> = s.iter().map(|&i| self.intern(format!("v{i}"), Node::Var(i))).collect();
                self.intern(format!("a{vars:?}"), Node::Abs2(vars))
            }
            Expr::Cutoff(c) => {
                let arg = self.add(&c.arg);
                let scale = self.add(&c.scale);
                let key = format!("t{:p},{},{},{arg},{scale}", Arc::as_ptr(&c.spec), c.rising, c.order);
                self.intern(key, Node::Cutoff { spec: c.spec.clone(), rising: c.rising, order: c.order, arg, scale })
            }
            Expr::Gauge(g) => {
                let arg = self.add(&g.arg);
                let key = format!("g{:p},{},{arg}", Arc::as_ptr(&g.gauge), g.order);
                self.intern(key, Node::Gauge { gauge: g.gauge.clone(), order: g.order, arg })
            }
        }
    }
}

/// Per-evaluation cache: each node's value, with a flag for cutoffs that
/// vanish identically.
pub struct Memo<V>(Vec<Option<Result<(V, bool)>>>);

impl Tape {
    pub fn new(exprs: &[&Expr]) -> Tape {
        let mut b = Builder::default();
        let roots = exprs.iter().map(|e| b.add(e)).collect();
        Tape { nodes: b.nodes, roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Number of distinct nodes.
    pub fn size(&self) -> usize {
        self.nodes.len()
    }

    pub fn memo<V: Val>(&self) -> Memo<V> {
        Memo(vec![None; self.nodes.len()])
    }

    /// Value of expression `i` at `x`, sharing work through `memo`, which
    /// must only be reused for the same `x`.
    pub fn eval<V: Val>(&self, i: usize, x: &[V], memo: &mut Memo<V>) -> Result<V> {
        self.node(self.roots[i], x, memo).map(|(v, _)| v)
    }

    /// Values of all expressions at `x`.
    pub fn eval_all<V: Val>(&self, x: &[V]) -> Vec<Result<V>> {
        let mut memo = self.memo();
        (0..self.roots.len()).map(|i| self.eval(i, x, &mut memo)).collect()
    }

    fn node<V: Val>(&self, id: usize, x: &[V], memo: &mut Memo<V>) -> Result<(V, bool)> {
        if let Some(r) = &memo.0[id] {
            return r.clone();
        }
        let r = self.compute(id, x, memo);
        memo.0[id] = Some(r.clone());
        r
    }

    fn value<V: Val>(&self, id: usize, x: &[V], memo: &mut Memo<V>) -> Result<V> {
        self.node(id, x, memo).map(|(v, _)| v)
    }

    fn compute<V: Val>(&self, id: usize, x: &[V], memo: &mut Memo<V>) -> Result<(V, bool)> {
        let var = |i: usize| x.get(i).copied().ok_or(Error::DimensionMismatch { expected: i + 1, got: x.len() });
        let v = match &self.nodes[id] {
            Node::Const(c) => V::num(c),
            Node::Var(i) => var(*i)?,
            Node::Sum(ts) => {
                let mut acc = V::zero();
                for &t in ts {
                    acc = acc + self.value(t, x, memo)?;
                }
                acc
            }
            Node::Prod { cutoffs, others } => {
                let mut first_err = None;
                let mut acc = V::from_f64(1.0);
                for &c in cutoffs {
                    match self.node(c, x, memo) {
                        Ok((_, true)) => return Ok((V::zero(), false)),
                        Ok((v, false)) => acc = acc * v,
                        Err(e) => {
                            first_err.get_or_insert(e);
                        }
                    }
                }
                if let Some(e) = first_err {
                    return Err(e);
                }
                for &f in others {
                    acc = acc * self.value(f, x, memo)?;
                }
                acc
            }
            Node::Pow(b, k) => self.value(*b, x, memo)?.powi(*k)?,
            Node::RPow(b, p) => self.value(*b, x, memo)?.rpow(p)?,
            Node::Abs2(vars) => {
                let mut acc = V::zero();
                for &i in vars {
                    acc = acc + self.value(i, x, memo)?.sqr();
                }
                acc
            }
            Node::Cutoff { spec, rising, order, arg, scale } => {
                let a = self.value(*arg, x, memo)?;
                let s = self.value(*scale, x, memo)?;
                return cutoff_value(spec, *rising, *order, a, s);
            }
            Node::Gauge { gauge, order, arg } => V::gauge(gauge, *order, self.value(*arg, x, memo)?)?,
        };
        Ok((v, false))
    }
}
