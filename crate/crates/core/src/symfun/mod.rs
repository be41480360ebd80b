//! Differentiable scalar functions on ℝⁿ∖{0}: rational functions, norms of
//! coordinate blocks, smooth cutoffs and gauges, with exact symbolic
//! derivatives and point or interval evaluation.

mod cutoff;
mod derive;
mod eval;
mod expr;
mod gauge;
mod parse;
mod residual;
mod tape;

pub use cutoff::CutoffSpec;
pub use eval::{eval, Val};
pub use expr::{CutoffNode, Expr, GaugeNode, Num};
pub use gauge::{mollifier, regularize, GaugeCheck, GaugeFn, Regularized, RegularizeOptions};
pub use parse::{parse_expr, Params};
pub use residual::{is_identically_zero, on_plateau};
pub use tape::{Memo, Tape};
