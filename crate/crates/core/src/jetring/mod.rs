//! The truncated polynomial rings 𝒫^m(ℝⁿ).

mod diffeo;
mod jet;
mod monomial;
mod parse;

pub use diffeo::{jet_compose, DiffeoJet};
pub use jet::{Jet, Order};
pub use monomial::{binomial, variable_names, MonomialTable, MultiIndex, RingSignature};
pub use parse::{format_monomial, jet_parse, jet_parse_truncating};
#[allow(unused_imports)]
pub(crate) use parse::{expand, Poly};
