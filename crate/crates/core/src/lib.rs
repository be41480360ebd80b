//! Exact and interval-certified computations with ideals of m-jets:
//! the truncated jet rings, their ideals, allowed and forbidden directions,
//! and machine checks of flatness, tameness, negligibility and implication
//! certificates.

pub mod cli;
pub mod directions;
pub mod error;
pub mod exactlin;
pub mod geometry;
pub mod ideal;
pub mod interval;
pub mod jetring;
pub mod rational;
pub mod symfun;
pub mod syntax;
pub mod upoly;
pub mod verifier;

pub use error::{Error, Result};
