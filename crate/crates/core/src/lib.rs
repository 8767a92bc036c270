//! Exact computer algebra for the Heisenberg-Weyl algebra.
//!
//! The crate works entirely over arbitrary-precision rationals. Elements of
//! the algebra live in the normal-order basis `(a+)^i a^j` ([`normal`]), and
//! can be read from a small operator language ([`parser`]). Powers of
//! homogeneous elements give generalized Stirling tables ([`stirling`]),
//! whose exponential generating functions are extracted with truncated
//! formal power series ([`series`], [`multiseries`]). The Bargmann-Fock
//! representation turns elements into row-finite matrices acting on series
//! ([`endomatrix`]); one-annihilator operators integrate to substitutions
//! with prefunctions ([`oneparam`]). Finally [`ladder`] expands
//! endomorphisms of a space with a countable basis in relative raising and
//! lowering operators.
//!
//! Infinite objects are always represented by explicit truncations. Every
//! truncated value carries its order, and matrices record the band of rows
//! and columns on which the truncation is known to be exact.

pub mod endomatrix;
pub mod exec;
pub mod json;
pub mod ladder;
pub mod multiseries;
pub mod normal;
pub mod oneparam;
pub mod parser;
pub mod rational;
pub mod report;
pub mod series;
pub mod stirling;

pub use endomatrix::{DenomSeq, OpMatrix, Scalar, Triangularity};
pub use exec::Exec;
pub use ladder::{BasisMat, CoeffSeq, CoeffRole, Poly, PolySeq};
pub use multiseries::MultiSeries;
pub use normal::{Excess, Letter, NormalForm};
pub use oneparam::{PrefSub, TwoParamSub};
pub use parser::{OpExpr, ParseError};
pub use rational::Q;
pub use report::{Mismatch, Report};
pub use series::TruncSeries;
pub use stirling::StirlingTable;
