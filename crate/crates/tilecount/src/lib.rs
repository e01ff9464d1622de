//! Exact counting of unit-height strip tilings with irrational tiles, and
//! the two equivalent representations of the same counting functions:
//! diagonals of N-rational generating functions and binomial multisums.
//!
//! The crate provides:
//! - [`exactnum`]: exact arithmetic over Q-linear combinations of formal
//!   irrational constants, with certified interval sign tests;
//! - [`tiles`] and [`transfer`]: tile sets as boundary-profile pairs and the
//!   transfer multigraph whose weight-(n + eps) cycles count tilings;
//! - [`gf`]: N-rational expressions, coefficient extraction by truncated
//!   expansion, the independent k-network walk-counting backend, closure
//!   constructions, and quasi-diagonal splitting;
//! - [`multisum`]: binomial multisums under the extended binomial
//!   convention, support bounding by exact Fourier-Motzkin elimination, and
//!   the balanced normal form;
//! - [`translate`]: the constructive equivalences between the three
//!   representations;
//! - [`catalog`]: named constructions in all available representations,
//!   Catalan congruence/valuation builders, hypergeometric-limit
//!   constructions, and growth classification;
//! - [`tcf`]: the text container format used by the command-line tools.

pub mod catalog;
pub mod error;
pub mod exactnum;
pub mod gf;
pub mod multisum;
pub mod tcf;
pub mod tiles;
pub mod transfer;
pub mod translate;

mod hnf;
mod polytope;

pub use error::{Error, Result};
