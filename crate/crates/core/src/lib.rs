//! Power-bounded operators on sequence spaces.
//!
//! Orbits are analysed for compactness with certified sup-norm arithmetic.
//! When an orbit is not compact, the witness pipeline extracts a basic
//! sequence equivalent to the unit vectors of `c0`.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod compactness;
pub mod ensembles;
pub mod error;
pub mod families;
pub mod gallery;
pub mod jdlg;
pub mod linalg;
pub mod operators;
pub mod output;
pub mod seqspace;
pub mod witness;

pub use error::{Error, ExitCode, Result};
