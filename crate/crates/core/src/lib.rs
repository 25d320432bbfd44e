//! Linearized Balescu–Lenard collision operator at the normalized Maxwellian.

// Oracle constants are kept at the digits they were frozen with; negated
// float comparisons are how NaN inputs get rejected; 3x3 loops stay indexed.
#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod dispersion;
pub mod error;
pub mod exec;
pub mod frequency;
pub mod interp;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod output;
pub mod quad;
pub mod verify;

pub use config::PlasmaConfig;
pub use error::{Error, Result};
pub use exec::Exec;
