// Negated comparisons are used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fraccalc;
pub mod oracle;
pub mod quadrature;
pub mod repsolver;
pub mod specfun;
pub mod stability;

pub use error::{Error, Result};
