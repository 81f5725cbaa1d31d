//! Time-reversed Granger causality (TRGC) for bivariate VAR processes.

pub mod error;
pub mod granger;
pub mod inference;
pub mod io;
pub mod linalg;
mod regression;
pub mod scenarios;
pub mod seed;
pub mod structural;
pub mod time_reversal;
pub mod var;

pub use error::{Result, TrgcError};
