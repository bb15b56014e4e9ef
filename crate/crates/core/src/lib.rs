//! Exact simulation of degenerate four-wave mixing with number-conserving
//! homodyne detection, and the separability / EPR criteria evaluated on the
//! measured quadratures.

pub mod config;
pub mod criteria;
pub mod dynamics;
pub mod ensembles;
pub mod error;
pub mod fock;
pub mod homodyne;
pub mod pump;
pub mod sweep;
pub mod table;
pub mod validate;
mod tridiag;

pub use error::{Error, Result};
