pub mod classical_bm;
pub mod error;
pub mod experiment;
pub mod ising;
pub mod par;
pub mod qaoa;
pub mod qsim;
pub mod store;
pub mod target;
pub mod train;

#[cfg(test)]
mod testutil;

pub use error::{QbmError, Result};
