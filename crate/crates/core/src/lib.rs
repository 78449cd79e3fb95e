//! Simulation of single-loop, non-adiabatic holonomic qubit gates driven by
//! a two-tone optical field in a dissipative lambda system.
//!
//! The qubit is the {|-1>, |+1>} ground doublet; both levels couple to the
//! excited state |A2>, which decays back into the doublet or leaks to |0>.

pub mod drive;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod holonomy;
pub mod linalg;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
