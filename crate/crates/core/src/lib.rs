//! Analog quantum simulation of a two-level open quantum system on a
//! double quantum dot coupled to an RLC bath synthesizer.
//!
//! Energies are in μeV, laboratory times in ns, and the equations of motion
//! are integrated with ħ = 1 (see [`units`]).

// `!(x > 0.0)` guards are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bath;
pub mod error;
pub mod experiments;
pub mod hamiltonians;
pub mod heom;
pub mod integrate;
pub mod linalg;
pub mod mapping;
pub mod nnls;
pub mod qbs;
pub mod units;

pub use error::{Error, Result};
