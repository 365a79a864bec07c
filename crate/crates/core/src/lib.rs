//! Deterministic coresets, sketches and approximation solvers for Euclidean
//! (k,z)-clustering.

pub mod bicriteria;
pub mod dim_reduce;
pub mod epsilon_approx;
pub mod error;
pub mod geometry;
pub mod io;
pub mod linear_map;
pub mod par;
pub mod partition_coreset;
pub mod ptas;
pub mod ring_coreset;
pub mod sum;
pub mod synth;
pub mod verify;

pub use error::{Error, Result};
