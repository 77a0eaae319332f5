//! Scattering theory for thin quantum junctions.
//!
//! A junction is a rectangular quantum well with straight leads attached
//! orthogonally to its sides. The crate assembles the Dirichlet-to-Neumann
//! map of the well from its eigenfunctions, removes the spurious poles of the
//! decoupled well with a compensated Krein formula, and turns the result into
//! scattering matrices, resonance data and fitted solvable vertex models.

pub mod error;
pub mod linalg;

pub mod geometry;
pub mod spectral;
pub mod dnmap;
pub mod intermediate;
pub mod smatrix;
pub mod graphvertex;
pub mod extension;
pub mod vertexmodel;
pub mod resonance;

pub mod tjunction;
pub mod sweep;
pub mod golden;
pub mod cli;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
