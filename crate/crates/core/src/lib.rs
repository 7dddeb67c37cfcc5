//! Spectral compression of block-lumpable reversible Markov chains.
//!
//! The crate builds the symmetric six-state chain made of three two-state
//! blocks, enumerates every partition of the state space into three cells,
//! and compares the determinant of each indicator compression `HᵀTH` of
//! `T = P²` against the relaxed benchmark (the product of the three largest
//! eigenvalues of `T`).
//!
//! Module map:
//!
//! * [`linalg`]: small dense matrices, determinants and a cyclic Jacobi eigensolver.
//! * [`model`]: block model parameters, `P`, the quotient `K` and derived spectral data.
//! * [`modelfile`]: the flat key-value model file format.
//! * [`partitions`]: restricted-growth enumeration, count matrices and family tags.
//! * [`compression`]: indicator frames, compressions and the relaxed benchmark.
//! * [`closedform`]: closed determinant formulas for the structured families and
//!   the diagonal spectral bound.
//! * [`certify`]: the exhaustive certificate and an exploratory parameter scan.
//! * [`report`]: fixed-precision text and JSON rendering.

pub mod certify;
pub mod closedform;
pub mod compression;
mod error;
pub mod linalg;
pub mod model;
pub mod modelfile;
pub mod partitions;
pub mod report;

pub use error::{Error, Result};
