//! Linearizations of matrix polynomials and the pencil-duality machinery
//! around them.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and the
//! benchmark output writers live in the `pencilkit` companion crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod conditioning;
pub mod dense;
pub mod eigen;
pub mod error;
pub mod linearize;
pub mod polycore;
pub mod ddouble;
pub mod duality;
pub mod harness;
pub mod qz;

pub use dense::{Matrix, C64};
pub use error::{Error, Result};
pub use polycore::{
    chordal_distance, residual_norm, scale_fan_lin_van_dooren, EigenTriple, HomogeneousEval,
    HomogeneousPoint, MatrixPolynomial, Pencil, ScalingReport,
};
