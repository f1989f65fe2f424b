//! Optimal isometry-channel estimation from Young-diagram combinatorics.
//!
//! The crate builds the nonnegative matrix whose Perron eigenvalue is the
//! optimal fidelity of estimating an isometry `V: ℂ^d → ℂ^D` from `n` parallel
//! queries, the explicit window protocol with Fejér weights, the program
//! costs of storage-and-retrieval strategies, and a brute-force tensor-space
//! oracle for small instances.
//!
//! Everything here is `no_std` with `alloc`; file formats, the command line
//! and threaded sampling live in the companion `isoest` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod estimation;
pub mod oracle;
pub mod pbt;
pub mod protocol;
pub mod young;

pub use error::{Error, Result};
pub use young::{DiagramSet, YoungDiagram};
