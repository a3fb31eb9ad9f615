//! Numerical engine for the free-fermion Segal conformal field theory.
//!
//! The crate builds energy-truncated fermionic Fock spaces, the CAR
//! representation on them, graded tensor calculus with partial supertraces,
//! vertex-operator modes, the operators assigned to disks, annuli and pairs
//! of pants, and the Cauchy transform of planar multiply-connected domains.

pub mod car;
pub mod cauchy;
pub mod error;
pub mod fock;
pub mod graded;
pub mod half;
pub mod linalg;
pub mod supertrace;
pub mod surfaces;
pub mod vertex;

pub use error::{Error, Result};
pub use fock::{BasisState, FockTruncation, Sector};
pub use graded::{Factor, GradedOperator, GradedSpace, Parity, WeightShift};
pub use half::HalfInt;
