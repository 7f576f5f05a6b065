//! Exact deformation quantization for super-Poisson algebras of the form
//! `C^∞(M) ⊗ Λ E*`: a graded Weyl-algebra bundle with its fibrewise
//! deformed product, the flatness recursion and Taylor-series lift that
//! produce a star product, the curvature-corrected super-Poisson bracket,
//! and quantum and classical BRST operators for first-class constraints.
//!
//! All arithmetic is exact over Gaussian rationals; there are no floats
//! anywhere in the crate.

pub mod brst;
pub mod cli;
pub mod error;
pub mod fedosov;
pub mod fibrewise;
pub mod geometry;
pub mod report;
pub mod sample;
pub mod scalars;
pub mod suites;
pub mod superalgebra;

pub use error::Error;
