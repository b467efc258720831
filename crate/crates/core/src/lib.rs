//! Matrix-diagonalization spectra of non-Hermitian PT-symmetric Hamiltonians
//! `H = p² + V(x)` in the harmonic-oscillator basis.
//!
//! The pipeline is [`assembly::assemble`] → [`eigen::eigenvalues`] →
//! [`spectrum::filter_real`] / [`spectrum::spectrum_report`]. The
//! finite-difference discretization in [`fd`] is an independent check on
//! basis and quadrature.

pub mod assembly;
pub mod basis;
pub mod cli;
pub mod config;
pub mod eigen;
pub mod error;
pub mod fd;
pub mod matrix;
pub mod output;
pub mod potential;
pub mod quadrature;
pub mod reference;
pub mod spectrum;

pub use assembly::{assemble, structure_report, StructureReport};
pub use basis::BasisSpec;
pub use eigen::{eigenpairs, eigenvalues, residual, EigenPair, RealWindow};
pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use potential::PotentialSpec;
pub use quadrature::QuadratureSpec;
pub use spectrum::{GScanResult, SpectrumReport, Tolerances};
