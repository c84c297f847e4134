//! Numerical laboratory for slowly driven finite-dimensional quantum systems
//! and their inverse-evolving dual partners.
//!
//! The crate builds instantaneous spectral decompositions along a normalized
//! time grid, propagates the Schrödinger equation with exponential
//! integrators, constructs the dual system `H_b = -U_a^† H_a U_a`, evaluates
//! first-order perturbative amplitudes (P/Q split), and checks both the
//! traditional and the phase-velocity-corrected adiabatic conditions against
//! exact dynamics. A batch CLI (`adlab`) drives scenario files and writes
//! CSV/JSON artifacts.

pub mod conditions;
pub mod error;
pub mod evolve;
pub mod linalg;
pub mod models;
pub mod perturb;
pub mod runner;
pub mod scenario;
pub mod spectral;

pub use error::Error;
pub use linalg::{ComplexMatrix, ComplexVector, HermitianEigenDecomposition};
pub use models::{DrivenHamiltonian, GridHamiltonian, Hamiltonian, RotatingSpinParams};
pub use spectral::{GaugeTag, SpectralFrame, SpectralPath};
