//! Numerical laboratory for Bogoliubov–Duhamel inner products, commutator
//! chains and the approximating-Hamiltonian method on finite quantum systems.

pub mod ahm;
pub mod chains;
pub mod duhamel;
pub mod error;
pub mod harness;
pub mod inequalities;
pub mod models;
pub mod operator;
pub mod random;
pub mod spectral;
pub mod thermal;

pub use error::{LabError, Result};
pub use operator::{ComplexMatrix, HermitianOperator};
pub use spectral::{decompose, SpectralSystem};
