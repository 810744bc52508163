//! Multipartite-entanglement witnesses, spectra, susceptibilities and
//! topological invariants for the transverse-field Ising chain, the
//! Lipkin-Meshkov-Glick model and the variable-range Kitaev chain.

pub mod error;
pub mod fidelity;
pub mod fermion;
pub mod ising;
pub mod kitaev;
pub mod lmg;
pub mod linalg;
pub mod qfi;
pub mod thermal;

pub use error::{QcritError, Result};
