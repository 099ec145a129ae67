//! Spin–phonon Hamiltonian, phonon-assisted relaxation rates and photon
//! correlation cascade for the excited biexciton of a semiconductor quantum dot.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod hamiltonian;
pub mod spectrum;

pub use error::{Error, Result};
