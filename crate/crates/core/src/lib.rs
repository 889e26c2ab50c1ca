//! Statevector laboratory for variational quantum simulation (VQS) and
//! second-order Trotterization of the open transverse-field Ising chain,
//! together with the minimum-depth benchmark and its scaling analysis.

pub mod ansatz;
pub mod error;
pub mod exact;
pub mod fmt;
pub mod harness;
pub mod hamiltonian;
pub mod ode;
pub mod scaling;
pub mod statevector;
pub mod trotter;
pub mod vqs;

pub use error::{Error, Result};
