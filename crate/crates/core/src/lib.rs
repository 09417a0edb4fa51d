//! Dissipative central-spin quantum classifier.
//!
//! A central qubit is coupled to `N` auxiliary qubits through real 3×3
//! exchange matrices. Each auxiliary qubit is held by a strong engineered
//! dissipative mode, and classical data is written into the mode angles.
//! At large dissipation strength the central qubit obeys an effective
//! single-qubit Lindblad equation whose steady state carries the output.
//!
//! Modules, bottom-up:
//! - [`qcore`]: dense complex linear algebra and Lindblad superoperators.
//! - [`dissipation`]: the per-qubit dissipative modes and their eigenbasis.
//! - [`central_spin`]: full model, adiabatic elimination (two routes), steady states.
//! - [`training`]: losses, finite-difference gradients, schedules and trainers.
//! - [`experiments`]: synthetic datasets, accuracy, ROC/AUC.
//! - [`exec`]: data-parallel map with a sequential fallback.

pub mod central_spin;
pub mod dissipation;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod qcore;
pub mod training;

pub use error::{Error, Result};
