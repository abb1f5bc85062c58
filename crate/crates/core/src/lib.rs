//! Finite-temperature functional-integral laboratory for the spin-boson model.
//!
//! The crate evaluates the equilibrium characteristic functional of a
//! two-level system coupled to a free Bose gas with a condensate. The
//! bosonic part is Gaussian and handled by radial quadrature
//! ([`momentum`], [`kernels`]); the spin part is a β-periodic two-state
//! jump process ([`spin`]) reweighted by the Feynman-Kac-Nelson weight of
//! the eliminated field ([`ensemble`]). On top of these sit the assembled
//! state ([`state`]), cluster and moderateness diagnostics ([`cluster`]) and
//! resolvent-algebra expectations ([`resolvent`]).
//!
//! Monte Carlo work and kernel tabulation are data-parallel through rayon
//! when the `parallel` feature is enabled (the default); every reduction is
//! folded in a fixed chunk order, so results do not depend on the number of
//! worker threads.

pub mod cluster;
pub mod ensemble;
pub mod error;
pub mod exec;
pub mod hermite;
pub mod kernels;
pub mod momentum;
pub mod quadrature;
pub mod resolvent;
pub mod seeds;
pub mod spin;
pub mod state;

pub use error::{Error, Result};
pub use num_complex::Complex64;
