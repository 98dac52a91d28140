//! Landscape analysis for two-player differentiable games.
//!
//! The crate evaluates game vector fields `v(ω) = (∇θ L_G, ∇φ L_D)` with a
//! small reverse-mode autodiff engine, computes Jacobian and per-player
//! Hessian spectra (dense real Schur or matrix-free Arnoldi), classifies
//! stationary points as locally stable and/or differential Nash, runs game
//! optimizers, and produces Path-angle / Path-norm profiles.
//!
//! Everything here is `no_std` + `alloc`; file formats, plotting and the
//! command line live in the `gamescope` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod autograd;
pub mod diagnostics;
pub mod dynamics;
mod error;
pub mod games;
pub mod gan;
pub mod numerics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
