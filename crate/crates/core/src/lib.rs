//! Spectral theory of the Klein–Gordon operator on a star-shaped network.
//!
//! A star network is `n >= 2` half-lines glued at a common node. Branch `k`
//! carries the operator `-c_k d²/dx² + a_k` and the branches are coupled by
//! Kirchhoff conditions: continuity at the node and a vanishing weighted sum
//! of outgoing derivatives, `Σ c_k u_k'(0) = 0`.
//!
//! The crate provides
//!
//! * [`network`]: the network, sampled functions on it, quadrature and a
//!   finite-difference discretization of the operator;
//! * [`eigen`]: generalized eigenfunctions `F_λ^{±,j}` under a branch cut of
//!   the square root that commutes with conjugation;
//! * [`resolvent`]: the explicit resolvent kernel and its application;
//! * [`spectral`]: spectral weights, the forward transform `V`, its inverse
//!   `Z`, functional calculus and Klein–Gordon evolution;
//! * [`symmetrization`]: three independent routes to the spectral matrix
//!   `q(λ)` (closed form, stacked least squares, and an `n × n` matrix
//!   formula);
//! * [`fdtd`]: a leapfrog time-domain solver used as an independent oracle.
//!
//! The crate is `no_std` and only needs `alloc`. Enabling the `parallel`
//! feature distributes the transforms over rayon's current thread pool;
//! every reduction keeps a fixed order so results are bit-identical for any
//! thread count.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod eigen;
mod error;
pub mod fdtd;
pub mod gauss;
pub mod linalg;
pub mod network;
mod par;
pub mod resolvent;
pub mod spectral;
pub mod symmetrization;

pub use error::{Error, Result};

/// Complex double used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Default normalization of the spectral weights, `1/π`.
pub const KAPPA_DEFAULT: f64 = core::f64::consts::FRAC_1_PI;
