//! Numerical toolkit for the fractional Kelvin-Voigt viscoelastic wave equation
//!
//! ```text
//! rho(x) u_tt - (b(x) (C0 D_t^alpha u)_x)_x - (a(x) u_x)_x = f(x, t)   on (0, L) x (0, T)
//! u(0, t) = u(L, t) = 0,   u(x, 0) = g(x),   u_t(x, 0) = h(x)
//! ```
//!
//! with a Caputo time derivative of order `0 < alpha < 1`.
//!
//! The crate is organised bottom-up:
//!
//! - [`fracops`]: Riemann-Liouville and Caputo integrals and derivatives on
//!   uniform time grids (piecewise-linear product integration), the Gamma
//!   function, and the operator identities they satisfy.
//! - [`fracspace`]: Fourier-side fractional Sobolev machinery (seminorms,
//!   spectral derivatives, the energy-equivalence identity, Poincaré ratios).
//! - [`assembly`]: Galerkin discretization in space (sine or P1 basis).
//! - [`volterra`]: time integration of the semidiscrete system through its
//!   second-kind Volterra reformulation.
//! - [`diagnostics`]: energy balance, dissipation, a-priori and weak-form checks.
//! - [`manufactured`]: the closed-form benchmark used by convergence studies.

pub mod assembly;
pub mod diagnostics;
mod error;
pub mod export;
pub mod fracops;
pub mod fracspace;
pub mod manufactured;
pub mod volterra;

pub use error::{Error, Result};
