//! Numerical core for the radial quasi-linear parabolic flow
//!
//! ```text
//! u_t - Δu - κ u Δ(u²) + u = |u|^{p-1} u,    u(x, 0) = λ φ₀(|x|)
//! ```
//!
//! on `R^N` restricted to radial functions: finite-difference stencils and
//! quadrature, an adaptive IMEX integrator with run classification, energy
//! functionals, the positive ground state by shooting, the spectrum of the
//! linearization around it, and a bisection for the amplitude threshold that
//! separates decay from blow-up.
//!
//! The crate is `no_std` and only needs `alloc`.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;
mod ode;

pub mod bifurcation;
pub mod energy;
pub mod flow;
pub mod params;
pub mod radial;
pub mod spectral;
pub mod stationary;
pub mod tridiag;

pub use params::{Params, ParamsError};
pub use radial::{Field, FieldError, GridError, RadialGrid};
