//! Endpoint flows of the eigenvalue support of large-N Hermitian matrix models.
//!
//! A [`Potential`] together with a temperature `T` determines an equilibrium
//! density supported on `s` intervals. The endpoints move with `T` according to
//! a first-order ODE system; at isolated temperatures two cuts merge or a new
//! cut is born, and the free energy has a third-order singularity there.
//!
//! The modules build on each other bottom-up:
//!
//! - [`polyops`]: polynomials and the polynomial part at infinity of `numer/w₁`.
//! - [`elliptic`]: complete elliptic integrals in the parameter convention.
//! - [`geometry`]: the normalized polynomials `P_k` and the gap center `C(β)`.
//! - [`equilibrium`]: density, normalization, hodograph residuals, admissibility.
//! - [`flow`]: endpoint velocities, integration, transition detection and launch.
//! - [`thermo`]: Lagrange multiplier, free energy and its temperature derivatives.
//! - [`cli`]: the commands behind the `cutflow` binary.

pub mod cli;
pub mod elliptic;
pub mod equilibrium;
mod error;
pub mod flow;
pub mod geometry;
pub mod models;
pub mod polyops;
pub mod quadrature;
pub mod selftest;
pub mod thermo;

pub use error::{Error, Result, VanishingFactor};
pub use geometry::EndpointConfig;
pub use polyops::{Polynomial, Potential};
