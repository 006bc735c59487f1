//! Material-volume tracking inside smooth compressible Euler flows.
//!
//! The crate evolves a Lagrangian volume through an analytic or grid-backed
//! flow, evaluates weighted moment functionals of the density about a target
//! point `x0`, and checks the threshold criteria that predict when the volume
//! boundary must enter the `epsilon`-ball around `x0`.
//!
//! Module map:
//!
//! - [`flowfield`]: pointwise state, equation of state `P = rho^gamma e^S`,
//!   analytic exact solutions and finite-difference Euler residuals.
//! - [`solver`]: a periodic 2-D finite-difference Euler stepper and the
//!   grid-backed flow built on it.
//! - [`matvol`]: the moving volume (boundary markers plus mass-weighted
//!   interior nodes), advection and quadrature.
//! - [`functionals`]: mass, energy, the moment functional `G`, its derivative
//!   `F` and the second-derivative terms `I1..I4`.
//! - [`criteria`]: constants, `Q`/`R`, case classification and the `delta`
//!   threshold, condition integral and necessary conditions.
//! - [`verify`]: lemma and bound checks, comparison-ODE blow-up oracle and
//!   end-to-end scenarios.
//! - [`cli`]: configuration, orchestration and report emission.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod criteria;
mod error;
pub mod flowfield;
pub mod functionals;
pub mod matvol;
pub mod numerics;
pub mod solver;
pub mod verify;

pub use error::{Error, Result};
pub use flowfield::{Flow, FlowField, FluidState, Vec3};
