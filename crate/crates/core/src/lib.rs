//! Fractional calculus with Mittag-Leffler kernels.
//!
//! The crate evaluates Atangana–Baleanu derivatives of Riemann–Liouville
//! (ABR) and Caputo (ABC) type, the AB integral, and the Riemann–Liouville
//! operators underneath them. Every operator acts either exactly on
//! [`PowerSum`] values or by product-trapezoid quadrature on [`SampledFn`]
//! grids, so the two paths can be checked against each other.

pub mod error;
pub mod policy;
pub mod quad;
pub mod specialfn;

pub use error::{Error, Result};
pub use policy::TruncationPolicy;
pub mod convolution;
pub mod funcmodel;
pub mod rl_ops;

pub use funcmodel::{sample, FnLiteral, PowerSum, SampledFn, SmoothFn};
pub mod ab_ops;
pub mod cli;
pub mod laplace;
pub mod ode;
pub mod riccati;
pub mod rules;
pub mod semigroup;

pub use ab_ops::{ABParams, Normalization};
