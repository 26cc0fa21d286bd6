//! Numerical toolkit for Hardy–Sobolev type variational problems on radial
//! profiles: best constants, extremals, the double-critical `p`-Laplace
//! equation, Pohozaev identities and concentration diagnostics.

// NaN-rejecting checks read as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
mod discrete;
pub mod energy;
pub mod error;
pub mod io;
pub mod params;
pub mod pohozaev;
pub mod profile;
pub mod quadrature;
pub mod solvers;
pub mod testgen;

pub use error::{Error, Result};
pub use params::{mountain_pass_threshold, ProblemParams};
pub use profile::RadialProfile;
pub use quadrature::{GridSpec, RadialGrid};
