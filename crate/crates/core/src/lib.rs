//! Model trilinear functionals on principal series representations of
//! PGL(2, ℝ), their Hermitian forms on ΔK-invariant vectors, and the
//! oscillatory-integral asymptotics that govern them.
//!
//! Every closed-form approximant in [`asympt`] and [`betacore`] is paired with
//! an independent brute-force evaluation through [`oscquad`].

pub mod asympt;
pub mod betacore;
pub mod corput;
pub mod error;
pub mod func;
pub mod oscquad;
pub mod repn;
pub mod spectral;
pub mod trilinear;

pub use error::{Error, Result};
pub use num_complex::Complex64;
