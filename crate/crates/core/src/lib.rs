//! Velocity-aided tilt and attitude observers on SO(3), with a simulation and
//! benchmarking harness.

// Negated comparisons are used on purpose so that NaN inputs are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod attitude;
pub mod companion;
pub mod batch;
pub mod error;
pub mod harness;
pub mod measurement;
pub mod ode;
pub mod quat;
pub mod so3;
pub mod tilt;

pub use error::{Error, Result};
pub use measurement::DEFAULT_G0;
