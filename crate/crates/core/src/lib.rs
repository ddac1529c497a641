//! H-infinity norm computation for delay differential-algebraic systems.

// `!(x <= tol)` is used on purpose so that NaN counts as failure
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod error;
pub mod extrema;
pub mod linalg;
pub mod model;
pub mod strongnorm;
pub mod systems;
pub mod transfer;

pub use error::{Error, Result};
pub use model::{DdaeSystem, DelayTerm};

// links the system LAPACK used by the QZ drivers
extern crate openblas_src;
