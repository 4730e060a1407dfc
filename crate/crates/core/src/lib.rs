//! Numerical toolkit for rational Dunkl analysis on the reflection group Z_2^n.

pub mod acceptance;
pub mod conjugate;
pub mod dunkl;
pub mod error;
pub mod exec;
pub mod geometry;
pub mod hardy;
pub mod kernels;
pub mod matlemma;
pub mod quadrature;
pub mod specfun;
pub mod transform;

pub use error::{DunklError, Result};
pub use exec::Exec;
