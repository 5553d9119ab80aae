//! Numerical toolkit for zeros of real-rooted functions under differentiation,
//! local averaging and convolution smoothing.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod averaging;
pub mod circle;
pub mod error;
pub mod fit;
pub mod gaps;
pub mod kernels;
pub mod models;
pub mod perturbation;
pub mod quadrature;
pub mod realroot;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
