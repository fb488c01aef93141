//! Tiling-system discretization of the continuous wavelet transform on
//! the affine group `M_n(R) ⋊ GL_n(R)`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calderon;
pub mod cli;
pub mod error;
pub mod frame2d;
pub mod group;
pub mod overlap;
pub mod sampling;
pub mod tiling;
pub mod verify;
pub mod window;

pub use error::{Error, Result};
