//! The explicit `n = 2` frame: cube `R`, lattice `J`, analysis, synthesis
//! and reconstruction.

pub mod cube;

pub mod signal;
pub mod table;
pub mod transform;
pub mod testsignal;
pub mod reconstruct;
pub mod demo;
