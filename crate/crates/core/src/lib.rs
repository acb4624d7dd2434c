//! Simulation and optimization for reconfigurable holographic surfaces.

// `!(x < y)` rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beamforming;
pub mod channel;
pub mod config;
pub mod error;
pub mod experiments;
pub mod geometry;
pub mod holography;
pub mod optimizer;

pub use error::{Result, RhsError};
pub use geometry::{Direction, RhsGeometry};
