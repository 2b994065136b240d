//! Thermodynamic formalism for subsystems of checkerboard pillow maps.
//!
//! The crate models the pillow maps (a flat two-faced sphere subdivided
//! into an `m × m` checkerboard), their tile structure, subsystems given by
//! sets of one-tiles, and the analytic objects built on top: pressure,
//! the split Ruelle operator with its eigenfunction and eigenmeasure,
//! equilibrium weights on tiles, and large-deviation rate functions.

pub mod cells;
pub mod error;
pub mod ldp;
pub mod pillow;
pub mod scalar;
pub mod subsystem;
pub mod thermo;

pub use error::{Error, Result};
pub use pillow::{Color, MapSpec, OneTileLabel, PillowPoint, Potential};
pub use subsystem::Subsystem;

/// Points with binary64 coordinates.
pub type Point = PillowPoint<f64>;
/// Points with single precision coordinates.
pub type Point32 = PillowPoint<f32>;
/// Points with exact rational coordinates.
pub type ExactPoint = PillowPoint<num_rational::Rational64>;
