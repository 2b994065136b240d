//! Pressure, distortion constants, the split Ruelle operator and the
//! measures it produces.

mod birkhoff;
mod distortion;
mod measures;
mod operator;
mod pressure;

pub use birkhoff::{BirkhoffScan, BracketConfig, TileStats};
pub use distortion::{distortion_constants, DistortionConstants, DEFAULT_C0};
pub use measures::{
    gibbs_constants, invariance_defect, tile_measures, GibbsReport, MeasureConfig, MeasureKind, TileMeasure,
};
pub use operator::{
    branch_sum, eigen_pair, eigen_pair_with, split_apply, EigenPair, OperatorConfig, SplitFunction, SplitOperator,
    STRONG_SEARCH_CAP,
};
pub use pressure::{partition_sum, pressure_estimate, PartitionSum, PressureEstimate};
