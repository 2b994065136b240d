//! Pressure curves, rate functions of Birkhoff averages and deviation
//! estimates for the equilibrium measure of the full map.

pub mod curve;
pub mod deviation;
pub mod rate;

pub use curve::{
    default_t_grid, energy_range, pressure_curve, CurveMethod, EnergyRange, MonotoneCubic, PressureCurve,
    SmoothPressure, CONVEXITY_GATE, T_MAX,
};
pub use deviation::{
    deviation_report, pairs_alpha, select_pairs, BirkhoffTable, DeviationConfig, DeviationReport, DeviationRow,
    PairSet, Tail,
};
pub use rate::{alpha_grid, rate_function, RateFunction, RateRow, RateTable};
