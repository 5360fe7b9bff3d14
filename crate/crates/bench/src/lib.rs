//! Shared fixtures for the protocol benchmarks.

use spindemon::SpinParams;

/// The engine-regime operating point used across the benchmarks.
pub fn engine_params() -> SpinParams {
    SpinParams::new(1.0, 1.5, 1.0, 1.0, 2.0, 1.0).expect("valid benchmark point")
}

/// The swap-stage operating point.
pub fn swap_params() -> SpinParams {
    SpinParams::new(2.0, 1.0, 1.0, 1.0, 8.0, 1.0).expect("valid benchmark point")
}
