//! Fixtures shared by the benchmarks in `benches/`.

use squeezenm::{BathSpec, SystemSpec, TimeGrid};

/// Squeezing-preset system and bath of shape `s`, on a grid of step 2.5e-3 up to
/// `t_max` with 50 outputs.
pub fn fig2_case(s: f64, t_max: f64) -> (SystemSpec, BathSpec, TimeGrid) {
    let bath = BathSpec::new(5e-3, 20.0, s, 0.0).expect("valid bath");
    let grid = TimeGrid::covering(2.5e-3, t_max, 50).expect("valid grid");
    (SystemSpec::fig2(), bath, grid)
}
