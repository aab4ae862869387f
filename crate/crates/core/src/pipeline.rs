//! End-to-end memory-kernel path: kernel table, Green functions, noise
//! correlations and the variance trace.

use crate::bath::BathSpec;
use crate::error::Result;
use crate::grid::TimeGrid;
use crate::kernel::{build_kernel_table, KernelTable};
use crate::moments::{variance_trace, NoiseCorrelation, VarianceTrace};
use crate::system::SystemSpec;
use crate::volterra::{solve_green, GreenPair};

#[derive(Clone, Debug)]
pub struct VolterraRun {
    pub table: KernelTable,
    pub green: GreenPair,
    pub corr: NoiseCorrelation,
    pub trace: VarianceTrace,
}

pub fn run_volterra(sys: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> Result<VolterraRun> {
    sys.validate()?;
    bath.validate()?;
    grid.validate()?;
    let table = build_kernel_table(sys, bath, grid);
    let green = solve_green(&table, grid)?;
    let corr = NoiseCorrelation::build(sys, bath, grid, &table)?;
    let trace = variance_trace(&green, &corr, sys, grid)?;
    Ok(VolterraRun { table, green, corr, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_oscillator_stays_in_vacuum() {
        let sys = SystemSpec::fig2().with_coupling(0.0);
        let bath = BathSpec::new(0.0, 20.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.01, 2000, 100).unwrap();
        let run = run_volterra(&sys, &bath, &grid).unwrap();
        for i in 0..run.trace.len() {
            for phi in [0.0, 0.7, 1.6] {
                assert!((run.trace.variance_at(i, phi) - 0.5).abs() < 1e-9);
            }
        }
    }
}
