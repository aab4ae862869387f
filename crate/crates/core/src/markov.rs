//! Memoryless reference: cavity and mechanics as two explicit modes, the
//! mechanical bath replaced by damping γ with vacuum input, integrated as a
//! dense covariance (Lyapunov) ODE with RK4.

use nalgebra::DMatrix;

use crate::bath::DiscretizedBath;
use crate::c64;
use crate::error::Result;
use crate::gaussian::{p, x};
use crate::grid::TimeGrid;
use crate::moments::VarianceTrace;
use crate::oracle::{optomechanical_model, MECHANICS};
use crate::system::SystemSpec;

#[derive(Clone, Debug)]
pub struct MarkovianRun {
    pub trace: VarianceTrace,
    /// Largest real part among the drift eigenvalues.
    pub max_growth_rate: f64,
    pub unstable: bool,
}

/// Fixed-step RK4 substeps so that the fastest rotation advances at most
/// `max_phase` radians per substep.
pub(crate) fn substeps_for(max_rate: f64, dt: f64, max_phase: f64) -> usize {
    ((max_rate * dt / max_phase).ceil() as usize).max(1)
}

pub fn solve_markovian(sys: &SystemSpec, grid: &TimeGrid) -> Result<MarkovianRun> {
    sys.validate()?;
    grid.validate()?;
    let model = optomechanical_model(sys, &DiscretizedBath::empty(), sys.gamma_markov, None);
    let max_growth_rate = model
        .drift_matrix()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    let unstable = max_growth_rate > 1e-12;
    if unstable {
        log::warn!("Markovian drift has a growing eigenvalue (Re λ = {max_growth_rate:e})");
    }
    let rate = sys.delta_eff.abs().max(1.0) + sys.kappa + sys.coupling_g.norm();
    let substeps = substeps_for(rate, grid.dt, 0.05);
    let mut blocks = Vec::with_capacity(grid.output_count());
    model.solve_lyapunov(grid, substeps, |_, v| blocks.push(mechanical_block(v)))?;
    let trace = trace_from_blocks(grid, sys.theta, &blocks);
    Ok(MarkovianRun { trace, max_growth_rate, unstable })
}

fn mechanical_block(v: &DMatrix<f64>) -> [f64; 3] {
    let (xb, pb) = (x(MECHANICS), p(MECHANICS));
    [v[(xb, xb)], v[(pb, pb)], v[(xb, pb)]]
}

/// Variance trace from mechanical covariance blocks [Vxx, Vpp, Vxp].
/// The commutator is preserved by construction in the covariance
/// formalism, so the residual column is zero.
pub(crate) fn trace_from_blocks(grid: &TimeGrid, theta: f64, blocks: &[[f64; 3]]) -> VarianceTrace {
    let times = grid.output_indices().map(|n| grid.time(n)).collect();
    let bb = blocks.iter().map(|[vxx, vpp, vxp]| c64::new(0.5 * (vxx - vpp), *vxp)).collect();
    let nb = blocks.iter().map(|[vxx, vpp, _]| 0.5 * (vxx + vpp - 1.0)).collect();
    VarianceTrace::from_moments(times, theta, bb, nb, vec![0.0; blocks.len()])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> TimeGrid {
        TimeGrid::new(0.005, 4000, 100).unwrap()
    }

    #[test]
    fn uncoupled_oscillator_stays_in_vacuum() {
        for gamma in [0.0, 0.2] {
            let sys = SystemSpec { gamma_markov: gamma, ..SystemSpec::fig2().with_coupling(0.0) };
            let run = solve_markovian(&sys, &grid()).unwrap();
            for i in 0..run.trace.len() {
                for phi in [0.0, 0.9, std::f64::consts::FRAC_PI_2] {
                    assert!((run.trace.variance_at(i, phi) - 0.5).abs() < 1e-12);
                }
            }
            assert!(!run.unstable);
        }
    }

    #[test]
    fn cavity_coupling_squeezes_weakly() {
        let sys = SystemSpec { gamma_markov: 1e-9, ..SystemSpec::fig2() };
        let run = solve_markovian(&sys, &grid()).unwrap();
        let min = run.trace.min_var_theta();
        assert!(min < 0.5 && min > 0.4, "min {min}");
        assert!(run.trace.uncertainty_product_min() >= 0.25 * (1.0 - 1e-6));
    }

    #[test]
    fn blue_detuned_strong_coupling_is_flagged() {
        let sys = SystemSpec { delta_eff: -1.0, coupling_g: c64::new(0.3, 0.0), ..SystemSpec::fig2() };
        let run = solve_markovian(&sys, &TimeGrid::new(0.01, 100, 10).unwrap()).unwrap();
        assert!(run.unstable);
        assert!(run.max_growth_rate > 0.0);
    }
}
