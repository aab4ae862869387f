//! Classical mean-field trajectories in the constant-α gauge: the cavity
//! amplitude is held at α = |G|/g₀ (real, positive), so the drive
//! E = (iΔ'_c + κ/2) α is constant and all time dependence moves into the
//! bare detuning Δ_c(t) = Δ'_c + g₀(β + β*).

use crate::bath::BathSpec;
use crate::c64;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernel::build_kernel_table;
use crate::system::SystemSpec;
use crate::volterra::PairStepper;

#[derive(Clone, Debug, PartialEq)]
pub struct MeanFieldTrace {
    pub times: Vec<f64>,
    pub beta: Vec<c64>,
    pub delta_c: Vec<f64>,
    pub drive: Vec<c64>,
}

impl MeanFieldTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// β̇ = -iβ + i g₀|α|² + ∫₀ᵗ f(t-τ)(β + β*)(τ) dτ with β(0) = 0, sampled at
/// the output points of `grid`.
pub fn solve_meanfield(sys: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> Result<MeanFieldTrace> {
    sys.validate()?;
    bath.validate()?;
    grid.validate()?;
    let alpha = match sys.cavity_amplitude() {
        Some(a) => a,
        None if sys.coupling_sq() == 0.0 => 0.0,
        None => {
            return Err(Error::Domain(format!(
                "g0 = {} with |G| = {}: the mean cavity amplitude |G|/g0 is unbounded",
                sys.g0,
                sys.coupling_g.norm()
            )))
        }
    };
    let push = sys.g0 * alpha * alpha;
    let table = build_kernel_table(&SystemSpec { coupling_g: c64::new(0.0, 0.0), ..*sys }, bath, grid);
    let source = [c64::new(0.0, push), c64::new(0.0, -push)];
    let (beta, _) = PairStepper::new(&table, grid.dt, 1.0)
        .integrate(grid.n_steps, [c64::new(0.0, 0.0); 2], |_| source)
        .map_err(|(step, detail)| Error::Unstable {
            step,
            time: grid.time(step),
            detail: format!("mean-field β diverged ({detail}) with eta = {}, s = {}, g0|alpha|^2 = {push}", bath.eta, bath.s),
        })?;
    let drive = c64::new(sys.kappa / 2.0, sys.delta_eff) * alpha;
    let idx: Vec<usize> = grid.output_indices().collect();
    let beta: Vec<c64> = idx.iter().map(|&n| beta[n]).collect();
    Ok(MeanFieldTrace {
        times: idx.iter().map(|&n| grid.time(n)).collect(),
        delta_c: beta.iter().map(|b| sys.delta_eff + sys.g0 * 2.0 * b.re).collect(),
        drive: vec![drive; idx.len()],
        beta,
    })
}
