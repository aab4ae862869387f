//! Ground-truth Gaussian dynamics of the discretized model: cavity,
//! mechanics and K explicit bath modes with the full XX coupling
//! V_k (b + b†)(b_k + b_k†), optionally with a detection ancilla.
//!
//! Only the rows of the propagator that belong to observed quadratures are
//! integrated (see [`GaussianModel::observe_covariances`]), so the cost per
//! step is linear in K.

use crate::bath::DiscretizedBath;
use crate::detection::DetectionSpec;
use crate::error::{Error, Result};
use crate::gaussian::{p, x, GaussianModel};
use crate::grid::TimeGrid;
use crate::markov::{substeps_for, trace_from_blocks};
use crate::moments::VarianceTrace;
use crate::system::SystemSpec;

pub const CAVITY: usize = 0;
pub const MECHANICS: usize = 1;
const BATH_OFFSET: usize = 2;

/// Largest bath discretization accepted.
pub const MAX_MODES: usize = 5000;

#[derive(Clone, Debug)]
pub struct OracleConfig {
    pub discretized: DiscretizedBath,
    pub sys: SystemSpec,
    pub grid: TimeGrid,
    /// RK4 substeps per grid step; chosen from the fastest mode when `None`.
    pub substeps: Option<usize>,
    /// Detection cavity kept as an explicit mode.
    pub ancilla: Option<DetectionSpec>,
}

#[derive(Clone, Debug)]
pub struct OracleRun {
    pub trace: VarianceTrace,
    /// Ancilla covariance blocks [Vxx, Vpp, Vxp] when an ancilla is present.
    pub ancilla: Option<Vec<[f64; 3]>>,
}

impl OracleConfig {
    pub fn new(discretized: DiscretizedBath, sys: SystemSpec, grid: TimeGrid) -> Self {
        Self { discretized, sys, grid, substeps: None, ancilla: None }
    }

    /// Revival time 2π/Δω of the uniform frequency grid; the discrete bath
    /// stops mimicking the continuum beyond it.
    pub fn recurrence_time(&self) -> f64 {
        match self.discretized.frequencies.as_slice() {
            [first, ..] => std::f64::consts::PI / first,
            [] => f64::INFINITY,
        }
    }
}

/// Quadratic model of the linearized fluctuations. Mode 0 is the cavity
/// (detuning Δ'_c, decay κ), mode 1 the mechanics (ω_m = 1, optional
/// damping γ), then the bath modes and finally the optional ancilla.
pub fn optomechanical_model(
    sys: &SystemSpec,
    bath: &DiscretizedBath,
    gamma: f64,
    ancilla: Option<&DetectionSpec>,
) -> GaussianModel {
    let k = bath.mode_count();
    let mut model = GaussianModel::new(BATH_OFFSET + k + usize::from(ancilla.is_some()));
    model.add_frequency(CAVITY, sys.delta_eff);
    model.add_loss(CAVITY, sys.kappa, 0.0);
    model.add_frequency(MECHANICS, 1.0);
    model.add_loss(MECHANICS, gamma, 0.0);
    // -(G a† + G* a)(b + b†) = -2 (Re G x_a + Im G p_a) x_b
    model.add_hamiltonian(x(CAVITY), x(MECHANICS), -2.0 * sys.coupling_g.re);
    model.add_hamiltonian(p(CAVITY), x(MECHANICS), -2.0 * sys.coupling_g.im);
    for (i, ((w, v), m)) in bath.frequencies.iter().zip(&bath.couplings).zip(&bath.occupations).enumerate() {
        let mode = BATH_OFFSET + i;
        model.add_frequency(mode, *w);
        model.add_hamiltonian(x(MECHANICS), x(mode), 2.0 * v);
        model.set_initial_occupation(mode, *m);
    }
    if let Some(det) = ancilla {
        // -G_s (a_s† b + b† a_s) gives ȧ_s = -κ_s/2 a_s + i G_s b + √κ_s a_in
        // in the frame co-rotating with the mechanics.
        let mode = BATH_OFFSET + k;
        model.add_frequency(mode, 1.0);
        model.add_loss(mode, det.kappa_s, 0.0);
        model.add_hamiltonian(x(mode), x(MECHANICS), -det.coupling_gs);
        model.add_hamiltonian(p(mode), p(MECHANICS), -det.coupling_gs);
    }
    model
}

/// Rejects baths whose XX coupling leaves the oscillator with negative
/// static stiffness, ω_m - 4 Σ V_k²/ω_k ≤ 0.
pub fn check_spectrum(bath: &DiscretizedBath) -> Result<()> {
    let stiffness = 1.0 - 4.0 * bath.static_shift();
    if stiffness <= 0.0 {
        return Err(Error::UnstableSpectrum { stiffness, frequency: (-stiffness).sqrt() });
    }
    Ok(())
}

pub fn simulate_oracle(config: &OracleConfig) -> Result<OracleRun> {
    config.sys.validate()?;
    config.grid.validate()?;
    let k = config.discretized.mode_count();
    if k > MAX_MODES {
        return Err(Error::Domain(format!("{k} bath modes exceed the limit of {MAX_MODES}")));
    }
    check_spectrum(&config.discretized)?;
    if config.grid.t_max() > config.recurrence_time() {
        log::warn!(
            "oracle horizon {} exceeds the bath recurrence time {:.3}",
            config.grid.t_max(),
            config.recurrence_time()
        );
    }
    let model = optomechanical_model(&config.sys, &config.discretized, 0.0, config.ancilla.as_ref());
    let fastest = config
        .discretized
        .frequencies
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(config.sys.delta_eff.abs())
        .max(1.0)
        .max(config.ancilla.map_or(0.0, |a| a.kappa_s));
    let substeps = config.substeps.unwrap_or_else(|| substeps_for(fastest, config.grid.dt, 0.05));

    let mut observed = vec![x(MECHANICS), p(MECHANICS)];
    let ancilla_mode = BATH_OFFSET + k;
    if config.ancilla.is_some() {
        observed.extend([x(ancilla_mode), p(ancilla_mode)]);
    }
    let covs = model.observe_covariances(&observed, &config.grid, substeps)?;
    let mech: Vec<[f64; 3]> = covs.iter().map(|c| [c[(0, 0)], c[(1, 1)], c[(0, 1)]]).collect();
    let ancilla = config
        .ancilla
        .is_some()
        .then(|| covs.iter().map(|c| [c[(2, 2)], c[(3, 3)], c[(2, 3)]]).collect());
    Ok(OracleRun { trace: trace_from_blocks(&config.grid, config.sys.theta, &mech), ancilla })
}
