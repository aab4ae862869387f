//! Readout of the mechanical quadrature through a weakly coupled,
//! strongly damped ancilla cavity. After adiabatic elimination the output
//! field is a_out = (2i G_s/√κ_s) b + a_in, so a homodyne measurement at
//! local-oscillator phase θ_lo sees the mechanical quadrature at θ_lo - π/2.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::moments::VarianceTrace;

/// κ_s / G_s below which adiabatic elimination is questionable.
pub const MIN_ADIABATIC_RATIO: f64 = 10.0;
/// G_s / |G| above which ancilla back-action is no longer negligible.
pub const MAX_BACKACTION_RATIO: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectionSpec {
    /// Ancilla coupling G_s.
    pub coupling_gs: f64,
    /// Ancilla decay rate κ_s.
    pub kappa_s: f64,
    /// Local-oscillator phase θ_lo.
    pub theta_lo: f64,
}

impl Default for DetectionSpec {
    fn default() -> Self {
        Self { coupling_gs: 0.01, kappa_s: 1.0, theta_lo: 0.0 }
    }
}

impl DetectionSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.coupling_gs.is_finite() && self.coupling_gs > 0.0) {
            return Err(invalid("detection.coupling_gs", format!("must be > 0, got {}", self.coupling_gs)));
        }
        if !(self.kappa_s.is_finite() && self.kappa_s > 0.0) {
            return Err(invalid("detection.kappa_s", format!("must be > 0, got {}", self.kappa_s)));
        }
        if !self.theta_lo.is_finite() {
            return Err(invalid("detection.theta_lo", "must be finite"));
        }
        Ok(())
    }

    pub fn adiabatic_ratio(&self) -> f64 {
        self.kappa_s / self.coupling_gs
    }

    pub fn backaction_ratio(&self, coupling_g: f64) -> f64 {
        self.coupling_gs / coupling_g
    }

    /// Human-readable warnings for violated regime conditions.
    pub fn warnings(&self, coupling_g: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.adiabatic_ratio() < MIN_ADIABATIC_RATIO {
            out.push(format!(
                "kappa_s / G_s = {:.3} < {MIN_ADIABATIC_RATIO}: adiabatic elimination of the ancilla is not justified",
                self.adiabatic_ratio()
            ));
        }
        if self.backaction_ratio(coupling_g) > MAX_BACKACTION_RATIO {
            out.push(format!(
                "G_s / |G| = {:.3} > {MAX_BACKACTION_RATIO}: ancilla back-action may not be negligible",
                self.backaction_ratio(coupling_g)
            ));
        }
        out
    }

    /// Slope 4 G_s²/κ_s of the affine map from mechanical to output variance.
    pub fn gain(&self) -> f64 {
        4.0 * self.coupling_gs * self.coupling_gs / self.kappa_s
    }
}

/// Var[X_out(θ_lo)](t) = (4 G_s²/κ_s) Var[X_b(θ_lo - π/2)](t) + 1/2.
pub fn output_variance(trace: &VarianceTrace, det: &DetectionSpec) -> Vec<f64> {
    let gain = det.gain();
    (0..trace.len())
        .map(|i| gain * trace.variance_at(i, det.theta_lo - FRAC_PI_2) + 0.5)
        .collect()
}
