use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::c64;
use crate::error::{invalid, Result};

/// Linearized optomechanical parameters, all in units of ω_m.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Cavity energy decay rate κ.
    pub kappa: f64,
    /// Effective detuning Δ'_c.
    pub delta_eff: f64,
    /// Effective linearized coupling G = g₀ α.
    #[serde(serialize_with = "ser_complex", deserialize_with = "de_complex")]
    pub coupling_g: c64,
    /// Single-photon coupling g₀.
    pub g0: f64,
    /// Mechanical damping γ of the memoryless reference model.
    #[serde(default)]
    pub gamma_markov: f64,
    /// Quadrature angle θ reported in `var_theta`.
    #[serde(default = "default_theta")]
    pub theta: f64,
}

fn default_theta() -> f64 {
    FRAC_PI_2
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(invalid("system.kappa", format!("must be > 0, got {}", self.kappa)));
        }
        if !self.delta_eff.is_finite() {
            return Err(invalid("system.delta_eff", "must be finite"));
        }
        if !(self.coupling_g.re.is_finite() && self.coupling_g.im.is_finite()) {
            return Err(invalid("system.coupling_g", "must be finite"));
        }
        if !(self.g0.is_finite() && self.g0 >= 0.0) {
            return Err(invalid("system.g0", format!("must be >= 0, got {}", self.g0)));
        }
        if !(self.gamma_markov.is_finite() && self.gamma_markov >= 0.0) {
            return Err(invalid("system.gamma_markov", format!("must be >= 0, got {}", self.gamma_markov)));
        }
        if !self.theta.is_finite() {
            return Err(invalid("system.theta", "must be finite"));
        }
        Ok(())
    }

    pub fn coupling_sq(&self) -> f64 {
        self.coupling_g.norm_sqr()
    }

    /// Mean cavity amplitude |α| = |G|/g₀ in the constant-α gauge.
    pub fn cavity_amplitude(&self) -> Option<f64> {
        (self.g0 > 0.0).then(|| self.coupling_g.norm() / self.g0)
    }

    pub fn with_coupling(mut self, g: f64) -> Self {
        self.coupling_g = c64::new(g, 0.0);
        self
    }

    /// Squeezing-preset parameters: κ = 0.1, Δ'_c = 5, G = 0.3, g₀ = 1e-4, θ = π/2.
    pub fn fig2() -> Self {
        Self {
            kappa: 0.1,
            delta_eff: 5.0,
            coupling_g: c64::new(0.3, 0.0),
            g0: 1e-4,
            gamma_markov: 0.0,
            theta: FRAC_PI_2,
        }
    }
}

// G is written as a plain number when real, otherwise as [re, im].
fn ser_complex<S: Serializer>(z: &c64, ser: S) -> std::result::Result<S::Ok, S::Error> {
    if z.im == 0.0 {
        ser.serialize_f64(z.re)
    } else {
        [z.re, z.im].serialize(ser)
    }
}

fn de_complex<'de, D: Deserializer<'de>>(de: D) -> std::result::Result<c64, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }
    Ok(match Repr::deserialize(de)? {
        Repr::Real(re) => c64::new(re, 0.0),
        Repr::Pair([re, im]) => c64::new(re, im),
    })
}
