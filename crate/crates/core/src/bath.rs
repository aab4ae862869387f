//! Reservoir physics: spectral density, memory kernel, thermal occupation,
//! noise correlation and the finite-mode discretization used by the oracle.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::c64;
use crate::error::{invalid, Error, Result};
use crate::quadrature;

/// Relative tolerance (against the total bath weight) for quadrature paths.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// Parameters of the spectral density J(ω) = η ω (ω/ω₀)^(s-1) e^(-ω/ω₀)
/// and the bath temperature.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub eta: f64,
    pub omega0: f64,
    pub s: f64,
    #[serde(default)]
    pub temperature: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BathClass {
    SubOhmic,
    Ohmic,
    SuperOhmic,
}

impl BathSpec {
    pub fn new(eta: f64, omega0: f64, s: f64, temperature: f64) -> Result<Self> {
        let spec = Self { eta, omega0, s, temperature };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta.is_finite() && self.eta >= 0.0) {
            return Err(invalid("eta", format!("must be finite and >= 0, got {}", self.eta)));
        }
        if !(self.omega0.is_finite() && self.omega0 > 0.0) {
            return Err(invalid("omega0", format!("must be finite and > 0, got {}", self.omega0)));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(invalid("s", format!("must be finite and > 0, got {}", self.s)));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(invalid(
                "temperature",
                format!("must be finite and >= 0, got {}", self.temperature),
            ));
        }
        Ok(())
    }

    pub fn class(&self) -> BathClass {
        if self.s < 1.0 {
            BathClass::SubOhmic
        } else if self.s == 1.0 {
            BathClass::Ohmic
        } else {
            BathClass::SuperOhmic
        }
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    /// ∫₀^∞ J(ω) dω = η ω₀² Γ(s+1).
    pub fn total_weight(&self) -> f64 {
        self.eta * self.omega0 * self.omega0 * gamma(self.s + 1.0)
    }

    /// ∫₀^∞ J(ω)/ω dω = η ω₀ Γ(s). Four times this is the static stiffness
    /// the XX coupling removes from the oscillator.
    pub fn static_shift(&self) -> f64 {
        self.eta * self.omega0 * gamma(self.s)
    }

    /// η ω₀² Γ(s+1) (1 + i ω₀ τ)^-(s+1), the one-sided transform
    /// ∫₀^∞ J(ω) e^{-iωτ} dω.
    fn laplace(&self, tau: f64) -> c64 {
        c64::new(1.0, self.omega0 * tau).powf(-(self.s + 1.0)) * self.total_weight()
    }
}

/// J(ω) for ω ≥ 0.
pub fn spectral_density(omega: f64, spec: &BathSpec) -> Result<f64> {
    if omega < 0.0 || omega.is_nan() {
        return Err(Error::Domain(format!("spectral density needs omega >= 0, got {omega}")));
    }
    if omega == 0.0 {
        return Ok(0.0);
    }
    let x = omega / spec.omega0;
    Ok(spec.eta * omega * x.powf(spec.s - 1.0) * (-x).exp())
}

/// Memory kernel f(t) = 2i ∫₀^∞ J(ω) sin(ωt) dω in closed form,
/// 2i·Im[η ω₀² Γ(s+1) (1 - i ω₀ t)^-(s+1)]. Odd in t.
pub fn memory_kernel_f(t: f64, spec: &BathSpec) -> c64 {
    if t == 0.0 || spec.eta == 0.0 {
        return c64::new(0.0, 0.0);
    }
    c64::new(0.0, 2.0 * spec.laplace(-t).im)
}

/// f(t) by direct oscillatory quadrature of the sine transform.
pub fn memory_kernel_f_quad(t: f64, spec: &BathSpec) -> Result<c64> {
    if t < 0.0 {
        return memory_kernel_f_quad(-t, spec).map(|z| -z);
    }
    if t == 0.0 || spec.eta == 0.0 {
        return Ok(c64::new(0.0, 0.0));
    }
    let integral = quadrature::integrate_half_line(
        |w| c64::new(density(w, spec) * (w * t).sin(), 0.0),
        spec.s + 1.0,
        t,
        spec.omega0,
        tail_end(spec),
        QUAD_REL_TOL * spec.total_weight(),
    )?;
    Ok(c64::new(0.0, 2.0 * integral.re))
}

/// Bose–Einstein occupation 1/(e^{ω/T} - 1); exactly 0 at T = 0.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("thermal occupation needs omega > 0, got {omega}")));
    }
    if temperature < 0.0 || temperature.is_nan() {
        return Err(Error::Domain(format!("temperature must be >= 0, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

/// Stationary bath-noise correlation
/// ⟨ξ(τ₁)ξ(τ₂)⟩ = -∫₀^∞ J(ω) [e^{-iωτ} + 2 cos(ωτ) n̄(ω)] dω with τ = τ₁ - τ₂.
///
/// Closed form at T = 0; the Bose factor is integrated directly otherwise.
pub fn xi_correlation(tau: f64, spec: &BathSpec) -> Result<c64> {
    if spec.eta == 0.0 {
        return Ok(c64::new(0.0, 0.0));
    }
    if spec.temperature == 0.0 {
        return Ok(-spec.laplace(tau));
    }
    xi_correlation_quad(tau, spec)
}

/// Quadrature route for [`xi_correlation`], valid at any temperature.
pub fn xi_correlation_quad(tau: f64, spec: &BathSpec) -> Result<c64> {
    if spec.eta == 0.0 {
        return Ok(c64::new(0.0, 0.0));
    }
    let temperature = spec.temperature;
    // Near ω = 0 the thermal factor behaves as 2T/ω, lowering the power.
    let power = if temperature > 0.0 { spec.s } else { spec.s + 1.0 };
    let scale = if temperature > 0.0 { temperature.min(spec.omega0) } else { spec.omega0 };
    let weight = if temperature > 0.0 {
        spec.total_weight() + 2.0 * temperature * spec.static_shift()
    } else {
        spec.total_weight()
    };
    let integral = quadrature::integrate_half_line(
        |w| {
            let j = density(w, spec);
            // 2 n̄ + 1 = coth(ω / 2T)
            let thermal = if temperature > 0.0 { 1.0 / (0.5 * w / temperature).tanh() } else { 1.0 };
            c64::new(j * thermal * (w * tau).cos(), -j * (w * tau).sin())
        },
        power,
        tau,
        scale,
        tail_end(spec),
        QUAD_REL_TOL * weight,
    )?;
    Ok(-integral)
}

fn density(w: f64, spec: &BathSpec) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    let x = w / spec.omega0;
    spec.eta * w * x.powf(spec.s - 1.0) * (-x).exp()
}

// Beyond this frequency the exponential cutoff leaves < 1e-20 of the weight.
fn tail_end(spec: &BathSpec) -> f64 {
    spec.omega0 * (50.0 + 4.0 * spec.s)
}

/// Finite set of bath modes standing in for the continuum J(ω).
#[derive(Clone, Debug, PartialEq)]
pub struct DiscretizedBath {
    pub frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub occupations: Vec<f64>,
}

/// Uniform midpoint grid ω_k = (k - 1/2) ω_max / K with V_k² = J(ω_k) ω_max / K.
pub fn discretize_bath(spec: &BathSpec, mode_count: usize, omega_max: f64) -> Result<DiscretizedBath> {
    if mode_count == 0 {
        return Err(Error::Domain("bath discretization needs at least one mode".into()));
    }
    if !(omega_max > 0.0 && omega_max.is_finite()) {
        return Err(Error::Domain(format!("omega_max must be > 0, got {omega_max}")));
    }
    let step = omega_max / mode_count as f64;
    let mut frequencies = Vec::with_capacity(mode_count);
    let mut couplings = Vec::with_capacity(mode_count);
    let mut occupations = Vec::with_capacity(mode_count);
    for k in 0..mode_count {
        let w = (k as f64 + 0.5) * step;
        frequencies.push(w);
        couplings.push((spectral_density(w, spec)? * step).sqrt());
        occupations.push(thermal_occupation(w, spec.temperature)?);
    }
    Ok(DiscretizedBath { frequencies, couplings, occupations })
}

impl DiscretizedBath {
    pub fn mode_count(&self) -> usize {
        self.frequencies.len()
    }

    /// An empty bath (no modes), used for cavity-only oracle runs.
    pub fn empty() -> Self {
        Self { frequencies: vec![], couplings: vec![], occupations: vec![] }
    }

    /// Σ V_k², the discrete counterpart of ∫ J.
    pub fn total_weight(&self) -> f64 {
        self.couplings.iter().map(|v| v * v).sum()
    }

    /// Σ V_k² / ω_k.
    pub fn static_shift(&self) -> f64 {
        self.couplings.iter().zip(&self.frequencies).map(|(v, w)| v * v / w).sum()
    }

    /// 2i Σ V_k² sin(ω_k t).
    pub fn memory_kernel(&self, t: f64) -> c64 {
        let sum: f64 = self.couplings.iter().zip(&self.frequencies).map(|(v, w)| v * v * (w * t).sin()).sum();
        c64::new(0.0, 2.0 * sum)
    }

    /// -Σ V_k² [(m_k + 1) e^{-iω_k τ} + m_k e^{iω_k τ}].
    pub fn xi_correlation(&self, tau: f64) -> c64 {
        let mut acc = c64::new(0.0, 0.0);
        for ((v, w), m) in self.couplings.iter().zip(&self.frequencies).zip(&self.occupations) {
            let phase = c64::from_polar(1.0, -w * tau);
            acc += (phase * (m + 1.0) + phase.conj() * *m) * (v * v);
        }
        -acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fig2(s: f64) -> BathSpec {
        BathSpec::new(5e-3, 20.0, s, 0.0).unwrap()
    }

    #[test]
    fn spectral_density_values() {
        assert_eq!(spectral_density(0.0, &fig2(1.0)).unwrap(), 0.0);
        assert_eq!(spectral_density(0.0, &fig2(0.5)).unwrap(), 0.0);
        let v = spectral_density(20.0, &fig2(1.0)).unwrap();
        assert!((v - 5e-3 * 20.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!((v - 0.036788).abs() < 1e-6);
        let v = spectral_density(20.0, &fig2(0.5)).unwrap();
        assert!((v - 5e-3 * 20.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert!(matches!(spectral_density(-1.0, &fig2(1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_rejects_bad_parameters() {
        assert!(BathSpec::new(-1e-3, 20.0, 1.0, 0.0).is_err());
        assert!(BathSpec::new(1e-3, 0.0, 1.0, 0.0).is_err());
        assert!(BathSpec::new(1e-3, 20.0, 0.0, 0.0).is_err());
        assert!(BathSpec::new(1e-3, 20.0, 1.0, -0.1).is_err());
        assert_eq!(fig2(0.5).class(), BathClass::SubOhmic);
        assert_eq!(fig2(1.0).class(), BathClass::Ohmic);
        assert_eq!(fig2(2.0).class(), BathClass::SuperOhmic);
    }

    #[test]
    fn ohmic_sine_transform_closed_form_matches_quadrature() {
        // ∫₀^∞ ω e^{-ω/ω₀} sin(ωt) dω = 2 t ω₀³ / (1 + ω₀² t²)²
        let w0: f64 = 20.0;
        for &t in &[0.01, 0.1, 0.5, 2.0, 10.0, 30.0] {
            let brute = quadrature::integrate_half_line(
                |w| c64::new(w * (-w / w0).exp() * (w * t).sin(), 0.0),
                2.0,
                t,
                w0,
                60.0 * w0,
                1e-11,
            )
            .unwrap()
            .re;
            let closed = 2.0 * t * w0.powi(3) / (1.0 + w0 * w0 * t * t).powi(2);
            assert!((brute - closed).abs() < 1e-9 * (1.0 + closed.abs()), "t={t}: {brute} vs {closed}");
        }
    }

    #[test]
    fn memory_kernel_closed_form_matches_quadrature() {
        for &s in &[0.5, 1.0, 2.0, 1.5, 0.3] {
            let spec = fig2(s);
            let scale = spec.total_weight();
            for &t in &[0.0, 0.003, 0.05, 0.4, 1.0, 7.5, 25.0, 60.0] {
                let closed = memory_kernel_f(t, &spec);
                let quad = memory_kernel_f_quad(t, &spec).unwrap();
                assert_eq!(closed.re, 0.0);
                assert!((closed - quad).norm() < 1e-9 * scale, "s={s} t={t}: {closed} vs {quad}");
            }
        }
    }

    #[test]
    fn ohmic_kernel_explicit_formula() {
        let spec = fig2(1.0);
        for &t in &[0.02, 0.3, 4.0] {
            let w0 = spec.omega0;
            let expected = 2.0 * spec.eta * 2.0 * t * w0.powi(3) / (1.0 + w0 * w0 * t * t).powi(2);
            assert!((memory_kernel_f(t, &spec).im - expected).abs() < 1e-12 * expected.max(1.0));
        }
    }

    #[test]
    fn memory_kernel_is_odd() {
        let spec = fig2(0.5);
        for &t in &[0.1, 1.3, 9.0] {
            assert_eq!(memory_kernel_f(-t, &spec), -memory_kernel_f(t, &spec));
        }
        assert_eq!(memory_kernel_f(0.0, &spec), c64::new(0.0, 0.0));
    }

    #[test]
    fn thermal_occupation_values() {
        assert_eq!(thermal_occupation(1.0, 0.0).unwrap(), 0.0);
        let v = thermal_occupation(1.0, 1.0).unwrap();
        assert!((v - 1.0 / (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!((v - 0.581977).abs() < 1e-6);
        let mut last = f64::INFINITY;
        for k in 1..60 {
            let n = thermal_occupation(k as f64, 1.0).unwrap();
            assert!(n < last && n >= 0.0);
            last = n;
        }
        assert!(thermal_occupation(0.0, 1.0).is_err());
        assert!(thermal_occupation(-1.0, 1.0).is_err());
    }

    #[test]
    fn xi_correlation_at_zero_lag() {
        // -∫ η ω e^{-ω/ω₀} dω = -η ω₀² = -2
        let spec = fig2(1.0);
        let c = xi_correlation(0.0, &spec).unwrap();
        assert!((c - c64::new(-2.0, 0.0)).norm() < 1e-12);
        let brute = quadrature::integrate_real(|w| 5e-3 * w * (-w / 20.0).exp(), 0.0, 2000.0, 1e-12).unwrap();
        assert!((brute - 2.0).abs() < 1e-10);
        let q = xi_correlation_quad(0.0, &spec).unwrap();
        assert!((q - c).norm() < 1e-9);
    }

    #[test]
    fn xi_correlation_vanishes_without_coupling() {
        let spec = BathSpec::new(0.0, 20.0, 0.5, 0.7).unwrap();
        for &t in &[-3.0, 0.0, 2.0] {
            assert_eq!(xi_correlation(t, &spec).unwrap(), c64::new(0.0, 0.0));
        }
    }

    #[test]
    fn xi_correlation_closed_form_matches_quadrature() {
        for &s in &[0.5, 1.0, 2.0] {
            let spec = fig2(s);
            for &t in &[-5.0, -0.1, 0.0, 0.05, 1.0, 12.0] {
                let a = xi_correlation(t, &spec).unwrap();
                let b = xi_correlation_quad(t, &spec).unwrap();
                assert!((a - b).norm() < 1e-9 * spec.total_weight(), "s={s} t={t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn thermal_correlation_matches_discrete_sum() {
        let spec = BathSpec::new(5e-3, 20.0, 1.0, 0.5).unwrap();
        let disc = discretize_bath(&spec, 20000, 400.0).unwrap();
        let scale = xi_correlation(0.0, &spec).unwrap().norm();
        for &t in &[0.0, 0.3, 2.0, 8.0] {
            let a = xi_correlation(t, &spec).unwrap();
            let b = disc.xi_correlation(t);
            assert!((a - b).norm() < 1e-3 * scale, "t={t}: {a} vs {b}");
        }
    }

    #[test]
    fn correlation_conjugate_symmetry_at_finite_temperature() {
        let spec = BathSpec::new(5e-3, 20.0, 0.5, 0.8).unwrap();
        let scale = spec.total_weight();
        for &t in &[0.2, 3.0, 17.0, 49.0] {
            let a = xi_correlation(t, &spec).unwrap();
            let b = xi_correlation(-t, &spec).unwrap();
            assert!((a.conj() - b).norm() < 1e-9 * scale);
        }
    }

    #[test]
    fn discretization_edge_cases() {
        let d = discretize_bath(&BathSpec::new(0.0, 20.0, 1.0, 0.0).unwrap(), 10, 200.0).unwrap();
        assert!(d.couplings.iter().all(|&v| v == 0.0));
        let spec = fig2(1.0);
        let d = discretize_bath(&spec, 1, 200.0).unwrap();
        assert_eq!(d.frequencies, vec![100.0]);
        let expected = spectral_density(100.0, &spec).unwrap() * 200.0;
        assert!((d.couplings[0].powi(2) - expected).abs() < 1e-15 * expected.max(1.0));
        assert!(discretize_bath(&spec, 0, 200.0).is_err());
        assert!(discretize_bath(&spec, 10, 0.0).is_err());
        assert!(discretize_bath(&spec, 10, -1.0).is_err());
    }

    #[test]
    fn discrete_weight_converges() {
        for &s in &[0.5, 1.0, 2.0] {
            let spec = fig2(s);
            let disc = discretize_bath(&spec, 2000, 200.0).unwrap();
            let exact = quadrature::integrate_real(
                |w| spectral_density(w, &spec).unwrap(),
                0.0,
                200.0,
                1e-12,
            );
            // The sub-Ohmic √ω cusp needs the substituted first panel.
            let exact = match exact {
                Ok(v) => v,
                Err(_) => quadrature::integrate_half_line(
                    |w| c64::new(if w < 200.0 { spectral_density(w, &spec).unwrap() } else { 0.0 }, 0.0),
                    s + 1.0,
                    0.0,
                    20.0,
                    200.0,
                    1e-12,
                )
                .unwrap()
                .re,
            };
            let rel = (disc.total_weight() - exact).abs() / exact;
            assert!(rel < 1e-3, "s={s}: rel {rel}");
        }
    }

    #[test]
    fn integral_forms_match_discrete_sums() {
        for &s in &[0.5, 1.0, 2.0] {
            let spec = fig2(s);
            // ω_max = 15 ω₀ keeps the truncated tail below 1e-4 even for s = 2.
            let disc = discretize_bath(&spec, 3000, 300.0).unwrap();
            let f_scale = (0..=2000)
                .map(|i| memory_kernel_f(i as f64 * 0.01, &spec).norm())
                .fold(0.0, f64::max);
            let c_scale = xi_correlation(0.0, &spec).unwrap().norm();
            for i in 0..=400 {
                let t = i as f64 * 0.05;
                let df = (memory_kernel_f(t, &spec) - disc.memory_kernel(t)).norm();
                let dc = (xi_correlation(t, &spec).unwrap() - disc.xi_correlation(t)).norm();
                assert!(df < 1e-3 * f_scale, "s={s} t={t}: f deviation {df}");
                assert!(dc < 1e-3 * c_scale, "s={s} t={t}: xi deviation {dc}");
            }
        }
    }

    proptest! {
        #[test]
        fn density_is_linear_in_eta(eta in 0.0f64..1.0, w in 0.0f64..400.0, s in 0.1f64..3.0) {
            let a = BathSpec::new(eta, 20.0, s, 0.0).unwrap();
            let b = a.with_eta(2.0 * eta);
            prop_assert_eq!(spectral_density(w, &b).unwrap(), 2.0 * spectral_density(w, &a).unwrap());
        }

        #[test]
        fn kernel_is_purely_imaginary(t in 0.0f64..200.0, s in 0.1f64..3.0, eta in 0.0f64..0.05) {
            let spec = BathSpec::new(eta, 20.0, s, 0.0).unwrap();
            prop_assert_eq!(memory_kernel_f(t, &spec).re, 0.0);
        }

        #[test]
        fn correlation_conjugate_symmetry(t in -50.0f64..50.0, s in 0.1f64..3.0) {
            let spec = BathSpec::new(5e-3, 20.0, s, 0.0).unwrap();
            let a = xi_correlation(t, &spec).unwrap();
            let b = xi_correlation(-t, &spec).unwrap();
            prop_assert!((a.conj() - b).norm() <= 1e-14 * spec.total_weight());
        }
    }
}
