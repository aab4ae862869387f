//! Composite memory kernel F(τ) = f(τ) - [|G|² e^{u(τ)} - c.c.] on a
//! uniform lag grid, together with its product-integration weights.
//!
//! The history integral ∫₀ᵗ F(t-τ) P(τ) dτ is discretized by integrating F
//! exactly against the piecewise-linear interpolant of P. The weights are
//! the moments of F against the hat functions of the lag grid, so the
//! sharp bath kernel (width 1/ω₀) does not limit the accuracy; only the
//! smoothness of P does.

use rayon::prelude::*;

use crate::bath::{memory_kernel_f, BathSpec};
use crate::c64;
use crate::grid::TimeGrid;
use crate::quadrature::kronrod_rule;
use crate::system::SystemSpec;

/// Sampled kernel F(j·dt) for j = 0..=n_steps, plus its two parts and
/// the product-integration weights.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelTable {
    pub dt: f64,
    pub samples: Vec<c64>,
    pub bath_part: Vec<c64>,
    pub cavity_part: Vec<c64>,
    /// hat[j] = ∫ F(τ) φ_j(τ) dτ over τ ≥ 0, φ_j the hat function centred
    /// on j·dt (only its right half for j = 0).
    pub hat: Vec<c64>,
    /// half_hat[j] = ∫₀^dt F(j·dt + s) (1 - s/dt) ds, the right half of hat[j].
    pub half_hat: Vec<c64>,
}

/// u(τ) = -(iΔ'_c + κ/2) τ for constant detuning.
pub fn u_exponent(lag: f64, sys: &SystemSpec) -> c64 {
    -c64::new(0.5 * sys.kappa, sys.delta_eff) * lag
}

/// Cavity-induced kernel -[G*G e^{u(τ)} - G G* e^{u*(τ)}]
/// = 2i|G|² e^{-κτ/2} sin(Δ'_c τ).
pub fn cavity_kernel(lag: f64, sys: &SystemSpec) -> c64 {
    let g2 = sys.coupling_sq();
    let e = u_exponent(lag, sys).exp();
    -(e * g2 - e.conj() * g2)
}

pub fn build_kernel_table(sys: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> KernelTable {
    let dt = grid.dt;
    let n = grid.n_steps + 1;
    let bath_part: Vec<c64> = (0..n).into_par_iter().map(|j| memory_kernel_f(j as f64 * dt, bath)).collect();
    let cavity_part: Vec<c64> = (0..n).into_par_iter().map(|j| cavity_kernel(j as f64 * dt, sys)).collect();
    let samples = bath_part.iter().zip(&cavity_part).map(|(a, b)| a + b).collect();
    let kernel = |lag: f64| memory_kernel_f(lag, bath) + cavity_kernel(lag, sys);
    // Moments of F on [k dt, (k+1) dt] against the falling and rising ramps.
    let ramps: Vec<(c64, c64)> = (0..n)
        .into_par_iter()
        .map(|k| {
            let start = k as f64 * dt;
            kronrod_rule(0.0, dt).iter().fold((c64::new(0.0, 0.0), c64::new(0.0, 0.0)), |(lo, hi), &(s, w)| {
                let v = kernel(start + s) * w;
                (lo + v * (1.0 - s / dt), hi + v * (s / dt))
            })
        })
        .collect();
    let half_hat: Vec<c64> = ramps.iter().map(|r| r.0).collect();
    let hat = (0..n).map(|j| if j == 0 { ramps[0].0 } else { ramps[j].0 + ramps[j - 1].1 }).collect();
    KernelTable { dt, samples, bath_part, cavity_part, hat, half_hat }
}

impl KernelTable {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn max_real_part(&self) -> f64 {
        self.samples.iter().map(|z| z.re.abs()).fold(0.0, f64::max)
    }

    /// Kernel with every sample conjugated.
    pub fn conjugated(&self) -> Self {
        let conj = |v: &[c64]| v.iter().map(|z| z.conj()).collect::<Vec<_>>();
        Self {
            dt: self.dt,
            samples: conj(&self.samples),
            bath_part: conj(&self.bath_part),
            cavity_part: conj(&self.cavity_part),
            hat: conj(&self.hat),
            half_hat: conj(&self.half_hat),
        }
    }

    /// F at a signed lag index, using F(-τ) = -F(τ).
    pub fn odd(&self, lag: isize) -> c64 {
        if lag >= 0 {
            self.samples[lag as usize]
        } else {
            -self.samples[(-lag) as usize]
        }
    }
}
