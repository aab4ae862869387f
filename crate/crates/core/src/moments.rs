//! Second moments of the mechanical mode from the Green functions and the
//! correlations of the noise operator S_in = A₀ + A_in - ξ.
//!
//! With b(t) = M b(0) + L* b†(0) + S(t) and S(t) = ∫₀^t K(t-τ) S_in(τ) dτ,
//! K = M - L*, a ground-state initial oscillator gives
//!
//!   ⟨bb⟩   = M L* + ⟨SS⟩
//!   ⟨b†b⟩  = |L|² + ⟨S†S⟩
//!
//! S_in is anti-Hermitian, so ⟨S†S⟩ = -∬ K*K C and every block is built
//! from the single correlation C(τ₁, τ₂) = ⟨S_in(τ₁) S_in(τ₂)⟩.

use rayon::prelude::*;

use crate::bath::{xi_correlation, BathSpec};
use crate::c64;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernel::{u_exponent, KernelTable};
use crate::system::SystemSpec;
use crate::toeplitz::ToeplitzFft;
use crate::volterra::GreenPair;

/// Tolerance for clamping slightly negative ⟨S†S⟩ from quadrature error.
pub const NEGATIVE_CLAMP: f64 = 1e-8;

/// Sampled correlations of S_in on the time grid.
#[derive(Clone, Debug)]
pub struct NoiseCorrelation {
    pub dt: f64,
    /// ⟨ξ(τ₁)ξ(τ₂)⟩ at τ₁ - τ₂ = j·dt, j ≥ 0; negative lags by conjugation.
    pub xi: Vec<c64>,
    /// e^{u(j·dt)}, the factor of the rank-one A₀ term.
    pub cavity_init_factor: Vec<c64>,
    pub kappa: f64,
    pub delta_eff: f64,
    pub coupling_sq: f64,
    /// F(j·dt); [S_in(τ₁), S_in(τ₂)] = F(τ₁ - τ₂) extended as an odd function.
    pub commutator: Vec<c64>,
}

/// C_A0(τ₁, τ₂) = -|G|² e^{u(τ₁) + u*(τ₂)} for a vacuum cavity.
pub fn a0_correlation(tau1: f64, tau2: f64, sys: &SystemSpec) -> c64 {
    -(u_exponent(tau1, sys) + u_exponent(tau2, sys).conj()).exp() * sys.coupling_sq()
}

/// C_Ain(τ₁, τ₂) = -|G|² e^{-iΔ'(τ₁-τ₂)} [e^{-κ|τ₁-τ₂|/2} - e^{-κ(τ₁+τ₂)/2}]
/// for vacuum input noise.
pub fn a_in_correlation(tau1: f64, tau2: f64, sys: &SystemSpec) -> c64 {
    let d = tau1 - tau2;
    let k = sys.kappa;
    let envelope = (-0.5 * k * d.abs()).exp() - (-0.5 * k * (tau1 + tau2)).exp();
    -c64::from_polar(1.0, -sys.delta_eff * d) * (sys.coupling_sq() * envelope)
}

/// C(τ₁, τ₂) = ⟨S_in(τ₁) S_in(τ₂)⟩ for τ₁, τ₂ ≥ 0.
pub fn s_in_correlation(tau1: f64, tau2: f64, sys: &SystemSpec, bath: &BathSpec) -> Result<c64> {
    if tau1 < 0.0 || tau2 < 0.0 {
        return Err(Error::Domain(format!("noise correlation needs τ ≥ 0, got ({tau1}, {tau2})")));
    }
    Ok(xi_correlation(tau1 - tau2, bath)? + a0_correlation(tau1, tau2, sys) + a_in_correlation(tau1, tau2, sys))
}

impl NoiseCorrelation {
    pub fn build(sys: &SystemSpec, bath: &BathSpec, grid: &TimeGrid, table: &KernelTable) -> Result<Self> {
        crate::volterra::check_table(table, grid)?;
        let n = grid.n_steps + 1;
        let dt = grid.dt;
        let xi = (0..n)
            .into_par_iter()
            .map(|j| xi_correlation(j as f64 * dt, bath))
            .collect::<Result<Vec<_>>>()?;
        let cavity_init_factor = (0..n).map(|j| u_exponent(j as f64 * dt, sys).exp()).collect();
        Ok(Self {
            dt,
            xi,
            cavity_init_factor,
            kappa: sys.kappa,
            delta_eff: sys.delta_eff,
            coupling_sq: sys.coupling_sq(),
            commutator: table.samples[..n].to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    fn xi_lag(&self, lag: isize) -> c64 {
        if lag >= 0 {
            self.xi[lag as usize]
        } else {
            self.xi[(-lag) as usize].conj()
        }
    }

    /// Stationary piece of the A_in term, -|G|² e^{-iΔ'τ - κ|τ|/2}.
    fn cavity_stationary(&self, lag: isize) -> c64 {
        let tau = lag as f64 * self.dt;
        -c64::from_polar((-0.5 * self.kappa * tau.abs()).exp(), -self.delta_eff * tau) * self.coupling_sq
    }

    /// Everything in C that depends on τ₁ - τ₂ only.
    pub fn stationary(&self, lag: isize) -> c64 {
        self.xi_lag(lag) + self.cavity_stationary(lag)
    }

    fn commutator_lag(&self, lag: isize) -> c64 {
        if lag >= 0 {
            self.commutator[lag as usize]
        } else {
            -self.commutator[(-lag) as usize]
        }
    }

    /// C(t_i, t_j) assembled term by term.
    pub fn full(&self, i: usize, j: usize) -> c64 {
        let (ei, ej) = (self.cavity_init_factor[i], self.cavity_init_factor[j]);
        let a0 = -ei * ej.conj() * self.coupling_sq;
        let a_in_separable = ei * ej.conj() * self.coupling_sq;
        self.stationary(i as isize - j as isize) + a0 + a_in_separable
    }
}

/// ⟨SS⟩, ⟨S†S⟩ and ⟨[S, S†]⟩ at one time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseMoments {
    pub ss: c64,
    pub sdag_s: f64,
    pub commutator: f64,
    /// Imaginary part of the assembled ⟨S†S⟩ before it is dropped.
    pub imag_residue: f64,
}

/// Double-trapezoid assembly of the noise moments. The stationary parts
/// of C are applied as Toeplitz operators (FFT), the separable parts as
/// products of single sums, so each time costs O(N log N).
pub struct MomentAssembler<'a> {
    green: &'a GreenPair,
    corr: &'a NoiseCorrelation,
    stationary: ToeplitzFft,
    commutator: ToeplitzFft,
}

impl<'a> MomentAssembler<'a> {
    pub fn new(green: &'a GreenPair, corr: &'a NoiseCorrelation, max_index: usize) -> Result<Self> {
        if max_index >= green.m.len() || max_index >= corr.len() {
            return Err(Error::Domain(format!("time index {max_index} outside the grid")));
        }
        if (green.grid.dt - corr.dt).abs() > 1e-12 * corr.dt {
            return Err(Error::Domain("Green functions and correlations use different dt".into()));
        }
        let stationary = ToeplitzFft::new(max_index, |k| corr.stationary(k));
        let commutator = ToeplitzFft::new(max_index, |k| corr.commutator_lag(k));
        Ok(Self { green, corr, stationary, commutator })
    }

    /// Trapezoid-weighted response v_j = w_j K(t_n - t_j), j = 0..=n.
    fn weighted_response(&self, n: usize) -> Vec<c64> {
        let dt = self.corr.dt;
        (0..=n)
            .map(|j| {
                let w = if j == 0 || j == n { 0.5 * dt } else { dt };
                self.green.response(n - j) * w
            })
            .collect()
    }

    pub fn at(&self, n: usize) -> Result<NoiseMoments> {
        if n > self.stationary.max_lag() {
            return Err(Error::Domain(format!("time index {n} beyond assembler range")));
        }
        if n == 0 {
            return Ok(NoiseMoments { ss: c64::new(0.0, 0.0), sdag_s: 0.0, commutator: 0.0, imag_residue: 0.0 });
        }
        let v = self.weighted_response(n);
        let cv = self.stationary.apply(&v);
        let mut ss: c64 = v.iter().zip(&cv).map(|(a, b)| a * b).sum();
        let mut sds: c64 = -v.iter().zip(&cv).map(|(a, b)| a.conj() * b).sum::<c64>();

        // Rank-one pieces: A₀ (coefficient -|G|²) and the separable part of
        // A_in (coefficient +|G|²).
        let e = &self.corr.cavity_init_factor;
        let v_e: c64 = v.iter().zip(e).map(|(a, b)| a * b).sum();
        let vc_e: c64 = v.iter().zip(e).map(|(a, b)| a.conj() * b).sum();
        let v_ec: c64 = v.iter().zip(e).map(|(a, b)| a * b.conj()).sum();
        let g2 = self.corr.coupling_sq;
        for coeff in [-g2, g2] {
            ss += v_e * v_ec * coeff;
            sds -= vc_e * v_ec * coeff;
        }

        let vconj: Vec<c64> = v.iter().map(|z| z.conj()).collect();
        let fv = self.commutator.apply(&vconj);
        let comm: c64 = -v.iter().zip(&fv).map(|(a, b)| a * b).sum::<c64>();

        let mut sdag_s = sds.re;
        if sdag_s < 0.0 {
            if sdag_s >= -NEGATIVE_CLAMP {
                log::warn!("clamping <S†S> = {sdag_s:e} to 0 at step {n}");
                sdag_s = 0.0;
            } else {
                return Err(Error::Consistency(format!(
                    "<S†S> = {sdag_s:e} < 0 at step {n}; the noise correlation is not positive"
                )));
            }
        }
        Ok(NoiseMoments { ss, sdag_s, commutator: comm.re, imag_residue: sds.im.abs() })
    }
}

/// (⟨SS⟩, ⟨S†S⟩) at grid index `t_index`.
pub fn noise_second_moment(green: &GreenPair, corr: &NoiseCorrelation, t_index: usize) -> Result<(c64, f64)> {
    let m = MomentAssembler::new(green, corr, t_index)?.at(t_index)?;
    Ok((m.ss, m.sdag_s))
}

/// Quadrature variances and second moments sampled at the output times.
#[derive(Clone, Debug, PartialEq)]
pub struct VarianceTrace {
    pub times: Vec<f64>,
    pub theta: f64,
    pub var_x: Vec<f64>,
    pub var_y: Vec<f64>,
    pub var_theta: Vec<f64>,
    pub moment_bb: Vec<c64>,
    pub moment_nb: Vec<f64>,
    pub commutator_residual: Vec<f64>,
}

impl VarianceTrace {
    /// Builds the quadrature variances from ⟨bb⟩ and ⟨b†b⟩:
    /// ΔX²(θ) = 1/2 + ⟨b†b⟩ + Re(e^{-2iθ}⟨bb⟩).
    pub fn from_moments(times: Vec<f64>, theta: f64, bb: Vec<c64>, nb: Vec<f64>, commutator_residual: Vec<f64>) -> Self {
        let quad = |phi: f64| -> Vec<f64> {
            bb.iter()
                .zip(&nb)
                .map(|(b, n)| 0.5 + n + (c64::from_polar(1.0, -2.0 * phi) * b).re)
                .collect()
        };
        let var_x = quad(0.0);
        let var_y = quad(std::f64::consts::FRAC_PI_2);
        let var_theta = quad(theta);
        Self { times, theta, var_x, var_y, var_theta, moment_bb: bb, moment_nb: nb, commutator_residual }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// ΔX²(φ) at output point `i` for any angle φ.
    pub fn variance_at(&self, i: usize, phi: f64) -> f64 {
        0.5 + self.moment_nb[i] + (c64::from_polar(1.0, -2.0 * phi) * self.moment_bb[i]).re
    }

    /// Symmetrized covariance of X and Y.
    pub fn covariance_xy(&self, i: usize) -> f64 {
        self.moment_bb[i].im
    }

    /// min over time of var_x·var_y - Cov² (1/4 for a pure minimum-uncertainty state).
    pub fn uncertainty_product_min(&self) -> f64 {
        (0..self.len())
            .map(|i| self.var_x[i] * self.var_y[i] - self.covariance_xy(i).powi(2))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn min_var_theta(&self) -> f64 {
        self.var_theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_commutator_residual(&self) -> f64 {
        self.commutator_residual.iter().copied().fold(0.0, f64::max)
    }

    /// Restriction to output points with t ≤ `t_max`.
    pub fn until(&self, t_max: f64) -> Self {
        let n = self.times.iter().take_while(|&&t| t <= t_max * (1.0 + 1e-12)).count();
        Self {
            times: self.times[..n].to_vec(),
            theta: self.theta,
            var_x: self.var_x[..n].to_vec(),
            var_y: self.var_y[..n].to_vec(),
            var_theta: self.var_theta[..n].to_vec(),
            moment_bb: self.moment_bb[..n].to_vec(),
            moment_nb: self.moment_nb[..n].to_vec(),
            commutator_residual: self.commutator_residual[..n].to_vec(),
        }
    }

    /// Largest pointwise |a - b| / |b| of var_theta against `reference`.
    pub fn max_relative_deviation(&self, reference: &VarianceTrace) -> f64 {
        self.var_theta
            .iter()
            .zip(&reference.var_theta)
            .map(|(a, b)| (a - b).abs() / b.abs())
            .fold(0.0, f64::max)
    }
}

/// Assembles the variance trace at every output point of `grid`.
pub fn variance_trace(
    green: &GreenPair,
    corr: &NoiseCorrelation,
    sys: &SystemSpec,
    grid: &TimeGrid,
) -> Result<VarianceTrace> {
    let assembler = MomentAssembler::new(green, corr, grid.n_steps)?;
    let indices: Vec<usize> = grid.output_indices().collect();
    let rows = indices
        .par_iter()
        .map(|&n| {
            let s = assembler.at(n)?;
            let bb = green.m[n] * green.l[n].conj() + s.ss;
            let nb = green.l[n].norm_sqr() + s.sdag_s;
            let comm = (green.norm_difference(n) + s.commutator - 1.0).abs();
            if s.imag_residue > 1e-9 {
                log::warn!("imaginary residue {:e} in <S†S> at step {n}", s.imag_residue);
            }
            Ok((bb, nb, comm))
        })
        .collect::<Result<Vec<_>>>()?;
    let times = indices.iter().map(|&n| grid.time(n)).collect();
    let bb = rows.iter().map(|r| r.0).collect();
    let nb = rows.iter().map(|r| r.1).collect();
    let comm = rows.iter().map(|r| r.2).collect();
    Ok(VarianceTrace::from_moments(times, sys.theta, bb, nb, comm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::build_kernel_table;
    use crate::quadrature;
    use crate::volterra::solve_green;
    use nalgebra::DMatrix;

    fn setup(sys: &SystemSpec, bath: &BathSpec, grid: &TimeGrid) -> (GreenPair, NoiseCorrelation) {
        let table = build_kernel_table(sys, bath, grid);
        let green = solve_green(&table, grid).unwrap();
        let corr = NoiseCorrelation::build(sys, bath, grid, &table).unwrap();
        (green, corr)
    }

    #[test]
    fn zero_sources_give_zero_moments() {
        let sys = SystemSpec::fig2().with_coupling(0.0);
        let bath = BathSpec::new(0.0, 20.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.01, 500, 50).unwrap();
        let (green, corr) = setup(&sys, &bath, &grid);
        for n in [0, 1, 250, 500] {
            let (ss, sds) = noise_second_moment(&green, &corr, n).unwrap();
            assert_eq!(ss.norm(), 0.0);
            assert_eq!(sds, 0.0);
        }
        let trace = variance_trace(&green, &corr, &sys, &grid).unwrap();
        for i in 0..trace.len() {
            for phi in [0.0, 0.4, 1.3] {
                assert!((trace.variance_at(i, phi) - 0.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn a0_at_origin_matches_operator_algebra() {
        // Single cavity mode in a truncated Fock space, vacuum state.
        let dim = 6;
        let mut a = DMatrix::<c64>::zeros(dim, dim);
        for k in 1..dim {
            a[(k - 1, k)] = c64::new((k as f64).sqrt(), 0.0);
        }
        let adag = a.adjoint();
        let mut sys = SystemSpec::fig2();
        sys.coupling_g = c64::new(0.3, -0.2);
        let g = sys.coupling_g;
        let i = c64::new(0.0, 1.0);
        for &(t1, t2) in &[(0.0, 0.0), (0.7, 0.2), (1.5, 3.0)] {
            let e = |t: f64| u_exponent(t, &sys).exp();
            let op = |t: f64| (&a * (g.conj() * e(t)) + &adag * (g * e(t).conj())) * i;
            let prod = op(t1) * op(t2);
            let expect = prod[(0, 0)];
            let closed = a0_correlation(t1, t2, &sys);
            assert!((expect - closed).norm() < 1e-14, "({t1},{t2}): {expect} vs {closed}");
        }
        let c = a0_correlation(0.0, 0.0, &sys);
        assert!((c + c64::new(sys.coupling_sq(), 0.0)).norm() < 1e-15);
    }

    #[test]
    fn a_in_closed_form_matches_quadrature() {
        let sys = SystemSpec::fig2();
        let i = c64::new(0.0, 1.0);
        for &(t1, t2) in &[(0.3, 0.3), (2.0, 0.5), (0.5, 2.0), (12.0, 9.0)] {
            let integrand = |s: f64| {
                let u1 = u_exponent(t1 - s, &sys);
                let u2 = u_exponent(t2 - s, &sys).conj();
                // i·√κ G* e^{u₁} and i·√κ G e^{u₂*} contracted by ⟨a_in a_in†⟩ = δ.
                let left = i * sys.coupling_g.conj() * u1.exp() * sys.kappa.sqrt();
                let right = i * sys.coupling_g * u2.exp() * sys.kappa.sqrt();
                left * right
            };
            let brute = quadrature::integrate(integrand, 0.0, t1.min(t2), 1e-14).unwrap();
            let closed = a_in_correlation(t1, t2, &sys);
            assert!((brute - closed).norm() < 1e-12, "({t1},{t2}): {brute} vs {closed}");
        }
    }

    #[test]
    fn cavity_correlation_limits() {
        let sys = SystemSpec::fig2();
        let g2 = sys.coupling_sq();
        let t = 400.0;
        assert!(a0_correlation(t, t, &sys).norm() < 1e-15);
        assert!((a_in_correlation(t, t, &sys) + c64::new(g2, 0.0)).norm() < 1e-12);
        let bath = BathSpec::new(0.0, 20.0, 1.0, 0.0).unwrap();
        // A₀ and the separable part of A_in cancel: the cavity noise is stationary.
        for &(a, b) in &[(0.0, 0.0), (1.0, 3.0), (7.0, 2.5)] {
            let c = s_in_correlation(a, b, &sys, &bath).unwrap();
            let d: f64 = a - b;
            let expect = -c64::from_polar((-0.05 * d.abs()).exp(), -5.0 * d) * g2;
            assert!((c - expect).norm() < 1e-14);
        }
        assert!(s_in_correlation(-1.0, 0.0, &sys, &bath).is_err());
    }

    #[test]
    fn s_in_correlation_vanishes_without_sources() {
        let sys = SystemSpec::fig2().with_coupling(0.0);
        let bath = BathSpec::new(0.0, 20.0, 1.0, 0.0).unwrap();
        assert_eq!(s_in_correlation(1.0, 2.0, &sys, &bath).unwrap().norm(), 0.0);
    }

    #[test]
    fn correlation_is_hermitian_in_its_arguments() {
        let sys = SystemSpec::fig2();
        let bath = BathSpec::new(5e-3, 20.0, 0.5, 0.0).unwrap();
        let grid = TimeGrid::new(0.01, 300, 30).unwrap();
        let (_, corr) = setup(&sys, &bath, &grid);
        for &(i, j) in &[(0usize, 0usize), (10, 200), (299, 3)] {
            assert!((corr.full(i, j).conj() - corr.full(j, i)).norm() < 1e-14);
            let s = s_in_correlation(grid.time(i), grid.time(j), &sys, &bath).unwrap();
            assert!((corr.full(i, j) - s).norm() < 1e-13);
        }
    }

    #[test]
    fn fft_assembly_matches_direct_double_sum() {
        let sys = SystemSpec::fig2();
        let bath = BathSpec::new(5e-3, 20.0, 0.5, 0.0).unwrap();
        let grid = TimeGrid::new(0.01, 400, 40).unwrap();
        let (green, corr) = setup(&sys, &bath, &grid);
        let assembler = MomentAssembler::new(&green, &corr, grid.n_steps).unwrap();
        for n in [1usize, 37, 400] {
            let dt = grid.dt;
            let w = |j: usize| if j == 0 || j == n { 0.5 * dt } else { dt };
            let mut ss = c64::new(0.0, 0.0);
            let mut sds = c64::new(0.0, 0.0);
            let mut comm = c64::new(0.0, 0.0);
            for i in 0..=n {
                for j in 0..=n {
                    let ki = green.response(n - i) * w(i);
                    let kj = green.response(n - j) * w(j);
                    let c = s_in_correlation(grid.time(i), grid.time(j), &sys, &bath).unwrap();
                    ss += ki * kj * c;
                    sds -= ki.conj() * kj * c;
                    let lag = i as isize - j as isize;
                    let f = if lag >= 0 { corr.commutator[lag as usize] } else { -corr.commutator[(-lag) as usize] };
                    comm -= ki * kj.conj() * f;
                }
            }
            let fast = assembler.at(n).unwrap();
            assert!((fast.ss - ss).norm() < 1e-11, "n={n}: {} vs {ss}", fast.ss);
            assert!((fast.sdag_s - sds.re).abs() < 1e-11);
            assert!(sds.im.abs() < 1e-12);
            assert!((fast.commutator - comm.re).abs() < 1e-11);
        }
    }

    #[test]
    fn ground_state_at_origin_and_theta_consistency() {
        let sys = SystemSpec::fig2();
        let bath = BathSpec::new(5e-3, 20.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.005, 2000, 100).unwrap();
        let (green, corr) = setup(&sys, &bath, &grid);
        let trace = variance_trace(&green, &corr, &sys, &grid).unwrap();
        for phi in [0.0, 0.7, std::f64::consts::FRAC_PI_2] {
            assert_eq!(trace.variance_at(0, phi), 0.5);
        }
        for i in 0..trace.len() {
            assert_eq!(trace.variance_at(i, 0.0), trace.var_x[i]);
            assert_eq!(trace.variance_at(i, sys.theta), trace.var_theta[i]);
            let (c, s) = (sys.theta.cos(), sys.theta.sin());
            let expanded = trace.var_x[i] * c * c + trace.var_y[i] * s * s + 2.0 * c * s * trace.covariance_xy(i);
            assert!((expanded - trace.var_theta[i]).abs() < 1e-12);
        }
        assert!(trace.uncertainty_product_min() >= 0.25 * (1.0 - 1e-6));
        assert!(trace.max_commutator_residual() < 1e-4, "{}", trace.max_commutator_residual());
    }

    #[test]
    fn negative_occupation_is_a_consistency_error() {
        // Flipping the sign of the correlation makes ⟨S†S⟩ negative.
        let sys = SystemSpec::fig2();
        let bath = BathSpec::new(5e-3, 20.0, 1.0, 0.0).unwrap();
        let grid = TimeGrid::new(0.01, 300, 30).unwrap();
        let (green, mut corr) = setup(&sys, &bath, &grid);
        corr.xi.iter_mut().for_each(|z| *z = -*z);
        corr.coupling_sq = -corr.coupling_sq;
        assert!(matches!(noise_second_moment(&green, &corr, 300), Err(Error::Consistency(_))));
    }
}
