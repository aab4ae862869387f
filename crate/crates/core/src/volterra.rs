//! Green functions M(t), L(t) of the linear Volterra integro-differential
//! system
//!
//!   Ṁ = -iω_m M + ∫₀^t F(t-τ) [M(τ) + L(τ)] dτ
//!   L̇ = +iω_m L + ∫₀^t F*(t-τ) [M(τ) + L(τ)] dτ
//!
//! with M(0) = 1, L(0) = 0.
//!
//! The stepper is a trapezoidal predictor–corrector written in
//! integrating-factor form: the free rotation e^{∓iω_m dt} is applied
//! exactly and only the drive (history integral plus source) is treated by
//! the trapezoid rule. Free evolution is therefore reproduced to rounding
//! error. The history integral itself uses the product-integration weights
//! of [`KernelTable`] and keeps the full memory of the kernel.

use rayon::prelude::*;

use crate::c64;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernel::KernelTable;

/// Blow-up threshold on |M| + |L|.
pub const BLOWUP: f64 = 1e8;

const LANES: usize = 8;
const PAR_CHUNK: usize = 8192;
const PAR_THRESHOLD: usize = 4 * PAR_CHUNK;

#[derive(Clone, Debug, PartialEq)]
pub struct GreenPair {
    pub grid: TimeGrid,
    pub m: Vec<c64>,
    pub l: Vec<c64>,
}

impl GreenPair {
    /// K(τ) = M(τ) - L*(τ), the response of b to an anti-Hermitian impulse.
    pub fn response(&self, index: usize) -> c64 {
        self.m[index] - self.l[index].conj()
    }

    /// |M|² - |L|², the Green-function part of ⟨[b, b†]⟩.
    pub fn norm_difference(&self, index: usize) -> f64 {
        self.m[index].norm_sqr() - self.l[index].norm_sqr()
    }
}

/// Solves for M and L with ω_m = 1.
pub fn solve_green(table: &KernelTable, grid: &TimeGrid) -> Result<GreenPair> {
    solve_green_with_frequency(table, grid, 1.0)
}

pub fn solve_green_with_frequency(table: &KernelTable, grid: &TimeGrid, omega_m: f64) -> Result<GreenPair> {
    check_table(table, grid)?;
    let (m, l) = PairStepper::new(table, grid.dt, omega_m)
        .integrate(grid.n_steps, [c64::new(1.0, 0.0), c64::new(0.0, 0.0)], |_| [c64::new(0.0, 0.0); 2])
        .map_err(|(step, detail)| Error::Unstable { step, time: grid.time(step), detail })?;
    Ok(GreenPair { grid: *grid, m, l })
}

pub(crate) fn check_table(table: &KernelTable, grid: &TimeGrid) -> Result<()> {
    if (table.dt - grid.dt).abs() > 1e-12 * grid.dt {
        return Err(Error::Domain(format!("kernel dt {} does not match grid dt {}", table.dt, grid.dt)));
    }
    if table.len() < grid.n_steps + 1 {
        return Err(Error::Domain(format!(
            "kernel covers {} lags, grid needs {}",
            table.len(),
            grid.n_steps + 1
        )));
    }
    Ok(())
}

/// Shared stepper for the (M, L) pair and the mean-field pair (β, β*).
pub(crate) struct PairStepper {
    dt: f64,
    omega: f64,
    // Weight of the newest node, hat[0].
    head: c64,
    // hat weights stored back to front so the history sum runs forwards in memory.
    rev_re: Vec<f64>,
    rev_im: Vec<f64>,
    half_hat: Vec<c64>,
    pub(crate) blowup: f64,
}

impl PairStepper {
    pub(crate) fn new(table: &KernelTable, dt: f64, omega: f64) -> Self {
        let rev_re = table.hat.iter().rev().map(|z| z.re).collect();
        let rev_im = table.hat.iter().rev().map(|z| z.im).collect();
        Self {
            dt,
            omega,
            head: table.hat[0],
            rev_re,
            rev_im,
            half_hat: table.half_hat.clone(),
            blowup: BLOWUP,
        }
    }

    fn weight(&self, lag: usize) -> c64 {
        let last = self.rev_re.len() - 1;
        c64::new(self.rev_re[last - lag], self.rev_im[last - lag])
    }

    /// Σ_{j=lo}^{hi-1} w_{target-j} P_j, for the weights of F and of F*.
    fn history(&self, target: usize, lo: usize, hi: usize, p_re: &[f64], p_im: &[f64]) -> (c64, c64) {
        let last = self.rev_re.len() - 1;
        let start = last - target + lo;
        let end = start + (hi - lo);
        let [a, b, c, d] = quad_dot(
            &self.rev_re[start..end],
            &self.rev_im[start..end],
            &p_re[lo..hi],
            &p_im[lo..hi],
        );
        (c64::new(a - b, c + d), c64::new(a + b, c - d))
    }

    /// Integrates `n_steps` steps from `init`; `source(n)` is the
    /// inhomogeneity of both equations at grid index n. On blow-up returns
    /// the step index and a description.
    pub(crate) fn integrate<S>(
        &self,
        n_steps: usize,
        init: [c64; 2],
        source: S,
    ) -> std::result::Result<(Vec<c64>, Vec<c64>), (usize, String)>
    where
        S: Fn(usize) -> [c64; 2],
    {
        assert!(self.rev_re.len() > n_steps, "kernel shorter than the requested span");
        let dt = self.dt;
        let rot = c64::from_polar(1.0, -self.omega * dt);
        let rot_conj = rot.conj();
        let head = self.head;

        let mut m = Vec::with_capacity(n_steps + 1);
        let mut l = Vec::with_capacity(n_steps + 1);
        let mut p_re = Vec::with_capacity(n_steps + 1);
        let mut p_im = Vec::with_capacity(n_steps + 1);
        m.push(init[0]);
        l.push(init[1]);
        let p0 = init[0] + init[1];
        p_re.push(p0.re);
        p_im.push(p0.im);

        // History integrals at the current step; empty at t = 0.
        let mut hist_m = c64::new(0.0, 0.0);
        let mut hist_l = c64::new(0.0, 0.0);
        let mut src = source(0);

        for n in 0..n_steps {
            let (mn, ln) = (m[n], l[n]);
            let drive_m = hist_m + src[0];
            let drive_l = hist_l + src[1];
            let next_src = source(n + 1);

            let pred_m = rot * (mn + drive_m * dt);
            let pred_l = rot_conj * (ln + drive_l * dt);

            // History over [0, t_{n+1}] without the newest node; the first
            // node only carries the half hat that lies inside the interval.
            let target = n + 1;
            let (mut base_m, mut base_l) = self.history(target, 1, target, &p_re, &p_im);
            let w_first = self.weight(target) - self.half_hat[target];
            base_m += w_first * p0;
            base_l += w_first.conj() * p0;

            let pred_p = pred_m + pred_l;
            let end_m = base_m + head * pred_p;
            let end_l = base_l + head.conj() * pred_p;

            let new_m = rot * mn + (rot * drive_m + end_m + next_src[0]) * (0.5 * dt);
            let new_l = rot_conj * ln + (rot_conj * drive_l + end_l + next_src[1]) * (0.5 * dt);

            let size = new_m.norm() + new_l.norm();
            if !(size <= self.blowup) {
                return Err((n + 1, format!("|M| + |L| = {size:e} exceeds {:e}", self.blowup)));
            }
            let new_p = new_m + new_l;
            hist_m = base_m + head * new_p;
            hist_l = base_l + head.conj() * new_p;
            m.push(new_m);
            l.push(new_l);
            p_re.push(new_p.re);
            p_im.push(new_p.im);
            src = next_src;
        }
        Ok((m, l))
    }
}

/// Returns [Σ a·x, Σ b·y, Σ a·y, Σ b·x] for kernel parts (a, b) and
/// history parts (x, y). Long sums are split into fixed chunks so the
/// result does not depend on the thread count.
fn quad_dot(a: &[f64], b: &[f64], x: &[f64], y: &[f64]) -> [f64; 4] {
    if a.len() < PAR_THRESHOLD {
        return quad_dot_serial(a, b, x, y);
    }
    let parts: Vec<[f64; 4]> = a
        .par_chunks(PAR_CHUNK)
        .zip(b.par_chunks(PAR_CHUNK))
        .zip(x.par_chunks(PAR_CHUNK).zip(y.par_chunks(PAR_CHUNK)))
        .map(|((a, b), (x, y))| quad_dot_serial(a, b, x, y))
        .collect();
    parts.iter().fold([0.0; 4], |mut acc, p| {
        for k in 0..4 {
            acc[k] += p[k];
        }
        acc
    })
}

fn quad_dot_serial(a: &[f64], b: &[f64], x: &[f64], y: &[f64]) -> [f64; 4] {
    let mut acc = [[0.0f64; LANES]; 4];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let cx = x.chunks_exact(LANES);
    let cy = y.chunks_exact(LANES);
    let (ra, rb, rx, ry) = (ca.remainder(), cb.remainder(), cx.remainder(), cy.remainder());
    for (((a, b), x), y) in ca.zip(cb).zip(cx).zip(cy) {
        for k in 0..LANES {
            acc[0][k] += a[k] * x[k];
            acc[1][k] += b[k] * y[k];
            acc[2][k] += a[k] * y[k];
            acc[3][k] += b[k] * x[k];
        }
    }
    let mut out = [0.0; 4];
    for (o, lanes) in out.iter_mut().zip(&acc) {
        *o = lanes.iter().sum();
    }
    for k in 0..ra.len() {
        out[0] += ra[k] * rx[k];
        out[1] += rb[k] * ry[k];
        out[2] += ra[k] * ry[k];
        out[3] += rb[k] * rx[k];
    }
    out
}
