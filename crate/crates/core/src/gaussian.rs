//! Linear Gaussian dynamics of coupled bosonic modes in the quadrature
//! basis v = (x₀, p₀, x₁, p₁, …) with [x, p] = i.
//!
//! A quadratic Hamiltonian H = Σ c_ij v_i v_j plus Markovian losses gives
//! dv = A v dt + noise and the symmetrized covariance obeys the Lyapunov
//! equation V̇ = A V + V Aᵀ + D. Two integrators are provided: the dense
//! Lyapunov form for small systems, and an adjoint form that evolves only
//! the rows of the propagator belonging to a few observed quadratures,
//! which keeps large bath discretizations at O(modes) work per step.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Growth threshold of the adjoint vectors before a run is declared unstable.
pub const GROWTH_LIMIT: f64 = 1e8;

#[derive(Clone, Debug)]
pub struct GaussianModel {
    modes: usize,
    drift: Vec<(usize, usize, f64)>,
    diffusion: Vec<f64>,
    initial: Vec<f64>,
}

pub fn x(mode: usize) -> usize {
    2 * mode
}

pub fn p(mode: usize) -> usize {
    2 * mode + 1
}

impl GaussianModel {
    /// All modes start in vacuum with no loss.
    pub fn new(modes: usize) -> Self {
        Self { modes, drift: Vec::new(), diffusion: vec![0.0; 2 * modes], initial: vec![0.5; 2 * modes] }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn dim(&self) -> usize {
        2 * self.modes
    }

    /// Adds c·v_i·v_j to the Hamiltonian.
    pub fn add_hamiltonian(&mut self, i: usize, j: usize, c: f64) {
        if c == 0.0 {
            return;
        }
        if i == j {
            self.push_gradient(i, j, 2.0 * c);
        } else {
            self.push_gradient(i, j, c);
            self.push_gradient(j, i, c);
        }
    }

    // ∂H/∂v_l gains c·v_k; the symplectic form turns it into drift.
    fn push_gradient(&mut self, l: usize, k: usize, c: f64) {
        if l.is_multiple_of(2) {
            self.drift.push((l + 1, k, -c));
        } else {
            self.drift.push((l - 1, k, c));
        }
    }

    /// ω (x² + p²)/2, i.e. ω a†a up to a constant.
    pub fn add_frequency(&mut self, mode: usize, omega: f64) {
        self.add_hamiltonian(x(mode), x(mode), 0.5 * omega);
        self.add_hamiltonian(p(mode), p(mode), 0.5 * omega);
    }

    /// Energy loss at `rate` into a reservoir with occupation `occupation`.
    pub fn add_loss(&mut self, mode: usize, rate: f64, occupation: f64) {
        if rate == 0.0 {
            return;
        }
        for q in [x(mode), p(mode)] {
            self.drift.push((q, q, -0.5 * rate));
            self.diffusion[q] += rate * (occupation + 0.5);
        }
    }

    /// Thermal initial state with mean occupation `occupation`.
    pub fn set_initial_occupation(&mut self, mode: usize, occupation: f64) {
        self.initial[x(mode)] = occupation + 0.5;
        self.initial[p(mode)] = occupation + 0.5;
    }

    pub fn drift_matrix(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.dim(), self.dim());
        for &(r, c, v) in &self.drift {
            a[(r, c)] += v;
        }
        a
    }

    pub fn diffusion_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.diffusion.clone()))
    }

    pub fn initial_covariance(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.initial.clone()))
    }

    /// Dense RK4 integration of the Lyapunov equation. `observe` is called
    /// with the grid index and covariance at every output point.
    pub fn solve_lyapunov<F>(&self, grid: &TimeGrid, substeps: usize, mut observe: F) -> Result<()>
    where
        F: FnMut(usize, &DMatrix<f64>),
    {
        let a = self.drift_matrix();
        let at = a.transpose();
        let d = self.diffusion_matrix();
        let h = grid.dt / substeps as f64;
        let rhs = |v: &DMatrix<f64>| &a * v + v * &at + &d;
        let mut v = self.initial_covariance();
        observe(0, &v);
        for n in 1..=grid.n_steps {
            for _ in 0..substeps {
                let k1 = rhs(&v);
                let k2 = rhs(&(&v + &k1 * (0.5 * h)));
                let k3 = rhs(&(&v + &k2 * (0.5 * h)));
                let k4 = rhs(&(&v + &k3 * h));
                v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
                v = (&v + v.transpose()) * 0.5;
            }
            if !v.iter().all(|z| z.is_finite() && z.abs() < GROWTH_LIMIT) {
                return Err(Error::Unstable { step: n, time: grid.time(n), detail: "covariance diverged".into() });
            }
            if n % grid.output_stride == 0 {
                observe(n, &v);
            }
        }
        Ok(())
    }

    /// Covariance block of the quadratures `observed` at every output
    /// point, from w_i(t) = e^{Aᵀt} e_i:
    ///
    ///   V_ij(t) = w_iᵀ V(0) w_j + ∫₀^t w_iᵀ D w_j ds.
    pub fn observe_covariances(&self, observed: &[usize], grid: &TimeGrid, substeps: usize) -> Result<Vec<DMatrix<f64>>> {
        let dim = self.dim();
        let m = observed.len();
        let at = SparseRows::transpose_of(dim, &self.drift);
        let h = grid.dt / substeps as f64;

        // State: m adjoint vectors back to back, then the m×m noise integral.
        let mut w = vec![0.0; m * dim];
        for (c, &q) in observed.iter().enumerate() {
            w[c * dim + q] = 1.0;
        }
        let mut noise = vec![0.0; m * m];
        let noisy: Vec<(usize, f64)> =
            self.diffusion.iter().copied().enumerate().filter(|(_, d)| *d != 0.0).collect();

        let deriv = |w: &[f64], dw: &mut [f64], dq: &mut [f64]| {
            for c in 0..m {
                at.apply(&w[c * dim..(c + 1) * dim], &mut dw[c * dim..(c + 1) * dim]);
            }
            for i in 0..m {
                for j in i..m {
                    let s: f64 = noisy.iter().map(|&(k, d)| d * w[i * dim + k] * w[j * dim + k]).sum();
                    dq[i * m + j] = s;
                    dq[j * m + i] = s;
                }
            }
        };

        let snapshot = |w: &[f64], noise: &[f64]| {
            let mut out = DMatrix::zeros(m, m);
            for i in 0..m {
                for j in i..m {
                    let wi = &w[i * dim..(i + 1) * dim];
                    let wj = &w[j * dim..(j + 1) * dim];
                    let s: f64 = self.initial.iter().zip(wi.iter().zip(wj)).map(|(v, (a, b))| v * a * b).sum();
                    out[(i, j)] = s + noise[i * m + j];
                    out[(j, i)] = out[(i, j)];
                }
            }
            out
        };

        let mut results = Vec::with_capacity(grid.output_count());
        results.push(snapshot(&w, &noise));

        let len = m * dim;
        let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; len], vec![0.0; len], vec![0.0; len], vec![0.0; len]);
        let (mut q1, mut q2, mut q3, mut q4) = (vec![0.0; m * m], vec![0.0; m * m], vec![0.0; m * m], vec![0.0; m * m]);
        let mut tmp = vec![0.0; len];
        let shifted = |tmp: &mut [f64], w: &[f64], k: &[f64], frac: f64| {
            for ((t, a), b) in tmp.iter_mut().zip(w).zip(k) {
                *t = a + frac * b;
            }
        };
        for n in 1..=grid.n_steps {
            for _ in 0..substeps {
                deriv(&w, &mut k1, &mut q1);
                shifted(&mut tmp, &w, &k1, 0.5 * h);
                deriv(&tmp, &mut k2, &mut q2);
                shifted(&mut tmp, &w, &k2, 0.5 * h);
                deriv(&tmp, &mut k3, &mut q3);
                shifted(&mut tmp, &w, &k3, h);
                deriv(&tmp, &mut k4, &mut q4);
                for i in 0..len {
                    w[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
                for i in 0..m * m {
                    noise[i] += h / 6.0 * (q1[i] + 2.0 * q2[i] + 2.0 * q3[i] + q4[i]);
                }
            }
            if n % grid.output_stride == 0 {
                let size = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                if !(size < GROWTH_LIMIT) {
                    return Err(Error::Unstable {
                        step: n,
                        time: grid.time(n),
                        detail: format!("propagator entries reached {size:e}"),
                    });
                }
                results.push(snapshot(&w, &noise));
            }
        }
        Ok(results)
    }
}

/// Compressed rows of a sparse square matrix.
struct SparseRows {
    offsets: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseRows {
    /// Rows of Aᵀ from the triplets of A, duplicates summed.
    fn transpose_of(dim: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = triplets.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_by_key(|e| (e.0, e.1));
        let mut offsets = vec![0; dim + 1];
        let mut cols = Vec::with_capacity(entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in entries {
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
                continue;
            }
            offsets[r + 1] += 1;
            cols.push(c);
            vals.push(v);
            last = Some((r, c));
        }
        for r in 0..dim {
            offsets[r + 1] += offsets[r];
        }
        Self { offsets, cols, vals }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.offsets[r], self.offsets[r + 1]);
            *out = self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&c, v)| v * x[c]).sum();
        }
    }
}
