//! Toeplitz matrix–vector products through circulant embedding and FFT.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::c64;

/// The Toeplitz operator T_{ij} = t(i - j) for |i - j| ≤ `max_lag`.
pub struct ToeplitzFft {
    len: usize,
    max_lag: usize,
    symbol: Vec<c64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl ToeplitzFft {
    /// `lag(k)` must be defined for `-max_lag ..= max_lag`.
    pub fn new<F: Fn(isize) -> c64>(max_lag: usize, lag: F) -> Self {
        let len = (2 * max_lag + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut symbol = vec![c64::new(0.0, 0.0); len];
        symbol[0] = lag(0);
        for k in 1..=max_lag {
            symbol[k] = lag(k as isize);
            symbol[len - k] = lag(-(k as isize));
        }
        forward.process(&mut symbol);
        let scale = 1.0 / len as f64;
        for z in symbol.iter_mut() {
            *z *= scale;
        }
        Self { len, max_lag, symbol, forward, inverse }
    }

    pub fn max_lag(&self) -> usize {
        self.max_lag
    }

    /// y_i = Σ_j t(i - j) x_j for i, j < x.len().
    pub fn apply(&self, x: &[c64]) -> Vec<c64> {
        assert!(x.len() <= self.max_lag + 1, "vector longer than the embedded lag range");
        let mut buf = vec![c64::new(0.0, 0.0); self.len];
        buf[..x.len()].copy_from_slice(x);
        self.forward.process(&mut buf);
        for (b, s) in buf.iter_mut().zip(&self.symbol) {
            *b *= s;
        }
        self.inverse.process(&mut buf);
        buf.truncate(x.len());
        buf
    }
}
