use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Uniform time discretization shared by every engine.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
    pub output_stride: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize, output_stride: usize) -> Result<Self> {
        let grid = Self { dt, n_steps, output_stride };
        grid.validate()?;
        Ok(grid)
    }

    /// Grid covering `[0, t_max]` with roughly `outputs` output points.
    pub fn covering(dt: f64, t_max: f64, outputs: usize) -> Result<Self> {
        let outputs = outputs.max(1);
        let raw = (t_max / dt).round().max(1.0) as usize;
        let stride = (raw / outputs).max(1);
        let n_steps = raw.div_ceil(stride) * stride;
        Self::new(dt, n_steps, stride)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid("grid.dt", format!("must be > 0, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(invalid("grid.n_steps", "must be >= 1"));
        }
        if self.output_stride == 0 || !self.n_steps.is_multiple_of(self.output_stride) {
            return Err(invalid(
                "grid.output_stride",
                format!("must be positive and divide n_steps = {}, got {}", self.n_steps, self.output_stride),
            ));
        }
        Ok(())
    }

    pub fn t_max(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    /// Grid indices of the output points, `0, stride, 2·stride, …, n_steps`.
    pub fn output_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..=self.n_steps).step_by(self.output_stride)
    }

    pub fn output_count(&self) -> usize {
        self.n_steps / self.output_stride + 1
    }

    /// Same time span with a different step; keeps the number of outputs.
    pub fn with_dt(&self, dt: f64) -> Result<Self> {
        Self::covering(dt, self.t_max(), self.output_count() - 1)
    }

    /// Same step with a different end time; keeps the output spacing.
    pub fn with_t_max(&self, t_max: f64) -> Result<Self> {
        let outputs = ((t_max / (self.dt * self.output_stride as f64)).round() as usize).max(1);
        Self::covering(self.dt, t_max, outputs)
    }
}

impl Default for TimeGrid {
    /// dt = 2.5e-3, 80 000 steps (t_max = 200), 200 output intervals.
    fn default() -> Self {
        Self { dt: 2.5e-3, n_steps: 80_000, output_stride: 400 }
    }
}
