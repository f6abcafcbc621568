//! Uniform time grids and the snap map onto them.

use super::PathError;

/// A uniform grid on `[0, T]` with points `t_k = k T / n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self, PathError> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(PathError::InvalidHorizon);
        }
        if steps == 0 {
            return Err(PathError::InvalidSteps);
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Number of stored points, including both endpoints.
    pub fn points(&self) -> usize {
        self.steps + 1
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn point(&self, k: usize) -> f64 {
        debug_assert!(k <= self.steps);
        k as f64 * self.horizon / self.steps as f64
    }

    /// Index of the last grid point at or before `t` (capped at the end).
    pub fn snap_index(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        let k = libm::floor(t * self.steps as f64 / self.horizon) as usize;
        k.min(self.steps)
    }

    /// The snap map: largest grid point at or before `t`.
    pub fn snap(&self, t: f64) -> f64 {
        self.point(self.snap_index(t))
    }
}
