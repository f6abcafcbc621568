//! The clipped-distance path metric used to compare approximate solutions.

use super::grid::TimeGrid;
use super::PathError;

/// Left-endpoint Riemann sum of `min(|x - y|, 1)` over the grid: the
/// integral metrizing convergence in measure for cadlag paths.
pub fn dm_metric(x: &[f64], y: &[f64], grid: &TimeGrid) -> Result<f64, PathError> {
    if x.len() != grid.points() || y.len() != grid.points() {
        return Err(PathError::GridMismatch);
    }
    let dt = grid.dt();
    let mut total = 0.0;
    for k in 0..grid.steps() {
        total += (x[k] - y[k]).abs().min(1.0) * dt;
    }
    Ok(total)
}
