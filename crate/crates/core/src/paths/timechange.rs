//! Multiple-time-change equations: the state is a combination of Brownian
//! motions run on state-dependent clocks plus an absolutely continuous part.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::brownian::BridgeCache;
use super::ensemble::PathEnsemble;
use super::grid::TimeGrid;
use super::PathError;

/// Coefficients of `X(t) = x0 + sum_k W_k(tau_k(t)) zeta_k + gamma(t)` with
/// clocks `tau_k' = beta_k(X)` and drift `gamma' = F(X)`.
pub trait TimeChangeModel {
    fn dim(&self) -> usize;
    fn clocks(&self) -> usize;
    /// Clock speed `beta_k(x)`, which must be nonnegative.
    fn rate(&self, k: usize, x: &[f64]) -> f64;
    /// Direction vector `zeta_k` (length `dim`).
    fn direction(&self, k: usize) -> &[f64];
    /// Writes `F(x)` into `out` (length `dim`).
    fn drift(&self, x: &[f64], out: &mut [f64]);
}

/// Solver output: the state, the clock values, and the drift part, all on
/// the same grid.
pub struct TimeChangeOutput {
    pub x: PathEnsemble,
    pub tau: PathEnsemble,
    pub gamma: PathEnsemble,
}

/// Forward Euler for the clocks and drift, with the Brownian motions served
/// at the exact clock times by bridge caches.
///
/// Cache streams are keyed by `path * clocks + k`, so every (path, clock)
/// pair reads an independent Brownian motion for a fixed seed.
pub fn time_change_euler(
    model: &impl TimeChangeModel,
    x0: &[f64],
    grid: TimeGrid,
    paths: usize,
    seed: u64,
) -> Result<TimeChangeOutput, PathError> {
    let dim = model.dim();
    let m = model.clocks();
    if x0.len() != dim {
        return Err(PathError::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    for k in 0..m {
        if model.direction(k).len() != dim {
            return Err(PathError::DimensionMismatch {
                expected: dim,
                got: model.direction(k).len(),
            });
        }
    }
    let dt = grid.dt();
    let mut x_out = PathEnsemble::zeroed(grid, paths, dim, seed, "time-change".to_string())?;
    let mut tau_out =
        PathEnsemble::zeroed(grid, paths, m, seed, "time-change-clocks".to_string())?;
    let mut gamma_out =
        PathEnsemble::zeroed(grid, paths, dim, seed, "time-change-drift".to_string())?;
    let mut f = vec![0.0; dim];
    for p in 0..paths {
        let mut caches: Vec<BridgeCache> = (0..m)
            .map(|k| BridgeCache::new(seed, (p * m + k) as u64))
            .collect();
        let mut x = Vec::from(x0);
        let mut tau = vec![0.0; m];
        let mut gamma = vec![0.0; dim];
        for (d, v) in x.iter().enumerate() {
            x_out.set(p, 0, d, *v);
        }
        for j in 0..grid.steps() {
            for (k, t) in tau.iter_mut().enumerate() {
                let beta = model.rate(k, &x);
                if !(beta >= 0.0) {
                    return Err(PathError::NegativeClockRate { path: p, step: j });
                }
                *t += beta * dt;
            }
            model.drift(&x, &mut f);
            for d in 0..dim {
                gamma[d] += f[d] * dt;
            }
            for d in 0..dim {
                x[d] = x0[d] + gamma[d];
            }
            for (k, cache) in caches.iter_mut().enumerate() {
                let w = cache.sample_at(tau[k])?;
                let zeta = model.direction(k);
                for d in 0..dim {
                    x[d] += w * zeta[d];
                }
            }
            for d in 0..dim {
                if !x[d].is_finite() {
                    return Err(PathError::NonFiniteValue { path: p, step: j + 1 });
                }
                x_out.set(p, j + 1, d, x[d]);
                gamma_out.set(p, j + 1, d, gamma[d]);
            }
            for k in 0..m {
                tau_out.set(p, j + 1, k, tau[k]);
            }
        }
    }
    Ok(TimeChangeOutput {
        x: x_out,
        tau: tau_out,
        gamma: gamma_out,
    })
}
