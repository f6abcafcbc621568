//! Brownian driving noise: grid ensembles and lazily refined single paths.

use alloc::string::ToString;
use alloc::vec::Vec;

use crate::stream::{Stream, StreamKey};

use super::ensemble::PathEnsemble;
use super::grid::TimeGrid;
use super::PathError;

/// Purpose tag for grid-sampled Brownian ensembles.
pub const BROWNIAN_PURPOSE: &str = "brownian";

/// Samples `paths` independent `dims`-dimensional standard Brownian motions
/// on the grid, one counter-based stream per path.
pub fn brownian(
    grid: TimeGrid,
    paths: usize,
    dims: usize,
    seed: u64,
) -> Result<PathEnsemble, PathError> {
    let mut out = PathEnsemble::zeroed(grid, paths, dims, seed, BROWNIAN_PURPOSE.to_string())?;
    let scale = libm::sqrt(grid.dt());
    for p in 0..paths {
        let mut stream = Stream::new(StreamKey::new(seed, BROWNIAN_PURPOSE, p as u64));
        for k in 0..grid.steps() {
            for d in 0..dims {
                let next = out.value(p, k, d) + scale * stream.next_gaussian();
                out.set(p, k + 1, d, next);
            }
        }
    }
    Ok(out)
}

/// One scalar Brownian path queried at arbitrary times.
///
/// Knots record every time already sampled. A query beyond the last knot
/// draws a fresh increment; a query between knots draws from the bridge law,
/// mean the linear interpolant and variance `(b - t)(t - a) / (b - a)`.
/// Repeating a query returns the stored value, so refining the time set
/// never changes values already reported.
#[derive(Clone, Debug)]
pub struct BridgeCache {
    knots: Vec<(f64, f64)>,
    stream: Stream,
}

impl BridgeCache {
    pub fn new(seed: u64, path: u64) -> Self {
        BridgeCache {
            knots: alloc::vec![(0.0, 0.0)],
            stream: Stream::new(StreamKey::new(seed, "brownian-bridge", path)),
        }
    }

    /// Times already pinned down, in increasing order.
    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn sample_at(&mut self, t: f64) -> Result<f64, PathError> {
        if !(t >= 0.0) {
            return Err(PathError::NegativeTime);
        }
        let idx = self.knots.partition_point(|&(kt, _)| kt < t);
        if idx < self.knots.len() && self.knots[idx].0 == t {
            return Ok(self.knots[idx].1);
        }
        let g = self.stream.next_gaussian();
        let value = if idx == self.knots.len() {
            let (last_t, last_v) = self.knots[idx - 1];
            last_v + libm::sqrt(t - last_t) * g
        } else {
            let (a, va) = self.knots[idx - 1];
            let (b, vb) = self.knots[idx];
            let mean = va + (t - a) / (b - a) * (vb - va);
            let var = (b - t) * (t - a) / (b - a);
            mean + libm::sqrt(var) * g
        };
        self.knots.insert(idx, (t, value));
        Ok(value)
    }
}

/// Samples the cached path at `t`, extending or refining the cache.
pub fn brownian_at(cache: &mut BridgeCache, t: f64) -> Result<f64, PathError> {
    cache.sample_at(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_starts_at_zero_and_matches_replayed_stream() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let e = brownian(grid, 3, 2, 99).unwrap();
        for p in 0..3 {
            for d in 0..2 {
                assert_eq!(e.value(p, 0, d), 0.0);
            }
        }
        let mut stream = Stream::new(StreamKey::new(99, BROWNIAN_PURPOSE, 1));
        let scale = libm::sqrt(grid.dt());
        let mut w = [0.0f64; 2];
        for k in 0..8 {
            for (d, slot) in w.iter_mut().enumerate() {
                *slot += scale * stream.next_gaussian();
                assert_eq!(e.value(1, k + 1, d), *slot);
            }
        }
    }

    #[test]
    fn paths_are_distinct() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        let e = brownian(grid, 2, 1, 5).unwrap();
        assert_ne!(e.value(0, 4, 0), e.value(1, 4, 0));
    }

    #[test]
    fn repeated_query_returns_stored_value_and_knots_stay_sorted() {
        let mut cache = BridgeCache::new(11, 0);
        let v1 = cache.sample_at(1.0).unwrap();
        let v_half = cache.sample_at(0.5).unwrap();
        let v_quarter = cache.sample_at(0.25).unwrap();
        assert_eq!(cache.sample_at(1.0).unwrap(), v1);
        assert_eq!(cache.sample_at(0.5).unwrap(), v_half);
        assert_eq!(cache.sample_at(0.25).unwrap(), v_quarter);
        let times: Vec<f64> = cache.knots().iter().map(|&(t, _)| t).collect();
        assert_eq!(times, alloc::vec![0.0, 0.25, 0.5, 1.0]);
        assert!(cache.sample_at(-0.5).is_err());
        assert!(cache.sample_at(f64::NAN).is_err());
    }

    #[test]
    fn interior_query_has_bridge_variance() {
        // Residual of the midpoint against the interpolant of the endpoints is
        // N(0, (1-0.5)(0.5-0)/1) = N(0, 1/4) regardless of the endpoint values.
        let n = 10_000;
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for path in 0..n {
            let mut cache = BridgeCache::new(2024, path);
            let end = cache.sample_at(1.0).unwrap();
            let mid = cache.sample_at(0.5).unwrap();
            let r = mid - end / 2.0;
            sum += r;
            sum_sq += r * r;
        }
        let mean = sum / n as f64;
        let var = sum_sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 0.25).abs() < 0.05 * 0.25, "var {var}");
    }

    #[test]
    fn extension_query_has_increment_variance() {
        let n = 10_000;
        let mut sum_sq = 0.0;
        for path in 0..n {
            let mut cache = BridgeCache::new(7, path);
            let a = cache.sample_at(1.0).unwrap();
            let b = cache.sample_at(3.0).unwrap();
            let r = b - a;
            sum_sq += r * r;
        }
        let var = sum_sq / n as f64;
        assert!((var - 2.0).abs() < 0.05 * 2.0, "var {var}");
    }
}
