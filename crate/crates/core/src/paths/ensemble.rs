//! Ensembles of discretized paths on a shared grid.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::grid::TimeGrid;
use super::PathError;

/// A `paths x (steps+1) x dims` array of path values plus the provenance
/// needed to regenerate it: grid, seed, and stream purpose.
///
/// Values are cadlag in the discretization sense: the index-`k` value holds
/// on `[t_k, t_{k+1})`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathEnsemble {
    grid: TimeGrid,
    paths: usize,
    dims: usize,
    values: Vec<f64>,
    seed: u64,
    purpose: String,
}

impl PathEnsemble {
    /// Allocates a zero-filled ensemble for a builder to fill.
    pub fn zeroed(
        grid: TimeGrid,
        paths: usize,
        dims: usize,
        seed: u64,
        purpose: String,
    ) -> Result<Self, PathError> {
        if paths == 0 || dims == 0 {
            return Err(PathError::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        Ok(PathEnsemble {
            grid,
            paths,
            dims,
            values: vec![0.0; paths * grid.points() * dims],
            seed,
            purpose,
        })
    }

    /// Wraps precomputed values, which must have the exact flat length.
    pub fn from_raw(
        grid: TimeGrid,
        paths: usize,
        dims: usize,
        values: Vec<f64>,
        seed: u64,
        purpose: String,
    ) -> Result<Self, PathError> {
        let expected = paths * grid.points() * dims;
        if values.len() != expected {
            return Err(PathError::DimensionMismatch {
                expected,
                got: values.len(),
            });
        }
        Ok(PathEnsemble {
            grid,
            paths,
            dims,
            values,
            seed,
            purpose,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn paths(&self) -> usize {
        self.paths
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn purpose(&self) -> &str {
        &self.purpose
    }

    fn offset(&self, path: usize, step: usize, dim: usize) -> usize {
        debug_assert!(path < self.paths && step < self.grid.points() && dim < self.dims);
        (path * self.grid.points() + step) * self.dims + dim
    }

    pub fn value(&self, path: usize, step: usize, dim: usize) -> f64 {
        self.values[self.offset(path, step, dim)]
    }

    pub fn set(&mut self, path: usize, step: usize, dim: usize, v: f64) {
        let at = self.offset(path, step, dim);
        self.values[at] = v;
    }

    /// All coordinates of one path at one step.
    pub fn state(&self, path: usize, step: usize) -> &[f64] {
        let start = self.offset(path, step, 0);
        &self.values[start..start + self.dims]
    }

    /// One path's whole trajectory, step-major.
    pub fn path(&self, path: usize) -> &[f64] {
        let start = self.offset(path, 0, 0);
        &self.values[start..start + self.grid.points() * self.dims]
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    /// Shared grid, seed, and path count: the precondition for comparing or
    /// combining ensembles row by row.
    pub fn same_provenance(&self, other: &PathEnsemble) -> bool {
        self.grid == other.grid && self.seed == other.seed && self.paths == other.paths
    }

    /// Keeps every `factor`-th grid point, producing the same paths on a
    /// coarser grid. `factor` must divide the step count.
    pub fn restrict_every(&self, factor: usize) -> Result<PathEnsemble, PathError> {
        if factor == 0 || self.grid.steps() % factor != 0 {
            return Err(PathError::GridMismatch);
        }
        let coarse = TimeGrid::new(self.grid.horizon(), self.grid.steps() / factor)?;
        let mut out = PathEnsemble::zeroed(
            coarse,
            self.paths,
            self.dims,
            self.seed,
            self.purpose.clone(),
        )?;
        for p in 0..self.paths {
            for k in 0..coarse.points() {
                for d in 0..self.dims {
                    out.set(p, k, d, self.value(p, k * factor, d));
                }
            }
        }
        Ok(out)
    }

    /// Mean and standard error of one coordinate at the final time.
    pub fn terminal_stats(&self, dim: usize) -> (f64, f64) {
        let n = self.paths as f64;
        let last = self.grid.steps();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for p in 0..self.paths {
            let v = self.value(p, last, dim);
            sum += v;
            sum_sq += v * v;
        }
        let mean = sum / n;
        let var = (sum_sq / n - mean * mean).max(0.0);
        let se = if self.paths > 1 {
            libm::sqrt(var / (n - 1.0))
        } else {
            f64::INFINITY
        };
        (mean, se)
    }
}

/// Mean over paths of the sup-norm distance between two ensembles.
pub fn mean_sup_distance(a: &PathEnsemble, b: &PathEnsemble) -> Result<f64, PathError> {
    if a.grid != b.grid {
        return Err(PathError::GridMismatch);
    }
    if a.paths != b.paths || a.dims != b.dims {
        return Err(PathError::DimensionMismatch {
            expected: a.paths * a.dims,
            got: b.paths * b.dims,
        });
    }
    let mut acc = 0.0;
    for p in 0..a.paths {
        let mut sup = 0.0f64;
        for k in 0..a.grid.points() {
            for d in 0..a.dims {
                sup = sup.max((a.value(p, k, d) - b.value(p, k, d)).abs());
            }
        }
        acc += sup;
    }
    Ok(acc / a.paths as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn grid() -> TimeGrid {
        TimeGrid::new(1.0, 4).unwrap()
    }

    #[test]
    fn indexing_is_path_major_then_step_then_dim() {
        let mut e = PathEnsemble::zeroed(grid(), 2, 3, 1, "test".to_string()).unwrap();
        e.set(1, 2, 0, 42.0);
        assert_eq!(e.value(1, 2, 0), 42.0);
        assert_eq!(e.state(1, 2), &[42.0, 0.0, 0.0]);
        assert_eq!(e.path(0).len(), 15);
        assert_eq!(e.raw().len(), 30);
    }

    #[test]
    fn from_raw_validates_length() {
        assert!(PathEnsemble::from_raw(grid(), 2, 1, vec![0.0; 10], 0, "t".to_string()).is_ok());
        assert!(PathEnsemble::from_raw(grid(), 2, 1, vec![0.0; 9], 0, "t".to_string()).is_err());
    }

    #[test]
    fn provenance_compares_grid_seed_and_paths() {
        let a = PathEnsemble::zeroed(grid(), 2, 1, 7, "a".to_string()).unwrap();
        let b = PathEnsemble::zeroed(grid(), 2, 2, 7, "b".to_string()).unwrap();
        assert!(a.same_provenance(&b));
        let c = PathEnsemble::zeroed(grid(), 3, 1, 7, "c".to_string()).unwrap();
        assert!(!a.same_provenance(&c));
        let d = PathEnsemble::zeroed(grid(), 2, 1, 8, "d".to_string()).unwrap();
        assert!(!a.same_provenance(&d));
    }

    #[test]
    fn terminal_stats_match_hand_computation() {
        let mut e = PathEnsemble::zeroed(grid(), 4, 1, 0, "t".to_string()).unwrap();
        for (p, v) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            e.set(p, 4, 0, *v);
        }
        let (mean, se) = e.terminal_stats(0);
        assert_eq!(mean, 2.5);
        // sample variance 5/3, se = sqrt((5/3)/4)
        assert!((se - libm::sqrt(5.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn restriction_keeps_shared_grid_points() {
        let mut e = PathEnsemble::zeroed(grid(), 1, 1, 0, "t".to_string()).unwrap();
        for k in 0..5 {
            e.set(0, k, 0, 10.0 * k as f64);
        }
        let r = e.restrict_every(2).unwrap();
        assert_eq!(r.grid().steps(), 2);
        assert_eq!(r.grid().horizon(), 1.0);
        assert_eq!(r.path(0), &[0.0, 20.0, 40.0]);
        assert!(e.restrict_every(3).is_err());
        assert!(e.restrict_every(0).is_err());
    }

    #[test]
    fn mean_sup_distance_is_zero_on_identical_and_positive_otherwise() {
        let a = PathEnsemble::zeroed(grid(), 2, 1, 0, "t".to_string()).unwrap();
        assert_eq!(mean_sup_distance(&a, &a).unwrap(), 0.0);
        let mut b = a.clone();
        b.set(0, 3, 0, 2.0);
        assert_eq!(mean_sup_distance(&a, &b).unwrap(), 1.0);
    }
}
