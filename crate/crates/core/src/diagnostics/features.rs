//! Finite feature maps standing in for the information available at a
//! stage: sampled path values for the temporal structure, one-sided window
//! integrals for the right-continuous one.

use alloc::vec::Vec;

use crate::paths::PathEnsemble;

use super::DiagError;

/// Row-major matrix with one row of features per path.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, DiagError> {
        if data.len() != rows * cols {
            return Err(DiagError::LengthMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Concatenates columns row-wise; the left matrix's columns come first,
    /// so the result nests it.
    pub fn hstack(&self, right: &FeatureMatrix) -> Result<FeatureMatrix, DiagError> {
        if self.rows != right.rows {
            return Err(DiagError::LengthMismatch {
                expected: self.rows,
                got: right.rows,
            });
        }
        let cols = self.cols + right.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(right.row(r));
        }
        Ok(FeatureMatrix {
            rows: self.rows,
            cols,
            data,
        })
    }

    /// Largest column range (max minus min); zero means every feature is
    /// constant and a regression on this matrix is degenerate.
    pub fn max_column_spread(&self) -> f64 {
        let mut spread = 0.0f64;
        for c in 0..self.cols {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for r in 0..self.rows {
                let v = self.row(r)[c];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            spread = spread.max(hi - lo);
        }
        spread
    }
}

fn expand(base: &[f64], degree: usize, out: &mut Vec<f64>) {
    out.extend_from_slice(base);
    if degree >= 2 {
        for i in 0..base.len() {
            for j in i..base.len() {
                out.push(base[i] * base[j]);
            }
        }
    }
}

fn expanded_cols(base: usize, degree: usize) -> usize {
    if degree >= 2 {
        base + base * (base + 1) / 2
    } else {
        base
    }
}

fn check_degree(degree: usize) -> Result<(), DiagError> {
    if degree == 0 || degree > 2 {
        return Err(DiagError::InvalidConfig("polynomial degree must be 1 or 2"));
    }
    Ok(())
}

/// Evenly spread indices `0 = i_0 <= ... <= i_{m-1} = last`.
fn spread_indices(last: usize, m: usize) -> Vec<usize> {
    if m == 1 {
        return alloc::vec![last];
    }
    (0..m).map(|i| i * last / (m - 1)).collect()
}

/// Path values at `m` grid times up to `t`, polynomially expanded.
///
/// Only indices at or before the snap of `t` are read, so the features are
/// invariant to anything the ensemble does later.
pub fn features_temporal(
    e: &PathEnsemble,
    t: f64,
    m: usize,
    degree: usize,
) -> Result<FeatureMatrix, DiagError> {
    check_degree(degree)?;
    if m == 0 {
        return Err(DiagError::InvalidConfig("need at least one sample time"));
    }
    if !(0.0..=e.grid().horizon()).contains(&t) {
        return Err(DiagError::BeyondHorizon);
    }
    let last = e.grid().snap_index(t);
    let indices = spread_indices(last, m);
    let base_len = m * e.dims();
    let cols = expanded_cols(base_len, degree);
    let mut data = Vec::with_capacity(e.paths() * cols);
    let mut base = Vec::with_capacity(base_len);
    for p in 0..e.paths() {
        base.clear();
        for &k in &indices {
            base.extend_from_slice(e.state(p, k));
        }
        expand(&base, degree, &mut data);
    }
    FeatureMatrix::from_rows(e.paths(), cols, data)
}

/// Which side of the stage time a window integral reads.
///
/// The solution side looks backward from each sample time, the output side
/// forward past it; the two are deliberately not interchangeable.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RcSide {
    Backward,
    Forward,
}

/// Window integrals `sum of x(t_u)^q dt` over one-sided windows of length
/// `r` anchored at `m` sample times up to `t`, for powers `q = 1 ..=
/// g_degree`, then polynomially expanded.
pub fn features_rc(
    e: &PathEnsemble,
    t: f64,
    eps: f64,
    r: f64,
    m: usize,
    side: RcSide,
    g_degree: usize,
    degree: usize,
) -> Result<FeatureMatrix, DiagError> {
    check_degree(degree)?;
    if m == 0 || g_degree == 0 {
        return Err(DiagError::InvalidConfig("need sample times and a basis"));
    }
    if !(r > 0.0) {
        return Err(DiagError::InvalidConfig("window length must be positive"));
    }
    if r >= eps {
        return Err(DiagError::WindowTooWide);
    }
    if !(0.0..=e.grid().horizon()).contains(&t) {
        return Err(DiagError::BeyondHorizon);
    }
    let grid = e.grid();
    let dt = grid.dt();
    let anchors = spread_indices(grid.snap_index(t), m);
    let base_len = m * g_degree * e.dims();
    let cols = expanded_cols(base_len, degree);
    let mut data = Vec::with_capacity(e.paths() * cols);
    let mut base = Vec::with_capacity(base_len);
    for p in 0..e.paths() {
        base.clear();
        for &a in &anchors {
            let s = grid.point(a);
            let (lo, hi) = match side {
                RcSide::Backward => {
                    let lo_time = (s - r).max(0.0);
                    ((libm::ceil(lo_time / dt - 1e-12) as usize).min(a), a)
                }
                RcSide::Forward => {
                    let hi_time = (s + r).min(grid.horizon());
                    (a, (libm::ceil(hi_time / dt - 1e-12) as usize).min(grid.steps()))
                }
            };
            for d in 0..e.dims() {
                let mut sums = alloc::vec![0.0f64; g_degree];
                for k in lo..hi {
                    let v = e.value(p, k, d);
                    let mut pow = 1.0;
                    for sum in sums.iter_mut() {
                        pow *= v;
                        *sum += pow * dt;
                    }
                }
                base.extend_from_slice(&sums);
            }
        }
        expand(&base, degree, &mut data);
    }
    FeatureMatrix::from_rows(e.paths(), cols, data)
}
