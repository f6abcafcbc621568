//! Euler schemes: the Ito form driven by Brownian increments and the general
//! semimartingale form driven by an arbitrary (U, V) pair.

use alloc::string::ToString;
use alloc::vec;

use super::ensemble::PathEnsemble;
use super::PathError;

/// Ito coefficients `dX = b(X) dt + sigma(X) dW`.
pub trait ItoModel {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    /// Writes `b(x)` into `out` (length `dim`).
    fn drift(&self, x: &[f64], out: &mut [f64]);
    /// Writes `sigma(x)` row-major into `out` (`dim x noise_dim`).
    fn diffusion(&self, x: &[f64], out: &mut [f64]);
}

/// A path prefix: everything a non-anticipating integrand is allowed to read.
///
/// Holds states at steps `0..=now` only, so an integrand cannot depend on the
/// future of the solution even by accident.
pub struct PathView<'a> {
    values: &'a [f64],
    dims: usize,
}

impl<'a> PathView<'a> {
    fn new(values: &'a [f64], dims: usize) -> Self {
        debug_assert!(values.len() % dims == 0 && !values.is_empty());
        PathView { values, dims }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Index of the latest visible step.
    pub fn now(&self) -> usize {
        self.values.len() / self.dims - 1
    }

    pub fn at(&self, step: usize) -> &[f64] {
        &self.values[step * self.dims..(step + 1) * self.dims]
    }

    pub fn last(&self) -> &[f64] {
        self.at(self.now())
    }
}

/// The integrand H of `X = U + integral of H(X, s-) dV`.
///
/// `evaluate` receives the solution prefix up to the current step and the
/// current time, and writes the `dim x driver_dim` matrix applied to the
/// next driver increment.
pub trait Integrand {
    fn dim(&self) -> usize;
    fn driver_dim(&self) -> usize;
    fn evaluate(&self, x: &PathView<'_>, t: f64, out: &mut [f64]);
}

/// Runs `X_{k+1} = X_k + sigma(X_k) dW_k + b(X_k) dt` over the ensemble `w`.
pub fn euler_ito(
    model: &impl ItoModel,
    x0: &[f64],
    w: &PathEnsemble,
) -> Result<PathEnsemble, PathError> {
    let dim = model.dim();
    let nd = model.noise_dim();
    if x0.len() != dim {
        return Err(PathError::DimensionMismatch {
            expected: dim,
            got: x0.len(),
        });
    }
    if w.dims() != nd {
        return Err(PathError::DimensionMismatch {
            expected: nd,
            got: w.dims(),
        });
    }
    let grid = *w.grid();
    let dt = grid.dt();
    let mut out =
        PathEnsemble::zeroed(grid, w.paths(), dim, w.seed(), "euler-ito".to_string())?;
    let mut b = vec![0.0; dim];
    let mut sig = vec![0.0; dim * nd];
    let mut x = vec![0.0; dim];
    for p in 0..w.paths() {
        x.copy_from_slice(x0);
        for (d, v) in x.iter().enumerate() {
            out.set(p, 0, d, *v);
        }
        for k in 0..grid.steps() {
            model.drift(&x, &mut b);
            model.diffusion(&x, &mut sig);
            for d in 0..dim {
                let mut acc = x[d];
                for c in 0..nd {
                    acc += sig[d * nd + c] * (w.value(p, k + 1, c) - w.value(p, k, c));
                }
                acc += b[d] * dt;
                if !acc.is_finite() {
                    return Err(PathError::NonFiniteValue { path: p, step: k + 1 });
                }
                x[d] = acc;
                out.set(p, k + 1, d, acc);
            }
        }
    }
    Ok(out)
}

/// Runs `X_{j+1} = X_j + (U_{j+1} - U_j) + H(X restricted to steps <= j, t_j)
/// (V_{j+1} - V_j)`, with `X_0 = U_0`.
pub fn euler_semimartingale(
    h: &impl Integrand,
    u: &PathEnsemble,
    v: &PathEnsemble,
) -> Result<PathEnsemble, PathError> {
    if u.grid() != v.grid() {
        return Err(PathError::GridMismatch);
    }
    if u.paths() != v.paths() {
        return Err(PathError::DimensionMismatch {
            expected: u.paths(),
            got: v.paths(),
        });
    }
    let dim = h.dim();
    let dd = h.driver_dim();
    if u.dims() != dim {
        return Err(PathError::DimensionMismatch {
            expected: dim,
            got: u.dims(),
        });
    }
    if v.dims() != dd {
        return Err(PathError::DimensionMismatch {
            expected: dd,
            got: v.dims(),
        });
    }
    let grid = *v.grid();
    let mut out = PathEnsemble::zeroed(
        grid,
        v.paths(),
        dim,
        v.seed(),
        "euler-semimartingale".to_string(),
    )?;
    let mut hmat = vec![0.0; dim * dd];
    let mut x_path = vec![0.0; grid.points() * dim];
    for p in 0..v.paths() {
        x_path[..dim].copy_from_slice(u.state(p, 0));
        for k in 0..grid.steps() {
            let view = PathView::new(&x_path[..(k + 1) * dim], dim);
            h.evaluate(&view, grid.point(k), &mut hmat);
            for d in 0..dim {
                let mut acc = x_path[k * dim + d] + (u.value(p, k + 1, d) - u.value(p, k, d));
                for c in 0..dd {
                    acc += hmat[d * dd + c] * (v.value(p, k + 1, c) - v.value(p, k, c));
                }
                if !acc.is_finite() {
                    return Err(PathError::NonFiniteValue { path: p, step: k + 1 });
                }
                x_path[(k + 1) * dim + d] = acc;
            }
        }
        for k in 0..grid.points() {
            for d in 0..dim {
                out.set(p, k, d, x_path[k * dim + d]);
            }
        }
    }
    Ok(out)
}

/// Extends a Brownian ensemble to the driver `V = (W, t)`: the Brownian
/// columns first, then a final column holding the grid time. Keeping the
/// time column last lets [`ItoIntegrand`] accumulate contributions in the
/// same order as [`euler_ito`], which makes the two schemes agree exactly.
pub fn time_augmented(w: &PathEnsemble) -> PathEnsemble {
    let grid = *w.grid();
    let mut out = PathEnsemble::zeroed(
        grid,
        w.paths(),
        w.dims() + 1,
        w.seed(),
        "time-augmented".to_string(),
    )
    .expect("source ensemble already validated");
    for p in 0..w.paths() {
        for k in 0..grid.points() {
            for d in 0..w.dims() {
                out.set(p, k, d, w.value(p, k, d));
            }
            out.set(p, k, w.dims(), grid.point(k));
        }
    }
    out
}

/// Presents an Ito model as the integrand `H = [sigma | b]` against the
/// `(W, t)` driver built by [`time_augmented`].
pub struct ItoIntegrand<M>(pub M);

impl<M: ItoModel> Integrand for ItoIntegrand<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn driver_dim(&self) -> usize {
        self.0.noise_dim() + 1
    }

    fn evaluate(&self, x: &PathView<'_>, _t: f64, out: &mut [f64]) {
        let dim = self.0.dim();
        let nd = self.0.noise_dim();
        let mut b = vec![0.0; dim];
        let mut sig = vec![0.0; dim * nd];
        self.0.drift(x.last(), &mut b);
        self.0.diffusion(x.last(), &mut sig);
        for d in 0..dim {
            out[d * (nd + 1)..d * (nd + 1) + nd].copy_from_slice(&sig[d * nd..(d + 1) * nd]);
            out[d * (nd + 1) + nd] = b[d];
        }
    }
}
