//! Interacting particle approximation of equations whose coefficients depend
//! on the law of the current state.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::stream::{Stream, StreamKey};

use super::ensemble::PathEnsemble;
use super::grid::TimeGrid;
use super::PathError;

/// Snapshot of all particle states at one step, standing in for the law of
/// the state.
pub struct Empirical<'a> {
    states: &'a [f64],
    dims: usize,
}

impl<'a> Empirical<'a> {
    pub fn particles(&self) -> usize {
        self.states.len() / self.dims
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dims..(i + 1) * self.dims]
    }

    /// Mean of one coordinate across particles.
    pub fn mean(&self, dim: usize) -> f64 {
        let n = self.particles();
        let mut acc = 0.0;
        for i in 0..n {
            acc += self.state(i)[dim];
        }
        acc / n as f64
    }

    /// Mean of an arbitrary statistic across particles.
    pub fn mean_map(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let n = self.particles();
        let mut acc = 0.0;
        for i in 0..n {
            acc += f(self.state(i));
        }
        acc / n as f64
    }
}

/// Coefficients `b(x, law)` and `sigma(x, law)`.
pub trait MvModel {
    fn dim(&self) -> usize;
    fn noise_dim(&self) -> usize;
    fn drift(&self, x: &[f64], law: &Empirical<'_>, out: &mut [f64]);
    fn diffusion(&self, x: &[f64], law: &Empirical<'_>, out: &mut [f64]);
}

/// Starting distribution of each particle, sampled independently.
#[derive(Clone, Debug)]
pub enum InitialLaw {
    Point(Vec<f64>),
    Gaussian { mean: Vec<f64>, sd: Vec<f64> },
}

impl InitialLaw {
    fn dim(&self) -> usize {
        match self {
            InitialLaw::Point(x) => x.len(),
            InitialLaw::Gaussian { mean, .. } => mean.len(),
        }
    }

    fn sample(&self, stream: &mut Stream, out: &mut [f64]) {
        match self {
            InitialLaw::Point(x) => out.copy_from_slice(x),
            InitialLaw::Gaussian { mean, sd } => {
                for d in 0..mean.len() {
                    out[d] = mean[d] + sd[d] * stream.next_gaussian();
                }
            }
        }
    }
}

/// Explicit particle scheme: each step freezes the empirical law of the
/// current states and advances every particle by an Euler step against it.
pub fn mckean_vlasov(
    model: &impl MvModel,
    init: &InitialLaw,
    particles: usize,
    grid: TimeGrid,
    seed: u64,
) -> Result<PathEnsemble, PathError> {
    if particles < 2 {
        return Err(PathError::TooFewParticles);
    }
    let dim = model.dim();
    if init.dim() != dim {
        return Err(PathError::DimensionMismatch {
            expected: dim,
            got: init.dim(),
        });
    }
    let nd = model.noise_dim();
    let dt = grid.dt();
    let scale = libm::sqrt(dt);
    let mut out =
        PathEnsemble::zeroed(grid, particles, dim, seed, "mckean-vlasov".to_string())?;
    let mut noise: Vec<Stream> = (0..particles)
        .map(|i| Stream::new(StreamKey::new(seed, "mckean-noise", i as u64)))
        .collect();
    let mut states = vec![0.0; particles * dim];
    for i in 0..particles {
        let mut stream = Stream::new(StreamKey::new(seed, "mckean-init", i as u64));
        init.sample(&mut stream, &mut states[i * dim..(i + 1) * dim]);
    }
    for i in 0..particles {
        for d in 0..dim {
            out.set(i, 0, d, states[i * dim + d]);
        }
    }
    let mut next = vec![0.0; particles * dim];
    let mut b = vec![0.0; dim];
    let mut sig = vec![0.0; dim * nd];
    let mut dw = vec![0.0; nd];
    for k in 0..grid.steps() {
        let law = Empirical {
            states: &states,
            dims: dim,
        };
        for i in 0..particles {
            let x = law.state(i);
            model.drift(x, &law, &mut b);
            model.diffusion(x, &law, &mut sig);
            for item in dw.iter_mut() {
                *item = scale * noise[i].next_gaussian();
            }
            for d in 0..dim {
                let mut acc = x[d];
                for c in 0..nd {
                    acc += sig[d * nd + c] * dw[c];
                }
                acc += b[d] * dt;
                if !acc.is_finite() {
                    return Err(PathError::NonFiniteValue { path: i, step: k + 1 });
                }
                next[i * dim + d] = acc;
            }
        }
        states.copy_from_slice(&next);
        for i in 0..particles {
            for d in 0..dim {
                out.set(i, k + 1, d, states[i * dim + d]);
            }
        }
    }
    Ok(out)
}
