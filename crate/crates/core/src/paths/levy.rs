//! Levy-type drivers: drift + Brownian part + compound-Poisson jumps, split
//! into a local-martingale part M and a finite-variation part A.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::stream::{Stream, StreamKey};

use super::ensemble::PathEnsemble;
use super::grid::TimeGrid;
use super::PathError;

/// Jump sizes with |value| at most 1 are compensated into M; larger jumps
/// stay in A.
pub const SMALL_JUMP_CUTOFF: f64 = 1.0;

/// Number of localizing levels precomputed for the decomposition.
pub const LOCALIZER_LEVELS: usize = 4;

/// A finitely supported jump-size distribution.
#[derive(Clone, Debug)]
pub struct JumpLaw {
    values: Vec<f64>,
    probs: Vec<f64>,
    cum: Vec<f64>,
}

impl JumpLaw {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self, PathError> {
        if values.is_empty() || values.len() != probs.len() {
            return Err(PathError::InvalidJumpLaw);
        }
        if values.iter().any(|v| !v.is_finite()) || probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(PathError::InvalidJumpLaw);
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(PathError::InvalidJumpLaw);
        }
        let mut cum = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for p in &probs {
            acc += p;
            cum.push(acc);
        }
        *cum.last_mut().expect("nonempty") = 1.0;
        Ok(JumpLaw { values, probs, cum })
    }

    /// The law putting all mass on one jump size.
    pub fn point(value: f64) -> Result<Self, PathError> {
        JumpLaw::new(vec![value], vec![1.0])
    }

    /// Largest absolute jump size in the support.
    pub fn support_bound(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Mean of the jump size restricted to |value| <= cutoff; this is the
    /// compensator rate moved from the jump sum into A.
    pub fn small_mean(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .filter(|(v, _)| v.abs() <= SMALL_JUMP_CUTOFF)
            .map(|(v, p)| v * p)
            .sum()
    }

    fn sample(&self, u: f64) -> f64 {
        let idx = self.cum.partition_point(|&c| c <= u);
        self.values[idx.min(self.values.len() - 1)]
    }
}

/// Parameters of the driver `V(t) = drift t + diffusion W(t) + jump sum`.
#[derive(Clone, Debug)]
pub struct LevyConfig {
    pub rate: f64,
    pub law: JumpLaw,
    pub drift: f64,
    pub diffusion: f64,
}

/// The splitting `V = M + A` with per-path localizing times for M.
///
/// `tau[l][p]` is the first grid time at which `|M|` reaches level `l + 1`
/// on path `p`, or infinity if it never does.
#[derive(Clone, Debug)]
pub struct SemimartingaleDecomp {
    pub m: PathEnsemble,
    pub a: PathEnsemble,
    pub tau: Vec<Vec<f64>>,
}

impl SemimartingaleDecomp {
    /// First grid time `|M| >= level` on `path`, infinity if never reached.
    pub fn tau_at(&self, level: f64, path: usize) -> f64 {
        let grid = self.m.grid();
        for k in 0..grid.points() {
            if self.m.value(path, k, 0).abs() >= level {
                return grid.point(k);
            }
        }
        f64::INFINITY
    }

    /// M frozen from the first time `|M| >= level` onward.
    pub fn stopped_m(&self, level: f64) -> PathEnsemble {
        let mut out = self.m.clone();
        let grid = *self.m.grid();
        for p in 0..out.paths() {
            let mut frozen: Option<f64> = None;
            for k in 0..grid.points() {
                match frozen {
                    Some(v) => out.set(p, k, 0, v),
                    None => {
                        let v = self.m.value(p, k, 0);
                        if v.abs() >= level {
                            frozen = Some(v);
                        }
                    }
                }
            }
        }
        out
    }
}

/// Simulates the driver and its decomposition on the grid.
///
/// Jumps land on the first grid point at or after their arrival time. M
/// collects the diffusion part plus the compensated small-jump sum, A the
/// drift, the compensator, and the large jumps; V is stored as the literal
/// sum M + A, so the identity holds to the last bit.
pub fn levy_driver(
    config: &LevyConfig,
    grid: TimeGrid,
    paths: usize,
    seed: u64,
) -> Result<(PathEnsemble, SemimartingaleDecomp), PathError> {
    if !(config.rate >= 0.0) {
        return Err(PathError::NegativeRate);
    }
    if !config.drift.is_finite() || !config.diffusion.is_finite() {
        return Err(PathError::NonFiniteValue { path: 0, step: 0 })
    }
    let steps = grid.steps();
    let dt = grid.dt();
    let m_small = config.law.small_mean();
    let mut v = PathEnsemble::zeroed(grid, paths, 1, seed, "levy-driver".to_string())?;
    let mut m = PathEnsemble::zeroed(grid, paths, 1, seed, "levy-martingale".to_string())?;
    let mut a = PathEnsemble::zeroed(grid, paths, 1, seed, "levy-variation".to_string())?;
    let scale = libm::sqrt(dt);
    let mut small_inc = vec![0.0f64; steps + 1];
    let mut large_inc = vec![0.0f64; steps + 1];
    for p in 0..paths {
        let mut gauss = Stream::new(StreamKey::new(seed, "levy-gauss", p as u64));
        let mut jumps = Stream::new(StreamKey::new(seed, "levy-jumps", p as u64));
        small_inc.iter_mut().for_each(|x| *x = 0.0);
        large_inc.iter_mut().for_each(|x| *x = 0.0);
        if config.rate > 0.0 {
            let mut t = 0.0;
            loop {
                t += -libm::log(jumps.next_uniform()) / config.rate;
                if t > grid.horizon() {
                    break;
                }
                let size = config.law.sample(jumps.next_uniform());
                let idx = (libm::ceil(t / dt) as usize).clamp(1, steps);
                if size.abs() <= SMALL_JUMP_CUTOFF {
                    small_inc[idx] += size;
                } else {
                    large_inc[idx] += size;
                }
            }
        }
        let mut w = 0.0;
        let mut small_sum = 0.0;
        let mut large_sum = 0.0;
        for k in 0..=steps {
            if k > 0 {
                w += scale * gauss.next_gaussian();
                small_sum += small_inc[k];
                large_sum += large_inc[k];
            }
            let t_k = grid.point(k);
            let comp = config.rate * m_small * t_k;
            let m_k = config.diffusion * w + small_sum - comp;
            let a_k = config.drift * t_k + comp + large_sum;
            m.set(p, k, 0, m_k);
            a.set(p, k, 0, a_k);
            v.set(p, k, 0, m_k + a_k);
        }
    }
    let mut tau = Vec::with_capacity(LOCALIZER_LEVELS);
    let decomp_view = SemimartingaleDecomp {
        m,
        a,
        tau: Vec::new(),
    };
    for level in 1..=LOCALIZER_LEVELS {
        let row: Vec<f64> = (0..paths)
            .map(|p| decomp_view.tau_at(level as f64, p))
            .collect();
        tau.push(row);
    }
    let decomp = SemimartingaleDecomp { tau, ..decomp_view };
    Ok((v, decomp))
}
