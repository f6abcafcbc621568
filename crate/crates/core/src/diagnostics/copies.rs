//! Detects whether two solutions built from the same driver but
//! independent auxiliary randomness coincide pathwise, and probes how the
//! discrepancy scales with grid refinement.

use alloc::vec;
use alloc::vec::Vec;

use crate::paths::{PathEnsemble, PathError, TimeGrid};
use crate::stream::{Stream, StreamKey};

use super::DiagError;

/// Names one source of auxiliary randomness. With `antithetic` set the
/// stream mirrors its draws, which pins the auxiliary variables of the two
/// runs to opposite extremes instead of sampling them independently.
#[derive(Clone, Copy, Debug)]
pub struct StreamSpec {
    pub purpose: &'static str,
    pub antithetic: bool,
}

impl StreamSpec {
    pub fn independent(purpose: &'static str) -> Self {
        StreamSpec {
            purpose,
            antithetic: false,
        }
    }

    pub fn antithetic(purpose: &'static str) -> Self {
        StreamSpec {
            purpose,
            antithetic: true,
        }
    }
}

/// Auxiliary randomness handed to a solver, optionally mirrored.
#[derive(Clone, Debug)]
pub struct AuxStream {
    stream: Stream,
    antithetic: bool,
}

impl AuxStream {
    pub fn new(key: StreamKey, antithetic: bool) -> Self {
        AuxStream {
            stream: Stream::new(key),
            antithetic,
        }
    }

    pub fn uniform(&mut self) -> f64 {
        let u = self.stream.next_uniform();
        if self.antithetic {
            1.0 - u
        } else {
            u
        }
    }

    pub fn gaussian(&mut self) -> f64 {
        let g = self.stream.next_gaussian();
        if self.antithetic {
            -g
        } else {
            g
        }
    }

    pub fn below(&mut self, n: u64) -> u64 {
        let v = self.stream.next_below(n);
        if self.antithetic {
            n - 1 - v
        } else {
            v
        }
    }
}

/// A solution map fed one driver path plus auxiliary randomness. `driver`
/// and `out` are step-major with interleaved coordinates; the solver fills
/// all of `out` including the initial state.
pub trait DrivenSolver {
    fn dims(&self) -> usize;
    fn solve_path(
        &self,
        grid: &TimeGrid,
        driver: &[f64],
        driver_dims: usize,
        aux: &mut AuxStream,
        out: &mut [f64],
    ) -> Result<(), PathError>;
}

/// Mean and worst sup-distance between the two runs.
#[derive(Clone, Copy, Debug)]
pub struct CopyReport {
    pub statistic: f64,
    pub per_path_max: f64,
}

/// Solves every driver path twice, once per auxiliary spec, and measures
/// the gap. A solver that ignores its auxiliary stream yields a statistic
/// of exactly zero; a positive statistic certifies that the driver does not
/// determine the solution.
pub fn strong_copy_test(
    solver: &impl DrivenSolver,
    driver: &PathEnsemble,
    seed: u64,
    spec_a: StreamSpec,
    spec_b: StreamSpec,
) -> Result<CopyReport, DiagError> {
    let points = driver.grid().points();
    let dims = solver.dims();
    let mut out_a = vec![0.0; points * dims];
    let mut out_b = vec![0.0; points * dims];
    let mut total = 0.0;
    let mut worst = 0.0f64;
    for p in 0..driver.paths() {
        let mut aux_a = AuxStream::new(
            StreamKey::new(seed, spec_a.purpose, p as u64),
            spec_a.antithetic,
        );
        let mut aux_b = AuxStream::new(
            StreamKey::new(seed, spec_b.purpose, p as u64),
            spec_b.antithetic,
        );
        let path = driver.path(p);
        solver.solve_path(driver.grid(), path, driver.dims(), &mut aux_a, &mut out_a)?;
        solver.solve_path(driver.grid(), path, driver.dims(), &mut aux_b, &mut out_b)?;
        let mut sup = 0.0f64;
        for (a, b) in out_a.iter().zip(out_b.iter()) {
            sup = sup.max((a - b).abs());
        }
        total += sup;
        worst = worst.max(sup);
    }
    Ok(CopyReport {
        statistic: total / driver.paths() as f64,
        per_path_max: worst,
    })
}

/// The reflection construction: the driver's coordinate 0 minus its running
/// minimum, with an overall sign drawn from one auxiliary coin. Both signed
/// versions solve the same driven equation, so the driver alone cannot pin
/// the solution down.
pub struct TanakaSolver;

impl DrivenSolver for TanakaSolver {
    fn dims(&self) -> usize {
        1
    }

    fn solve_path(
        &self,
        grid: &TimeGrid,
        driver: &[f64],
        driver_dims: usize,
        aux: &mut AuxStream,
        out: &mut [f64],
    ) -> Result<(), PathError> {
        if driver_dims == 0 || driver.len() != grid.points() * driver_dims {
            return Err(PathError::DimensionMismatch {
                expected: grid.points() * driver_dims.max(1),
                got: driver.len(),
            });
        }
        let sign = if aux.uniform() < 0.5 { 1.0 } else { -1.0 };
        let mut running_min = driver[0];
        for k in 0..grid.points() {
            let y = driver[k * driver_dims];
            running_min = running_min.min(y);
            out[k] = sign * (y - running_min);
        }
        Ok(())
    }
}

/// Discrepancy per ladder rung plus the fitted log-log slope. The slope is
/// `None` when any rung is exactly zero, the signature of a pathwise-unique
/// scheme.
#[derive(Clone, Debug)]
pub struct ProbeTable {
    pub rows: Vec<(usize, f64)>,
    pub log_slope: Option<f64>,
}

/// Evaluates a caller-supplied discrepancy at each grid size and fits
/// `ln err` against `ln n`. A slope near -1/2 is the strong Euler rate; a
/// flat positive plateau means refinement does not reconcile the copies.
pub fn uniqueness_probe(
    ladder: &[usize],
    mut pair_at: impl FnMut(usize) -> Result<f64, DiagError>,
) -> Result<ProbeTable, DiagError> {
    if ladder.len() < 2 {
        return Err(DiagError::LadderTooShort);
    }
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        rows.push((n, pair_at(n)?));
    }
    let log_slope = if rows.iter().all(|&(_, e)| e > 0.0) {
        let xs: Vec<f64> = rows.iter().map(|&(n, _)| libm::log(n as f64)).collect();
        let ys: Vec<f64> = rows.iter().map(|&(_, e)| libm::log(e)).collect();
        let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
        let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
        let sxy: f64 = xs
            .iter()
            .zip(ys.iter())
            .map(|(x, y)| (x - xbar) * (y - ybar))
            .sum();
        Some(sxy / sxx)
    } else {
        None
    };
    Ok(ProbeTable { rows, log_slope })
}
