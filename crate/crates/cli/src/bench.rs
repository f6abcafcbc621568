//! Resolution-ladder benches: strong Euler error against a fine reference,
//! a pass-through integrand whose ladder is exactly zero, and the
//! reflection pair whose copy gap refuses to decay.

use serde_json::json;

use problab_core::diagnostics::{
    strong_copy_test, uniqueness_probe, ProbeTable, StreamSpec, TanakaSolver,
};
use problab_core::paths::{
    brownian, euler_ito, euler_semimartingale, mean_sup_distance, Integrand, ItoModel,
    PathEnsemble, PathView, TimeGrid,
};

use crate::config::{BenchJob, OutputFormat, Resolved};
use crate::report::write_json;
use crate::CliError;

const X0: f64 = 0.2;

/// Sine-modulated diffusion, so the strong rate stays at one half rather
/// than the order-one rate of additive noise.
struct BenchSde;

impl ItoModel for BenchSde {
    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0 - x[0];
    }

    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0 + 0.5 * x[0].sin();
    }
}

struct UnitIntegrand;

impl Integrand for UnitIntegrand {
    fn dim(&self) -> usize {
        1
    }

    fn driver_dim(&self) -> usize {
        1
    }

    fn evaluate(&self, _x: &PathView<'_>, _t: f64, out: &mut [f64]) {
        out[0] = 1.0;
    }
}

fn table_from_rows(ladder: &[usize], rows: &[(usize, f64)]) -> Result<ProbeTable, CliError> {
    uniqueness_probe(ladder, |n| {
        Ok(rows
            .iter()
            .find(|&&(m, _)| m == n)
            .map(|&(_, e)| e)
            .unwrap_or(f64::NAN))
    })
    .map_err(CliError::check)
}

fn euler_strong(resolved: &Resolved, ladder: &[usize], fine: Option<usize>) -> Result<ProbeTable, CliError> {
    let max_n = *ladder.iter().max().unwrap();
    let fine = fine.unwrap_or(4 * max_n);
    for &n in ladder {
        if fine % n != 0 {
            return Err(CliError::usage(format!(
                "rung {n} does not divide the fine grid size {fine}"
            )));
        }
    }
    let grid = TimeGrid::new(resolved.horizon, fine).map_err(CliError::check)?;
    let w = brownian(grid, resolved.paths, 1, resolved.seed).map_err(CliError::check)?;
    let x_fine = euler_ito(&BenchSde, &[X0], &w).map_err(CliError::check)?;
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let factor = fine / n;
        let wc = w.restrict_every(factor).map_err(CliError::check)?;
        let xc = euler_ito(&BenchSde, &[X0], &wc).map_err(CliError::check)?;
        let rc = x_fine.restrict_every(factor).map_err(CliError::check)?;
        let e = mean_sup_distance(&xc, &rc).map_err(CliError::check)?;
        rows.push((n, e));
    }
    table_from_rows(ladder, &rows)
}

fn flat_driver(resolved: &Resolved, ladder: &[usize]) -> Result<ProbeTable, CliError> {
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let grid = TimeGrid::new(resolved.horizon, n).map_err(CliError::check)?;
        let v = brownian(grid.clone(), resolved.paths, 1, resolved.seed).map_err(CliError::check)?;
        let u = PathEnsemble::zeroed(grid.clone(), resolved.paths, 1, resolved.seed, "flat-u".to_string())
            .map_err(CliError::check)?;
        let x = euler_semimartingale(&UnitIntegrand, &u, &v).map_err(CliError::check)?;
        let mut target =
            PathEnsemble::zeroed(grid, resolved.paths, 1, resolved.seed, "flat-target".to_string())
                .map_err(CliError::check)?;
        for p in 0..resolved.paths {
            let mut acc = 0.0;
            for k in 0..target.grid().steps() {
                acc += v.value(p, k + 1, 0) - v.value(p, k, 0);
                target.set(p, k + 1, 0, acc);
            }
        }
        let e = mean_sup_distance(&x, &target).map_err(CliError::check)?;
        rows.push((n, e));
    }
    table_from_rows(ladder, &rows)
}

fn tanaka(resolved: &Resolved, ladder: &[usize]) -> Result<ProbeTable, CliError> {
    let mut rows = Vec::with_capacity(ladder.len());
    for &n in ladder {
        let grid = TimeGrid::new(resolved.horizon, n).map_err(CliError::check)?;
        let y = brownian(grid, resolved.paths, 1, resolved.seed).map_err(CliError::check)?;
        let report = strong_copy_test(
            &TanakaSolver,
            &y,
            resolved.seed,
            StreamSpec::independent("bench-tanaka-a"),
            StreamSpec::independent("bench-tanaka-b"),
        )
        .map_err(CliError::check)?;
        rows.push((n, report.statistic));
    }
    table_from_rows(ladder, &rows)
}

pub fn run(resolved: &Resolved) -> Result<bool, CliError> {
    let job = resolved
        .config
        .bench
        .as_ref()
        .ok_or_else(|| CliError::usage("config has no bench section"))?;
    let ladder = job.ladder();
    if ladder.len() < 3 {
        return Err(CliError::usage("bench ladder needs at least three rungs"));
    }
    if ladder.iter().any(|&n| n == 0) {
        return Err(CliError::usage("bench ladder rungs must be positive"));
    }
    let started = std::time::Instant::now();
    let (job_id, table, expect_slope) = match job {
        BenchJob::EulerStrong {
            ladder,
            fine,
            expect_slope,
        } => ("euler-strong", euler_strong(resolved, ladder, *fine)?, *expect_slope),
        BenchJob::FlatDriver { ladder } => ("flat-driver", flat_driver(resolved, ladder)?, None),
        BenchJob::Tanaka {
            ladder,
            expect_slope,
        } => ("tanaka", tanaka(resolved, ladder)?, *expect_slope),
    };
    let pass = match (job, expect_slope, table.log_slope) {
        (BenchJob::FlatDriver { .. }, _, _) => table.rows.iter().all(|&(_, e)| e == 0.0),
        (_, Some((lo, hi)), Some(slope)) => lo <= slope && slope <= hi,
        (_, Some(_), None) => false,
        (_, None, _) => true,
    };
    let name = &resolved.config.name;
    let doc = json!({
        "schema": "problab/bench/1",
        "name": name,
        "job": job_id,
        "seed": resolved.seed,
        "paths": resolved.paths,
        "horizon": resolved.horizon,
        "rows": table.rows.iter().map(|&(n, e)| json!({"n": n, "error": e})).collect::<Vec<_>>(),
        "log_slope": table.log_slope,
        "expected_slope": expect_slope.map(|(lo, hi)| json!([lo, hi])),
        "pass": pass,
    });
    let json_path = resolved.out_dir.join(format!("{name}.bench.json"));
    write_json(&json_path, &doc)?;
    if resolved.format == OutputFormat::Csv {
        let csv_path = resolved.out_dir.join(format!("{name}.bench.csv"));
        let file = std::fs::File::create(&csv_path)
            .map_err(|err| CliError::usage(format!("cannot write {}: {err}", csv_path.display())))?;
        let mut wtr = csv::Writer::from_writer(file);
        wtr.write_record(["n", "error"]).map_err(CliError::io)?;
        for &(n, e) in &table.rows {
            wtr.serialize((n, e)).map_err(CliError::io)?;
        }
        wtr.flush()
            .map_err(|err| CliError::usage(format!("cannot flush {}: {err}", csv_path.display())))?;
    }
    eprintln!(
        "bench {job_id}: {} rungs in {:.2?} -> {}",
        table.rows.len(),
        started.elapsed(),
        json_path.display()
    );
    Ok(pass)
}
