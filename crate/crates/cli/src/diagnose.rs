//! Leak diagnostics over recorded runs: load two stored components, regress
//! bounded output functionals on stage information with and without the
//! solution features, and gate the exit code on the verdict.

use serde_json::{json, Value};

use problab_core::diagnostics::{
    compat_test, default_h_set, AlphaFeatures, AlphaSpec, GapReport, TestConfig,
};

use crate::config::{AlphaMode, Expectation, OutputFormat, Resolved, TestTuning};
use crate::ensemble_io::{load_component, parse_component_ref, ComponentRef, EnsembleMeta};
use crate::report::write_json;
use crate::CliError;

fn test_config(t: &TestTuning) -> TestConfig {
    let mut cfg = TestConfig::default();
    if let Some(v) = t.lambda {
        cfg.lambda = v;
    }
    if let Some(v) = t.degree {
        cfg.degree = v;
    }
    if let Some(v) = t.split {
        cfg.split = v;
    }
    if let Some(v) = t.bootstrap {
        cfg.bootstrap = v;
    }
    if let Some(v) = t.multiplier {
        cfg.multiplier = v;
    }
    cfg
}

fn component_provenance(r: &ComponentRef, meta: &EnsembleMeta) -> Value {
    let component = match r.component {
        'x' => &meta.x,
        _ => &meta.y,
    };
    json!({
        "meta": r.meta_path.display().to_string(),
        "component": r.component.to_string(),
        "file": component.file,
        "purpose": component.purpose,
        "spec_hash": meta.spec_hash,
    })
}

fn entries_json(report: &GapReport) -> Vec<Value> {
    report
        .entries
        .iter()
        .map(|e| {
            json!({
                "alpha": e.alpha,
                "h_id": e.h_id,
                "mse_y": e.mse_y,
                "mse_xy": e.mse_xy,
                "gap": e.gap,
                "se": e.se,
                "ci_lo": e.ci_lo,
                "ci_hi": e.ci_hi,
                "reject": e.reject,
                "degenerate": e.degenerate,
            })
        })
        .collect()
}

fn write_entries_csv(path: &std::path::Path, report: &GapReport) -> Result<(), CliError> {
    let file = std::fs::File::create(path)
        .map_err(|err| CliError::usage(format!("cannot write {}: {err}", path.display())))?;
    let mut wtr = csv::Writer::from_writer(file);
    wtr.write_record([
        "alpha", "h_id", "mse_y", "mse_xy", "gap", "se", "ci_lo", "ci_hi", "decision",
        "degenerate",
    ])
    .map_err(CliError::io)?;
    for e in &report.entries {
        let decision = if e.reject { "reject" } else { "pass" };
        wtr.serialize((
            &e.alpha,
            &e.h_id,
            e.mse_y,
            e.mse_xy,
            e.gap,
            e.se,
            e.ci_lo,
            e.ci_hi,
            decision,
            e.degenerate,
        ))
        .map_err(CliError::io)?;
    }
    wtr.flush()
        .map_err(|err| CliError::usage(format!("cannot flush {}: {err}", path.display())))?;
    Ok(())
}

pub fn run(resolved: &Resolved) -> Result<bool, CliError> {
    let job = resolved
        .config
        .diagnose
        .as_ref()
        .ok_or_else(|| CliError::usage("config has no diagnose section"))?;
    if job.alphas.is_empty() {
        return Err(CliError::usage("diagnose needs at least one stage"));
    }
    let started = std::time::Instant::now();
    let mut x_ref = parse_component_ref(&job.x)?;
    let mut y_ref = parse_component_ref(&job.y)?;
    for r in [&mut x_ref, &mut y_ref] {
        if r.meta_path.is_relative() {
            r.meta_path = resolved.config_dir.join(&r.meta_path);
        }
    }
    let (x_meta, x) = load_component(&x_ref)?;
    let (y_meta, y) = load_component(&y_ref)?;
    if !x.same_provenance(&y) {
        return Err(CliError::usage(
            "x and y come from different runs (grid, seed, or path count differ)",
        ));
    }
    let alphas: Vec<AlphaSpec> = job
        .alphas
        .iter()
        .map(|a| AlphaSpec {
            label: a.label.clone(),
            t: a.t,
            mode: match a.mode {
                AlphaMode::Temporal { m } => AlphaFeatures::Temporal { m },
                AlphaMode::Rc { eps, r, m, g_degree } => AlphaFeatures::Rc { eps, r, m, g_degree },
            },
        })
        .collect();
    let cfg = test_config(&job.test);
    let hs = default_h_set();
    let report = compat_test(&x, &y, &alphas, &hs, &cfg, resolved.seed).map_err(CliError::check)?;
    let expected = job.expect.map(|e| match e {
        Expectation::Pass => "pass",
        Expectation::Reject => "reject",
    });
    let matches = expected.map(|e| (e == "pass") == report.pass);
    let name = &resolved.config.name;
    let doc = json!({
        "schema": "problab/gap/1",
        "name": name,
        "seed": resolved.seed,
        "paths": x.paths(),
        "steps": x.grid().steps(),
        "x": component_provenance(&x_ref, &x_meta),
        "y": component_provenance(&y_ref, &y_meta),
        "multiplier": report.multiplier,
        "entries": entries_json(&report),
        "pass": report.pass,
        "expected": expected,
        "verdict_matches_expectation": matches,
    });
    let json_path = resolved.out_dir.join(format!("{name}.gap.json"));
    write_json(&json_path, &doc)?;
    if resolved.format == OutputFormat::Csv {
        write_entries_csv(&resolved.out_dir.join(format!("{name}.gap.csv")), &report)?;
    }
    eprintln!(
        "diagnose: {} pairs tested in {:.2?} -> {}",
        report.entries.len(),
        started.elapsed(),
        json_path.display()
    );
    Ok(matches.unwrap_or(true))
}
