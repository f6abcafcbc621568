//! Ensemble persistence: one CSV of values per component plus a shared
//! sidecar holding the provenance needed to rebuild or verify the run.

use std::path::{Path, PathBuf};

use problab_core::paths::{PathEnsemble, TimeGrid};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

pub const ENSEMBLE_SCHEMA: &str = "problab/ensemble/1";

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ComponentMeta {
    pub file: String,
    pub dims: usize,
    pub purpose: String,
}

/// Sidecar for one simulation run covering both stored components.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct EnsembleMeta {
    pub schema: String,
    pub name: String,
    /// Hash of the model specification that produced the run.
    pub spec_hash: String,
    pub model: Value,
    pub horizon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
    pub x: ComponentMeta,
    pub y: ComponentMeta,
    pub summary: Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

pub fn write_ensemble_csv(path: &Path, e: &PathEnsemble) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)
        .map_err(|err| CliError::usage(format!("cannot write {}: {err}", path.display())))?;
    w.write_record(["path", "step", "dim", "value"])
        .map_err(CliError::io)?;
    for p in 0..e.paths() {
        for k in 0..e.grid().points() {
            for d in 0..e.dims() {
                w.serialize((p, k, d, e.value(p, k, d)))
                    .map_err(CliError::io)?;
            }
        }
    }
    w.flush()
        .map_err(|err| CliError::usage(format!("cannot flush {}: {err}", path.display())))?;
    Ok(())
}

fn read_ensemble_csv(
    path: &Path,
    grid: TimeGrid,
    paths: usize,
    dims: usize,
    seed: u64,
    purpose: &str,
) -> Result<PathEnsemble, CliError> {
    let mut r = csv::Reader::from_path(path)
        .map_err(|err| CliError::usage(format!("cannot read {}: {err}", path.display())))?;
    let expected = paths * grid.points() * dims;
    let mut values = vec![0.0f64; expected];
    let mut seen = 0usize;
    for row in r.deserialize::<(usize, usize, usize, f64)>() {
        let (p, k, d, v) =
            row.map_err(|err| CliError::usage(format!("{}: bad row: {err}", path.display())))?;
        if p >= paths || k >= grid.points() || d >= dims {
            return Err(CliError::usage(format!(
                "{}: index ({p},{k},{d}) outside the declared shape",
                path.display()
            )));
        }
        values[(p * grid.points() + k) * dims + d] = v;
        seen += 1;
    }
    if seen != expected {
        return Err(CliError::usage(format!(
            "{}: {seen} rows, expected {expected}",
            path.display()
        )));
    }
    PathEnsemble::from_raw(grid, paths, dims, values, seed, purpose.to_string())
        .map_err(|err| CliError::usage(format!("{}: {err}", path.display())))
}

pub fn write_meta(path: &Path, meta: &EnsembleMeta) -> Result<(), CliError> {
    crate::report::write_json(path, meta)
}

pub fn read_meta(path: &Path) -> Result<EnsembleMeta, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| CliError::usage(format!("cannot read {}: {err}", path.display())))?;
    let meta: EnsembleMeta = serde_json::from_str(&text)
        .map_err(|err| CliError::usage(format!("{} does not parse: {err}", path.display())))?;
    if meta.schema != ENSEMBLE_SCHEMA {
        return Err(CliError::usage(format!(
            "{}: schema {:?}, expected {ENSEMBLE_SCHEMA:?}",
            path.display(),
            meta.schema
        )));
    }
    Ok(meta)
}

/// A `meta.json#x` or `meta.json#y` reference from a diagnose job.
pub struct ComponentRef {
    pub meta_path: PathBuf,
    pub component: char,
}

pub fn parse_component_ref(spec: &str) -> Result<ComponentRef, CliError> {
    let (file, frag) = spec
        .rsplit_once('#')
        .ok_or_else(|| CliError::usage(format!("{spec:?}: expected path#x or path#y")))?;
    let component = match frag {
        "x" => 'x',
        "y" => 'y',
        other => {
            return Err(CliError::usage(format!(
                "{spec:?}: unknown component {other:?}, expected x or y"
            )))
        }
    };
    Ok(ComponentRef {
        meta_path: PathBuf::from(file),
        component,
    })
}

/// Loads one stored component, carrying the sidecar along for provenance
/// reporting.
pub fn load_component(r: &ComponentRef) -> Result<(EnsembleMeta, PathEnsemble), CliError> {
    let meta = read_meta(&r.meta_path)?;
    let grid = TimeGrid::new(meta.horizon, meta.steps)
        .map_err(|err| CliError::usage(format!("{}: {err}", r.meta_path.display())))?;
    let comp = if r.component == 'x' { &meta.x } else { &meta.y };
    let dir = r.meta_path.parent().unwrap_or(Path::new("."));
    let csv_path = dir.join(&comp.file);
    let e = read_ensemble_csv(&csv_path, grid, meta.paths, comp.dims, meta.seed, &comp.purpose)?;
    Ok((meta, e))
}
