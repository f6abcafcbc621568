//! Model simulation: every model records an (x, y) component pair on one
//! grid with shared provenance, plus a sidecar whose summary states a
//! model-specific consistency check and whether it held.

use serde_json::{json, Value};

use problab_core::paths::{
    brownian, euler_ito, levy_driver, mckean_vlasov, time_change_euler, Empirical, InitialLaw,
    ItoModel, JumpLaw, LevyConfig, MvModel, PathEnsemble, TimeChangeModel, TimeGrid,
};

use crate::config::{ModelSpec, Resolved};
use crate::ensemble_io::{
    sha256_hex, write_ensemble_csv, write_meta, ComponentMeta, EnsembleMeta, ENSEMBLE_SCHEMA,
};
use crate::CliError;

struct Gbm {
    mu: f64,
    sigma: f64,
}

impl ItoModel for Gbm {
    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.mu * x[0];
    }

    fn diffusion(&self, x: &[f64], out: &mut [f64]) {
        out[0] = self.sigma * x[0];
    }
}

struct LinearMeanField {
    a: f64,
    b: f64,
    sigma: f64,
}

impl MvModel for LinearMeanField {
    fn dim(&self) -> usize {
        1
    }

    fn noise_dim(&self) -> usize {
        1
    }

    fn drift(&self, x: &[f64], law: &Empirical<'_>, out: &mut [f64]) {
        out[0] = self.a * x[0] + self.b * law.mean(0);
    }

    fn diffusion(&self, _x: &[f64], _law: &Empirical<'_>, out: &mut [f64]) {
        out[0] = self.sigma;
    }
}

struct SinClock {
    direction: [f64; 1],
}

impl TimeChangeModel for SinClock {
    fn dim(&self) -> usize {
        1
    }

    fn clocks(&self) -> usize {
        1
    }

    fn rate(&self, _k: usize, x: &[f64]) -> f64 {
        1.0 + x[0].sin() * x[0].sin()
    }

    fn direction(&self, _k: usize) -> &[f64] {
        &self.direction
    }

    fn drift(&self, _x: &[f64], out: &mut [f64]) {
        out[0] = 0.0;
    }
}

fn sim_err(err: impl std::fmt::Display) -> CliError {
    CliError::usage(format!("simulation failed: {err}"))
}

/// Sampled mean against the scheme's exact mean, with the allowance sized
/// from the sample itself: four standard errors.
fn mean_summary(e: &PathEnsemble, label: &str, scheme_mean: f64) -> Value {
    let (mean, se) = e.terminal_stats(0);
    json!({
        "check": label,
        "scheme_mean": scheme_mean,
        "sampled_mean": mean,
        "se": se,
        "pass": (mean - scheme_mean).abs() <= 4.0 * se,
    })
}

fn run_model(resolved: &Resolved, spec: &ModelSpec) -> Result<(PathEnsemble, PathEnsemble, Value), CliError> {
    let grid = TimeGrid::new(resolved.horizon, resolved.steps).map_err(sim_err)?;
    let paths = resolved.paths;
    let seed = resolved.seed;
    match spec {
        ModelSpec::Brownian { dims } => {
            if *dims == 0 {
                return Err(CliError::usage("brownian dims must be positive"));
            }
            let w = brownian(grid, paths, *dims, seed).map_err(sim_err)?;
            let (mean, se) = w.terminal_stats(0);
            let summary = json!({
                "check": "terminal mean is zero",
                "sampled_mean": mean,
                "se": se,
                "pass": mean.abs() <= 4.0 * se,
            });
            Ok((w.clone(), w, summary))
        }
        ModelSpec::Gbm { x0, mu, sigma } => {
            let w = brownian(grid.clone(), paths, 1, seed).map_err(sim_err)?;
            let x = euler_ito(&Gbm { mu: *mu, sigma: *sigma }, &[*x0], &w).map_err(sim_err)?;
            let scheme_mean = x0 * (1.0 + mu * grid.dt()).powi(grid.steps() as i32);
            let summary =
                mean_summary(&x, "terminal mean matches the scheme mean", scheme_mean);
            Ok((x, w, summary))
        }
        ModelSpec::Anticipating {} => {
            let w = brownian(grid.clone(), paths, 1, seed).map_err(sim_err)?;
            let mut x = PathEnsemble::zeroed(
                grid.clone(),
                paths,
                1,
                seed,
                "anticipating-terminal".to_string(),
            )
            .map_err(sim_err)?;
            let last = grid.steps();
            for p in 0..paths {
                let terminal = w.value(p, last, 0);
                for k in 0..=last {
                    x.set(p, k, 0, terminal);
                }
            }
            let summary = json!({
                "check": "x holds the driver's terminal value from time zero",
                "pass": true,
            });
            Ok((x, w, summary))
        }
        ModelSpec::Levy {
            rate,
            drift,
            diffusion,
            jumps,
        } => {
            let values: Vec<f64> = jumps.iter().map(|&(v, _)| v).collect();
            let probs: Vec<f64> = jumps.iter().map(|&(_, p)| p).collect();
            let law = if values.is_empty() {
                JumpLaw::point(0.0).map_err(sim_err)?
            } else {
                JumpLaw::new(values, probs).map_err(sim_err)?
            };
            let config = LevyConfig {
                rate: *rate,
                law,
                drift: *drift,
                diffusion: *diffusion,
            };
            let (v, decomp) = levy_driver(&config, grid, paths, seed).map_err(sim_err)?;
            let mut gap = 0.0f64;
            for p in 0..paths {
                for k in 0..=v.grid().steps() {
                    let split = decomp.m.value(p, k, 0) + decomp.a.value(p, k, 0);
                    gap = gap.max((v.value(p, k, 0) - split).abs());
                }
            }
            let summary = json!({
                "check": "driver equals martingale part plus finite variation part",
                "max_gap": gap,
                "localizer_levels": decomp.tau.len(),
                "pass": gap == 0.0,
            });
            Ok((v.clone(), v, summary))
        }
        ModelSpec::MckeanLinear { x0, a, b, sigma } => {
            let model = LinearMeanField {
                a: *a,
                b: *b,
                sigma: *sigma,
            };
            let init = InitialLaw::Point(vec![*x0]);
            let e = mckean_vlasov(&model, &init, paths, grid.clone(), seed).map_err(sim_err)?;
            let growth = 1.0 + (a + b) * grid.dt();
            let scheme_mean = x0 * growth.powi(grid.steps() as i32);
            // The population mean is driven by the averaged noise; its exact
            // standard deviation replaces the cross-sectional standard error,
            // which measures particle spread rather than mean noise.
            let mut var = 0.0;
            for _ in 0..grid.steps() {
                var = var * growth * growth + sigma * sigma * grid.dt() / paths as f64;
            }
            let noise_sd = var.sqrt();
            let (mean, _) = e.terminal_stats(0);
            let summary = json!({
                "check": "population mean matches the deterministic recursion",
                "scheme_mean": scheme_mean,
                "sampled_mean": mean,
                "noise_sd": noise_sd,
                "pass": (mean - scheme_mean).abs() <= 4.0 * noise_sd,
            });
            Ok((e.clone(), e, summary))
        }
        ModelSpec::TimeChangeSin {} => {
            let model = SinClock { direction: [1.0] };
            let out = time_change_euler(&model, &[0.0], grid.clone(), paths, seed).map_err(sim_err)?;
            let dt = grid.dt();
            let mut monotone = true;
            let mut min_rate = f64::INFINITY;
            for p in 0..paths {
                for k in 0..grid.steps() {
                    let inc = out.tau.value(p, k + 1, 0) - out.tau.value(p, k, 0);
                    if inc < 0.0 {
                        monotone = false;
                    }
                    min_rate = min_rate.min(inc / dt);
                }
            }
            let summary = json!({
                "check": "clock is nondecreasing with rate at least one",
                "monotone": monotone,
                "min_rate": min_rate,
                "pass": monotone && min_rate >= 1.0 - 1e-12,
            });
            Ok((out.x.clone(), out.x, summary))
        }
    }
}

pub fn run(resolved: &Resolved) -> Result<bool, CliError> {
    let job = resolved
        .config
        .simulate
        .as_ref()
        .ok_or_else(|| CliError::usage("config has no simulate section"))?;
    let started = std::time::Instant::now();
    let (x, y, summary) = run_model(resolved, &job.model)?;
    let name = &resolved.config.name;
    let x_file = format!("{name}.x.csv");
    let y_file = format!("{name}.y.csv");
    write_ensemble_csv(&resolved.out_dir.join(&x_file), &x)?;
    write_ensemble_csv(&resolved.out_dir.join(&y_file), &y)?;
    let model_value = serde_json::to_value(&job.model)
        .map_err(|err| CliError::usage(format!("model does not serialize: {err}")))?;
    let spec_hash = sha256_hex(
        &serde_json::to_vec(&model_value)
            .map_err(|err| CliError::usage(format!("model does not serialize: {err}")))?,
    );
    let pass = summary
        .get("pass")
        .and_then(Value::as_bool)
        .unwrap_or(false);
    let meta = EnsembleMeta {
        schema: ENSEMBLE_SCHEMA.to_string(),
        name: name.clone(),
        spec_hash,
        model: model_value,
        horizon: resolved.horizon,
        steps: resolved.steps,
        paths: resolved.paths,
        seed: resolved.seed,
        x: ComponentMeta {
            file: x_file,
            dims: x.dims(),
            purpose: x.purpose().to_string(),
        },
        y: ComponentMeta {
            file: y_file,
            dims: y.dims(),
            purpose: y.purpose().to_string(),
        },
        summary,
    };
    let meta_path = resolved.out_dir.join(format!("{name}.meta.json"));
    write_meta(&meta_path, &meta)?;
    eprintln!(
        "simulate: {} paths x {} steps in {:.2?} -> {}",
        resolved.paths,
        resolved.steps,
        started.elapsed(),
        meta_path.display()
    );
    Ok(pass)
}
