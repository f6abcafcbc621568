//! Run configuration: a single versioned JSON document per invocation,
//! holding the job section for whichever subcommand is being run plus the
//! knobs every subcommand shares.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA: &str = "problab/1";

/// Directory fallback when neither the flag nor the config names one.
pub const OUT_DIR_ENV: &str = "PROBLAB_OUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: String,
    /// Identifier used to derive every output file name.
    pub name: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub paths: Option<usize>,
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default)]
    pub horizon: Option<f64>,
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
    #[serde(default)]
    pub exact: Option<ExactJob>,
    #[serde(default)]
    pub simulate: Option<SimulateJob>,
    #[serde(default)]
    pub diagnose: Option<DiagnoseJob>,
    #[serde(default)]
    pub bench: Option<BenchJob>,
}

/// Trial counts for the randomized parts of the exact suite.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExactJob {
    #[serde(default = "default_families")]
    pub families: u64,
    #[serde(default = "default_hundred")]
    pub coupling_trials: u64,
    #[serde(default = "default_hundred")]
    pub dual_trials: u64,
    #[serde(default = "default_hundred")]
    pub model_trials: u64,
    #[serde(default = "default_mixtures")]
    pub mixture_trials: u64,
}

fn default_families() -> u64 {
    500
}

fn default_hundred() -> u64 {
    100
}

fn default_mixtures() -> u64 {
    25
}

impl Default for ExactJob {
    fn default() -> Self {
        ExactJob {
            families: default_families(),
            coupling_trials: default_hundred(),
            dual_trials: default_hundred(),
            model_trials: default_hundred(),
            mixture_trials: default_mixtures(),
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateJob {
    pub model: ModelSpec,
}

/// The solver zoo reachable from the command line. Every model emits a
/// solution ensemble and a driver ensemble sharing one provenance.
#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "model", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelSpec {
    /// The driver itself, as both solution and driver.
    Brownian { dims: usize },
    /// dX = mu X dt + sigma X dW.
    Gbm { x0: f64, mu: f64, sigma: f64 },
    /// Solution frozen at the driver's terminal value: an anticipating
    /// control that compatibility diagnostics must reject.
    Anticipating {},
    /// Jump-diffusion driver with its decomposition identity summarized.
    Levy {
        rate: f64,
        drift: f64,
        diffusion: f64,
        /// Jump sizes with probabilities, e.g. [[1.0, 0.5], [-1.0, 0.5]].
        jumps: Vec<(f64, f64)>,
    },
    /// dX = (a X + b m(t)) dt + sigma dW with m the population mean.
    MckeanLinear { x0: f64, a: f64, b: f64, sigma: f64 },
    /// One-clock time change with rate 1 + sin^2(x).
    TimeChangeSin {},
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnoseJob {
    /// `path/to/run.meta.json#x` or `#y`: which stored component to load.
    pub x: String,
    pub y: String,
    pub alphas: Vec<AlphaConfig>,
    #[serde(default)]
    pub expect: Option<Expectation>,
    #[serde(default)]
    pub test: TestTuning,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expectation {
    Pass,
    Reject,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum AlphaMode {
    Temporal {
        #[serde(default = "default_m")]
        m: usize,
    },
    Rc {
        eps: f64,
        r: f64,
        #[serde(default = "default_m")]
        m: usize,
        #[serde(default = "default_g_degree")]
        g_degree: usize,
    },
}

fn default_m() -> usize {
    2
}

fn default_g_degree() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize)]
pub struct AlphaConfig {
    pub label: String,
    pub t: f64,
    #[serde(flatten)]
    pub mode: AlphaMode,
}

/// Regression hyperparameters; absent fields keep the library defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestTuning {
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub degree: Option<usize>,
    #[serde(default)]
    pub split: Option<f64>,
    #[serde(default)]
    pub bootstrap: Option<usize>,
    #[serde(default)]
    pub multiplier: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "job", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BenchJob {
    /// Strong-error refinement ladder against a fine-grid reference.
    EulerStrong {
        ladder: Vec<usize>,
        #[serde(default)]
        fine: Option<usize>,
        #[serde(default)]
        expect_slope: Option<(f64, f64)>,
    },
    /// Integrand-free scheme: the driver passes through unchanged, so the
    /// ladder is identically zero.
    FlatDriver { ladder: Vec<usize> },
    /// Reflection pair with independent sign coins: the gap statistic
    /// plateaus instead of decaying.
    Tanaka {
        ladder: Vec<usize>,
        #[serde(default)]
        expect_slope: Option<(f64, f64)>,
    },
}

impl BenchJob {
    pub fn ladder(&self) -> &[usize] {
        match self {
            BenchJob::EulerStrong { ladder, .. }
            | BenchJob::FlatDriver { ladder }
            | BenchJob::Tanaka { ladder, .. } => ladder,
        }
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub steps: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// A fully resolved run: config plus overrides plus environment.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: RunConfig,
    pub seed: u64,
    pub paths: usize,
    pub steps: usize,
    pub horizon: f64,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Directory of the config file; relative references inside the config
    /// resolve against it, so a config directory can move as a unit.
    pub config_dir: PathBuf,
}

pub fn load(path: &Path, overrides: &Overrides) -> Result<Resolved, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let config: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("config {} does not parse: {e}", path.display())))?;
    if config.schema != SCHEMA {
        return Err(CliError::usage(format!(
            "config schema is {:?}, this build expects {SCHEMA:?}",
            config.schema
        )));
    }
    if config.name.is_empty()
        || !config
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return Err(CliError::usage(
            "name must be nonempty and use only letters, digits, '-', '_'".to_string(),
        ));
    }
    let seed = overrides.seed.or(config.seed).unwrap_or(1);
    let paths = overrides.paths.or(config.paths).unwrap_or(1000);
    let steps = overrides.steps.or(config.steps).unwrap_or(128);
    let horizon = config.horizon.unwrap_or(1.0);
    if paths == 0 || steps == 0 {
        return Err(CliError::usage("paths and steps must be positive".to_string()));
    }
    if !(horizon > 0.0) {
        return Err(CliError::usage("horizon must be positive".to_string()));
    }
    let out_dir = overrides
        .out
        .clone()
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let format = overrides.format.or(config.format).unwrap_or(OutputFormat::Csv);
    let config_dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    Ok(Resolved {
        config,
        seed,
        paths,
        steps,
        horizon,
        out_dir,
        format,
        config_dir,
    })
}
