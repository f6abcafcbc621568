//! The regression form of the compatibility check: does adding the
//! solution's past improve prediction of an output functional beyond what
//! the output's own past achieves?

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::paths::{PathEnsemble, TimeGrid};
use crate::stream::{Stream, StreamKey};

use super::features::{features_rc, features_temporal, FeatureMatrix, RcSide};
use super::ridge::{predict, ridge_fit};
use super::DiagError;

/// Upper-tail mass of the standard normal at z.
fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / libm::sqrt(2.0))
}

/// Raises the base rejection threshold so that the family-wise tail mass
/// over `tests` comparisons stays at the single-test level.
pub fn bonferroni_multiplier(base: f64, tests: usize) -> f64 {
    if tests <= 1 {
        return base;
    }
    let p = normal_upper_tail(base) / tests as f64;
    crate::stream::inverse_normal_cdf(1.0 - p)
}

/// Fit hyperparameters shared by all regression diagnostics.
#[derive(Clone, Debug)]
pub struct TestConfig {
    pub lambda: f64,
    pub degree: usize,
    pub split: f64,
    pub bootstrap: usize,
    pub multiplier: f64,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            lambda: 1e-6,
            degree: 2,
            split: 0.5,
            bootstrap: 200,
            multiplier: 3.0,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<(), DiagError> {
        if !(self.lambda > 0.0) {
            return Err(DiagError::InvalidConfig("ridge penalty must be positive"));
        }
        if !(self.split > 0.0 && self.split < 1.0) {
            return Err(DiagError::InvalidConfig("split must lie strictly in (0, 1)"));
        }
        if self.bootstrap < 100 {
            return Err(DiagError::InvalidConfig("need at least 100 bootstrap replicates"));
        }
        if self.degree == 0 || self.degree > 2 {
            return Err(DiagError::InvalidConfig("polynomial degree must be 1 or 2"));
        }
        Ok(())
    }
}

/// One (stage, test-functional) comparison.
#[derive(Clone, Debug)]
pub struct GapEntry {
    pub alpha: String,
    pub h_id: String,
    pub mse_y: f64,
    pub mse_xy: f64,
    pub gap: f64,
    pub se: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub reject: bool,
    pub degenerate: bool,
}

/// All comparisons of one run plus the family-wise threshold used.
#[derive(Clone, Debug)]
pub struct GapReport {
    pub entries: Vec<GapEntry>,
    pub multiplier: f64,
    pub pass: bool,
}

/// Compares eval-split prediction errors for `h` under the nested feature
/// sets. `feat_xy` must contain `feat_y`'s columns (build it by hstack), so
/// the population gap is nonnegative; the sample gap may still come out
/// slightly negative and is reported as computed.
///
/// The first `split` fraction of rows trains both fits; the rest scores
/// them. The bootstrap resamples eval rows (pairing the two error columns)
/// on a stream derived from `seed` and `stream_path`.
pub fn l2_gap(
    h: &[f64],
    feat_xy: &FeatureMatrix,
    feat_y: &FeatureMatrix,
    cfg: &TestConfig,
    multiplier: f64,
    seed: u64,
    stream_path: u64,
    alpha: &str,
    h_id: &str,
) -> Result<GapEntry, DiagError> {
    cfg.validate()?;
    let rows = h.len();
    if feat_xy.rows() != rows || feat_y.rows() != rows {
        return Err(DiagError::LengthMismatch {
            expected: rows,
            got: feat_xy.rows().min(feat_y.rows()),
        });
    }
    let train_n = ((rows as f64) * cfg.split) as usize;
    let eval_n = rows - train_n;
    if eval_n < 50 {
        return Err(DiagError::TooFewRows {
            needed: 50,
            got: eval_n,
        });
    }
    let train: Vec<usize> = (0..train_n).collect();
    let beta_y = ridge_fit(feat_y, h, &train, cfg.lambda)?;
    let beta_xy = ridge_fit(feat_xy, h, &train, cfg.lambda)?;
    let mut err_y = Vec::with_capacity(eval_n);
    let mut err_xy = Vec::with_capacity(eval_n);
    for r in train_n..rows {
        let e_y = h[r] - predict(feat_y, &beta_y, r);
        let e_xy = h[r] - predict(feat_xy, &beta_xy, r);
        err_y.push(e_y * e_y);
        err_xy.push(e_xy * e_xy);
    }
    let mse_y: f64 = err_y.iter().sum::<f64>() / eval_n as f64;
    let mse_xy: f64 = err_xy.iter().sum::<f64>() / eval_n as f64;
    let gap = mse_y - mse_xy;
    let mut stream = Stream::new(StreamKey::new(seed, "gap-bootstrap", stream_path));
    let mut reps = Vec::with_capacity(cfg.bootstrap);
    for _ in 0..cfg.bootstrap {
        let mut sum_y = 0.0;
        let mut sum_xy = 0.0;
        for _ in 0..eval_n {
            let r = stream.next_below(eval_n as u64) as usize;
            sum_y += err_y[r];
            sum_xy += err_xy[r];
        }
        reps.push((sum_y - sum_xy) / eval_n as f64);
    }
    let mean_rep = reps.iter().sum::<f64>() / reps.len() as f64;
    let var = reps
        .iter()
        .map(|g| (g - mean_rep) * (g - mean_rep))
        .sum::<f64>()
        / (reps.len() - 1) as f64;
    let se = libm::sqrt(var);
    // When both fits are essentially exact, the residual gap is ridge
    // shrinkage bias rather than evidence, so gaps below the target's
    // floating-point noise floor never reject.
    let h_scale: f64 = h[train_n..].iter().map(|v| v * v).sum::<f64>() / eval_n as f64;
    let reject = gap > multiplier * se && gap > 1e-9 * h_scale;
    let degenerate = feat_y.max_column_spread() < 1e-12 || feat_xy.max_column_spread() < 1e-12;
    Ok(GapEntry {
        alpha: alpha.to_string(),
        h_id: h_id.to_string(),
        mse_y,
        mse_xy,
        gap,
        se,
        ci_lo: gap - 1.96 * se,
        ci_hi: gap + 1.96 * se,
        reject,
        degenerate,
    })
}

/// How the information at one stage is turned into features.
#[derive(Clone, Debug)]
pub enum AlphaFeatures {
    /// Sampled path values at `m` times up to the stage time.
    Temporal { m: usize },
    /// One-sided window integrals: backward windows on the solution side,
    /// forward windows on the output side.
    Rc {
        eps: f64,
        r: f64,
        m: usize,
        g_degree: usize,
    },
}

/// One stage of the declared structure.
#[derive(Clone, Debug)]
pub struct AlphaSpec {
    pub label: String,
    pub t: f64,
    pub mode: AlphaFeatures,
}

impl AlphaSpec {
    pub fn temporal(label: &str, t: f64, m: usize) -> Self {
        AlphaSpec {
            label: label.to_string(),
            t,
            mode: AlphaFeatures::Temporal { m },
        }
    }
}

/// Bounded functionals of the output path used as regression targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HFunctional {
    /// Sign of the increment over the second half of the horizon.
    TerminalSign,
    /// The same increment clipped to [-1, 1].
    TerminalClip,
    /// Sign of the increment over the first half.
    MidSign,
    /// That increment clipped to [-1, 1].
    MidClip,
}

impl HFunctional {
    pub fn id(&self) -> &'static str {
        match self {
            HFunctional::TerminalSign => "terminal-sign",
            HFunctional::TerminalClip => "terminal-clip",
            HFunctional::MidSign => "mid-sign",
            HFunctional::MidClip => "mid-clip",
        }
    }

    /// Time at which the functional's increment window opens. Stages after
    /// this point already see part of the increment, so the pair is not a
    /// clean prediction problem and `compat_test` skips it.
    pub fn window_start(&self, grid: &TimeGrid) -> f64 {
        match self {
            HFunctional::TerminalSign | HFunctional::TerminalClip => {
                grid.point(grid.steps() / 2)
            }
            HFunctional::MidSign | HFunctional::MidClip => 0.0,
        }
    }

    /// Evaluates the functional on coordinate 0 of each path.
    pub fn values(&self, y: &PathEnsemble) -> Vec<f64> {
        let last = y.grid().steps();
        let mid = last / 2;
        (0..y.paths())
            .map(|p| {
                let incr = match self {
                    HFunctional::TerminalSign | HFunctional::TerminalClip => {
                        y.value(p, last, 0) - y.value(p, mid, 0)
                    }
                    HFunctional::MidSign | HFunctional::MidClip => {
                        y.value(p, mid, 0) - y.value(p, 0, 0)
                    }
                };
                match self {
                    HFunctional::TerminalSign | HFunctional::MidSign => {
                        if incr > 0.0 {
                            1.0
                        } else if incr < 0.0 {
                            -1.0
                        } else {
                            0.0
                        }
                    }
                    HFunctional::TerminalClip | HFunctional::MidClip => incr.clamp(-1.0, 1.0),
                }
            })
            .collect()
    }
}

/// The four default targets: signs and clips of the half-horizon increments.
pub fn default_h_set() -> Vec<HFunctional> {
    alloc::vec![
        HFunctional::TerminalSign,
        HFunctional::TerminalClip,
        HFunctional::MidSign,
        HFunctional::MidClip,
    ]
}

fn stage_features(
    e: &PathEnsemble,
    spec: &AlphaSpec,
    solution_side: bool,
    degree: usize,
) -> Result<FeatureMatrix, DiagError> {
    match &spec.mode {
        AlphaFeatures::Temporal { m } => features_temporal(e, spec.t, *m, degree),
        AlphaFeatures::Rc { eps, r, m, g_degree } => {
            let side = if solution_side {
                RcSide::Backward
            } else {
                RcSide::Forward
            };
            features_rc(e, spec.t, *eps, *r, *m, side, *g_degree, degree)
        }
    }
}

/// Runs the gap comparison for every admissible (stage, functional) pair
/// with a family-wise threshold; passes iff nothing rejects. Pairs whose
/// increment window opens before the stage time are skipped, so with
/// independent-increment outputs a compatible run leaves every tested
/// target conditionally constant, which any feature class represents.
pub fn compat_test(
    x: &PathEnsemble,
    y: &PathEnsemble,
    alphas: &[AlphaSpec],
    hs: &[HFunctional],
    cfg: &TestConfig,
    seed: u64,
) -> Result<GapReport, DiagError> {
    cfg.validate()?;
    if !x.same_provenance(y) {
        return Err(DiagError::ProvenanceMismatch);
    }
    if alphas.is_empty() || hs.is_empty() {
        return Err(DiagError::InvalidConfig("need at least one stage and one target"));
    }
    // Only pairs whose target increment opens at or after the stage time
    // are tested. When the stage already sees part of the increment, the
    // target is partly measurable at the stage, the finite feature class
    // cannot reproduce that knowledge, and any solution features that are
    // nonlinear transforms of the output would close the representation
    // gap and reject a compatible model.
    let tests = alphas
        .iter()
        .map(|spec| {
            hs.iter()
                .filter(|h| spec.t <= h.window_start(y.grid()) + 1e-9)
                .count()
        })
        .sum::<usize>();
    if tests == 0 {
        return Err(DiagError::InvalidConfig(
            "every stage cuts into every target's increment window",
        ));
    }
    let multiplier = bonferroni_multiplier(cfg.multiplier, tests);
    let mut entries = Vec::with_capacity(tests);
    let mut idx = 0u64;
    for spec in alphas {
        let kept: Vec<&HFunctional> = hs
            .iter()
            .filter(|h| spec.t <= h.window_start(y.grid()) + 1e-9)
            .collect();
        if kept.is_empty() {
            continue;
        }
        let feat_y = stage_features(y, spec, false, cfg.degree)?;
        let feat_x = stage_features(x, spec, true, cfg.degree)?;
        let feat_xy = feat_y.hstack(&feat_x)?;
        for h in kept {
            let values = h.values(y);
            let entry = l2_gap(
                &values,
                &feat_xy,
                &feat_y,
                cfg,
                multiplier,
                seed,
                idx,
                &spec.label,
                h.id(),
            )?;
            entries.push(entry);
            idx += 1;
        }
    }
    let pass = entries.iter().all(|e| !e.reject);
    Ok(GapReport {
        entries,
        multiplier,
        pass,
    })
}
