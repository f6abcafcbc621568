//! Tests whether a candidate process has uncorrelated increments given the
//! joint past, the sampled analogue of the martingale characterization of
//! compatibility.

use alloc::vec::Vec;

use crate::paths::PathEnsemble;
use crate::stream::{Stream, StreamKey};

use super::features::features_temporal;
use super::gap::TestConfig;
use super::ridge::{predict, ridge_fit};
use super::DiagError;

/// Outcome of both increment checks: the raw mean and the regression of the
/// increment on the joint past.
#[derive(Clone, Debug)]
pub struct MartingaleReport {
    pub mean_stat: f64,
    pub mean_se: f64,
    pub mean_reject: bool,
    /// Eval-split error reduction of the fitted predictor over the constant
    /// one; positive means the past predicts the increment.
    pub explained: f64,
    pub explained_se: f64,
    pub regression_reject: bool,
    /// Intercept first, then the output-side features, then the
    /// solution-side features at the start time.
    pub coefficients: Vec<f64>,
    pub pass: bool,
}

/// Regresses the increment `M(t) - M(s)` (coordinate 0) on temporal
/// features of `y` and `x` at time `s`. If either the plain mean or the
/// explained error reduction clears `multiplier` standard errors, the
/// process fails as a martingale for the joint filtration.
pub fn martingale_test(
    mart: &PathEnsemble,
    x: &PathEnsemble,
    y: &PathEnsemble,
    s: f64,
    t: f64,
    feat_m: usize,
    cfg: &TestConfig,
    seed: u64,
) -> Result<MartingaleReport, DiagError> {
    cfg.validate()?;
    if !mart.same_provenance(x) || !mart.same_provenance(y) {
        return Err(DiagError::ProvenanceMismatch);
    }
    if !(s >= 0.0 && t <= mart.grid().horizon() && s < t) {
        return Err(DiagError::InvalidConfig("need 0 <= s < t <= horizon"));
    }
    let ks = mart.grid().snap_index(s);
    let kt = mart.grid().snap_index(t);
    let n = mart.paths();
    let d: Vec<f64> = (0..n)
        .map(|p| mart.value(p, kt, 0) - mart.value(p, ks, 0))
        .collect();
    let mean_stat = d.iter().sum::<f64>() / n as f64;
    let var = d
        .iter()
        .map(|v| (v - mean_stat) * (v - mean_stat))
        .sum::<f64>()
        / (n - 1) as f64;
    let mean_se = libm::sqrt(var / n as f64);
    let mean_reject = mean_stat.abs() > cfg.multiplier * mean_se;

    let feat_y = features_temporal(y, s, feat_m, cfg.degree)?;
    let feat_x = features_temporal(x, s, feat_m, cfg.degree)?;
    let feats = feat_y.hstack(&feat_x)?;
    let train_n = ((n as f64) * cfg.split) as usize;
    let eval_n = n - train_n;
    if eval_n < 50 {
        return Err(DiagError::TooFewRows {
            needed: 50,
            got: eval_n,
        });
    }
    let train: Vec<usize> = (0..train_n).collect();
    let beta = ridge_fit(&feats, &d, &train, cfg.lambda)?;
    let train_mean = train.iter().map(|&r| d[r]).sum::<f64>() / train_n as f64;
    let mut err_const = Vec::with_capacity(eval_n);
    let mut err_fit = Vec::with_capacity(eval_n);
    for r in train_n..n {
        let ec = d[r] - train_mean;
        let ef = d[r] - predict(&feats, &beta, r);
        err_const.push(ec * ec);
        err_fit.push(ef * ef);
    }
    let mse_const = err_const.iter().sum::<f64>() / eval_n as f64;
    let mse_fit = err_fit.iter().sum::<f64>() / eval_n as f64;
    let explained = mse_const - mse_fit;
    let mut stream = Stream::new(StreamKey::new(seed, "martingale-bootstrap", 0));
    let mut reps = Vec::with_capacity(cfg.bootstrap);
    for _ in 0..cfg.bootstrap {
        let mut sum_c = 0.0;
        let mut sum_f = 0.0;
        for _ in 0..eval_n {
            let r = stream.next_below(eval_n as u64) as usize;
            sum_c += err_const[r];
            sum_f += err_fit[r];
        }
        reps.push((sum_c - sum_f) / eval_n as f64);
    }
    let rep_mean = reps.iter().sum::<f64>() / reps.len() as f64;
    let rep_var = reps
        .iter()
        .map(|g| (g - rep_mean) * (g - rep_mean))
        .sum::<f64>()
        / (reps.len() - 1) as f64;
    let explained_se = libm::sqrt(rep_var);
    let regression_reject = explained > cfg.multiplier * explained_se;
    Ok(MartingaleReport {
        mean_stat,
        mean_se,
        mean_reject,
        explained,
        explained_se,
        regression_reject,
        coefficients: beta,
        pass: !mean_reject && !regression_reject,
    })
}
