//! Compatibility, duality, martingale, and adaptedness checks, decided by
//! enumeration.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::scalar::Scalar;
use super::space::{cond_exp, join, sigma_of, Partition, Rv};
use super::structure::CompatStructure;
use super::ExactError;

/// Outcome of one stage (or one ordered stage pair) of a check.
#[derive(Clone, Debug)]
pub struct LevelCheck<W: Scalar> {
    pub label: String,
    pub max_deviation: W,
    /// Test function attaining the maximum deviation, when any deviates.
    pub worst_case: Option<String>,
    pub pass: bool,
}

/// Per-stage outcomes plus the overall verdict.
#[derive(Clone, Debug)]
pub struct CheckReport<W: Scalar> {
    pub levels: Vec<LevelCheck<W>>,
    pub pass: bool,
}

impl<W: Scalar> CheckReport<W> {
    fn from_levels(levels: Vec<LevelCheck<W>>) -> Self {
        let pass = levels.iter().all(|l| l.pass);
        CheckReport { levels, pass }
    }

    /// Largest deviation across all stages.
    pub fn max_deviation(&self) -> W {
        self.levels
            .iter()
            .map(|l| l.max_deviation.clone())
            .fold(W::zero(), |acc, d| if d > acc { d } else { acc })
    }
}

fn level_from_deviations<W: Scalar>(
    label: String,
    deviations: impl IntoIterator<Item = (String, W)>,
) -> LevelCheck<W> {
    let mut max_deviation = W::zero();
    let mut worst_case = None;
    for (case, dev) in deviations {
        if dev > max_deviation {
            max_deviation = dev;
            worst_case = Some(case);
        }
    }
    let pass = max_deviation.approx_zero();
    LevelCheck {
        label,
        max_deviation,
        worst_case,
        pass,
    }
}

/// Deviation of the conditional expectation of each test function given the
/// joined σ-algebra from the one given the input-side σ-algebra alone.
fn stage_deviations<W: Scalar>(
    c: &CompatStructure<W>,
    y: &Rv<W>,
    joined: &Partition,
    y_stage: &Partition,
) -> Result<Vec<(String, W)>, ExactError> {
    let mut out = Vec::new();
    for h in c.h_functions() {
        let h_of_y = h.along(y, c.y_grid())?;
        let lhs = cond_exp(&h_of_y, joined)?;
        let rhs = cond_exp(&h_of_y, y_stage)?;
        out.push((h.label.clone(), lhs.max_abs_diff(&rhs)?));
    }
    Ok(out)
}

/// Does knowing the solution at stage α help predict the input beyond the
/// input's own stage-α information?  Passes when it never does.
pub fn check_compatibility<W: Scalar>(
    x: &Rv<W>,
    y: &Rv<W>,
    c: &CompatStructure<W>,
) -> Result<CheckReport<W>, ExactError> {
    let mut levels = Vec::new();
    for alpha in 0..c.levels().len() {
        let y_stage = c.stage_y(y, alpha)?;
        let joined = join(&c.stage_x(x, alpha)?, &y_stage)?;
        let devs = stage_deviations(c, y, &joined, &y_stage)?;
        levels.push(level_from_deviations(c.levels()[alpha].label.clone(), devs));
    }
    Ok(CheckReport::from_levels(levels))
}

/// Same check with two solutions conditioned jointly.
pub fn check_joint_compatibility<W: Scalar>(
    x1: &Rv<W>,
    x2: &Rv<W>,
    y: &Rv<W>,
    c: &CompatStructure<W>,
) -> Result<CheckReport<W>, ExactError> {
    let mut levels = Vec::new();
    for alpha in 0..c.levels().len() {
        let y_stage = c.stage_y(y, alpha)?;
        let joined = join(
            &c.stage_x(x1, alpha)?,
            &join(&c.stage_x(x2, alpha)?, &y_stage)?,
        )?;
        let devs = stage_deviations(c, y, &joined, &y_stage)?;
        levels.push(level_from_deviations(c.levels()[alpha].label.clone(), devs));
    }
    Ok(CheckReport::from_levels(levels))
}

/// The dual criterion: stage-α functions of the solution are predicted no
/// better by the full input than by the input's stage-α information.
/// Equivalent, stage by stage, to [`check_compatibility`] with the full
/// indicator test set.
pub fn check_dual<W: Scalar>(
    x: &Rv<W>,
    y: &Rv<W>,
    c: &CompatStructure<W>,
) -> Result<CheckReport<W>, ExactError> {
    let full_y = sigma_of(&[y])?;
    let mut levels = Vec::new();
    for alpha in 0..c.levels().len() {
        let y_stage = c.stage_y(y, alpha)?;
        let mut devs = Vec::new();
        for g in c.x_stage_functions(alpha) {
            let g_of_x = g.along(x, c.x_grid())?;
            let lhs = cond_exp(&g_of_x, &full_y)?;
            let rhs = cond_exp(&g_of_x, &y_stage)?;
            devs.push((g.label.clone(), lhs.max_abs_diff(&rhs)?));
        }
        levels.push(level_from_deviations(c.levels()[alpha].label.clone(), devs));
    }
    Ok(CheckReport::from_levels(levels))
}

/// Checks that an input-side martingale stays a martingale when the
/// solution's stage information is joined in.
///
/// `m` holds one candidate per stage; each must be measurable at its own
/// input stage, and the structure must declare an order.
pub fn check_martingale_condition<W: Scalar>(
    m: &[Rv<W>],
    x: &Rv<W>,
    y: &Rv<W>,
    c: &CompatStructure<W>,
) -> Result<CheckReport<W>, ExactError> {
    if m.len() != c.levels().len() {
        return Err(ExactError::LengthMismatch {
            expected: c.levels().len(),
            got: m.len(),
        });
    }
    let pairs = c.comparable_pairs();
    if pairs.is_empty() {
        return Err(ExactError::NoOrderDeclared);
    }
    for (alpha, candidate) in m.iter().enumerate() {
        let y_stage = c.stage_y(y, alpha)?;
        let projected = cond_exp(candidate, &y_stage)?;
        if !projected.max_abs_diff(candidate)?.approx_zero() {
            return Err(ExactError::NotMeasurable { alpha });
        }
    }
    let mut levels = Vec::new();
    for (early, late) in pairs {
        let y_stage = c.stage_y(y, early)?;
        let joined = join(&c.stage_x(x, early)?, &y_stage)?;
        let pulled_back = cond_exp(&m[late], &joined)?;
        let dev = pulled_back.max_abs_diff(&m[early])?;
        let label = format!(
            "{}<{}",
            c.levels()[early].label,
            c.levels()[late].label
        );
        levels.push(level_from_deviations(label, [(String::from("step"), dev)]));
    }
    Ok(CheckReport::from_levels(levels))
}

/// Per-stage adaptedness: the solution's stage σ-algebra is contained in the
/// input's.
#[derive(Clone, Debug)]
pub struct AdaptedReport {
    pub per_level: Vec<bool>,
    pub all: bool,
}

pub fn check_adapted<W: Scalar>(
    x: &Rv<W>,
    y: &Rv<W>,
    c: &CompatStructure<W>,
) -> Result<AdaptedReport, ExactError> {
    let mut per_level = Vec::new();
    for alpha in 0..c.levels().len() {
        let x_stage = c.stage_x(x, alpha)?;
        let y_stage = c.stage_y(y, alpha)?;
        per_level.push(y_stage.refines(&x_stage));
    }
    let all = per_level.iter().all(|&b| b);
    Ok(AdaptedReport { per_level, all })
}
