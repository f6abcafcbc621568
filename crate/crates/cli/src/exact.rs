//! The exact suite: every finite-space claim the library decides, run at a
//! configurable trial volume and reported with exact rational evidence.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

use problab_core::exact::zeta::input_coordinates_three_wise_independent;
use problab_core::exact::{
    canonical_coupling, check_compatibility, check_dual, check_joint_compatibility, disintegrate,
    is_strong, mix_solutions, random, sampler_from_kernel, theorem_gyw_check, zeta_counterexample,
    Scalar, StrongMap, ValueGrid,
};
use problab_core::stream::{Stream, StreamKey};

use crate::config::{ExactJob, Resolved};
use crate::report::{rational, write_json, CheckResult, SuiteResult};
use crate::CliError;

type Q = BigRational;

fn zeta_check() -> Result<CheckResult, CliError> {
    let report = zeta_counterexample::<Q>().map_err(CliError::check)?;
    let three_wise = input_coordinates_three_wise_independent::<Q>().map_err(CliError::check)?;
    let pass = report.pass && three_wise;
    Ok(CheckResult {
        name: "zeta-counterexample".to_string(),
        pass,
        details: json!({
            "atoms": report.space.len(),
            "single_max_deviation": rational(&report.single_max_deviation),
            "conditionals_vanish": report.conditionals_vanish,
            "joint_max_deviation": rational(&report.joint_max_deviation),
            "joint_fails": report.joint_fails,
            "closed_form_max_gap": rational(&report.closed_form_max_gap),
            "input_three_wise_independent": three_wise,
        }),
    })
}

fn uniqueness_check(seed: u64, families: u64) -> CheckResult {
    let mut unique = 0u64;
    let mut non_unique = 0u64;
    let mut failures = Vec::new();
    for trial in 0..families {
        match random::measure_family::<Q>(seed, trial)
            .and_then(|family| theorem_gyw_check(&family.measures, &family.structure))
        {
            Ok((true, _)) => unique += 1,
            Ok((false, _)) => non_unique += 1,
            Err(err) => failures.push(format!("trial {trial}: {err}")),
        }
    }
    CheckResult {
        name: "uniqueness-equivalence".to_string(),
        pass: failures.is_empty() && unique > 0 && non_unique > 0,
        details: json!({
            "families": families,
            "unique_strong": unique,
            "non_unique": non_unique,
            "violations": failures,
        }),
    }
}

fn coupling_check(seed: u64, trials: u64) -> CheckResult {
    let mut failures = Vec::new();
    for trial in 0..trials {
        let outcome = random::compatible_measure_pair::<Q>(seed, trial).and_then(|(a, b, c)| {
            let coupling = canonical_coupling(&a, &b)?;
            check_joint_compatibility(&coupling.x1, &coupling.x2, &coupling.y, &c)
        });
        match outcome {
            Ok(report) if report.pass => {}
            Ok(report) => failures.push(format!(
                "trial {trial}: joint deviation {}",
                rational(&report.max_deviation())
            )),
            Err(err) => failures.push(format!("trial {trial}: {err}")),
        }
    }
    CheckResult {
        name: "coupling-joint-compatibility".to_string(),
        pass: failures.is_empty(),
        details: json!({ "trials": trials, "failures": failures }),
    }
}

fn dual_check(seed: u64, trials: u64) -> CheckResult {
    let mut rejections = 0u64;
    let mut failures = Vec::new();
    for trial in 0..trials {
        let outcome = random::arbitrary_model::<Q>(seed, trial).and_then(|model| {
            let direct = check_compatibility(&model.x, &model.y, &model.structure)?;
            let dual = check_dual(&model.x, &model.y, &model.structure)?;
            Ok((direct, dual))
        });
        match outcome {
            Ok((direct, dual)) => {
                if direct.pass != dual.pass {
                    failures.push(format!(
                        "trial {trial}: direct={} dual={}",
                        direct.pass, dual.pass
                    ));
                }
                if !direct.pass {
                    rejections += 1;
                }
            }
            Err(err) => failures.push(format!("trial {trial}: {err}")),
        }
    }
    CheckResult {
        name: "dual-agreement".to_string(),
        pass: failures.is_empty(),
        details: json!({ "trials": trials, "rejections": rejections, "failures": failures }),
    }
}

fn compatible_models_check(seed: u64, trials: u64) -> CheckResult {
    let mut failures = Vec::new();
    for trial in 0..trials {
        let outcome = random::compatible_model::<Q>(seed, trial)
            .and_then(|m| check_compatibility(&m.x, &m.y, &m.structure));
        match outcome {
            Ok(report) if report.pass => {}
            Ok(report) => failures.push(format!(
                "trial {trial}: deviation {}",
                rational(&report.max_deviation())
            )),
            Err(err) => failures.push(format!("trial {trial}: {err}")),
        }
    }
    CheckResult {
        name: "noise-outsourced-compatibility".to_string(),
        pass: failures.is_empty(),
        details: json!({ "trials": trials, "failures": failures }),
    }
}

fn round_trip_check(seed: u64, trials: u64) -> CheckResult {
    let mut measures = 0u64;
    let mut failures = Vec::new();
    for trial in 0..trials {
        match random::measure_family::<Q>(seed, trial) {
            Ok(family) => {
                for (i, mu) in family.measures.iter().enumerate() {
                    let kernel = disintegrate(mu);
                    let ok_kernel = kernel
                        .reassemble()
                        .map(|back| back.approx_eq(mu))
                        .unwrap_or(false);
                    let ok_sampler = sampler_from_kernel(&kernel)
                        .induced_measure()
                        .map(|back| back.approx_eq(mu))
                        .unwrap_or(false);
                    if !(ok_kernel && ok_sampler) {
                        failures.push(format!("trial {trial} member {i}"));
                    }
                    measures += 1;
                }
            }
            Err(err) => failures.push(format!("trial {trial}: {err}")),
        }
    }
    CheckResult {
        name: "disintegration-round-trip".to_string(),
        pass: failures.is_empty(),
        details: json!({ "measures": measures, "failures": failures }),
    }
}

/// Random strong-map mixtures: the even mixture of two distinct maps is
/// never strong, and each disagreement row splits its mass exactly in half.
fn mixture_check(seed: u64, trials: u64) -> CheckResult {
    let mut failures = Vec::new();
    for trial in 0..trials {
        if let Err(msg) = one_mixture(seed, trial) {
            failures.push(format!("trial {trial}: {msg}"));
        }
    }
    CheckResult {
        name: "mixture-not-strong".to_string(),
        pass: failures.is_empty(),
        details: json!({ "trials": trials, "failures": failures }),
    }
}

fn one_mixture(seed: u64, trial: u64) -> Result<(), String> {
    let mut s = Stream::new(StreamKey::new(seed, "cli-mixture", trial));
    let nx = 2 + s.next_below(3) as usize;
    let ny = 2 + s.next_below(3) as usize;
    let xg = Arc::new(
        ValueGrid::integers(&(0..nx as i64).collect::<Vec<_>>()).map_err(|e| e.to_string())?,
    );
    let yg = Arc::new(
        ValueGrid::integers(&(0..ny as i64).collect::<Vec<_>>()).map_err(|e| e.to_string())?,
    );
    let mut assign1 = BTreeMap::new();
    let mut assign2 = BTreeMap::new();
    loop {
        assign1.clear();
        assign2.clear();
        for y in 0..ny {
            assign1.insert(y, s.next_below(nx as u64) as usize);
            assign2.insert(y, s.next_below(nx as u64) as usize);
        }
        if (0..ny).any(|y| assign1[&y] != assign2[&y]) {
            break;
        }
    }
    let f1 = StrongMap::new(xg.clone(), yg.clone(), assign1.clone()).map_err(|e| e.to_string())?;
    let f2 = StrongMap::new(xg, yg, assign2.clone()).map_err(|e| e.to_string())?;
    let nu: Vec<Q> = (0..ny).map(|_| Q::ratio(1, ny as i64)).collect();
    let mixed = mix_solutions(&f1, &f2, &nu).map_err(|e| e.to_string())?;
    let kernel = disintegrate(&mixed);
    if is_strong(&kernel).is_some() {
        return Err("mixture reported strong".to_string());
    }
    let half = Q::ratio(1, 2);
    for y in 0..ny {
        let row = kernel.row(y).ok_or("missing kernel row")?;
        for (x, mass) in row.iter().enumerate() {
            let mut want = Q::zero();
            if assign1[&y] == x {
                want += half.clone();
            }
            if assign2[&y] == x {
                want += half.clone();
            }
            if *mass != want {
                return Err(format!(
                    "row {y} column {x}: {} instead of {}",
                    rational(mass),
                    rational(&want)
                ));
            }
        }
    }
    Ok(())
}

pub fn run(resolved: &Resolved) -> Result<bool, CliError> {
    let job = resolved.config.exact.clone().unwrap_or_default();
    let ExactJob {
        families,
        coupling_trials,
        dual_trials,
        model_trials,
        mixture_trials,
    } = job;
    let seed = resolved.seed;
    let started = std::time::Instant::now();
    let checks = vec![
        zeta_check()?,
        uniqueness_check(seed, families),
        coupling_check(seed, coupling_trials),
        dual_check(seed, dual_trials),
        compatible_models_check(seed, model_trials),
        round_trip_check(seed, model_trials.min(40)),
        mixture_check(seed, mixture_trials),
    ];
    let result = SuiteResult::new("exact", &resolved.config.name, seed, checks);
    let out = resolved
        .out_dir
        .join(format!("{}.exact.json", resolved.config.name));
    write_json(&out, &result)?;
    eprintln!(
        "exact suite: {} checks in {:.2?} -> {}",
        result.checks.len(),
        started.elapsed(),
        out.display()
    );
    Ok(result.pass)
}
