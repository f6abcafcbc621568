//! Structural laws of the exact engine, checked on randomized finite
//! spaces with rational arithmetic so every identity is tested for literal
//! equality rather than within a tolerance.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::Zero;
use proptest::prelude::*;

use problab_core::exact::{
    canonical_coupling, check_compatibility, check_dual, check_joint_compatibility,
    check_martingale_condition, cond_exp, disintegrate, is_strong, mix_solutions, random,
    sampler_from_kernel, theorem_gyw_check, zeta_counterexample, FiniteSpace, JointMeasure,
    Partition, Rv, Scalar, StrongMap, ValueGrid,
};

type Q = BigRational;

fn q(n: i64, d: i64) -> Q {
    Q::ratio(n, d)
}

/// Expectation of an atom-indexed quantity under the space's weights.
fn expect(space: &FiniteSpace<Q>, f: impl Fn(usize) -> Q) -> Q {
    (0..space.len()).map(|a| space.weight(a).clone() * f(a)).sum()
}

#[derive(Debug, Clone)]
struct SpaceFixture {
    masses: Vec<u8>,
    fine_classes: Vec<usize>,
    merge: Vec<usize>,
    h_values: Vec<i64>,
    g_values: Vec<i64>,
}

/// Random space of 2..=8 atoms with a fine partition, a coarsening of it,
/// and two small integer variables.
fn space_fixture() -> impl Strategy<Value = SpaceFixture> {
    (2usize..=8).prop_flat_map(|n| {
        (
            proptest::collection::vec(0u8..=3, n),
            proptest::collection::vec(0usize..n, n),
            proptest::collection::vec(0usize..n, n),
            proptest::collection::vec(-4i64..=4, n),
            proptest::collection::vec(-4i64..=4, n),
        )
            .prop_map(
                |(masses, fine_classes, merge, h_values, g_values)| SpaceFixture {
                    masses,
                    fine_classes,
                    merge,
                    h_values,
                    g_values,
                },
            )
    })
}

struct Built {
    space: Arc<FiniteSpace<Q>>,
    fine: Partition,
    coarse: Partition,
    h: Rv<Q>,
    g_blocks: Vec<i64>,
}

/// Realizes the fixture: drops zero-mass atoms, normalizes, and restates
/// both partitions and both variables on the retained atoms.
fn build(fx: &SpaceFixture) -> Option<Built> {
    let keep: Vec<usize> = (0..fx.masses.len()).filter(|&i| fx.masses[i] > 0).collect();
    if keep.is_empty() {
        return None;
    }
    let total: i64 = keep.iter().map(|&i| fx.masses[i] as i64).sum();
    let atoms: Vec<(String, Q)> = keep
        .iter()
        .map(|&i| (format!("a{i}"), q(fx.masses[i] as i64, total)))
        .collect();
    let space = FiniteSpace::new(atoms).ok()?;
    let fine = Partition::from_classes(
        &keep.iter().map(|&i| fx.fine_classes[i]).collect::<Vec<_>>(),
    );
    let coarse = Partition::from_classes(
        &keep
            .iter()
            .map(|&i| fx.merge[fx.fine_classes[i] % fx.merge.len()])
            .collect::<Vec<_>>(),
    );
    let h = Rv::scalar(
        space.clone(),
        keep.iter().map(|&i| Q::from_int(fx.h_values[i])).collect(),
    )
    .ok()?;
    let g_blocks = fx.g_values.clone();
    Some(Built {
        space,
        fine,
        coarse,
        h,
        g_blocks,
    })
}

proptest! {
    /// Conditioning first on the finer partition and then on a coarsening
    /// of it lands exactly where conditioning once does.
    #[test]
    fn tower_property_is_exact(fx in space_fixture()) {
        let Some(b) = build(&fx) else { return Ok(()) };
        prop_assert!(b.fine.refines(&b.coarse));
        let through_fine = cond_exp(&cond_exp(&b.h, &b.fine).unwrap(), &b.coarse).unwrap();
        let direct = cond_exp(&b.h, &b.coarse).unwrap();
        prop_assert_eq!(through_fine.max_abs_diff(&direct).unwrap(), Q::zero());
    }

    /// The conditional expectation is the least-squares projection: the
    /// residual is orthogonal to every block-constant variable, and any
    /// block-constant perturbation increases the squared error by exactly
    /// the perturbation's own second moment.
    #[test]
    fn projection_beats_every_perturbation(fx in space_fixture()) {
        let Some(b) = build(&fx) else { return Ok(()) };
        let hat = cond_exp(&b.h, &b.fine).unwrap();
        let g = |atom: usize| Q::from_int(b.g_blocks[b.fine.block_of(atom) % b.g_blocks.len()]);
        let resid = |atom: usize| b.h.value(atom)[0].clone() - hat.value(atom)[0].clone();
        let cross = expect(&b.space, |a| resid(a) * g(a));
        prop_assert_eq!(cross.clone(), Q::zero());
        let base = expect(&b.space, |a| resid(a).clone() * resid(a));
        let perturbed = expect(&b.space, |a| {
            let r = resid(a) - g(a);
            r.clone() * r
        });
        let second_moment = expect(&b.space, |a| g(a).clone() * g(a));
        prop_assert_eq!(perturbed.clone(), base.clone() + second_moment);
        prop_assert!(perturbed >= base);
    }
}

#[test]
fn direct_and_dual_checks_agree_on_random_models() {
    let mut rejections = 0;
    for trial in 0..120 {
        let model = random::arbitrary_model::<Q>(1001, trial).unwrap();
        let direct = check_compatibility(&model.x, &model.y, &model.structure).unwrap();
        let dual = check_dual(&model.x, &model.y, &model.structure).unwrap();
        assert_eq!(
            direct.pass, dual.pass,
            "trial {trial}: direct {} dual {}",
            direct.max_deviation(),
            dual.max_deviation()
        );
        for (a, b) in direct.levels.iter().zip(dual.levels.iter()) {
            assert_eq!(a.pass, b.pass, "trial {trial} level {}", a.label);
        }
        if !direct.pass {
            rejections += 1;
        }
    }
    assert!(rejections > 10, "sweep saw only {rejections} rejections");
    assert!(rejections < 120, "sweep never saw a compatible model");
}

#[test]
fn noise_outsourced_constructions_are_compatible() {
    for trial in 0..100 {
        let model = random::compatible_model::<Q>(77, trial).unwrap();
        let report = check_compatibility(&model.x, &model.y, &model.structure).unwrap();
        assert!(
            report.pass,
            "trial {trial} deviated by {}",
            report.max_deviation()
        );
    }
}

#[test]
fn input_martingales_survive_joining_the_solution_stages() {
    let mut checked = 0;
    for trial in 0..60 {
        let model = random::compatible_model::<Q>(505, trial).unwrap();
        // The condition compares ordered stage pairs, so single-stage
        // structures have nothing to say.
        if model.structure.comparable_pairs().is_empty() {
            continue;
        }
        // Close a terminal functional of the input into a martingale by
        // projecting it onto each stage.
        let terminal = model
            .y
            .map(1, |v| vec![v.iter().cloned().sum::<Q>()])
            .unwrap();
        let m: Vec<Rv<Q>> = (0..model.structure.levels().len())
            .map(|alpha| {
                let stage = model.structure.stage_y(&model.y, alpha).unwrap();
                cond_exp(&terminal, &stage).unwrap()
            })
            .collect();
        let report =
            check_martingale_condition(&m, &model.x, &model.y, &model.structure).unwrap();
        assert!(
            report.pass,
            "trial {trial} deviated by {}",
            report.max_deviation()
        );
        checked += 1;
    }
    assert!(checked >= 30, "only {checked} multi-stage models in sweep");
}

#[test]
fn coupled_copies_of_compatible_laws_stay_jointly_compatible() {
    for trial in 0..60 {
        let (mu1, mu2, structure) = random::compatible_measure_pair::<Q>(909, trial).unwrap();
        let coupling = canonical_coupling(&mu1, &mu2).unwrap();
        let report =
            check_joint_compatibility(&coupling.x1, &coupling.x2, &coupling.y, &structure)
                .unwrap();
        assert!(
            report.pass,
            "trial {trial} deviated by {}",
            report.max_deviation()
        );
        // Each copy alone reproduces its own law against the shared input.
        for (copy, mu) in [(&coupling.x1, &mu1), (&coupling.x2, &mu2)] {
            let rebuilt = JointMeasure::law_of(
                copy,
                &coupling.y,
                mu.x_grid().clone(),
                mu.y_grid().clone(),
            )
            .unwrap();
            assert!(rebuilt.approx_eq(mu), "trial {trial} marginal law drifted");
        }
    }
}

#[test]
fn uniqueness_equivalence_holds_across_random_families() {
    let mut pointwise_true = 0;
    let mut pointwise_false = 0;
    for trial in 0..80 {
        let family = random::measure_family::<Q>(1313, trial).unwrap();
        let (a, b) = theorem_gyw_check(&family.measures, &family.structure).unwrap();
        assert_eq!(a, b, "trial {trial}");
        if a {
            pointwise_true += 1;
        } else {
            pointwise_false += 1;
        }
    }
    assert!(pointwise_true > 0, "sweep never saw a unique strong family");
    assert!(pointwise_false > 0, "sweep never saw a non-unique family");
}

#[test]
fn disintegration_and_sampling_round_trip_exactly() {
    for trial in 0..40 {
        let family = random::measure_family::<Q>(2024, trial).unwrap();
        for mu in &family.measures {
            let kernel = disintegrate(mu);
            let back = kernel.reassemble().unwrap();
            assert!(back.approx_eq(mu), "trial {trial} reassembly drifted");
            let table = sampler_from_kernel(&kernel);
            let induced = table.induced_measure().unwrap();
            assert!(induced.approx_eq(mu), "trial {trial} sampler drifted");
            // Cell midpoints land on the cell's own target and widths
            // recover the kernel row exactly.
            for &y in table.retained() {
                let row = table.row(y).unwrap();
                let masses = kernel.row(y).unwrap();
                for i in 0..row.targets.len() {
                    let mid = (row.breaks[i].clone() + row.breaks[i + 1].clone()) / Q::from_int(2);
                    assert_eq!(table.apply(y, &mid).unwrap(), row.targets[i]);
                    assert_eq!(row.cell_width(i), masses[row.targets[i]].clone());
                }
            }
        }
    }
}

#[test]
fn even_mixture_of_two_strong_maps_is_not_strong() {
    let xg = Arc::new(ValueGrid::integers(&[0, 1]).unwrap());
    let yg = Arc::new(ValueGrid::integers(&[0, 1, 2]).unwrap());
    let f1 = StrongMap::new(
        xg.clone(),
        yg.clone(),
        BTreeMap::from([(0, 0), (1, 0), (2, 1)]),
    )
    .unwrap();
    let f2 = StrongMap::new(
        xg.clone(),
        yg.clone(),
        BTreeMap::from([(0, 1), (1, 0), (2, 0)]),
    )
    .unwrap();
    let nu = vec![q(1, 2), q(1, 4), q(1, 4)];
    let mixed = mix_solutions(&f1, &f2, &nu).unwrap();
    let kernel = disintegrate(&mixed);
    assert!(is_strong(&kernel).is_none());
    // Rows where the maps disagree split the mass exactly in half.
    assert_eq!(kernel.row(0).unwrap(), &[q(1, 2), q(1, 2)]);
    assert_eq!(kernel.row(2).unwrap(), &[q(1, 2), q(1, 2)]);
    // The row where they agree stays deterministic.
    assert_eq!(kernel.row(1).unwrap(), &[Q::from_int(1), Q::zero()]);
}

#[test]
fn zeta_counterexample_is_decided_exactly() {
    let report = zeta_counterexample::<Q>().unwrap();
    assert!(report.single_pass);
    assert!(report.conditionals_vanish);
    assert!(report.joint_fails);
    assert_eq!(report.joint_max_deviation, Q::from_int(1));
    assert!(report.closed_form_matches);
    assert_eq!(report.closed_form_max_gap, Q::zero());
    assert_eq!(report.space.len(), 64);
    assert!(report.pass);
}
