//! The four-sign counterexample: partial compatibility of each solution copy
//! does not survive joining two independently driven copies.
//!
//! Four fair signs ζ1..ζ4 produce the input Y = (ζ1ζ2, ζ2ζ3, ζ3ζ4, ζ4ζ1),
//! whose coordinates are three-wise independent but multiply to one.  The
//! stage reveals Y1 on the input side.  A solution copy picks Y2 or Y3 by an
//! independent coin, so a single copy says nothing about Y4 beyond Y1.  Two
//! copies with independent coins, however, jointly determine Y4 whenever
//! their coins disagree.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{string::String, vec};

use super::checks::{check_compatibility, check_joint_compatibility};
use super::scalar::Scalar;
use super::space::{cond_exp, join, sigma_of, FiniteSpace, Partition, Rv};
use super::structure::{AlphaLevel, AlphaOrder, CompatStructure, GridFn, ValueGrid};
use super::ExactError;

/// Everything the counterexample decides, all computed exactly.
#[derive(Clone, Debug)]
pub struct ZetaReport<W: Scalar> {
    pub space: Arc<FiniteSpace<W>>,
    /// Largest deviation of either single-copy partial check (zero: pass).
    pub single_max_deviation: W,
    pub single_pass: bool,
    /// Both conditional expectations of the test function vanish.
    pub conditionals_vanish: bool,
    /// Largest deviation of the joint partial check (positive: fail).
    pub joint_max_deviation: W,
    pub joint_fails: bool,
    /// Gap between the enumerated joint conditional expectation and its
    /// closed form (zero: exact match).
    pub closed_form_max_gap: W,
    pub closed_form_matches: bool,
    /// Enumerated joint conditional expectation, one value per atom.
    pub joint_conditional: Rv<W>,
    pub pass: bool,
}

/// Runs the counterexample end to end and checks every claim by enumeration.
pub fn zeta_counterexample<W: Scalar>() -> Result<ZetaReport<W>, ExactError> {
    // Atoms: 4 sign bits, 2 coin bits; uniform mass 1/64.
    let labels: Vec<String> = (0..64u32).map(|a| format!("w{a:02}")).collect();
    let space = FiniteSpace::<W>::uniform(labels)?;
    let sign = |atom: usize, bit: usize| -> i64 {
        if atom >> bit & 1 == 0 {
            1
        } else {
            -1
        }
    };
    let y = Rv::from_fn(space.clone(), 4, |atom| {
        let z: Vec<i64> = (0..4).map(|b| sign(atom, b)).collect();
        vec![
            W::from_int(z[0] * z[1]),
            W::from_int(z[1] * z[2]),
            W::from_int(z[2] * z[3]),
            W::from_int(z[3] * z[0]),
        ]
    })?;
    let copy = |coin_bit: usize| -> Result<Rv<W>, ExactError> {
        Rv::from_fn(space.clone(), 1, |atom| {
            let pick = if atom >> coin_bit & 1 == 0 { 1 } else { 2 };
            vec![y.value(atom)[pick].clone()]
        })
    };
    let x1 = copy(4)?;
    let x2 = copy(5)?;

    let x_grid = ValueGrid::<W>::integers(&[-1, 1])?;
    let mut y_points = Vec::new();
    for atom in 0..space.len() {
        let v = y.value(atom).to_vec();
        if !y_points
            .iter()
            .any(|p: &Vec<W>| p.iter().zip(&v).all(|(a, b)| a.approx_eq(b)))
        {
            y_points.push(v);
        }
    }
    let y_grid = ValueGrid::new(y_points)?;
    let h0_values: Vec<W> = (0..y_grid.len())
        .map(|i| y_grid.point(i)[3].clone())
        .collect();
    let c = CompatStructure::new(
        x_grid.clone(),
        y_grid.clone(),
        vec![AlphaLevel {
            label: String::from("alpha"),
            x_blocks: Partition::discrete(x_grid.len()),
            y_blocks: y_grid.prefix_partition(1),
        }],
        AlphaOrder::Unordered,
    )?
    .with_h_set(vec![GridFn::new(String::from("h0=y4"), h0_values)])?;

    let single1 = check_compatibility(&x1, &y, &c)?;
    let single2 = check_compatibility(&x2, &y, &c)?;
    let single_max_deviation = {
        let a = single1.max_deviation();
        let b = single2.max_deviation();
        if a > b {
            a
        } else {
            b
        }
    };
    let single_pass = single1.pass && single2.pass;

    // Both sides of the single-copy identity vanish outright.
    let h0_of_y = y.component(3);
    let y_stage = c.stage_y(&y, 0)?;
    let zero = Rv::constant(space.clone(), W::zero());
    let rhs = cond_exp(&h0_of_y, &y_stage)?;
    let lhs1 = cond_exp(&h0_of_y, &join(&c.stage_x(&x1, 0)?, &y_stage)?)?;
    let lhs2 = cond_exp(&h0_of_y, &join(&c.stage_x(&x2, 0)?, &y_stage)?)?;
    let conditionals_vanish = rhs.max_abs_diff(&zero)?.approx_zero()
        && lhs1.max_abs_diff(&zero)?.approx_zero()
        && lhs2.max_abs_diff(&zero)?.approx_zero();

    let joint = check_joint_compatibility(&x1, &x2, &y, &c)?;
    let joint_max_deviation = joint.max_deviation();
    let joint_fails = !joint.pass;

    // Enumerate the joint conditional expectation and compare with the
    // closed form: Y1 X1 X2 where the copies differ, Y1/3 where they agree.
    let joint_stage = join(
        &c.stage_x(&x1, 0)?,
        &join(&c.stage_x(&x2, 0)?, &y_stage)?,
    )?;
    let joint_conditional = cond_exp(&h0_of_y, &joint_stage)?;
    let third = W::ratio(1, 3);
    let closed_form = Rv::from_fn(space.clone(), 1, |atom| {
        let y1 = y.value(atom)[0].clone();
        let a = x1.value(atom)[0].clone();
        let b = x2.value(atom)[0].clone();
        if a.approx_eq(&b) {
            vec![third.clone() * y1]
        } else {
            vec![y1 * a * b]
        }
    })?;
    let closed_form_max_gap = joint_conditional.max_abs_diff(&closed_form)?;
    let closed_form_matches = closed_form_max_gap.approx_zero();

    let pass = single_pass && conditionals_vanish && joint_fails && closed_form_matches;
    Ok(ZetaReport {
        space,
        single_max_deviation,
        single_pass,
        conditionals_vanish,
        joint_max_deviation,
        joint_fails,
        closed_form_max_gap,
        closed_form_matches,
        joint_conditional,
        pass,
    })
}

/// The three-wise independence that makes the single-copy check pass: any
/// three input coordinates are independent, all four are not.
pub fn input_coordinates_three_wise_independent<W: Scalar>() -> Result<bool, ExactError> {
    let report = zeta_counterexample::<W>()?;
    let space = report.space.clone();
    let y = Rv::from_fn(space.clone(), 4, |atom| {
        let sign = |bit: usize| -> i64 {
            if atom >> bit & 1 == 0 {
                1
            } else {
                -1
            }
        };
        let z: Vec<i64> = (0..4).map(sign).collect();
        vec![
            W::from_int(z[0] * z[1]),
            W::from_int(z[1] * z[2]),
            W::from_int(z[2] * z[3]),
            W::from_int(z[3] * z[0]),
        ]
    })?;
    // every triple: joint point masses factor into 1/8; the full quadruple
    // concentrates on product one
    let mut triples_ok = true;
    for skip in 0..4 {
        let kept: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let eighth = W::ratio(1, 8);
        for pattern in 0..8u32 {
            let want: Vec<W> = (0..3)
                .map(|i| W::from_int(if pattern >> i & 1 == 0 { 1 } else { -1 }))
                .collect();
            let mut mass = W::zero();
            for atom in 0..space.len() {
                let v = y.value(atom);
                if kept
                    .iter()
                    .zip(&want)
                    .all(|(&c, w)| v[c].approx_eq(w))
                {
                    mass = mass + space.weight(atom).clone();
                }
            }
            if !mass.approx_eq(&eighth) {
                triples_ok = false;
            }
        }
    }
    // dependence of the full tuple: the product of the four coordinates is
    // always one, so half the sign patterns never occur
    let full = sigma_of(&[&y])?;
    let four_dependent = full.blocks().len() == 8;
    Ok(triples_ok && four_dependent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    type Q = BigRational;

    #[test]
    fn single_copy_passes_with_vanishing_conditionals() {
        let report = zeta_counterexample::<Q>().unwrap();
        assert!(report.single_pass);
        assert_eq!(report.single_max_deviation, Q::zero());
        assert!(report.conditionals_vanish);
    }

    #[test]
    fn joint_check_fails_with_unit_deviation() {
        let report = zeta_counterexample::<Q>().unwrap();
        assert!(report.joint_fails);
        // where the coins disagree the conditional expectation is a sign
        assert_eq!(report.joint_max_deviation, Q::one());
    }

    #[test]
    fn enumerated_conditional_matches_closed_form_exactly() {
        let report = zeta_counterexample::<Q>().unwrap();
        assert!(report.closed_form_matches);
        assert_eq!(report.closed_form_max_gap, Q::zero());
        assert!(report.pass);
    }

    #[test]
    fn three_wise_independence_holds_but_four_wise_fails() {
        assert!(input_coordinates_three_wise_independent::<Q>().unwrap());
    }

    #[test]
    fn works_in_float_mode_too() {
        let report = zeta_counterexample::<f64>().unwrap();
        assert!(report.pass);
        assert!(report.joint_max_deviation > 0.5);
    }
}
