//! Couplings of two solution laws over one shared input, and the uniqueness
//! equivalence they decide.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::measure::{disintegrate, is_strong, sampler_from_kernel, JointMeasure};
use super::scalar::{total, Scalar};
use super::space::{FiniteSpace, Rv};
use super::structure::CompatStructure;
use super::ExactError;

/// Two solution copies and the shared input, realized on a product space.
#[derive(Clone, Debug)]
pub struct Coupling<W: Scalar> {
    pub space: Arc<FiniteSpace<W>>,
    pub x1: Rv<W>,
    pub x2: Rv<W>,
    pub y: Rv<W>,
}

impl<W: Scalar> Coupling<W> {
    /// Probability that the two copies disagree.
    pub fn prob_copies_differ(&self) -> W {
        total((0..self.space.len()).filter_map(|atom| {
            let a = self.x1.value(atom);
            let b = self.x2.value(atom);
            let differ = a.iter().zip(b).any(|(p, q)| !p.approx_eq(q));
            differ.then(|| self.space.weight(atom).clone())
        }))
    }
}

/// Realizes both laws over one input draw with independent uniform noise:
/// atoms are (input value, noise cell for copy 1, noise cell for copy 2),
/// each copy reading only its own noise.  The pair (copy i, input) has law
/// `mu_i` exactly.
pub fn canonical_coupling<W: Scalar>(
    mu1: &JointMeasure<W>,
    mu2: &JointMeasure<W>,
) -> Result<Coupling<W>, ExactError> {
    if !mu1.same_grids(mu2) {
        return Err(ExactError::GridMismatch);
    }
    let nu1 = mu1.y_marginal();
    let nu2 = mu2.y_marginal();
    if !nu1.iter().zip(&nu2).all(|(a, b)| a.approx_eq(b)) {
        return Err(ExactError::MarginalMismatch);
    }
    let t1 = sampler_from_kernel(&disintegrate(mu1));
    let t2 = sampler_from_kernel(&disintegrate(mu2));

    let mut atoms = Vec::new();
    let mut coords = Vec::new();
    for (y, m) in nu1.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let row1 = t1.row(y).ok_or(ExactError::DomainMismatch)?;
        let row2 = t2.row(y).ok_or(ExactError::DomainMismatch)?;
        for (c1, &x1) in row1.targets.iter().enumerate() {
            for (c2, &x2) in row2.targets.iter().enumerate() {
                let w = m.clone() * row1.cell_width(c1) * row2.cell_width(c2);
                if w.is_zero() {
                    continue;
                }
                atoms.push((format!("y{y}u{c1}v{c2}"), w));
                coords.push((x1, x2, y));
            }
        }
    }
    let space = FiniteSpace::new(atoms)?;
    let xg = mu1.x_grid();
    let yg = mu1.y_grid();
    let x1 = Rv::from_fn(space.clone(), xg.arity(), |atom| {
        xg.point(coords[atom].0).to_vec()
    })?;
    let x2 = Rv::from_fn(space.clone(), xg.arity(), |atom| {
        xg.point(coords[atom].1).to_vec()
    })?;
    let y = Rv::from_fn(space.clone(), yg.arity(), |atom| {
        yg.point(coords[atom].2).to_vec()
    })?;
    Ok(Coupling { space, x1, x2, y })
}

/// Decides both sides of the uniqueness equivalence for a finite family of
/// admissible laws sharing the input marginal, and asserts they agree.
///
/// Side one (pointwise): the family is nonempty and every ordered pair of
/// members, coupled canonically, produces almost surely equal copies.  Side
/// two (unique strong): the family holds exactly one law, and that law is
/// strong.  Duplicate mass tables count once, since the family stands in
/// for a set of laws.  Each member must satisfy the structure's
/// compatibility constraint, and an empty family returns (false, false)
/// without asserting.
pub fn theorem_gyw_check<W: Scalar>(
    measures: &[JointMeasure<W>],
    c: &CompatStructure<W>,
) -> Result<(bool, bool), ExactError> {
    if measures.is_empty() {
        return Ok((false, false));
    }
    let nu = measures[0].y_marginal();
    for (i, mu) in measures.iter().enumerate() {
        if !mu.same_grids(&measures[0]) {
            return Err(ExactError::GridMismatch);
        }
        if !mu
            .y_marginal()
            .iter()
            .zip(&nu)
            .all(|(a, b)| a.approx_eq(b))
        {
            return Err(ExactError::MarginalMismatch);
        }
        let (_, x, y) = mu.realize()?;
        if !super::checks::check_compatibility(&x, &y, c)?.pass {
            return Err(ExactError::IncompatibleFamilyMember { index: i });
        }
    }

    let mut distinct: Vec<&JointMeasure<W>> = Vec::new();
    for mu in measures {
        if !distinct.iter().any(|d| d.approx_eq(mu)) {
            distinct.push(mu);
        }
    }

    let mut pointwise = true;
    'outer: for a in &distinct {
        for b in &distinct {
            let coupling = canonical_coupling(a, b)?;
            if !coupling.prob_copies_differ().approx_zero() {
                pointwise = false;
                break 'outer;
            }
        }
    }

    let unique_strong =
        distinct.len() == 1 && is_strong(&disintegrate(distinct[0])).is_some();

    if pointwise != unique_strong {
        return Err(ExactError::UniquenessEquivalenceViolated {
            pointwise,
            unique_strong,
        });
    }
    Ok((pointwise, unique_strong))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::measure::{mix_solutions, StrongMap};
    use crate::exact::space::Partition;
    use crate::exact::structure::{AlphaLevel, AlphaOrder, ValueGrid};
    use alloc::string::String;
    use alloc::vec;
    use num_rational::BigRational;
    use num_traits::{One, Zero};

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn grids() -> (Arc<ValueGrid<Q>>, Arc<ValueGrid<Q>>) {
        (
            Arc::new(ValueGrid::integers(&[0, 1]).unwrap()),
            Arc::new(ValueGrid::integers(&[0, 1]).unwrap()),
        )
    }

    /// Single unconstrained stage: every law is compatible.
    fn free_structure(xg: &ValueGrid<Q>, yg: &ValueGrid<Q>) -> CompatStructure<Q> {
        CompatStructure::new(
            xg.clone(),
            yg.clone(),
            vec![AlphaLevel {
                label: String::from("a"),
                x_blocks: Partition::trivial(xg.len()),
                y_blocks: Partition::trivial(yg.len()),
            }],
            AlphaOrder::Unordered,
        )
        .unwrap()
    }

    fn strong_identity(xg: &Arc<ValueGrid<Q>>, yg: &Arc<ValueGrid<Q>>) -> JointMeasure<Q> {
        JointMeasure::new(
            xg.clone(),
            yg.clone(),
            vec![q(1, 2), Q::zero(), Q::zero(), q(1, 2)],
        )
        .unwrap()
    }

    fn strong_flip(xg: &Arc<ValueGrid<Q>>, yg: &Arc<ValueGrid<Q>>) -> JointMeasure<Q> {
        JointMeasure::new(
            xg.clone(),
            yg.clone(),
            vec![Q::zero(), q(1, 2), q(1, 2), Q::zero()],
        )
        .unwrap()
    }

    #[test]
    fn coupling_of_a_strong_law_with_itself_never_separates() {
        let (xg, yg) = grids();
        let mu = strong_identity(&xg, &yg);
        let coupling = canonical_coupling(&mu, &mu).unwrap();
        assert_eq!(coupling.prob_copies_differ(), Q::zero());
        // both pair marginals reproduce the law
        let law1 =
            JointMeasure::law_of(&coupling.x1, &coupling.y, xg.clone(), yg.clone()).unwrap();
        let law2 = JointMeasure::law_of(&coupling.x2, &coupling.y, xg, yg).unwrap();
        assert!(law1.approx_eq(&mu));
        assert!(law2.approx_eq(&mu));
    }

    #[test]
    fn coupling_of_identity_with_flip_always_separates() {
        let (xg, yg) = grids();
        let coupling =
            canonical_coupling(&strong_identity(&xg, &yg), &strong_flip(&xg, &yg)).unwrap();
        assert_eq!(coupling.prob_copies_differ(), Q::one());
    }

    #[test]
    fn independent_noise_separates_a_randomizing_law() {
        let (xg, yg) = grids();
        // y uniform, x a fair coin independent of y
        let mu = JointMeasure::new(
            xg.clone(),
            yg.clone(),
            vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
        )
        .unwrap();
        let coupling = canonical_coupling(&mu, &mu).unwrap();
        // the two fresh coins disagree half the time
        assert_eq!(coupling.prob_copies_differ(), q(1, 2));
        let law = JointMeasure::law_of(&coupling.x1, &coupling.y, xg, yg).unwrap();
        assert!(law.approx_eq(&mu));
    }

    #[test]
    fn marginal_mismatch_is_rejected() {
        let (xg, yg) = grids();
        let mu1 = strong_identity(&xg, &yg);
        let skewed = JointMeasure::new(
            xg,
            yg,
            vec![q(1, 3), Q::zero(), Q::zero(), q(2, 3)],
        )
        .unwrap();
        assert_eq!(
            canonical_coupling(&mu1, &skewed).unwrap_err(),
            ExactError::MarginalMismatch
        );
    }

    #[test]
    fn equivalence_one_strong_law() {
        let (xg, yg) = grids();
        let c = free_structure(&xg, &yg);
        let family = vec![strong_identity(&xg, &yg)];
        assert_eq!(theorem_gyw_check(&family, &c).unwrap(), (true, true));
    }

    #[test]
    fn equivalence_non_strong_law_and_two_strong_laws() {
        let (xg, yg) = grids();
        let c = free_structure(&xg, &yg);
        let coin = JointMeasure::new(
            xg.clone(),
            yg.clone(),
            vec![q(1, 4), q(1, 4), q(1, 4), q(1, 4)],
        )
        .unwrap();
        assert_eq!(theorem_gyw_check(&[coin], &c).unwrap(), (false, false));

        let two = vec![strong_identity(&xg, &yg), strong_flip(&xg, &yg)];
        assert_eq!(theorem_gyw_check(&two, &c).unwrap(), (false, false));
    }

    #[test]
    fn duplicates_count_as_one_law() {
        let (xg, yg) = grids();
        let c = free_structure(&xg, &yg);
        let mu = strong_identity(&xg, &yg);
        let family = vec![mu.clone(), mu.clone(), mu];
        assert_eq!(theorem_gyw_check(&family, &c).unwrap(), (true, true));
    }

    #[test]
    fn empty_family_is_doubly_false_without_error() {
        let (xg, yg) = grids();
        let c = free_structure(&xg, &yg);
        assert_eq!(theorem_gyw_check(&[], &c).unwrap(), (false, false));
    }

    #[test]
    fn mixture_member_turns_both_sides_false() {
        let (xg, yg) = grids();
        let c = free_structure(&xg, &yg);
        let id_map = StrongMap::new(
            xg.clone(),
            yg.clone(),
            [(0usize, 0usize), (1, 1)].into_iter().collect(),
        )
        .unwrap();
        let flip_map = StrongMap::new(
            xg.clone(),
            yg.clone(),
            [(0usize, 1usize), (1, 0)].into_iter().collect(),
        )
        .unwrap();
        let nu = [q(1, 2), q(1, 2)];
        let mixed = mix_solutions(&id_map, &flip_map, &nu).unwrap();
        assert_eq!(theorem_gyw_check(&[mixed], &c).unwrap(), (false, false));
    }
}
