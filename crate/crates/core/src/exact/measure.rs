//! Joint laws on value grids and their factorizations.
//!
//! A joint law factors as a kernel (conditional law of the solution given
//! the input value) against the input marginal.  The kernel in turn yields a
//! sampler: a deterministic map from (input value, uniform draw) to a
//! solution value whose pushforward reproduces the joint law exactly,
//! because the unit interval is split at exact cumulative-mass breakpoints.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::scalar::{total, Scalar};
use super::space::{FiniteSpace, Rv};
use super::structure::{grid_indices, ValueGrid};
use super::ExactError;

/// A probability mass table over pairs of grid points.
#[derive(Clone, Debug)]
pub struct JointMeasure<W: Scalar> {
    x_grid: Arc<ValueGrid<W>>,
    y_grid: Arc<ValueGrid<W>>,
    /// Input-major: `mass[y * x_len + x]`.
    mass: Vec<W>,
}

impl<W: Scalar> JointMeasure<W> {
    pub fn new(
        x_grid: Arc<ValueGrid<W>>,
        y_grid: Arc<ValueGrid<W>>,
        mass: Vec<W>,
    ) -> Result<Self, ExactError> {
        if mass.len() != x_grid.len() * y_grid.len() {
            return Err(ExactError::LengthMismatch {
                expected: x_grid.len() * y_grid.len(),
                got: mass.len(),
            });
        }
        if mass.iter().any(|m| *m < W::zero()) {
            return Err(ExactError::NegativeWeight);
        }
        let sum = total(mass.iter().cloned());
        if (sum - W::one()).abs() > W::mass_tolerance() {
            return Err(ExactError::TotalMassNotOne);
        }
        Ok(JointMeasure {
            x_grid,
            y_grid,
            mass,
        })
    }

    /// The joint distribution of a solution/input pair of variables.
    pub fn law_of(
        x: &Rv<W>,
        y: &Rv<W>,
        x_grid: Arc<ValueGrid<W>>,
        y_grid: Arc<ValueGrid<W>>,
    ) -> Result<Self, ExactError> {
        if !crate::exact::space::same_space(x.space(), y.space()) {
            return Err(ExactError::MismatchedSpaces);
        }
        let xi = grid_indices(x, &x_grid)?;
        let yi = grid_indices(y, &y_grid)?;
        let mut mass = alloc::vec![W::zero(); x_grid.len() * y_grid.len()];
        for atom in 0..x.space().len() {
            let slot = yi[atom] * x_grid.len() + xi[atom];
            mass[slot] = mass[slot].clone() + x.space().weight(atom).clone();
        }
        JointMeasure::new(x_grid, y_grid, mass)
    }

    pub fn x_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.y_grid
    }

    pub fn mass_at(&self, x: usize, y: usize) -> &W {
        &self.mass[y * self.x_grid.len() + x]
    }

    pub fn y_marginal(&self) -> Vec<W> {
        (0..self.y_grid.len())
            .map(|y| total((0..self.x_grid.len()).map(|x| self.mass_at(x, y).clone())))
            .collect()
    }

    pub fn x_marginal(&self) -> Vec<W> {
        (0..self.x_grid.len())
            .map(|x| total((0..self.y_grid.len()).map(|y| self.mass_at(x, y).clone())))
            .collect()
    }

    pub fn same_grids(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.x_grid, &other.x_grid) || self.x_grid.structurally_eq(&other.x_grid))
            && (Arc::ptr_eq(&self.y_grid, &other.y_grid)
                || self.y_grid.structurally_eq(&other.y_grid))
    }

    /// Mass-table equality on shared grids.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.same_grids(other)
            && self
                .mass
                .iter()
                .zip(&other.mass)
                .all(|(a, b)| a.approx_eq(b))
    }

    /// Builds the sample space of positive-mass pairs together with the
    /// coordinate variables, so the exact checks can run on the law itself.
    pub fn realize(&self) -> Result<(Arc<FiniteSpace<W>>, Rv<W>, Rv<W>), ExactError> {
        let mut atoms = Vec::new();
        let mut pairs = Vec::new();
        for y in 0..self.y_grid.len() {
            for x in 0..self.x_grid.len() {
                let m = self.mass_at(x, y);
                if !m.is_zero() {
                    atoms.push((
                        format!(
                            "x{}y{}",
                            self.x_grid.point_label(x),
                            self.y_grid.point_label(y)
                        ),
                        m.clone(),
                    ));
                    pairs.push((x, y));
                }
            }
        }
        let space = FiniteSpace::new(atoms)?;
        let x_rv = Rv::from_fn(space.clone(), self.x_grid.arity(), |atom| {
            self.x_grid.point(pairs[atom].0).to_vec()
        })?;
        let y_rv = Rv::from_fn(space.clone(), self.y_grid.arity(), |atom| {
            self.y_grid.point(pairs[atom].1).to_vec()
        })?;
        Ok((space, x_rv, y_rv))
    }
}

/// Conditional law of the solution value given each retained input value.
#[derive(Clone, Debug)]
pub struct Kernel<W: Scalar> {
    x_grid: Arc<ValueGrid<W>>,
    y_grid: Arc<ValueGrid<W>>,
    /// Input grid indices with positive marginal mass.
    retained: Vec<usize>,
    /// One distribution over the solution grid per retained input.
    rows: Vec<Vec<W>>,
    /// Marginal mass of each retained input.
    nu: Vec<W>,
}

impl<W: Scalar> Kernel<W> {
    pub fn x_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.y_grid
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    /// Row for a full-grid input index, if that input has positive mass.
    pub fn row(&self, y: usize) -> Option<&[W]> {
        self.retained
            .iter()
            .position(|&r| r == y)
            .map(|i| self.rows[i].as_slice())
    }

    pub fn rows(&self) -> &[Vec<W>] {
        &self.rows
    }

    pub fn nu(&self) -> &[W] {
        &self.nu
    }

    /// Multiplies the kernel back against the marginal.  Round-trips the
    /// disintegrated measure exactly.
    pub fn reassemble(&self) -> Result<JointMeasure<W>, ExactError> {
        let mut mass = alloc::vec![W::zero(); self.x_grid.len() * self.y_grid.len()];
        for (i, &y) in self.retained.iter().enumerate() {
            for x in 0..self.x_grid.len() {
                mass[y * self.x_grid.len() + x] = self.nu[i].clone() * self.rows[i][x].clone();
            }
        }
        JointMeasure::new(self.x_grid.clone(), self.y_grid.clone(), mass)
    }
}

/// Factors a joint law into the conditional rows over its input marginal.
/// Zero-mass input values are dropped.
pub fn disintegrate<W: Scalar>(mu: &JointMeasure<W>) -> Kernel<W> {
    let marginal = mu.y_marginal();
    let mut retained = Vec::new();
    let mut rows = Vec::new();
    let mut nu = Vec::new();
    for (y, m) in marginal.into_iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let row: Vec<W> = (0..mu.x_grid().len())
            .map(|x| mu.mass_at(x, y).clone() / m.clone())
            .collect();
        retained.push(y);
        rows.push(row);
        nu.push(m);
    }
    Kernel {
        x_grid: mu.x_grid().clone(),
        y_grid: mu.y_grid().clone(),
        retained,
        rows,
        nu,
    }
}

/// A measurable assignment of a solution value to each input value.
#[derive(Clone, Debug)]
pub struct StrongMap<W: Scalar> {
    x_grid: Arc<ValueGrid<W>>,
    y_grid: Arc<ValueGrid<W>>,
    assign: BTreeMap<usize, usize>,
}

impl<W: Scalar> StrongMap<W> {
    pub fn new(
        x_grid: Arc<ValueGrid<W>>,
        y_grid: Arc<ValueGrid<W>>,
        assign: BTreeMap<usize, usize>,
    ) -> Result<Self, ExactError> {
        for (&y, &x) in &assign {
            if y >= y_grid.len() || x >= x_grid.len() {
                return Err(ExactError::ValueOffGrid);
            }
        }
        Ok(StrongMap {
            x_grid,
            y_grid,
            assign,
        })
    }

    pub fn get(&self, y: usize) -> Option<usize> {
        self.assign.get(&y).copied()
    }

    pub fn x_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.y_grid
    }

    /// The graph measure: mass of each input value sits on its image.
    pub fn graph_measure(&self, nu: &[W]) -> Result<JointMeasure<W>, ExactError> {
        if nu.len() != self.y_grid.len() {
            return Err(ExactError::LengthMismatch {
                expected: self.y_grid.len(),
                got: nu.len(),
            });
        }
        let mut mass = alloc::vec![W::zero(); self.x_grid.len() * self.y_grid.len()];
        for (y, m) in nu.iter().enumerate() {
            if m.is_zero() {
                continue;
            }
            let x = self.get(y).ok_or(ExactError::DomainMismatch)?;
            mass[y * self.x_grid.len() + x] = m.clone();
        }
        JointMeasure::new(self.x_grid.clone(), self.y_grid.clone(), mass)
    }
}

/// Returns the input-to-solution assignment when every kernel row is
/// degenerate; `None` when any input genuinely randomizes.
pub fn is_strong<W: Scalar>(k: &Kernel<W>) -> Option<StrongMap<W>> {
    let mut assign = BTreeMap::new();
    for (i, &y) in k.retained.iter().enumerate() {
        let mut hit = None;
        for (x, mass) in k.rows[i].iter().enumerate() {
            if !mass.is_zero() {
                if hit.is_some() {
                    return None;
                }
                hit = Some(x);
            }
        }
        assign.insert(y, hit?);
    }
    Some(StrongMap {
        x_grid: k.x_grid.clone(),
        y_grid: k.y_grid.clone(),
        assign,
    })
}

/// The even coin-flip mixture of two strong maps under a shared input law.
pub fn mix_solutions<W: Scalar>(
    f1: &StrongMap<W>,
    f2: &StrongMap<W>,
    nu: &[W],
) -> Result<JointMeasure<W>, ExactError> {
    if !(Arc::ptr_eq(&f1.y_grid, &f2.y_grid) || f1.y_grid.structurally_eq(&f2.y_grid))
        || !(Arc::ptr_eq(&f1.x_grid, &f2.x_grid) || f1.x_grid.structurally_eq(&f2.x_grid))
    {
        return Err(ExactError::GridMismatch);
    }
    if nu.len() != f1.y_grid.len() {
        return Err(ExactError::LengthMismatch {
            expected: f1.y_grid.len(),
            got: nu.len(),
        });
    }
    let half = W::ratio(1, 2);
    let mut mass = alloc::vec![W::zero(); f1.x_grid.len() * f1.y_grid.len()];
    for (y, m) in nu.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let x1 = f1.get(y).ok_or(ExactError::DomainMismatch)?;
        let x2 = f2.get(y).ok_or(ExactError::DomainMismatch)?;
        let row_base = y * f1.x_grid.len();
        mass[row_base + x1] = mass[row_base + x1].clone() + half.clone() * m.clone();
        mass[row_base + x2] = mass[row_base + x2].clone() + half.clone() * m.clone();
    }
    JointMeasure::new(f1.x_grid.clone(), f1.y_grid.clone(), mass)
}

/// One sampler row: consecutive cells of the unit interval with a solution
/// grid index each.  Cells are left-closed right-open except the last.
#[derive(Clone, Debug)]
pub struct SamplerRow<W: Scalar> {
    /// Cumulative breakpoints: starts at 0, ends at 1, one cell per target.
    pub breaks: Vec<W>,
    pub targets: Vec<usize>,
}

impl<W: Scalar> SamplerRow<W> {
    /// Cell lookup for a draw in the closed unit interval.
    pub fn pick(&self, u: &W) -> usize {
        let last = self.targets.len() - 1;
        for (i, &target) in self.targets.iter().enumerate() {
            if i == last || *u < self.breaks[i + 1] {
                return target;
            }
        }
        unreachable!("sampler row has at least one cell")
    }

    pub fn cell_width(&self, i: usize) -> W {
        self.breaks[i + 1].clone() - self.breaks[i].clone()
    }
}

/// Deterministic noise-outsourcing table: input value plus uniform draw in
/// the unit interval selects a solution value.
#[derive(Clone, Debug)]
pub struct SamplerTable<W: Scalar> {
    x_grid: Arc<ValueGrid<W>>,
    y_grid: Arc<ValueGrid<W>>,
    retained: Vec<usize>,
    rows: Vec<SamplerRow<W>>,
    nu: Vec<W>,
}

impl<W: Scalar> SamplerTable<W> {
    pub fn x_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &Arc<ValueGrid<W>> {
        &self.y_grid
    }

    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn nu(&self) -> &[W] {
        &self.nu
    }

    pub fn row(&self, y: usize) -> Option<&SamplerRow<W>> {
        self.retained
            .iter()
            .position(|&r| r == y)
            .map(|i| &self.rows[i])
    }

    /// Solution grid index for an input grid index and a unit-interval draw.
    pub fn apply(&self, y: usize, u: &W) -> Result<usize, ExactError> {
        let row = self.row(y).ok_or(ExactError::DomainMismatch)?;
        Ok(row.pick(u))
    }

    /// The exact pushforward of (input, uniform draw) through the table:
    /// mass of each cell goes to its target.  Reproduces the law the table
    /// was derived from.
    pub fn induced_measure(&self) -> Result<JointMeasure<W>, ExactError> {
        let mut mass = alloc::vec![W::zero(); self.x_grid.len() * self.y_grid.len()];
        for (i, &y) in self.retained.iter().enumerate() {
            let row = &self.rows[i];
            for (cell, &target) in row.targets.iter().enumerate() {
                let slot = y * self.x_grid.len() + target;
                mass[slot] = mass[slot].clone() + self.nu[i].clone() * row.cell_width(cell);
            }
        }
        JointMeasure::new(self.x_grid.clone(), self.y_grid.clone(), mass)
    }
}

/// Splits the unit interval at the cumulative masses of each kernel row, in
/// solution grid order, skipping zero-mass cells.
pub fn sampler_from_kernel<W: Scalar>(k: &Kernel<W>) -> SamplerTable<W> {
    let rows = k
        .rows
        .iter()
        .map(|row| {
            let mut breaks = alloc::vec![W::zero()];
            let mut targets = Vec::new();
            let mut acc = W::zero();
            for (x, mass) in row.iter().enumerate() {
                if mass.is_zero() {
                    continue;
                }
                acc = acc + mass.clone();
                breaks.push(acc.clone());
                targets.push(x);
            }
            SamplerRow { breaks, targets }
        })
        .collect();
    SamplerTable {
        x_grid: k.x_grid.clone(),
        y_grid: k.y_grid.clone(),
        retained: k.retained.clone(),
        rows,
        nu: k.nu.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
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

    #[test]
    fn disintegration_reproduces_forced_ratios() {
        let (xg, yg) = grids();
        // mass {(0,0):1/10, (1,0):3/10, (0,1):6/10}
        let mu = JointMeasure::new(
            xg,
            yg,
            vec![q(1, 10), q(3, 10), q(6, 10), Q::zero()],
        )
        .unwrap();
        let k = disintegrate(&mu);
        assert_eq!(k.row(0).unwrap(), &[q(1, 4), q(3, 4)]);
        assert_eq!(k.row(1).unwrap(), &[q(1, 1), q(0, 1)]);
        assert!(mu.approx_eq(&k.reassemble().unwrap()));
    }

    #[test]
    fn product_measure_rows_equal_the_solution_marginal() {
        let (xg, yg) = grids();
        // independent: x ~ (1/4, 3/4), y ~ (1/3, 2/3)
        let mut mass = vec![Q::zero(); 4];
        let px = [q(1, 4), q(3, 4)];
        let py = [q(1, 3), q(2, 3)];
        for y in 0..2 {
            for x in 0..2 {
                mass[y * 2 + x] = px[x].clone() * py[y].clone();
            }
        }
        let mu = JointMeasure::new(xg, yg, mass).unwrap();
        let k = disintegrate(&mu);
        for &y in k.retained() {
            assert_eq!(k.row(y).unwrap(), &px);
        }
        assert!(is_strong(&k).is_none());
    }

    #[test]
    fn degenerate_rows_give_a_strong_map() {
        let (xg, yg) = grids();
        // x = 1 - y deterministically, y uniform
        let mu = JointMeasure::new(
            xg,
            yg,
            vec![Q::zero(), q(1, 2), q(1, 2), Q::zero()],
        )
        .unwrap();
        let k = disintegrate(&mu);
        let f = is_strong(&k).expect("deterministic kernel");
        assert_eq!(f.get(0), Some(1));
        assert_eq!(f.get(1), Some(0));
        assert!(f
            .graph_measure(&mu.y_marginal())
            .unwrap()
            .approx_eq(&mu));
    }

    #[test]
    fn mixture_of_distinct_maps_is_not_strong_and_rows_average() {
        let (xg, yg) = grids();
        let id = StrongMap::new(
            xg.clone(),
            yg.clone(),
            [(0usize, 0usize), (1, 1)].into_iter().collect(),
        )
        .unwrap();
        let flip = StrongMap::new(
            xg.clone(),
            yg.clone(),
            [(0usize, 1usize), (1, 0)].into_iter().collect(),
        )
        .unwrap();
        let nu = [q(1, 3), q(2, 3)];
        let mixed = mix_solutions(&id, &flip, &nu).unwrap();
        let k = disintegrate(&mixed);
        assert!(is_strong(&k).is_none());
        // each retained row is the half/half average of the two graphs
        for &y in k.retained() {
            assert_eq!(k.row(y).unwrap(), &[q(1, 2), q(1, 2)]);
        }
        // mixing a map with itself stays strong
        let same = mix_solutions(&id, &id, &nu).unwrap();
        assert!(is_strong(&disintegrate(&same)).is_some());
    }

    #[test]
    fn sampler_cells_have_row_masses_and_push_forward_exactly() {
        let (xg, yg) = grids();
        let mu = JointMeasure::new(
            xg,
            yg,
            vec![q(1, 10), q(3, 10), q(6, 10), Q::zero()],
        )
        .unwrap();
        let table = sampler_from_kernel(&disintegrate(&mu));
        let row = table.row(0).unwrap();
        assert_eq!(row.breaks, vec![Q::zero(), q(1, 4), Q::one()]);
        assert_eq!(row.targets, vec![0, 1]);
        // boundary draws: left-closed cells, last cell closed on the right
        assert_eq!(table.apply(0, &Q::zero()).unwrap(), 0);
        assert_eq!(table.apply(0, &q(1, 4)).unwrap(), 1);
        assert_eq!(table.apply(0, &Q::one()).unwrap(), 1);
        assert_eq!(table.apply(1, &q(99, 100)).unwrap(), 0);
        assert!(table.induced_measure().unwrap().approx_eq(&mu));
    }

    #[test]
    fn degenerate_row_is_a_single_full_cell() {
        let (xg, yg) = grids();
        let mu = JointMeasure::new(
            xg,
            yg,
            vec![Q::zero(), q(1, 2), q(1, 2), Q::zero()],
        )
        .unwrap();
        let table = sampler_from_kernel(&disintegrate(&mu));
        let row = table.row(0).unwrap();
        assert_eq!(row.targets.len(), 1);
        assert_eq!(row.breaks, vec![Q::zero(), Q::one()]);
    }

    #[test]
    fn law_of_round_trips_through_realize() {
        let (xg, yg) = grids();
        let mu = JointMeasure::new(
            xg.clone(),
            yg.clone(),
            vec![q(1, 10), q(3, 10), q(6, 10), Q::zero()],
        )
        .unwrap();
        let (_, x_rv, y_rv) = mu.realize().unwrap();
        let back = JointMeasure::law_of(&x_rv, &y_rv, xg, yg).unwrap();
        assert!(back.approx_eq(&mu));
    }
}
