//! Compatibility structures: paired stage-wise σ-algebras on value grids.
//!
//! A structure fixes the finite value grids of the two variables and, per
//! stage α, a partition of each grid.  Pulling a grid partition back through
//! a random variable yields the stage-α σ-algebra generated by that variable
//! on the sample space.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::scalar::Scalar;
use super::space::{Partition, Rv};
use super::ExactError;

/// Finite list of distinct value tuples a variable may take.
#[derive(Clone, Debug)]
pub struct ValueGrid<W: Scalar> {
    points: Vec<Vec<W>>,
    arity: usize,
}

impl<W: Scalar> ValueGrid<W> {
    pub fn new(points: Vec<Vec<W>>) -> Result<Self, ExactError> {
        let first = points.first().ok_or(ExactError::EmptyInput)?;
        let arity = first.len();
        if arity == 0 {
            return Err(ExactError::EmptyInput);
        }
        for p in &points {
            if p.len() != arity {
                return Err(ExactError::LengthMismatch {
                    expected: arity,
                    got: p.len(),
                });
            }
        }
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                if tuples_eq(&points[i], &points[j]) {
                    return Err(ExactError::InvalidPartition);
                }
            }
        }
        Ok(ValueGrid { points, arity })
    }

    /// Grid of scalar integer points.
    pub fn integers(values: &[i64]) -> Result<Self, ExactError> {
        Self::new(values.iter().map(|&v| vec![W::from_int(v)]).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn point(&self, idx: usize) -> &[W] {
        &self.points[idx]
    }

    pub fn index_of(&self, value: &[W]) -> Option<usize> {
        self.points.iter().position(|p| tuples_eq(p, value))
    }

    /// Partition of the grid by the first `k` coordinates.
    pub fn prefix_partition(&self, k: usize) -> Partition {
        let k = k.min(self.arity);
        if k == 0 {
            return Partition::trivial(self.len());
        }
        let mut classes = vec![0usize; self.len()];
        let mut reps: Vec<usize> = Vec::new();
        'points: for (i, p) in self.points.iter().enumerate() {
            for (id, &rep) in reps.iter().enumerate() {
                if tuples_eq(&p[..k], &self.points[rep][..k]) {
                    classes[i] = id;
                    continue 'points;
                }
            }
            reps.push(i);
            classes[i] = reps.len() - 1;
        }
        Partition::from_classes(&classes)
    }

    pub fn structurally_eq(&self, other: &Self) -> bool {
        self.arity == other.arity
            && self.points.len() == other.points.len()
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(a, b)| tuples_eq(a, b))
    }

    /// Short display label for a grid point.
    pub fn point_label(&self, idx: usize) -> String {
        let parts: Vec<String> = self.points[idx].iter().map(|v| format!("{v}")).collect();
        format!("({})", parts.join(","))
    }
}

fn tuples_eq<W: Scalar>(a: &[W], b: &[W]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// A real-valued test function on a grid, tabulated point by point.
#[derive(Clone, Debug)]
pub struct GridFn<W: Scalar> {
    pub label: String,
    values: Vec<W>,
}

impl<W: Scalar> GridFn<W> {
    pub fn new(label: String, values: Vec<W>) -> Self {
        GridFn { label, values }
    }

    /// Indicator of a single grid point.
    pub fn indicator(grid: &ValueGrid<W>, idx: usize) -> Self {
        let mut values = vec![W::zero(); grid.len()];
        values[idx] = W::one();
        GridFn {
            label: format!("1{}", grid.point_label(idx)),
            values,
        }
    }

    /// Indicator of a set of grid points.
    pub fn indicator_of(grid: &ValueGrid<W>, points: &[usize], label: String) -> Self {
        let mut values = vec![W::zero(); grid.len()];
        for &i in points {
            values[i] = W::one();
        }
        let _ = grid;
        GridFn { label, values }
    }

    pub fn value(&self, idx: usize) -> &W {
        &self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Evaluates the function along a grid-valued random variable.
    pub fn along(&self, rv: &Rv<W>, grid: &ValueGrid<W>) -> Result<Rv<W>, ExactError> {
        if self.values.len() != grid.len() {
            return Err(ExactError::LengthMismatch {
                expected: grid.len(),
                got: self.values.len(),
            });
        }
        let indices = grid_indices(rv, grid)?;
        Rv::from_fn(rv.space().clone(), 1, |atom| {
            vec![self.values[indices[atom]].clone()]
        })
    }
}

/// Grid index of each atom's value, or an error if a value is off-grid.
pub fn grid_indices<W: Scalar>(rv: &Rv<W>, grid: &ValueGrid<W>) -> Result<Vec<usize>, ExactError> {
    if rv.arity() != grid.arity() {
        return Err(ExactError::LengthMismatch {
            expected: grid.arity(),
            got: rv.arity(),
        });
    }
    (0..rv.space().len())
        .map(|atom| grid.index_of(rv.value(atom)).ok_or(ExactError::ValueOffGrid))
        .collect()
}

/// Pulls a grid partition back through a random variable: the σ-algebra the
/// partition generates on the sample space.
pub fn pullback<W: Scalar>(
    rv: &Rv<W>,
    grid: &ValueGrid<W>,
    blocks: &Partition,
) -> Result<Partition, ExactError> {
    if blocks.len() != grid.len() {
        return Err(ExactError::LengthMismatch {
            expected: grid.len(),
            got: blocks.len(),
        });
    }
    let indices = grid_indices(rv, grid)?;
    let classes: Vec<usize> = indices.iter().map(|&i| blocks.block_of(i)).collect();
    Ok(Partition::from_classes(&classes))
}

/// One stage of a compatibility structure.
#[derive(Clone, Debug)]
pub struct AlphaLevel {
    pub label: String,
    pub x_blocks: Partition,
    pub y_blocks: Partition,
}

/// Declared order on the stages.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AlphaOrder {
    /// No order: stages checked independently.
    Unordered,
    /// Stages totally ordered by list position.
    Chain,
    /// Explicit comparable pairs `(earlier, later)`.
    Pairs(Vec<(usize, usize)>),
}

/// The indexed family of paired grid σ-algebras.
#[derive(Clone, Debug)]
pub struct CompatStructure<W: Scalar> {
    x_grid: ValueGrid<W>,
    y_grid: ValueGrid<W>,
    levels: Vec<AlphaLevel>,
    order: AlphaOrder,
    h_set: Option<Vec<GridFn<W>>>,
}

impl<W: Scalar> CompatStructure<W> {
    pub fn new(
        x_grid: ValueGrid<W>,
        y_grid: ValueGrid<W>,
        levels: Vec<AlphaLevel>,
        order: AlphaOrder,
    ) -> Result<Self, ExactError> {
        if levels.is_empty() {
            return Err(ExactError::EmptyInput);
        }
        for level in &levels {
            if level.x_blocks.len() != x_grid.len() || level.y_blocks.len() != y_grid.len() {
                return Err(ExactError::LengthMismatch {
                    expected: x_grid.len(),
                    got: level.x_blocks.len(),
                });
            }
        }
        let structure = CompatStructure {
            x_grid,
            y_grid,
            levels,
            order,
            h_set: None,
        };
        structure.validate_order()?;
        Ok(structure)
    }

    /// Restricts the check to an explicit list of test functions on the
    /// output grid (a partial compatibility condition).
    pub fn with_h_set(mut self, h_set: Vec<GridFn<W>>) -> Result<Self, ExactError> {
        for h in &h_set {
            if h.len() != self.y_grid.len() {
                return Err(ExactError::LengthMismatch {
                    expected: self.y_grid.len(),
                    got: h.len(),
                });
            }
        }
        self.h_set = Some(h_set);
        Ok(self)
    }

    fn validate_order(&self) -> Result<(), ExactError> {
        for (early, late) in self.comparable_pairs() {
            let a = &self.levels[early];
            let b = &self.levels[late];
            if !b.x_blocks.refines(&a.x_blocks) || !b.y_blocks.refines(&a.y_blocks) {
                return Err(ExactError::NotAFiltration);
            }
        }
        Ok(())
    }

    /// All declared `(earlier, later)` stage pairs.
    pub fn comparable_pairs(&self) -> Vec<(usize, usize)> {
        match &self.order {
            AlphaOrder::Unordered => Vec::new(),
            AlphaOrder::Chain => {
                let n = self.levels.len();
                let mut pairs = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        pairs.push((i, j));
                    }
                }
                pairs
            }
            AlphaOrder::Pairs(pairs) => pairs.clone(),
        }
    }

    pub fn x_grid(&self) -> &ValueGrid<W> {
        &self.x_grid
    }

    pub fn y_grid(&self) -> &ValueGrid<W> {
        &self.y_grid
    }

    pub fn levels(&self) -> &[AlphaLevel] {
        &self.levels
    }

    pub fn order(&self) -> &AlphaOrder {
        &self.order
    }

    pub fn is_partial(&self) -> bool {
        self.h_set.is_some()
    }

    /// Stage-α σ-algebra generated by an input-grid variable.
    pub fn stage_y(&self, y: &Rv<W>, alpha: usize) -> Result<Partition, ExactError> {
        pullback(y, &self.y_grid, &self.levels[alpha].y_blocks)
    }

    /// Stage-α σ-algebra generated by a solution-grid variable.
    pub fn stage_x(&self, x: &Rv<W>, alpha: usize) -> Result<Partition, ExactError> {
        pullback(x, &self.x_grid, &self.levels[alpha].x_blocks)
    }

    /// Test functions spanning the output side: the declared partial set, or
    /// by default the indicators of every output grid point.
    pub fn h_functions(&self) -> Vec<GridFn<W>> {
        match &self.h_set {
            Some(set) => set.clone(),
            None => (0..self.y_grid.len())
                .map(|i| GridFn::indicator(&self.y_grid, i))
                .collect(),
        }
    }

    /// Test functions spanning the stage-α σ-algebra on the solution grid:
    /// indicators of the stage's blocks.
    pub fn x_stage_functions(&self, alpha: usize) -> Vec<GridFn<W>> {
        self.levels[alpha]
            .x_blocks
            .blocks()
            .iter()
            .enumerate()
            .map(|(b, block)| {
                GridFn::indicator_of(&self.x_grid, block, format!("1[x-block {b}]"))
            })
            .collect()
    }
}
