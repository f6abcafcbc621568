//! Finite sample spaces, random variables, and σ-algebras as partitions.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use alloc::{format, vec};

use super::scalar::{total, Scalar};
use super::ExactError;

/// An enumerated probability space: labelled atoms with positive weights.
///
/// Zero-mass atoms are pruned at construction, so almost-sure statements
/// become everywhere statements on the retained atoms.
#[derive(Clone, Debug)]
pub struct FiniteSpace<W: Scalar> {
    labels: Vec<String>,
    weights: Vec<W>,
}

impl<W: Scalar> FiniteSpace<W> {
    /// Builds a space from labelled weights, dropping zero-mass atoms.
    pub fn new(atoms: Vec<(String, W)>) -> Result<Arc<Self>, ExactError> {
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        for (label, w) in atoms {
            if w < W::zero() {
                return Err(ExactError::NegativeWeight);
            }
            if w.is_zero() {
                continue;
            }
            labels.push(label);
            weights.push(w);
        }
        if weights.is_empty() {
            return Err(ExactError::EmptySpace);
        }
        let mass = total(weights.iter().cloned());
        if (mass - W::one()).abs() > W::mass_tolerance() {
            return Err(ExactError::TotalMassNotOne);
        }
        Ok(Arc::new(FiniteSpace { labels, weights }))
    }

    /// Uniform distribution over the given labels.
    pub fn uniform(labels: Vec<String>) -> Result<Arc<Self>, ExactError> {
        let n = labels.len();
        if n == 0 {
            return Err(ExactError::EmptySpace);
        }
        let w = W::ratio(1, n as i64);
        Self::new(labels.into_iter().map(|l| (l, w.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weight(&self, atom: usize) -> &W {
        &self.weights[atom]
    }

    pub fn label(&self, atom: usize) -> &str {
        &self.labels[atom]
    }

    /// Probability of a set of atoms.
    pub fn prob(&self, atoms: &[usize]) -> W {
        total(atoms.iter().map(|&i| self.weights[i].clone()))
    }

    fn structurally_eq(&self, other: &Self) -> bool {
        self.labels == other.labels
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.approx_eq(b))
    }
}

/// True when two space handles denote the same space.
pub fn same_space<W: Scalar>(a: &Arc<FiniteSpace<W>>, b: &Arc<FiniteSpace<W>>) -> bool {
    Arc::ptr_eq(a, b) || a.structurally_eq(b)
}

/// A random variable: one value tuple per atom.
#[derive(Clone, Debug)]
pub struct Rv<W: Scalar> {
    space: Arc<FiniteSpace<W>>,
    values: Vec<W>,
    arity: usize,
}

impl<W: Scalar> Rv<W> {
    /// Atom-major flat values: `values[atom * arity + coord]`.
    pub fn new(
        space: Arc<FiniteSpace<W>>,
        values: Vec<W>,
        arity: usize,
    ) -> Result<Self, ExactError> {
        if arity == 0 {
            return Err(ExactError::EmptyInput);
        }
        if values.len() != space.len() * arity {
            return Err(ExactError::LengthMismatch {
                expected: space.len() * arity,
                got: values.len(),
            });
        }
        Ok(Rv {
            space,
            values,
            arity,
        })
    }

    /// Single-coordinate variable.
    pub fn scalar(space: Arc<FiniteSpace<W>>, values: Vec<W>) -> Result<Self, ExactError> {
        Self::new(space, values, 1)
    }

    /// Builds the value tuple of each atom from a closure.
    pub fn from_fn(
        space: Arc<FiniteSpace<W>>,
        arity: usize,
        mut f: impl FnMut(usize) -> Vec<W>,
    ) -> Result<Self, ExactError> {
        let mut values = Vec::with_capacity(space.len() * arity);
        for atom in 0..space.len() {
            let tuple = f(atom);
            if tuple.len() != arity {
                return Err(ExactError::LengthMismatch {
                    expected: arity,
                    got: tuple.len(),
                });
            }
            values.extend(tuple);
        }
        Self::new(space, values, arity)
    }

    pub fn constant(space: Arc<FiniteSpace<W>>, value: W) -> Self {
        let n = space.len();
        Rv {
            space,
            values: vec![value; n],
            arity: 1,
        }
    }

    pub fn space(&self) -> &Arc<FiniteSpace<W>> {
        &self.space
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn value(&self, atom: usize) -> &[W] {
        &self.values[atom * self.arity..(atom + 1) * self.arity]
    }

    /// Projection on one coordinate.
    pub fn component(&self, coord: usize) -> Rv<W> {
        assert!(coord < self.arity, "coordinate out of range");
        Rv {
            space: self.space.clone(),
            values: (0..self.space.len())
                .map(|atom| self.values[atom * self.arity + coord].clone())
                .collect(),
            arity: 1,
        }
    }

    /// Applies a pointwise map to the value tuples.
    pub fn map(&self, arity: usize, mut f: impl FnMut(&[W]) -> Vec<W>) -> Result<Rv<W>, ExactError> {
        Rv::from_fn(self.space.clone(), arity, |atom| f(self.value(atom)))
    }

    /// Stacks several variables on one space into a tuple-valued variable.
    pub fn tuple(parts: &[&Rv<W>]) -> Result<Rv<W>, ExactError> {
        let first = parts.first().ok_or(ExactError::EmptyInput)?;
        for p in parts {
            if !same_space(&first.space, &p.space) {
                return Err(ExactError::MismatchedSpaces);
            }
        }
        let arity = total_arity(parts);
        Rv::from_fn(first.space.clone(), arity, |atom| {
            let mut tuple = Vec::with_capacity(arity);
            for p in parts {
                tuple.extend(p.value(atom).iter().cloned());
            }
            tuple
        })
    }

    /// Expectation of each coordinate.
    pub fn mean(&self) -> Vec<W> {
        (0..self.arity)
            .map(|c| {
                total(
                    (0..self.space.len())
                        .map(|atom| self.values[atom * self.arity + c].clone() * self.space.weight(atom).clone()),
                )
            })
            .collect()
    }

    /// Largest absolute coordinate difference over all atoms.
    pub fn max_abs_diff(&self, other: &Rv<W>) -> Result<W, ExactError> {
        if !same_space(&self.space, &other.space) {
            return Err(ExactError::MismatchedSpaces);
        }
        if self.arity != other.arity {
            return Err(ExactError::LengthMismatch {
                expected: self.arity,
                got: other.arity,
            });
        }
        let mut worst = W::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = (a.clone() - b.clone()).abs();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }
}

fn total_arity<W: Scalar>(parts: &[&Rv<W>]) -> usize {
    parts.iter().map(|p| p.arity).sum()
}

/// A partition of atom indices: blocks sorted internally and by first element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Vec<usize>>,
    class: Vec<usize>,
}

impl Partition {
    /// Builds the partition from a class index per atom.
    pub fn from_classes(classes: &[usize]) -> Self {
        let mut order: Vec<usize> = Vec::new();
        let mut relabel: Vec<Option<usize>> = Vec::new();
        let mut class = Vec::with_capacity(classes.len());
        for &c in classes {
            if c >= relabel.len() {
                relabel.resize(c + 1, None);
            }
            let id = *relabel[c].get_or_insert_with(|| {
                order.push(c);
                order.len() - 1
            });
            class.push(id);
        }
        let mut blocks = vec![Vec::new(); order.len()];
        for (atom, &id) in class.iter().enumerate() {
            blocks[id].push(atom);
        }
        Partition { blocks, class }
    }

    /// Validates explicit blocks as a disjoint cover of `0..n`.
    pub fn from_blocks(blocks: Vec<Vec<usize>>, n: usize) -> Result<Self, ExactError> {
        let mut class = vec![usize::MAX; n];
        for (id, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(ExactError::EmptyBlock);
            }
            for &atom in block {
                if atom >= n || class[atom] != usize::MAX {
                    return Err(ExactError::InvalidPartition);
                }
                class[atom] = id;
            }
        }
        if class.iter().any(|&c| c == usize::MAX) {
            return Err(ExactError::InvalidPartition);
        }
        Ok(Partition::from_classes(&class))
    }

    /// One block holding everything: the trivial σ-algebra.
    pub fn trivial(n: usize) -> Self {
        Partition::from_classes(&vec![0; n])
    }

    /// All singletons: the full σ-algebra.
    pub fn discrete(n: usize) -> Self {
        Partition::from_classes(&(0..n).collect::<Vec<_>>())
    }

    pub fn len(&self) -> usize {
        self.class.len()
    }

    pub fn is_empty(&self) -> bool {
        self.class.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.class[atom]
    }

    /// True when every block of `self` lies inside a block of `coarser`.
    pub fn refines(&self, coarser: &Partition) -> bool {
        self.class.len() == coarser.class.len()
            && self.blocks.iter().all(|block| {
                let target = coarser.class[block[0]];
                block.iter().all(|&atom| coarser.class[atom] == target)
            })
    }
}

/// The σ-algebra generated by a list of random variables: atoms grouped by
/// their joint value tuples.
pub fn sigma_of<W: Scalar>(rvs: &[&Rv<W>]) -> Result<Partition, ExactError> {
    let first = rvs.first().ok_or(ExactError::EmptyInput)?;
    for rv in rvs {
        if !same_space(first.space(), rv.space()) {
            return Err(ExactError::MismatchedSpaces);
        }
    }
    let n = first.space().len();
    let mut classes = vec![0usize; n];
    let mut reps: Vec<usize> = Vec::new();
    'atoms: for atom in 0..n {
        for (id, &rep) in reps.iter().enumerate() {
            if rvs
                .iter()
                .all(|rv| tuple_eq(rv.value(atom), rv.value(rep)))
            {
                classes[atom] = id;
                continue 'atoms;
            }
        }
        reps.push(atom);
        classes[atom] = reps.len() - 1;
    }
    Ok(Partition::from_classes(&classes))
}

fn tuple_eq<W: Scalar>(a: &[W], b: &[W]) -> bool {
    a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// Common refinement of two partitions.
pub fn join(p: &Partition, q: &Partition) -> Result<Partition, ExactError> {
    if p.len() != q.len() {
        return Err(ExactError::MismatchedSpaces);
    }
    let width = q.blocks().len();
    let classes: Vec<usize> = (0..p.len())
        .map(|atom| p.block_of(atom) * width + q.block_of(atom))
        .collect();
    Ok(Partition::from_classes(&classes))
}

/// Conditional expectation of `h` given the σ-algebra `p`: the weighted
/// average of `h` over each block, constant on the block.
pub fn cond_exp<W: Scalar>(h: &Rv<W>, p: &Partition) -> Result<Rv<W>, ExactError> {
    if p.len() != h.space().len() {
        return Err(ExactError::MismatchedSpaces);
    }
    let arity = h.arity();
    let mut values = vec![W::zero(); h.space().len() * arity];
    for block in p.blocks() {
        let mass = h.space().prob(block);
        if mass.is_zero() {
            return Err(ExactError::EmptyBlock);
        }
        for c in 0..arity {
            let avg = total(
                block
                    .iter()
                    .map(|&atom| h.value(atom)[c].clone() * h.space().weight(atom).clone()),
            ) / mass.clone();
            for &atom in block {
                values[atom * arity + c] = avg.clone();
            }
        }
    }
    Rv::new(h.space().clone(), values, arity)
}

/// Debug-friendly label list for a partition on a space.
pub fn describe_blocks<W: Scalar>(space: &FiniteSpace<W>, p: &Partition) -> Vec<String> {
    p.blocks()
        .iter()
        .map(|block| {
            let names: Vec<&str> = block.iter().map(|&a| space.label(a)).collect();
            format!("{{{}}}", names.join(","))
        })
        .collect()
}
