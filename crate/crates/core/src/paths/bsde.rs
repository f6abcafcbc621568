//! Backward equations solved by fixed-point iteration on finite binary
//! trees, where conditional expectations are exact weighted sums.

use alloc::vec;
use alloc::vec::Vec;

use super::PathError;

/// Hard cap on tree size: 2^20 leaves.
pub const MAX_DEPTH: usize = 20;

/// A binary scenario tree carrying the driver pair (U, V).
///
/// Level `l` has `2^l` nodes; the children of node `n` are `2n` and `2n + 1`
/// one level down. `branch[l][c]` is the probability of moving from the
/// parent of `c` to `c`, so sibling entries sum to one.
#[derive(Clone, Debug)]
pub struct TreeDriver {
    horizon: f64,
    u: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
    branch: Vec<Vec<f64>>,
    node_prob: Vec<Vec<f64>>,
}

impl TreeDriver {
    pub fn new(
        horizon: f64,
        u: Vec<Vec<f64>>,
        v: Vec<Vec<f64>>,
        branch: Vec<Vec<f64>>,
    ) -> Result<Self, PathError> {
        if !(horizon > 0.0) {
            return Err(PathError::InvalidHorizon);
        }
        if u.len() < 2 {
            return Err(PathError::InvalidSteps);
        }
        let depth = u.len() - 1;
        if depth > MAX_DEPTH {
            return Err(PathError::TreeTooDeep);
        }
        if v.len() != depth + 1 || branch.len() != depth + 1 {
            return Err(PathError::DimensionMismatch {
                expected: depth + 1,
                got: v.len().min(branch.len()),
            });
        }
        for l in 0..=depth {
            let width = 1usize << l;
            if u[l].len() != width || v[l].len() != width || branch[l].len() != width {
                return Err(PathError::DimensionMismatch {
                    expected: width,
                    got: u[l].len(),
                });
            }
        }
        if branch[0][0] != 1.0 {
            return Err(PathError::InvalidProbability);
        }
        for l in 1..=depth {
            for n in 0..1usize << (l - 1) {
                let a = branch[l][2 * n];
                let b = branch[l][2 * n + 1];
                if !(a >= 0.0) || !(b >= 0.0) || (a + b - 1.0).abs() > 1e-12 {
                    return Err(PathError::InvalidProbability);
                }
            }
        }
        let mut node_prob = Vec::with_capacity(depth + 1);
        node_prob.push(vec![1.0]);
        for l in 1..=depth {
            let row: Vec<f64> = (0..1usize << l)
                .map(|c| node_prob[l - 1][c >> 1] * branch[l][c])
                .collect();
            node_prob.push(row);
        }
        Ok(TreeDriver {
            horizon,
            u,
            v,
            branch,
            node_prob,
        })
    }

    /// Equal-probability tree whose V component is a scaled walk: each child
    /// adds or subtracts `step` from the parent's V; U is supplied per level
    /// and node through `u_fn(level, v_value)`.
    pub fn symmetric_walk(
        depth: usize,
        horizon: f64,
        step: f64,
        u_fn: impl Fn(usize, f64) -> f64,
    ) -> Result<Self, PathError> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(PathError::TreeTooDeep);
        }
        let mut v = vec![vec![0.0]];
        let mut branch = vec![vec![1.0]];
        for l in 1..=depth {
            let row: Vec<f64> = (0..1usize << l)
                .map(|c| v[l - 1][c >> 1] + if c & 1 == 0 { step } else { -step })
                .collect();
            v.push(row);
            branch.push(vec![0.5; 1 << l]);
        }
        let u = v
            .iter()
            .enumerate()
            .map(|(l, row)| row.iter().map(|&x| u_fn(l, x)).collect())
            .collect();
        TreeDriver::new(horizon, u, v, branch)
    }

    pub fn depth(&self) -> usize {
        self.u.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.depth() as f64
    }

    pub fn time(&self, level: usize) -> f64 {
        level as f64 * self.dt()
    }

    pub fn u(&self) -> &[Vec<f64>] {
        &self.u
    }

    pub fn v(&self) -> &[Vec<f64>] {
        &self.v
    }

    pub fn node_prob(&self, level: usize, node: usize) -> f64 {
        self.node_prob[level][node]
    }

    /// One conditioning step: expectations of level `l + 1` values seen from
    /// level `l`.
    pub fn backward_step(&self, level: usize, values: &[f64]) -> Vec<f64> {
        (0..1usize << level)
            .map(|n| {
                self.branch[level + 1][2 * n] * values[2 * n]
                    + self.branch[level + 1][2 * n + 1] * values[2 * n + 1]
            })
            .collect()
    }

    /// The martingale closed by the given leaf values: `E[leaf | node]` at
    /// every level.
    pub fn martingale_from_terminal(&self, leaf: &[f64]) -> Vec<Vec<f64>> {
        let depth = self.depth();
        let mut levels = vec![Vec::new(); depth + 1];
        levels[depth] = Vec::from(leaf);
        for l in (0..depth).rev() {
            levels[l] = self.backward_step(l, &levels[l + 1]);
        }
        levels
    }
}

/// The f and its declared dominating bound g with |f| <= g.
///
/// `f` receives the solution only from one step after the current time
/// onward (`x_future` holds levels `j + 1 ..= depth` along the current
/// scenario), which realizes both the one-step time shift and the rule that
/// f may not read the past of the solution. `v_path` carries the driver's V
/// values at all levels of the scenario.
pub trait Generator {
    fn f(&self, s: f64, x_future: &[f64], v_path: &[f64]) -> f64;
    fn bound(&self, s: f64, v_path: &[f64]) -> f64;
}

/// Fixed-point solver output; node tables are indexed like the tree.
#[derive(Clone, Debug)]
pub struct BsdeSolution {
    pub x: Vec<Vec<f64>>,
    pub z: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    pub sup_changes: Vec<f64>,
}

/// For each node, E[sum over j >= level of f(t_j, X, V) dt | node] for the
/// given solution table.
fn conditional_suffix(tree: &TreeDriver, gen: &impl Generator, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let depth = tree.depth();
    let dt = tree.dt();
    let mut numer: Vec<Vec<f64>> = (0..=depth).map(|l| vec![0.0; 1 << l]).collect();
    let mut x_along = vec![0.0; depth + 1];
    let mut v_along = vec![0.0; depth + 1];
    let mut suffix = vec![0.0; depth + 2];
    for leaf in 0..1usize << depth {
        for l in 0..=depth {
            let n = leaf >> (depth - l);
            x_along[l] = x[l][n];
            v_along[l] = tree.v()[l][n];
        }
        suffix[depth] = 0.0;
        for j in (0..depth).rev() {
            suffix[j] = suffix[j + 1] + gen.f(tree.time(j), &x_along[j + 1..], &v_along) * dt;
        }
        let p_leaf = tree.node_prob(depth, leaf);
        for l in 0..=depth {
            let n = leaf >> (depth - l);
            numer[l][n] += p_leaf * suffix[l];
        }
    }
    for l in 0..=depth {
        for n in 0..1usize << l {
            let p = tree.node_prob(l, n);
            numer[l][n] = if p > 0.0 { numer[l][n] / p } else { 0.0 };
        }
    }
    numer
}

/// Picard iteration for `X = U + E[integral of f | node]`, stopping when the
/// sup-norm change over all nodes falls below `tol`.
///
/// On non-convergence the partial result is returned with `converged` false.
/// `z` always holds the conditional integral term recomputed from the final
/// `x`, so `x = u + z` holds node-wise at a fixed point.
pub fn bsde_solve(
    tree: &TreeDriver,
    gen: &impl Generator,
    tol: f64,
    max_iter: usize,
) -> Result<BsdeSolution, PathError> {
    if !(tol > 0.0) || max_iter == 0 {
        return Err(PathError::InvalidProbability);
    }
    let depth = tree.depth();
    let mut x: Vec<Vec<f64>> = tree.u().to_vec();
    let mut sup_changes = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        let cond = conditional_suffix(tree, gen, &x);
        let mut sup = 0.0f64;
        let mut next = Vec::with_capacity(depth + 1);
        for l in 0..=depth {
            let row: Vec<f64> = (0..1usize << l)
                .map(|n| tree.u()[l][n] + cond[l][n])
                .collect();
            for (n, value) in row.iter().enumerate() {
                if !value.is_finite() {
                    return Err(PathError::NonFiniteValue { path: n, step: l });
                }
                sup = sup.max((value - x[l][n]).abs());
            }
            next.push(row);
        }
        x = next;
        iterations += 1;
        sup_changes.push(sup);
        if sup < tol {
            converged = true;
            break;
        }
    }
    let z = conditional_suffix(tree, gen, &x);
    Ok(BsdeSolution {
        x,
        z,
        iterations,
        converged,
        sup_changes,
    })
}

/// Expected total absolute conditional increment of `z` over the finest
/// level partition; on a tree this partition maximizes over all coarser
/// ones.
pub fn conditional_variation(tree: &TreeDriver, z: &[Vec<f64>]) -> f64 {
    let levels: Vec<usize> = (0..=tree.depth()).collect();
    conditional_variation_on(tree, z, &levels)
}

/// The same sum restricted to a sub-partition given by increasing level
/// indices.
pub fn conditional_variation_on(tree: &TreeDriver, z: &[Vec<f64>], levels: &[usize]) -> f64 {
    let mut total = 0.0;
    for pair in levels.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let mut values = z[b].clone();
        for l in (a..b).rev() {
            values = tree.backward_step(l, &values);
        }
        for n in 0..1usize << a {
            total += tree.node_prob(a, n) * (values[n] - z[a][n]).abs();
        }
    }
    total
}

/// E[sum of g(t_j, V) dt over j < depth], the right side of the conditional
/// variation bound.
pub fn integrated_bound(tree: &TreeDriver, gen: &impl Generator) -> f64 {
    let depth = tree.depth();
    let dt = tree.dt();
    let mut v_along = vec![0.0; depth + 1];
    let mut total = 0.0;
    for leaf in 0..1usize << depth {
        for l in 0..=depth {
            v_along[l] = tree.v()[l][leaf >> (depth - l)];
        }
        let mut acc = 0.0;
        for j in 0..depth {
            acc += gen.bound(tree.time(j), &v_along) * dt;
        }
        total += tree.node_prob(depth, leaf) * acc;
    }
    total
}
