//! Seeded generators of finite models and measure families for the property
//! suites.
//!
//! Every generator is a pure function of `(seed, trial)` through a dedicated
//! counter stream, so failing trials can be replayed by number.  Sizes stay
//! small by construction (at most 8 input values, 8 solution values, 3
//! stages) so each enumeration check costs well under a millisecond.
//!
//! Stream purposes: `exact-compatible-model`, `exact-anticipating-model`,
//! `exact-arbitrary-model`, `exact-measure-family`, `exact-measure-pair`.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::stream::{Stream, StreamKey};

use super::measure::JointMeasure;
use super::scalar::Scalar;
use super::space::{FiniteSpace, Partition, Rv};
use super::structure::{AlphaLevel, AlphaOrder, CompatStructure, ValueGrid};
use super::ExactError;

/// A generated model: sample space, solution, input, and the structure they
/// are checked against.
#[derive(Clone, Debug)]
pub struct ExactModel<W: Scalar> {
    pub space: Arc<FiniteSpace<W>>,
    pub x: Rv<W>,
    pub y: Rv<W>,
    pub structure: CompatStructure<W>,
}

/// A generated family of admissible laws sharing one input marginal,
/// together with the structure every member satisfies.
#[derive(Clone, Debug)]
pub struct MeasureFamily<W: Scalar> {
    pub measures: Vec<JointMeasure<W>>,
    pub structure: CompatStructure<W>,
}

fn pick(s: &mut Stream, n: usize) -> usize {
    s.next_below(n as u64) as usize
}

/// Random probability vector with denominator equal to the drawn total mass.
fn random_masses<W: Scalar>(s: &mut Stream, n: usize, allow_zero: bool) -> Vec<W> {
    loop {
        let m: Vec<u64> = (0..n)
            .map(|_| {
                if allow_zero {
                    s.next_below(4)
                } else {
                    1 + s.next_below(3)
                }
            })
            .collect();
        let d: u64 = m.iter().sum();
        if d == 0 {
            continue;
        }
        return m.iter().map(|&k| W::ratio(k as i64, d as i64)).collect();
    }
}

/// Nested partitions of `0..n`, coarsest first.
fn nested_chain(s: &mut Stream, n: usize, levels: usize) -> Vec<Partition> {
    let fine_classes: Vec<usize> = (0..n).map(|_| pick(s, n)).collect();
    let mut chain = vec![Partition::from_classes(&fine_classes)];
    for _ in 1..levels {
        let prev = chain.last().unwrap();
        let groups = prev.blocks().len();
        let merge: Vec<usize> = (0..groups).map(|_| pick(s, groups)).collect();
        let classes: Vec<usize> = (0..n).map(|i| merge[prev.block_of(i)]).collect();
        chain.push(Partition::from_classes(&classes));
    }
    chain.reverse();
    chain
}

/// Coordinate ranges of a product input grid, total size at most 8.
fn input_shape(s: &mut Stream) -> Vec<usize> {
    match pick(s, 3) {
        0 => vec![2 + pick(s, 6)],
        1 => {
            let pairs = [[2, 2], [2, 3], [3, 2], [2, 4], [4, 2]];
            pairs[pick(s, pairs.len())].to_vec()
        }
        _ => vec![2, 2, 2],
    }
}

fn product_grid<W: Scalar>(shape: &[usize]) -> ValueGrid<W> {
    let total: usize = shape.iter().product();
    let mut points = Vec::with_capacity(total);
    for mut idx in 0..total {
        let mut tuple = Vec::with_capacity(shape.len());
        for &size in shape {
            tuple.push(W::from_int((idx % size) as i64));
            idx /= size;
        }
        points.push(tuple);
    }
    ValueGrid::new(points).expect("product grid points are distinct")
}

/// Multi-index digits of a flat product-grid index.
fn digits(mut idx: usize, shape: &[usize]) -> Vec<usize> {
    shape
        .iter()
        .map(|&size| {
            let d = idx % size;
            idx /= size;
            d
        })
        .collect()
}

fn prefix_class(idx: usize, shape: &[usize], depth: usize) -> usize {
    digits(idx, shape)
        .into_iter()
        .take(depth)
        .zip(shape)
        .fold(0usize, |acc, (d, &size)| acc * size + d + 1)
}

struct ModelDraw<W: Scalar> {
    space: Arc<FiniteSpace<W>>,
    y: Rv<W>,
    y_grid: ValueGrid<W>,
    y_shape: Vec<usize>,
    xi_shape: Vec<usize>,
    /// Per atom: (input grid index, noise configuration index).
    atom_coords: Vec<(usize, usize)>,
}

/// Draws the input law and the independent noise, realized as a product
/// space over positive-mass combinations.
fn draw_base<W: Scalar>(s: &mut Stream) -> Result<ModelDraw<W>, ExactError> {
    let y_shape = input_shape(s);
    let y_grid = product_grid::<W>(&y_shape);
    let nu: Vec<W> = random_masses(s, y_grid.len(), true);
    let xi_shape: Vec<usize> = (0..1 + pick(s, 2)).map(|_| 2 + pick(s, 2)).collect();
    let xi_total: usize = xi_shape.iter().product();
    let xi_weights: Vec<W> = random_masses(s, xi_total, false);

    let mut atoms = Vec::new();
    let mut atom_coords = Vec::new();
    for (yi, m) in nu.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        for (ci, wv) in xi_weights.iter().enumerate() {
            atoms.push((format!("y{yi}c{ci}"), m.clone() * wv.clone()));
            atom_coords.push((yi, ci));
        }
    }
    let space = FiniteSpace::new(atoms)?;
    let y = Rv::from_fn(space.clone(), y_grid.arity(), |atom| {
        y_grid.point(atom_coords[atom].0).to_vec()
    })?;
    Ok(ModelDraw {
        space,
        y,
        y_grid,
        y_shape,
        xi_shape,
        atom_coords,
    })
}

/// Stage depths into the input coordinates, nondecreasing.
fn stage_depths(s: &mut Stream, stages: usize, max_depth: usize) -> Vec<usize> {
    let mut depths = Vec::with_capacity(stages);
    let mut current = pick(s, max_depth + 1);
    for _ in 0..stages {
        depths.push(current);
        current += pick(s, max_depth - current + 1);
    }
    depths
}

/// Builds the solution variable from per-stage lookup tables and assembles
/// the structure with prefix σ-algebras on both grids.
fn assemble_model<W: Scalar>(
    base: ModelDraw<W>,
    stage_values: Vec<Vec<i64>>,
    y_depths: &[usize],
) -> Result<ExactModel<W>, ExactError> {
    let stages = stage_values.len();
    let x = Rv::from_fn(base.space.clone(), stages, |atom| {
        stage_values
            .iter()
            .map(|vals| W::from_int(vals[atom]))
            .collect()
    })?;

    let mut x_points: Vec<Vec<W>> = Vec::new();
    for atom in 0..base.space.len() {
        let v = x.value(atom).to_vec();
        if !x_points
            .iter()
            .any(|p| p.iter().zip(&v).all(|(a, b)| a.approx_eq(b)))
        {
            x_points.push(v);
        }
    }
    let x_grid = ValueGrid::new(x_points)?;

    let levels: Vec<AlphaLevel> = (0..stages)
        .map(|k| AlphaLevel {
            label: format!("a{}", k + 1),
            x_blocks: x_grid.prefix_partition(k + 1),
            y_blocks: base.y_grid.prefix_partition(y_depths[k]),
        })
        .collect();
    let structure = CompatStructure::new(x_grid, base.y_grid.clone(), levels, AlphaOrder::Chain)?;
    Ok(ExactModel {
        space: base.space,
        x,
        y: base.y,
        structure,
    })
}

/// A model whose stage-k solution coordinate reads only the stage-k input
/// prefix and independent noise, so every stage check must pass.
pub fn compatible_model<W: Scalar>(seed: u64, trial: u64) -> Result<ExactModel<W>, ExactError> {
    let mut s = Stream::new(StreamKey::new(seed, "exact-compatible-model", trial));
    let base = draw_base::<W>(&mut s)?;
    let stages = 1 + pick(&mut s, 3);
    let y_depths = stage_depths(&mut s, stages, base.y_shape.len());
    let xi_depths = stage_depths(&mut s, stages, base.xi_shape.len());

    let mut stage_values = Vec::with_capacity(stages);
    for k in 0..stages {
        // lookup table keyed by (input prefix class, noise prefix class)
        let mut table: Vec<(usize, usize, i64)> = Vec::new();
        let values: Vec<i64> = base
            .atom_coords
            .iter()
            .map(|&(yi, ci)| {
                let ykey = prefix_class(yi, &base.y_shape, y_depths[k]);
                let ckey = prefix_class(ci, &base.xi_shape, xi_depths[k]);
                match table.iter().find(|&&(a, b, _)| (a, b) == (ykey, ckey)) {
                    Some(&(_, _, v)) => v,
                    None => {
                        let v = pick(&mut s, 2) as i64;
                        table.push((ykey, ckey, v));
                        v
                    }
                }
            })
            .collect();
        stage_values.push(values);
    }
    assemble_model(base, stage_values, &y_depths)
}

/// A model whose last solution coordinate copies an input coordinate beyond
/// every stage's prefix, leaking future information.
pub fn anticipating_model<W: Scalar>(seed: u64, trial: u64) -> Result<ExactModel<W>, ExactError> {
    let mut s = Stream::new(StreamKey::new(seed, "exact-anticipating-model", trial));
    let base = loop {
        let candidate = draw_base::<W>(&mut s)?;
        if candidate.y_shape.len() >= 2 {
            break candidate;
        }
    };
    let coords = base.y_shape.len();
    // stage depths never reach the last input coordinate
    let y_depths: Vec<usize> = {
        let first = pick(&mut s, coords - 1);
        let second = first + pick(&mut s, coords - first);
        vec![first, second.min(coords - 1)]
    };
    let leak_coord = coords - 1;

    let mut first_table: Vec<(usize, usize, i64)> = Vec::new();
    let first_values: Vec<i64> = base
        .atom_coords
        .iter()
        .map(|&(yi, ci)| {
            let ykey = prefix_class(yi, &base.y_shape, y_depths[0]);
            let ckey = prefix_class(ci, &base.xi_shape, base.xi_shape.len());
            match first_table.iter().find(|&&(a, b, _)| (a, b) == (ykey, ckey)) {
                Some(&(_, _, v)) => v,
                None => {
                    let v = pick(&mut s, 2) as i64;
                    first_table.push((ykey, ckey, v));
                    v
                }
            }
        })
        .collect();
    let leak_values: Vec<i64> = base
        .atom_coords
        .iter()
        .map(|&(yi, _)| digits(yi, &base.y_shape)[leak_coord] as i64)
        .collect();
    assemble_model(base, vec![first_values, leak_values], &y_depths)
}

/// A model with no structural guarantee either way: stage coordinates read
/// the full input and noise through arbitrary lookup tables.
pub fn arbitrary_model<W: Scalar>(seed: u64, trial: u64) -> Result<ExactModel<W>, ExactError> {
    let mut s = Stream::new(StreamKey::new(seed, "exact-arbitrary-model", trial));
    let base = draw_base::<W>(&mut s)?;
    let stages = 1 + pick(&mut s, 3);
    let y_depths = stage_depths(&mut s, stages, base.y_shape.len());
    let stage_values: Vec<Vec<i64>> = (0..stages)
        .map(|_| {
            let mut table: Vec<(usize, usize, i64)> = Vec::new();
            base.atom_coords
                .iter()
                .map(|&(yi, ci)| match table
                    .iter()
                    .find(|&&(a, b, _)| (a, b) == (yi, ci))
                {
                    Some(&(_, _, v)) => v,
                    None => {
                        let v = pick(&mut s, 2) as i64;
                        table.push((yi, ci, v));
                        v
                    }
                })
                .collect()
        })
        .collect();
    assemble_model(base, stage_values, &y_depths)
}

/// Shared pieces of a measure family: grids, input marginal, stage chain.
struct FamilyBase<W: Scalar> {
    x_grid: Arc<ValueGrid<W>>,
    y_grid: Arc<ValueGrid<W>>,
    nu: Vec<W>,
    y_chain: Vec<Partition>,
}

fn draw_family_base<W: Scalar>(s: &mut Stream) -> FamilyBase<W> {
    let ny = 2 + pick(s, 4);
    let nx = 2 + pick(s, 3);
    let y_grid = Arc::new(ValueGrid::<W>::integers(&(0..ny as i64).collect::<Vec<_>>()).unwrap());
    let x_grid = Arc::new(ValueGrid::<W>::integers(&(0..nx as i64).collect::<Vec<_>>()).unwrap());
    let nu = random_masses::<W>(s, ny, true);
    let stages = 1 + pick(s, 2);
    let y_chain = nested_chain(s, ny, stages);
    FamilyBase {
        x_grid,
        y_grid,
        nu,
        y_chain,
    }
}

fn family_structure<W: Scalar>(
    base: &FamilyBase<W>,
    x_blocks_per_level: impl Fn(usize) -> Partition,
) -> CompatStructure<W> {
    let levels: Vec<AlphaLevel> = base
        .y_chain
        .iter()
        .enumerate()
        .map(|(k, y_blocks)| AlphaLevel {
            label: format!("a{}", k + 1),
            x_blocks: x_blocks_per_level(k),
            y_blocks: y_blocks.clone(),
        })
        .collect();
    CompatStructure::new(
        base.x_grid.as_ref().clone(),
        base.y_grid.as_ref().clone(),
        levels,
        AlphaOrder::Chain,
    )
    .expect("family levels are nested by construction")
}

fn kernel_measure<W: Scalar>(
    base: &FamilyBase<W>,
    rows: &[Vec<W>],
) -> Result<JointMeasure<W>, ExactError> {
    let nx = base.x_grid.len();
    let mut mass = vec![W::zero(); nx * base.y_grid.len()];
    for (y, m) in base.nu.iter().enumerate() {
        for x in 0..nx {
            mass[y * nx + x] = m.clone() * rows[y][x].clone();
        }
    }
    JointMeasure::new(base.x_grid.clone(), base.y_grid.clone(), mass)
}

/// A family of admissible laws sharing one input marginal, every member
/// compatible with the returned structure.
///
/// Three regimes rotate by trial: all-strong graphs (free solution side),
/// arbitrary kernels (free solution side), and kernels constant on the
/// coarsest input stage (full solution side).  Families may repeat a member
/// to exercise set semantics.
pub fn measure_family<W: Scalar>(seed: u64, trial: u64) -> Result<MeasureFamily<W>, ExactError> {
    let mut s = Stream::new(StreamKey::new(seed, "exact-measure-family", trial));
    let base = draw_family_base::<W>(&mut s);
    let nx = base.x_grid.len();
    let ny = base.y_grid.len();
    let count = 1 + pick(&mut s, 3);
    let mode = pick(&mut s, 3);

    let mut measures = Vec::with_capacity(count);
    match mode {
        0 => {
            // strong graphs; duplicates arise when draws repeat
            let mut maps: Vec<Vec<usize>> = Vec::new();
            for _ in 0..count {
                let reuse = !maps.is_empty() && pick(&mut s, 3) == 0;
                let map: Vec<usize> = if reuse {
                    maps[pick(&mut s, maps.len())].clone()
                } else {
                    (0..ny).map(|_| pick(&mut s, nx)).collect()
                };
                let rows: Vec<Vec<W>> = map
                    .iter()
                    .map(|&x| {
                        let mut row = vec![W::zero(); nx];
                        row[x] = W::one();
                        row
                    })
                    .collect();
                measures.push(kernel_measure(&base, &rows)?);
                maps.push(map);
            }
            let structure = family_structure(&base, |_| Partition::trivial(nx));
            Ok(MeasureFamily {
                measures,
                structure,
            })
        }
        1 => {
            for _ in 0..count {
                let rows: Vec<Vec<W>> =
                    (0..ny).map(|_| random_masses(&mut s, nx, true)).collect();
                measures.push(kernel_measure(&base, &rows)?);
            }
            let structure = family_structure(&base, |_| Partition::trivial(nx));
            Ok(MeasureFamily {
                measures,
                structure,
            })
        }
        _ => {
            // rows constant on the coarsest input stage keep the full
            // solution σ-algebra harmless at every stage
            let coarsest = &base.y_chain[0];
            for _ in 0..count {
                let block_rows: Vec<Vec<W>> = (0..coarsest.blocks().len())
                    .map(|_| random_masses(&mut s, nx, true))
                    .collect();
                let rows: Vec<Vec<W>> = (0..ny)
                    .map(|y| block_rows[coarsest.block_of(y)].clone())
                    .collect();
                measures.push(kernel_measure(&base, &rows)?);
            }
            let structure = family_structure(&base, |_| Partition::discrete(nx));
            Ok(MeasureFamily {
                measures,
                structure,
            })
        }
    }
}

/// Two laws sharing one input marginal, both compatible with a structure
/// that reveals the full solution at every stage.
pub fn compatible_measure_pair<W: Scalar>(
    seed: u64,
    trial: u64,
) -> Result<(JointMeasure<W>, JointMeasure<W>, CompatStructure<W>), ExactError> {
    let mut s = Stream::new(StreamKey::new(seed, "exact-measure-pair", trial));
    let base = draw_family_base::<W>(&mut s);
    let nx = base.x_grid.len();
    let ny = base.y_grid.len();
    let coarsest = &base.y_chain[0];
    let draw = |s: &mut Stream| -> Result<JointMeasure<W>, ExactError> {
        let block_rows: Vec<Vec<W>> = (0..coarsest.blocks().len())
            .map(|_| random_masses(s, nx, true))
            .collect();
        let rows: Vec<Vec<W>> = (0..ny)
            .map(|y| block_rows[coarsest.block_of(y)].clone())
            .collect();
        kernel_measure(&base, &rows)
    };
    let mu1 = draw(&mut s)?;
    let mu2 = draw(&mut s)?;
    let structure = family_structure(&base, |_| Partition::discrete(nx));
    Ok((mu1, mu2, structure))
}
