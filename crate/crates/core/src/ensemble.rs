//! Uniform tensor grids over a truncated Euclidean domain, functions sampled
//! on them, and finite families of such functions.
//!
//! The domain `R^dim` is truncated to the box `[-L, L]^dim`. Nodes are
//! enumerated row-major (last axis fastest) and integration uses the
//! tensor-product trapezoidal rule.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::PointCloud;
use crate::sampling::{dirichlet_weights, seeded_rng};
use crate::scalar::{euclidean, norm, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    half_width: T,
    points_per_axis: usize,
    spacing: T,
    axis: Vec<T>,
    axis_weights: Vec<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn new(dim: usize, half_width: T, points_per_axis: usize) -> Result<Arc<Self>> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be positive"));
        }
        if !(half_width > T::zero()) || !half_width.is_finite() {
            return Err(Error::invalid("half_width", "must be positive and finite"));
        }
        if points_per_axis < 2 {
            return Err(Error::invalid("points_per_axis", "must be at least 2"));
        }
        let total = points_per_axis
            .checked_pow(dim as u32)
            .filter(|&t| t <= 50_000_000)
            .ok_or_else(|| Error::invalid("points_per_axis", "grid too large"))?;

        let last = T::from_usize(points_per_axis - 1).unwrap();
        let spacing = (half_width + half_width) / last;
        // symmetric formula keeps the centre node and endpoints exact
        let axis: Vec<T> = (0..points_per_axis)
            .map(|i| half_width * (T::from_usize(2 * i).unwrap() - last) / last)
            .collect();
        let axis_weights: Vec<T> = (0..points_per_axis)
            .map(|i| {
                if i == 0 || i + 1 == points_per_axis {
                    spacing * T::lit(0.5)
                } else {
                    spacing
                }
            })
            .collect();

        let mut nodes = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        for _ in 0..total {
            let mut w = T::one();
            for &i in &idx {
                nodes.push(axis[i]);
                w = w * axis_weights[i];
            }
            weights.push(w);
            for d in (0..dim).rev() {
                idx[d] += 1;
                if idx[d] < points_per_axis {
                    break;
                }
                idx[d] = 0;
            }
        }

        Ok(Arc::new(Grid {
            dim,
            half_width,
            points_per_axis,
            spacing,
            axis,
            axis_weights,
            nodes,
            weights,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> T {
        self.half_width
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn node(&self, i: usize) -> &[T] {
        &self.nodes[i * self.dim..(i + 1) * self.dim]
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.nodes.chunks_exact(self.dim)
    }

    /// Trapezoidal quadrature weights, one per node.
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn axis(&self) -> &[T] {
        &self.axis
    }

    pub fn axis_weights(&self) -> &[T] {
        &self.axis_weights
    }

    pub fn multi_index(&self, mut i: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for d in (0..self.dim).rev() {
            idx[d] = i % self.points_per_axis;
            i /= self.points_per_axis;
        }
        idx
    }

    /// Flat index of a multi-index, `None` when outside the grid.
    pub fn flat_index(&self, idx: &[isize]) -> Option<usize> {
        let mut flat = 0usize;
        for &i in idx {
            if i < 0 || i as usize >= self.points_per_axis {
                return None;
            }
            flat = flat * self.points_per_axis + i as usize;
        }
        Some(flat)
    }

    fn slack(&self) -> T {
        self.spacing * T::lit(1e-9)
    }

    /// Nodes inside the sub-box `[-l, l]^dim`.
    pub fn nodes_in_box(&self, l: T) -> Vec<usize> {
        let lim = l + self.slack();
        (0..self.len())
            .filter(|&i| self.node(i).iter().all(|x| x.abs() <= lim))
            .collect()
    }

    /// Nodes in the closed Euclidean ball `|x| <= r`.
    pub fn nodes_in_ball(&self, r: T) -> Vec<usize> {
        let lim = r + self.slack();
        (0..self.len()).filter(|&i| norm(self.node(i)) <= lim).collect()
    }

    /// Integral of node values under the trapezoidal rule.
    pub fn integrate(&self, values: &[T]) -> T {
        self.weights.iter().zip(values).map(|(&w, &v)| w * v).sum()
    }
}

pub type GridRef<T> = Arc<Grid<T>>;

pub(crate) fn same_grid<T: Scalar>(a: &GridRef<T>, b: &GridRef<T>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A function `X -> R^m` sampled at every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    grid: GridRef<T>,
    codomain_dim: usize,
    values: Vec<T>,
}

impl<T: Scalar> SampledFunction<T> {
    /// `values` is node-major: the `m` components of node 0, then node 1, ...
    pub fn new(grid: &GridRef<T>, codomain_dim: usize, values: Vec<T>) -> Result<Self> {
        if codomain_dim == 0 {
            return Err(Error::invalid("codomain_dim", "must be positive"));
        }
        if values.len() != grid.len() * codomain_dim {
            return Err(Error::invalid(
                "values",
                format!("expected {} values, found {}", grid.len() * codomain_dim, values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(SampledFunction {
            grid: Arc::clone(grid),
            codomain_dim,
            values,
        })
    }

    pub fn from_fn(grid: &GridRef<T>, codomain_dim: usize, f: impl Fn(&[T]) -> Vec<T>) -> Result<Self> {
        let mut values = Vec::with_capacity(grid.len() * codomain_dim);
        for x in grid.nodes() {
            let v = f(x);
            if v.len() != codomain_dim {
                return Err(Error::CodomainMismatch {
                    left: codomain_dim,
                    right: v.len(),
                });
            }
            values.extend(v);
        }
        Self::new(grid, codomain_dim, values)
    }

    pub fn from_scalar_fn(grid: &GridRef<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        Self::new(grid, 1, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: &GridRef<T>, value: &[T]) -> Result<Self> {
        Self::new(
            grid,
            value.len(),
            value.iter().copied().cycle().take(grid.len() * value.len()).collect(),
        )
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn codomain_dim(&self) -> usize {
        self.codomain_dim
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, node: usize) -> &[T] {
        &self.values[node * self.codomain_dim..(node + 1) * self.codomain_dim]
    }

    /// Scalar value at a node; only meaningful for `m = 1`.
    pub fn scalar(&self, node: usize) -> T {
        self.values[node * self.codomain_dim]
    }

    pub fn scaled(&self, s: T) -> Self {
        SampledFunction {
            grid: Arc::clone(&self.grid),
            codomain_dim: self.codomain_dim,
            values: self.values.iter().map(|&v| v * s).collect(),
        }
    }

    /// `max_x |f(x)|`.
    pub fn sup_norm(&self) -> T {
        self.values
            .chunks_exact(self.codomain_dim)
            .map(norm)
            .fold(T::zero(), T::max)
    }

    /// First node with a negative value, if any.
    pub fn first_negative(&self) -> Option<(usize, T)> {
        self.values
            .iter()
            .position(|&v| v < T::zero())
            .map(|i| (i / self.codomain_dim, self.values[i]))
    }
}

fn check_pair<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<()> {
    if !same_grid(&f.grid, &g.grid) {
        return Err(Error::GridMismatch);
    }
    if f.codomain_dim != g.codomain_dim {
        return Err(Error::CodomainMismatch {
            left: f.codomain_dim,
            right: g.codomain_dim,
        });
    }
    Ok(())
}

/// Discrete sup metric: `max over nodes of |f(x) - g(x)|`.
pub fn sup_distance<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>) -> Result<T> {
    check_pair(f, g)?;
    Ok((0..f.grid.len())
        .map(|i| euclidean(f.value(i), g.value(i)))
        .fold(T::zero(), T::max))
}

/// Sup metric restricted to the node subset `subset`.
pub fn restricted_distance<T: Scalar>(f: &SampledFunction<T>, g: &SampledFunction<T>, subset: &[usize]) -> Result<T> {
    check_pair(f, g)?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = f.grid.len();
    let mut d = T::zero();
    for &i in subset {
        if i >= n {
            return Err(Error::invalid("subset", format!("node {i} outside grid of {n} nodes")));
        }
        d = d.max(euclidean(f.value(i), g.value(i)));
    }
    Ok(d)
}

/// A nonempty finite family of sampled functions on one grid with a common
/// codomain dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionEnsemble<T> {
    grid: GridRef<T>,
    members: Vec<SampledFunction<T>>,
}

impl<T: Scalar> FunctionEnsemble<T> {
    pub fn new(members: Vec<SampledFunction<T>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::invalid("members", "ensemble must have at least one member"))?;
        for m in &members[1..] {
            check_pair(first, m)?;
        }
        Ok(FunctionEnsemble {
            grid: Arc::clone(&first.grid),
            members,
        })
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn members(&self) -> &[SampledFunction<T>] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn codomain_dim(&self) -> usize {
        self.members[0].codomain_dim
    }

    /// Cloud of member values `{f(x) : f in F}` at one node.
    pub fn values_at(&self, node: usize) -> PointCloud<T> {
        let m = self.codomain_dim();
        let mut coords = Vec::with_capacity(self.len() * m);
        for f in &self.members {
            coords.extend_from_slice(f.value(node));
        }
        PointCloud::from_flat(m, coords).expect("ensembles are nonempty")
    }

    /// Pointwise scaling of every member.
    pub fn scaled(&self, s: T) -> Self {
        FunctionEnsemble {
            grid: Arc::clone(&self.grid),
            members: self.members.iter().map(|f| f.scaled(s)).collect(),
        }
    }

    /// Members `indices` in the given order; indices may repeat.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let members = indices
            .iter()
            .map(|&i| {
                self.members
                    .get(i)
                    .cloned()
                    .ok_or_else(|| Error::invalid("indices", format!("member {i} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(members)
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut members = self.members.clone();
        members.extend(other.members.iter().cloned());
        Self::new(members)
    }

    /// `F` followed by `count` random convex combinations of its members,
    /// with Dirichlet(1,...,1) weights drawn from `seed`.
    ///
    /// A combination is formed as `f_0 + sum_i w_i (f_i - f_0)` and clamped to
    /// the component-wise envelope of the members, so combinations of
    /// identical values reproduce that value exactly.
    pub fn convex_mix(&self, count: usize, seed: u64) -> Self {
        let mut rng = seeded_rng(seed);
        let n = self.len();
        let m = self.codomain_dim();
        let len = self.grid.len() * m;
        let base = self.members[0].values();
        let (lo, hi): (Vec<T>, Vec<T>) = (0..len)
            .map(|j| {
                self.members
                    .iter()
                    .fold((T::infinity(), T::neg_infinity()), |(lo, hi), f| {
                        (lo.min(f.values[j]), hi.max(f.values[j]))
                    })
            })
            .unzip();

        let mut members = self.members.clone();
        for _ in 0..count {
            let w: Vec<T> = dirichlet_weights(&mut rng, n).into_iter().map(T::lit).collect();
            let values = (0..len)
                .map(|j| {
                    let mut v = base[j];
                    for (f, &wi) in self.members.iter().zip(&w).skip(1) {
                        v = v + wi * (f.values[j] - base[j]);
                    }
                    v.max(lo[j]).min(hi[j])
                })
                .collect();
            members.push(SampledFunction {
                grid: Arc::clone(&self.grid),
                codomain_dim: m,
                values,
            });
        }
        FunctionEnsemble {
            grid: Arc::clone(&self.grid),
            members,
        }
    }
}

/// Nested node sets `S_1 ⊂ S_2 ⊂ ... ⊂ S_N` exhausting the grid, with `S_n`
/// the nodes of `[-L_n, L_n]^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct SaturatingSequence<T> {
    grid: GridRef<T>,
    half_widths: Vec<T>,
    levels: Vec<Vec<usize>>,
}

impl<T: Scalar> SaturatingSequence<T> {
    /// Boxes of half-widths `L_n = n L / levels`.
    pub fn uniform(grid: &GridRef<T>, levels: usize) -> Result<Self> {
        if levels == 0 || levels > grid.points_per_axis() {
            return Err(Error::invalid(
                "levels",
                format!("must lie in 1..={}", grid.points_per_axis()),
            ));
        }
        let count = T::from_usize(levels).unwrap();
        let half_widths: Vec<T> = (1..=levels)
            .map(|n| grid.half_width() * T::from_usize(n).unwrap() / count)
            .collect();
        Self::from_half_widths(grid, half_widths)
    }

    /// Boxes with the given strictly increasing half-widths; the last must
    /// cover the whole grid.
    pub fn from_half_widths(grid: &GridRef<T>, half_widths: Vec<T>) -> Result<Self> {
        if half_widths.is_empty() {
            return Err(Error::invalid("levels", "need at least one level"));
        }
        if half_widths.windows(2).any(|w| !(w[0] < w[1])) || !(half_widths[0] > T::zero()) {
            return Err(Error::invalid(
                "levels",
                "half-widths must be positive and strictly increasing",
            ));
        }
        let levels: Vec<Vec<usize>> = half_widths.iter().map(|&l| grid.nodes_in_box(l)).collect();
        if levels[0].is_empty() {
            return Err(Error::invalid("levels", "innermost box contains no grid node"));
        }
        if levels.windows(2).any(|w| w[0].len() >= w[1].len()) {
            return Err(Error::invalid(
                "levels",
                "grid too coarse: consecutive boxes contain the same nodes",
            ));
        }
        if levels.last().unwrap().len() != grid.len() {
            return Err(Error::invalid("levels", "last box must cover the whole grid"));
        }
        Ok(SaturatingSequence {
            grid: Arc::clone(grid),
            half_widths,
            levels,
        })
    }

    pub fn grid(&self) -> &GridRef<T> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn half_widths(&self) -> &[T] {
        &self.half_widths
    }

    /// Nodes of level `n`, counted from 1.
    pub fn level(&self, n: usize) -> Result<&[usize]> {
        if n == 0 || n > self.levels.len() {
            return Err(Error::LevelOutOfRange {
                level: n,
                levels: self.levels.len(),
            });
        }
        Ok(&self.levels[n - 1])
    }
}

pub fn make_saturating<T: Scalar>(grid: &GridRef<T>, levels: usize) -> Result<SaturatingSequence<T>> {
    SaturatingSequence::uniform(grid, levels)
}

pub fn scale_ensemble<T: Scalar>(f: &FunctionEnsemble<T>, s: T) -> FunctionEnsemble<T> {
    f.scaled(s)
}

pub fn convex_mix<T: Scalar>(f: &FunctionEnsemble<T>, count: usize, seed: u64) -> FunctionEnsemble<T> {
    f.convex_mix(count, seed)
}
