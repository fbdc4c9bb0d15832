//! Sparse multi-way contingency tables, category schemes and partitions.
//!
//! Cells are addressed by 0-based coordinate tuples. Internally a table stores
//! only its positive cells as `(linear index, count)` pairs sorted by row-major
//! linear index, which is the same as lexicographic coordinate order. Every
//! reduction walks cells in that order, so results do not depend on hashing or
//! insertion order.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{input, Error, Result};
use crate::scalar::{rel_eq, Scalar};

/// How a variable takes part in category collapsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Treatment {
    /// Any two categories may be merged.
    #[default]
    Nominal,
    /// Only neighbouring categories (in stored order) may be merged.
    Ordinal,
    /// Never collapsed.
    Fixed,
}

impl fmt::Display for Treatment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Treatment::Nominal => "nominal",
            Treatment::Ordinal => "ordinal",
            Treatment::Fixed => "fixed",
        })
    }
}

impl FromStr for Treatment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "nominal" => Ok(Treatment::Nominal),
            "ordinal" => Ok(Treatment::Ordinal),
            "fixed" => Ok(Treatment::Fixed),
            other => input(format!("unknown treatment {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableDef {
    pub name: String,
    /// Category labels; for ordinal variables this is the ordinal order.
    pub categories: Vec<String>,
    pub treatment: Treatment,
}

impl VariableDef {
    pub fn new(name: impl Into<String>, categories: Vec<String>, treatment: Treatment) -> Self {
        VariableDef {
            name: name.into(),
            categories,
            treatment,
        }
    }
}

/// Names, category labels and treatments of the variables of a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryScheme {
    variables: Vec<VariableDef>,
}

impl CategoryScheme {
    pub fn new(variables: Vec<VariableDef>) -> Result<Self> {
        let mut names = HashSet::new();
        for var in &variables {
            if !names.insert(var.name.as_str()) {
                return input(format!("duplicate variable name {:?}", var.name));
            }
            if var.categories.is_empty() {
                return input(format!("variable {:?} has no categories", var.name));
            }
            let mut labels = HashSet::new();
            for label in &var.categories {
                if !labels.insert(label.as_str()) {
                    return input(format!(
                        "duplicate category {:?} in variable {:?}",
                        label, var.name
                    ));
                }
            }
        }
        Ok(CategoryScheme { variables })
    }

    pub fn variables(&self) -> &[VariableDef] {
        &self.variables
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.variables.iter().map(|v| v.categories.len()).collect()
    }

    pub fn treatments(&self) -> Vec<Treatment> {
        self.variables.iter().map(|v| v.treatment).collect()
    }

    pub fn names(&self) -> Vec<&str> {
        self.variables.iter().map(|v| v.name.as_str()).collect()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| v.name == name)
    }
}

fn strides_for(shape: &[usize]) -> Result<(Vec<usize>, usize)> {
    let mut strides = vec![1usize; shape.len()];
    let mut size = 1usize;
    for k in (0..shape.len()).rev() {
        strides[k] = size;
        size = size
            .checked_mul(shape[k])
            .ok_or_else(|| Error::Input(format!("table shape {shape:?} overflows usize")))?;
    }
    Ok((strides, size))
}

/// A nonnegative count array stored as its positive cells.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseTable<T> {
    shape: Vec<usize>,
    strides: Vec<usize>,
    cells: Vec<(usize, T)>,
    total: T,
}

impl<T: Scalar> SparseTable<T> {
    /// Builds a table from coordinate/count entries. Duplicate coordinates are
    /// summed and zero counts dropped.
    pub fn new<I, C>(shape: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, T)>,
        C: AsRef<[usize]>,
    {
        if let Some(k) = shape.iter().position(|&r| r == 0) {
            return input(format!("dimension {k} has no categories"));
        }
        let (strides, _) = strides_for(&shape)?;
        let mut linear = Vec::new();
        for (coords, count) in entries {
            let coords = coords.as_ref();
            if coords.len() != shape.len() {
                return input(format!(
                    "coordinate {coords:?} has {} indices, table has {} dimensions",
                    coords.len(),
                    shape.len()
                ));
            }
            if let Some(k) = (0..shape.len()).find(|&k| coords[k] >= shape[k]) {
                return input(format!(
                    "coordinate {coords:?} out of bounds on dimension {k} (size {})",
                    shape[k]
                ));
            }
            if !(count >= T::zero()) || !count.is_finite() {
                return input(format!(
                    "count {count} at {coords:?} is not a nonnegative number"
                ));
            }
            let idx = coords.iter().zip(&strides).map(|(c, s)| c * s).sum();
            linear.push((idx, count));
        }
        Ok(Self::from_linear(shape, strides, linear))
    }

    /// A table of the given shape with no observations.
    pub fn empty(shape: Vec<usize>) -> Result<Self> {
        Self::new(shape, std::iter::empty::<(Vec<usize>, T)>())
    }

    /// Builds a table from a dense row-major array of counts.
    pub fn from_dense(shape: Vec<usize>, values: &[T]) -> Result<Self> {
        let (strides, size) = strides_for(&shape)?;
        if values.len() != size {
            return input(format!(
                "dense array has {} values, shape {shape:?} needs {size}",
                values.len()
            ));
        }
        if values.iter().any(|&v| !(v >= T::zero()) || !v.is_finite()) {
            return input("dense array contains a negative or non-finite count");
        }
        let cells = values.iter().copied().enumerate().collect();
        Ok(Self::from_linear(shape, strides, cells))
    }

    // Sorting is stable, so duplicates are summed in their input order.
    fn from_linear(shape: Vec<usize>, strides: Vec<usize>, mut linear: Vec<(usize, T)>) -> Self {
        linear.sort_by_key(|&(idx, _)| idx);
        let mut cells: Vec<(usize, T)> = Vec::with_capacity(linear.len());
        for (idx, count) in linear {
            match cells.last_mut() {
                Some((last, acc)) if *last == idx => *acc += count,
                _ => cells.push((idx, count)),
            }
        }
        cells.retain(|&(_, c)| c > T::zero());
        let total = cells.iter().map(|&(_, c)| c).sum();
        SparseTable {
            shape,
            strides,
            cells,
            total,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Sum of all counts (`n`).
    pub fn total(&self) -> T {
        self.total
    }

    /// Number of stored (positive) cells.
    pub fn nnz(&self) -> usize {
        self.cells.len()
    }

    /// Number of cells in the full array, `Π r_k`.
    pub fn cell_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Positive cells as `(row-major linear index, count)`, ascending.
    pub fn linear_cells(&self) -> &[(usize, T)] {
        &self.cells
    }

    pub fn coords_of(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.shape.len()];
        self.decode_into(index, &mut out);
        out
    }

    fn decode_into(&self, index: usize, out: &mut [usize]) {
        for k in 0..self.shape.len() {
            out[k] = (index / self.strides[k]) % self.shape[k];
        }
    }

    pub fn index_of(&self, coords: &[usize]) -> Option<usize> {
        if coords.len() != self.shape.len() || coords.iter().zip(&self.shape).any(|(c, r)| c >= r) {
            return None;
        }
        Some(coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum())
    }

    /// Count at `coords`; zero for absent or out-of-range cells.
    pub fn get(&self, coords: &[usize]) -> T {
        self.index_of(coords)
            .and_then(|idx| self.cells.binary_search_by_key(&idx, |&(i, _)| i).ok())
            .map_or(T::zero(), |pos| self.cells[pos].1)
    }

    /// Positive cells in lexicographic coordinate order.
    pub fn iter(&self) -> impl Iterator<Item = (Vec<usize>, T)> + '_ {
        self.cells
            .iter()
            .map(move |&(idx, c)| (self.coords_of(idx), c))
    }

    /// Category index of a linear cell index along `dim`.
    pub(crate) fn category_at(&self, index: usize, dim: usize) -> usize {
        (index / self.strides[dim]) % self.shape[dim]
    }

    /// One-way marginal counts of `dim`, dense.
    pub fn one_way(&self, dim: usize) -> Result<Vec<T>> {
        if dim >= self.ndim() {
            return input(format!(
                "dimension {dim} out of range for {} dimensions",
                self.ndim()
            ));
        }
        let mut out = vec![T::zero(); self.shape[dim]];
        for &(idx, c) in &self.cells {
            out[self.category_at(idx, dim)] += c;
        }
        Ok(out)
    }

    /// All one-way marginals.
    pub fn one_way_all(&self) -> Vec<Vec<T>> {
        let mut out: Vec<Vec<T>> = self.shape.iter().map(|&r| vec![T::zero(); r]).collect();
        for &(idx, c) in &self.cells {
            for (k, m) in out.iter_mut().enumerate() {
                m[self.category_at(idx, k)] += c;
            }
        }
        out
    }

    /// Marginal table over `dims`, in the order given.
    pub fn marginal(&self, dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return input("marginal over an empty set of dimensions");
        }
        let mut seen = HashSet::new();
        for &d in dims {
            if d >= self.ndim() {
                return input(format!(
                    "dimension {d} out of range for {} dimensions",
                    self.ndim()
                ));
            }
            if !seen.insert(d) {
                return input(format!("dimension {d} repeated in marginal"));
            }
        }
        let shape: Vec<usize> = dims.iter().map(|&d| self.shape[d]).collect();
        let (strides, _) = strides_for(&shape)?;
        let linear = self
            .cells
            .iter()
            .map(|&(idx, c)| {
                let j = dims
                    .iter()
                    .zip(&strides)
                    .map(|(&d, s)| self.category_at(idx, d) * s)
                    .sum();
                (j, c)
            })
            .collect();
        Ok(Self::from_linear(shape, strides, linear))
    }

    /// Sums categories within each group of `partition`.
    pub fn apply_partition(&self, partition: &Partition) -> Result<Self> {
        partition.check_shape(&self.shape)?;
        let shape = partition.group_counts().to_vec();
        let (strides, _) = strides_for(&shape)?;
        let keys = partition.keys();
        let linear = self
            .cells
            .iter()
            .map(|&(idx, c)| {
                let j = (0..self.ndim())
                    .map(|k| keys[k][self.category_at(idx, k)] * strides[k])
                    .sum();
                (j, c)
            })
            .collect();
        Ok(Self::from_linear(shape, strides, linear))
    }

    /// The subtable of categories `u` and `v` on `dim`, with `dim` moved to the
    /// front: shape `[2, r_0, .., r_{dim-1}, r_{dim+1}, ..]`.
    pub fn pair_slice(&self, dim: usize, u: usize, v: usize) -> Result<Self> {
        if dim >= self.ndim() {
            return input(format!(
                "dimension {dim} out of range for {} dimensions",
                self.ndim()
            ));
        }
        if u == v {
            return input(format!(
                "pair slice needs two distinct categories, got {u} twice"
            ));
        }
        let r = self.shape[dim];
        if u >= r || v >= r {
            return input(format!(
                "categories ({u}, {v}) out of range for dimension {dim} of size {r}"
            ));
        }
        let mut shape = vec![2];
        shape.extend(
            self.shape
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != dim)
                .map(|(_, &r)| r),
        );
        let (strides, _) = strides_for(&shape)?;
        let linear = self
            .cells
            .iter()
            .filter_map(|&(idx, c)| {
                let cat = self.category_at(idx, dim);
                let row = if cat == u {
                    0
                } else if cat == v {
                    1
                } else {
                    return None;
                };
                Some((row * strides[0] + self.other_index(idx, dim), c))
            })
            .collect();
        Ok(Self::from_linear(shape, strides, linear))
    }

    /// Row-major index of a cell over all dimensions except `dim`.
    pub(crate) fn other_index(&self, index: usize, dim: usize) -> usize {
        let inner = self.strides[dim];
        let outer = inner * self.shape[dim];
        (index / outer) * inner + index % inner
    }

    /// Every count multiplied by `factor` (which must be positive).
    pub fn scaled(&self, factor: T) -> Result<Self> {
        if !(factor > T::zero()) || !factor.is_finite() {
            return input(format!("scale factor {factor} must be positive"));
        }
        let cells = self.cells.iter().map(|&(i, c)| (i, c * factor)).collect();
        Ok(Self::from_linear(
            self.shape.clone(),
            self.strides.clone(),
            cells,
        ))
    }

    /// Reorders categories of `dim`: old category `c` moves to `perm[c]`.
    pub fn permute_categories(&self, dim: usize, perm: &[usize]) -> Result<Self> {
        if dim >= self.ndim() {
            return input(format!(
                "dimension {dim} out of range for {} dimensions",
                self.ndim()
            ));
        }
        check_permutation(perm, self.shape[dim])?;
        let stride = self.strides[dim];
        let cells = self
            .cells
            .iter()
            .map(|&(idx, c)| {
                let cat = self.category_at(idx, dim);
                (idx - cat * stride + perm[cat] * stride, c)
            })
            .collect();
        Ok(Self::from_linear(
            self.shape.clone(),
            self.strides.clone(),
            cells,
        ))
    }

    pub fn to_dense(&self) -> DenseTable<T> {
        let mut values = vec![T::zero(); self.cell_count()];
        for &(idx, c) in &self.cells {
            values[idx] = c;
        }
        DenseTable {
            shape: self.shape.clone(),
            strides: self.strides.clone(),
            values,
        }
    }

    /// Counts converted to another scalar type.
    pub fn cast<U: Scalar>(&self) -> SparseTable<U> {
        let cells = self
            .cells
            .iter()
            .map(|&(i, c)| (i, U::of(c.as_f64())))
            .collect();
        SparseTable::from_linear(self.shape.clone(), self.strides.clone(), cells)
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return input(format!(
            "permutation has length {}, expected {n}",
            perm.len()
        ));
    }
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return input(format!("{perm:?} is not a permutation of 0..{n}"));
        }
    }
    Ok(())
}

/// Builds a table whose shape comes from `scheme`.
pub fn build_table<T, I, C>(scheme: &CategoryScheme, entries: I) -> Result<SparseTable<T>>
where
    T: Scalar,
    I: IntoIterator<Item = (C, T)>,
    C: AsRef<[usize]>,
{
    SparseTable::new(scheme.shape(), entries)
}

/// A dense row-major array, used for fitted tables and ratio grids where
/// zeros carry meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTable<T> {
    shape: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> DenseTable<T> {
    pub fn new(shape: Vec<usize>, values: Vec<T>) -> Result<Self> {
        let (strides, size) = strides_for(&shape)?;
        if values.len() != size {
            return input(format!(
                "dense array has {} values, shape {shape:?} needs {size}",
                values.len()
            ));
        }
        Ok(DenseTable {
            shape,
            strides,
            values,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn get(&self, coords: &[usize]) -> T {
        let idx: usize = coords.iter().zip(&self.strides).map(|(c, s)| c * s).sum();
        self.values[idx]
    }

    pub fn coords_of(&self, index: usize) -> Vec<usize> {
        (0..self.shape.len())
            .map(|k| (index / self.strides[k]) % self.shape[k])
            .collect()
    }
}

/// Per-variable grouping of original categories.
///
/// Group ids are renumbered by first occurrence, so the key `2 2 3 2 5` is
/// stored as `0 0 1 0 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    keys: Vec<Vec<usize>>,
    groups: Vec<usize>,
}

impl Partition {
    pub fn new(keys: Vec<Vec<usize>>) -> Result<Self> {
        let mut groups = Vec::with_capacity(keys.len());
        let mut normalized = Vec::with_capacity(keys.len());
        for (k, key) in keys.into_iter().enumerate() {
            if key.is_empty() {
                return input(format!("key vector for dimension {k} is empty"));
            }
            let (key, count) = renumber_first_occurrence(&key);
            normalized.push(key);
            groups.push(count);
        }
        Ok(Partition {
            keys: normalized,
            groups,
        })
    }

    pub fn identity(shape: &[usize]) -> Self {
        Partition {
            keys: shape.iter().map(|&r| (0..r).collect()).collect(),
            groups: shape.to_vec(),
        }
    }

    /// Every variable collapsed to a single group.
    pub fn all_to_one(shape: &[usize]) -> Self {
        Partition {
            keys: shape.iter().map(|&r| vec![0; r]).collect(),
            groups: vec![1; shape.len()],
        }
    }

    pub fn keys(&self) -> &[Vec<usize>] {
        &self.keys
    }

    pub fn key(&self, dim: usize) -> &[usize] {
        &self.keys[dim]
    }

    pub fn group_counts(&self) -> &[usize] {
        &self.groups
    }

    /// Number of original categories per variable.
    pub fn original_shape(&self) -> Vec<usize> {
        self.keys.iter().map(Vec::len).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.keys
            .iter()
            .zip(&self.groups)
            .all(|(k, &g)| k.len() == g)
    }

    /// Original categories of each group of `dim`, in group order.
    pub fn members(&self, dim: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.groups[dim]];
        for (c, &g) in self.keys[dim].iter().enumerate() {
            out[g].push(c);
        }
        out
    }

    /// Applies `self`, then `next` (whose keys index the groups of `self`).
    pub fn compose(&self, next: &Partition) -> Result<Partition> {
        if next.keys.len() != self.keys.len() {
            return input("composed partitions cover different numbers of variables");
        }
        let mut keys = Vec::with_capacity(self.keys.len());
        for (k, (mine, theirs)) in self.keys.iter().zip(&next.keys).enumerate() {
            if theirs.len() != self.groups[k] {
                return input(format!(
                    "second partition has {} categories on dimension {k}, first produces {}",
                    theirs.len(),
                    self.groups[k]
                ));
            }
            keys.push(mine.iter().map(|&g| theirs[g]).collect());
        }
        Partition::new(keys)
    }

    pub(crate) fn check_shape(&self, shape: &[usize]) -> Result<()> {
        if self.keys.len() != shape.len() {
            return input(format!(
                "partition covers {} variables, table has {}",
                self.keys.len(),
                shape.len()
            ));
        }
        for (k, (key, &r)) in self.keys.iter().zip(shape).enumerate() {
            if key.len() != r {
                return input(format!(
                    "key vector for dimension {k} has {} entries, table has {r} categories",
                    key.len()
                ));
            }
        }
        Ok(())
    }

    /// Checks ordinal groups are contiguous runs and fixed variables untouched.
    pub fn check_treatments(&self, treatments: &[Treatment]) -> Result<()> {
        if treatments.len() != self.keys.len() {
            return input("one treatment per variable is required");
        }
        for (k, (key, t)) in self.keys.iter().zip(treatments).enumerate() {
            match t {
                Treatment::Fixed if key.len() != self.groups[k] => {
                    return input(format!("fixed dimension {k} is not the identity partition"));
                }
                Treatment::Ordinal if key.windows(2).any(|w| w[1] != w[0] && w[1] != w[0] + 1) => {
                    return input(format!("ordinal dimension {k} has a non-contiguous group"));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

fn renumber_first_occurrence(key: &[usize]) -> (Vec<usize>, usize) {
    let mut map: Vec<(usize, usize)> = Vec::new();
    let out = key
        .iter()
        .map(|&g| match map.iter().find(|&&(from, _)| from == g) {
            Some(&(_, to)) => to,
            None => {
                let to = map.len();
                map.push((g, to));
                to
            }
        })
        .collect();
    (out, map.len())
}

/// A model on a collapsed table expanded to the original shape.
///
/// Original cell `i` in collapsed cell `j` gets probability
/// `π'_j · Π_k m_k(i_k) / M_k(g_k(i_k))`, where `m_k` is the original one-way
/// marginal and `M_k` its group sum. Groups with `M_k = 0` get probability 0.
#[derive(Debug, Clone)]
pub struct ExpandedModel<'a, T> {
    collapsed: &'a SparseTable<T>,
    partition: &'a Partition,
    ratios: Vec<Vec<T>>,
}

impl<'a, T: Scalar> ExpandedModel<'a, T> {
    pub fn new(
        collapsed: &'a SparseTable<T>,
        partition: &'a Partition,
        original_marginals: &[Vec<T>],
    ) -> Result<Self> {
        if collapsed.shape() != partition.group_counts() {
            return input(format!(
                "collapsed shape {:?} does not match partition groups {:?}",
                collapsed.shape(),
                partition.group_counts()
            ));
        }
        partition.check_shape(&original_marginals.iter().map(Vec::len).collect::<Vec<_>>())?;
        let totals: Vec<T> = original_marginals
            .iter()
            .map(|m| m.iter().copied().sum())
            .collect();
        if let Some(&first) = totals.first() {
            if totals.iter().any(|&t| !rel_eq(t, first, T::of(1e-9))) {
                return input("original marginals do not share a common total");
            }
        }
        let ratios = original_marginals
            .iter()
            .zip(partition.keys())
            .zip(partition.group_counts())
            .map(|((m, key), &groups)| {
                let mut group_sum = vec![T::zero(); groups];
                for (&c, &g) in m.iter().zip(key) {
                    group_sum[g] += c;
                }
                m.iter()
                    .zip(key)
                    .map(|(&c, &g)| {
                        if group_sum[g] > T::zero() {
                            c / group_sum[g]
                        } else {
                            T::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(ExpandedModel {
            collapsed,
            partition,
            ratios,
        })
    }

    /// Expanded value at an original-shape cell.
    pub fn value_at(&self, coords: &[usize]) -> T {
        let keys = self.partition.keys();
        let group: Vec<usize> = coords
            .iter()
            .enumerate()
            .map(|(k, &c)| keys[k][c])
            .collect();
        let base = self.collapsed.get(&group);
        if base == T::zero() {
            return T::zero();
        }
        coords
            .iter()
            .enumerate()
            .fold(base, |acc, (k, &c)| acc * self.ratios[k][c])
    }

    /// Materializes all positive expanded cells.
    pub fn to_table(&self) -> Result<SparseTable<T>> {
        let shape = self.partition.original_shape();
        let (strides, _) = strides_for(&shape)?;
        let members: Vec<Vec<Vec<usize>>> = (0..shape.len())
            .map(|k| self.partition.members(k))
            .collect();
        let mut linear = Vec::new();
        let mut group = vec![0; shape.len()];
        for &(j, base) in self.collapsed.linear_cells() {
            self.collapsed.decode_into(j, &mut group);
            let lists: Vec<&[usize]> = (0..shape.len())
                .map(|k| members[k][group[k]].as_slice())
                .collect();
            // odometer over the cartesian product of group members
            let mut pos = vec![0usize; shape.len()];
            'cells: loop {
                let mut value = base;
                let mut idx = 0;
                for k in 0..shape.len() {
                    let c = lists[k][pos[k]];
                    value *= self.ratios[k][c];
                    idx += c * strides[k];
                }
                linear.push((idx, value));
                for k in (0..shape.len()).rev() {
                    pos[k] += 1;
                    if pos[k] < lists[k].len() {
                        continue 'cells;
                    }
                    pos[k] = 0;
                }
                break;
            }
        }
        Ok(SparseTable::from_linear(shape, strides, linear))
    }
}

impl<'a, T: Scalar> ExpandedModel<'a, T> {
    /// G² of `observed` against this model read as cell probabilities:
    /// `2 Σ n_i ln(n_i / (n π_i))` over the observed positive cells.
    pub fn deviance(&self, observed: &SparseTable<T>) -> Result<T> {
        let shape = self.partition.original_shape();
        if observed.shape() != shape.as_slice() {
            return input(format!(
                "observed shape {:?} does not match expanded shape {shape:?}",
                observed.shape()
            ));
        }
        let n = observed.total();
        let mut coords = vec![0; shape.len()];
        let mut sum = T::zero();
        for &(idx, count) in observed.linear_cells() {
            observed.decode_into(idx, &mut coords);
            let p = self.value_at(&coords);
            if !(p > T::zero()) {
                return Err(Error::Degenerate(format!(
                    "observed count {count} at {coords:?} has zero model probability"
                )));
            }
            sum += count * (count / (n * p)).ln();
        }
        Ok(sum + sum)
    }
}

/// Expands probabilities over a collapsed table back to the original shape,
/// matching the original one-way marginals within each group.
pub fn expand_model<T: Scalar>(
    collapsed_probabilities: &SparseTable<T>,
    partition: &Partition,
    original_marginals: &[Vec<T>],
) -> Result<SparseTable<T>> {
    ExpandedModel::new(collapsed_probabilities, partition, original_marginals)?.to_table()
}
