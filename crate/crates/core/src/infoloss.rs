//! Likelihood-ratio information loss.
//!
//! All statistics use natural logarithms. Degrees of freedom are never reduced
//! for empty rows or columns.

use crate::error::{input, Result};
use crate::scalar::Scalar;
use crate::table::{SparseTable, Treatment};

/// `p ln p`, with `0 ln 0 = 0`.
pub fn guarded_plogp<T: Scalar>(p: T) -> Result<T> {
    if !(p >= T::zero()) {
        return input(format!("p ln p is undefined for p = {p}"));
    }
    Ok(if p == T::zero() {
        T::zero()
    } else {
        p * p.ln()
    })
}

/// G² for independence of rows and columns of a two-way table, with
/// `df = (R - 1)(C - 1)`. A table with no observations gives `(0, df)`.
pub fn g2_independence<T: Scalar>(table: &SparseTable<T>) -> Result<(T, usize)> {
    if table.ndim() != 2 {
        return input(format!(
            "independence G² needs a two-way table, got {} dimensions",
            table.ndim()
        ));
    }
    let (rows, cols) = (table.shape()[0], table.shape()[1]);
    let df = (rows - 1) * (cols - 1);
    let n = table.total();
    if n == T::zero() {
        return Ok((T::zero(), df));
    }
    let row_tot = table.one_way(0)?;
    let col_tot = table.one_way(1)?;
    let mut sum = T::zero();
    for &(idx, count) in table.linear_cells() {
        let (i, j) = (idx / cols, idx % cols);
        sum += count * (count * n / (row_tot[i] * col_tot[j])).ln();
    }
    Ok(((sum + sum).max(T::zero()), df))
}

/// Loss from merging categories `u` and `v` of dimension `dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairLoss<T> {
    pub dim: usize,
    pub u: usize,
    pub v: usize,
    pub g2: T,
    /// `Π_{k≠dim} r_k − 1`.
    pub df: usize,
    /// `g2 / df`; zero when `df` is zero.
    pub quotient: T,
}

impl<T: Scalar> PairLoss<T> {
    fn new(dim: usize, u: usize, v: usize, g2: T, df: usize) -> Self {
        let quotient = if df == 0 {
            T::zero()
        } else {
            g2 / T::of_usize(df)
        };
        PairLoss {
            dim,
            u,
            v,
            g2,
            df,
            quotient,
        }
    }
}

/// Categories of one dimension as sparse vectors over the joint of the other
/// dimensions. Each vector is sorted by column because table cells are.
pub(crate) struct CategorySlices<T> {
    dim: usize,
    slices: Vec<Vec<(usize, T)>>,
    totals: Vec<T>,
    df: usize,
}

impl<T: Scalar> CategorySlices<T> {
    pub(crate) fn new(table: &SparseTable<T>, dim: usize) -> Result<Self> {
        if dim >= table.ndim() {
            return input(format!(
                "dimension {dim} out of range for {} dimensions",
                table.ndim()
            ));
        }
        let r = table.shape()[dim];
        let mut slices = vec![Vec::new(); r];
        let mut totals = vec![T::zero(); r];
        for &(idx, count) in table.linear_cells() {
            let c = table.category_at(idx, dim);
            slices[c].push((table.other_index(idx, dim), count));
            totals[c] += count;
        }
        let others: usize = table
            .shape()
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != dim)
            .map(|(_, &r)| r)
            .product();
        Ok(CategorySlices {
            dim,
            slices,
            totals,
            df: others - 1,
        })
    }

    pub(crate) fn len(&self) -> usize {
        self.slices.len()
    }

    pub(crate) fn pair(&self, u: usize, v: usize) -> PairLoss<T> {
        let g2 = pair_g2(
            &self.slices[u],
            self.totals[u],
            &self.slices[v],
            self.totals[v],
        );
        PairLoss::new(self.dim, u, v, g2, self.df)
    }
}

/// G² of the 2 × C table with sparse rows `x`, `y` and totals `a`, `b`.
fn pair_g2<T: Scalar>(x: &[(usize, T)], a: T, y: &[(usize, T)], b: T) -> T {
    if a == T::zero() || b == T::zero() {
        return T::zero();
    }
    let n = a + b;
    let term = |count: T, total: T, column: T| count * (count * n / (total * column)).ln();
    let mut sum = T::zero();
    let (mut i, mut j) = (0, 0);
    while i < x.len() || j < y.len() {
        let xi = x.get(i).map_or(usize::MAX, |e| e.0);
        let yj = y.get(j).map_or(usize::MAX, |e| e.0);
        if xi < yj {
            sum += term(x[i].1, a, x[i].1);
            i += 1;
        } else if yj < xi {
            sum += term(y[j].1, b, y[j].1);
            j += 1;
        } else {
            let column = x[i].1 + y[j].1;
            sum += term(x[i].1, a, column);
            sum += term(y[j].1, b, column);
            i += 1;
            j += 1;
        }
    }
    (sum + sum).max(T::zero())
}

/// Information lost by merging categories `u` and `v` of `dim`: independence
/// G² of the two category slices against the joint of all other variables.
pub fn pair_loss<T: Scalar>(
    table: &SparseTable<T>,
    dim: usize,
    u: usize,
    v: usize,
) -> Result<PairLoss<T>> {
    if dim >= table.ndim() {
        return input(format!(
            "dimension {dim} out of range for {} dimensions",
            table.ndim()
        ));
    }
    let r = table.shape()[dim];
    if u == v || u >= r || v >= r {
        return input(format!(
            "invalid category pair ({u}, {v}) for dimension {dim} of size {r}"
        ));
    }
    let slices = CategorySlices::new(table, dim)?;
    let mut loss = slices.pair(u.min(v), u.max(v));
    loss.u = u;
    loss.v = v;
    Ok(loss)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    AllPairs,
    AdjacentOnly,
}

impl PairMode {
    /// `None` for fixed variables, which are never merged.
    pub fn for_treatment(treatment: Treatment) -> Option<Self> {
        match treatment {
            Treatment::Nominal => Some(PairMode::AllPairs),
            Treatment::Ordinal => Some(PairMode::AdjacentOnly),
            Treatment::Fixed => None,
        }
    }
}

/// Pair losses of one dimension, `u < v`, in lexical order.
#[derive(Debug, Clone, PartialEq)]
pub struct LossMatrix<T> {
    pub dim: usize,
    /// Number of categories of `dim`.
    pub size: usize,
    pub mode: PairMode,
    pub entries: Vec<PairLoss<T>>,
}

impl<T: Scalar> LossMatrix<T> {
    /// Entry for an unordered pair, if computed.
    pub fn get(&self, u: usize, v: usize) -> Option<&PairLoss<T>> {
        let (lo, hi) = (u.min(v), u.max(v));
        self.entries.iter().find(|e| e.u == lo && e.v == hi)
    }

    /// Entry with the smallest quotient; ties go to the first in lexical order.
    pub fn min_quotient(&self) -> Option<&PairLoss<T>> {
        self.entries
            .iter()
            .fold(None, |best: Option<&PairLoss<T>>, e| match best {
                Some(b) if b.quotient <= e.quotient => Some(b),
                _ => Some(e),
            })
    }
}

pub(crate) fn loss_matrix_with_mode<T: Scalar>(
    table: &SparseTable<T>,
    dim: usize,
    mode: PairMode,
) -> Result<LossMatrix<T>> {
    let slices = CategorySlices::new(table, dim)?;
    let r = slices.len();
    let entries = match mode {
        PairMode::AllPairs => (0..r)
            .flat_map(|u| (u + 1..r).map(move |v| (u, v)))
            .map(|(u, v)| slices.pair(u, v))
            .collect(),
        PairMode::AdjacentOnly => (1..r).map(|v| slices.pair(v - 1, v)).collect(),
    };
    Ok(LossMatrix {
        dim,
        size: r,
        mode,
        entries,
    })
}

/// All pair losses of `dim` on the current table: every pair for nominal
/// variables, neighbouring pairs for ordinal ones.
pub fn loss_matrix<T: Scalar>(
    table: &SparseTable<T>,
    dim: usize,
    treatment: Treatment,
) -> Result<LossMatrix<T>> {
    match PairMode::for_treatment(treatment) {
        Some(mode) => loss_matrix_with_mode(table, dim, mode),
        None => input(format!("dimension {dim} is fixed and has no loss matrix")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(shape: Vec<usize>, v: &[f64]) -> SparseTable<f64> {
        SparseTable::from_dense(shape, v).unwrap()
    }

    #[test]
    fn plogp_guarded() {
        assert_eq!(guarded_plogp(0.0f64).unwrap(), 0.0);
        assert_eq!(guarded_plogp(1.0f64).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((guarded_plogp(e).unwrap() - e).abs() < 1e-15);
        assert!(guarded_plogp(-0.1f64).is_err());
    }

    #[test]
    fn proportional_rows_have_zero_g2() {
        let (g2, df) = g2_independence(&dense(vec![2, 2], &[1.0, 2.0, 2.0, 4.0])).unwrap();
        assert_eq!(df, 1);
        assert!(g2.abs() < 1e-12);
    }

    #[test]
    fn g2_rejects_wrong_rank_and_handles_empty() {
        assert!(g2_independence(&dense(vec![2, 2, 2], &[1.0; 8])).is_err());
        let empty = SparseTable::<f64>::empty(vec![3, 4]).unwrap();
        assert_eq!(g2_independence(&empty).unwrap(), (0.0, 6));
    }

    #[test]
    fn pair_loss_symmetric_and_degenerate() {
        let t = dense(vec![3, 3], &[5.0, 1.0, 2.0, 0.0, 0.0, 0.0, 3.0, 7.0, 1.0]);
        let a = pair_loss(&t, 0, 0, 2).unwrap();
        let b = pair_loss(&t, 0, 2, 0).unwrap();
        assert_eq!(a.g2, b.g2);
        assert_eq!(a.df, 2);
        // category 1 is empty: no loss, full df
        let z = pair_loss(&t, 0, 0, 1).unwrap();
        assert_eq!((z.g2, z.df), (0.0, 2));
        assert!(pair_loss(&t, 0, 1, 1).is_err());
        assert!(pair_loss(&t, 2, 0, 1).is_err());
    }

    #[test]
    fn adjacent_mode_counts() {
        let t = dense(
            vec![2, 5],
            &[1.0, 2.0, 3.0, 4.0, 5.0, 5.0, 4.0, 3.0, 2.0, 1.0],
        );
        let m = loss_matrix(&t, 1, Treatment::Ordinal).unwrap();
        let pairs: Vec<(usize, usize)> = m.entries.iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(
            loss_matrix(&t, 1, Treatment::Nominal)
                .unwrap()
                .entries
                .len(),
            10
        );
        assert!(loss_matrix(&t, 1, Treatment::Fixed).is_err());
    }

    #[test]
    fn min_quotient_prefers_lexical_first_on_ties() {
        let t = dense(vec![3, 2], &[1.0, 1.0, 2.0, 2.0, 3.0, 3.0]);
        let m = loss_matrix(&t, 0, Treatment::Nominal).unwrap();
        let best = m.min_quotient().unwrap();
        assert_eq!((best.u, best.v), (0, 1));
    }
}
