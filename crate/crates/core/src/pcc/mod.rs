//! Sequential paired category collapsing.
//!
//! Each step evaluates every eligible category pair of the current table,
//! merges the pair with the smallest information loss per degree of freedom
//! and records the cumulative deviance of the expanded model against the
//! original table. Step deviances add up exactly: the deviance of a collapsed
//! model (expanded to match the original one-way marginals) is the sum of the
//! pair losses taken along the way.

mod diagnostics;
mod exhaustive;

pub use diagnostics::{adjusted_rsq, info_concentration, penalized_scores};
pub use exhaustive::{
    bell_number, enumerate_partitions, enumeration_size, exhaustive_partition_search,
    expanded_dfmod, partition_loss, ExhaustiveResult, ShapeOptimum,
};

use crate::error::{input, Result};
use crate::infoloss::{loss_matrix_with_mode, LossMatrix, PairLoss, PairMode};
use crate::scalar::{rel_eq, Scalar};
use crate::table::{Partition, SparseTable, Treatment};

/// Relative tolerance within which two quotients count as tied.
pub const QUOTIENT_TIE_TOLERANCE: f64 = 1e-12;

/// One treatment per variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreatmentConfig(Vec<Treatment>);

impl TreatmentConfig {
    pub fn new(treatments: Vec<Treatment>) -> Self {
        TreatmentConfig(treatments)
    }

    pub fn uniform(treatment: Treatment, variables: usize) -> Self {
        TreatmentConfig(vec![treatment; variables])
    }

    pub fn as_slice(&self) -> &[Treatment] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn check(&self, ndim: usize) -> Result<()> {
        if self.0.len() != ndim {
            return input(format!(
                "{} treatments given for a table with {ndim} dimensions",
                self.0.len()
            ));
        }
        Ok(())
    }
}

impl From<Vec<Treatment>> for TreatmentConfig {
    fn from(v: Vec<Treatment>) -> Self {
        TreatmentConfig(v)
    }
}

/// Loss matrices of every dimension that may still be collapsed.
pub fn candidate_matrices<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
) -> Result<Vec<LossMatrix<T>>> {
    treatments.check(table.ndim())?;
    let mut out = Vec::new();
    for (dim, &t) in treatments.as_slice().iter().enumerate() {
        if let Some(mode) = PairMode::for_treatment(t) {
            if table.shape()[dim] >= 2 {
                out.push(loss_matrix_with_mode(table, dim, mode)?);
            }
        }
    }
    Ok(out)
}

/// The eligible pair with the smallest quotient G²/h, or `None` when nothing
/// is left to merge.
///
/// Pairs are scanned in lexical `(dim, u, v)` order and a later pair replaces
/// the incumbent only if its quotient is smaller beyond
/// [`QUOTIENT_TIE_TOLERANCE`]. Pairs with `h = 0` (every other variable already
/// has one category) are not eligible: merging them removes no parameters.
pub fn select_merge<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
) -> Result<Option<PairLoss<T>>> {
    let matrices = candidate_matrices(table, treatments)?;
    Ok(best_of(matrices.iter().flat_map(|m| m.entries.iter())))
}

fn best_of<'a, T: Scalar>(
    candidates: impl Iterator<Item = &'a PairLoss<T>>,
) -> Option<PairLoss<T>> {
    let tol = T::of(QUOTIENT_TIE_TOLERANCE);
    let mut best: Option<PairLoss<T>> = None;
    for c in candidates.filter(|c| c.df > 0) {
        match &best {
            Some(b) if !(c.quotient < b.quotient) || rel_eq(c.quotient, b.quotient, tol) => {}
            _ => best = Some(*c),
        }
    }
    best
}

/// One row of a collapsing trace.
#[derive(Debug, Clone, PartialEq)]
pub struct PccStep<T> {
    pub r: usize,
    /// Dimension collapsed; `None` for the saturated row.
    pub dim: Option<usize>,
    /// Pair merged, in categories of the table before this step.
    pub pair: Option<(usize, usize)>,
    /// Key vector of `dim` in original categories.
    pub key: Vec<usize>,
    /// Cumulative partition after this step.
    pub partition: Partition,
    /// Shape of the collapsed table after this step.
    pub shape: Vec<usize>,
    pub dev: T,
    pub dfmod: usize,
    pub dfres: usize,
    pub dev_term: T,
    pub df_term: usize,
    pub quotient: T,
    pub adj_rsq: T,
    /// Closing row emitted once only a single marginal vector remains; it
    /// changes nothing and its `df_term` is not added to `dfres`.
    pub terminal: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PccTrace<T> {
    pub steps: Vec<PccStep<T>>,
    pub original_shape: Vec<usize>,
    pub treatments: TreatmentConfig,
    pub total: T,
    /// Set when the final deviance is zero and adjusted R² is undefined.
    pub degenerate: bool,
}

impl<T: Scalar> PccTrace<T> {
    pub fn final_dev(&self) -> T {
        self.steps.last().map_or(T::zero(), |s| s.dev)
    }

    /// `(dfmod, dev)` for every row.
    pub fn curve(&self) -> Vec<(usize, T)> {
        self.steps.iter().map(|s| (s.dfmod, s.dev)).collect()
    }

    /// Merging steps only, without the saturated and terminal rows.
    pub fn merges(&self) -> impl Iterator<Item = &PccStep<T>> {
        self.steps.iter().filter(|s| s.dim.is_some() && !s.terminal)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PccOptions<T> {
    /// Stop before the first merge whose quotient exceeds this value.
    pub stop_quotient: Option<T>,
}

impl<T> Default for PccOptions<T> {
    fn default() -> Self {
        PccOptions {
            stop_quotient: None,
        }
    }
}

/// Runs collapsing to completion.
pub fn run_pcc<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
) -> Result<PccTrace<T>> {
    run_pcc_with(table, treatments, &PccOptions::default())
}

pub fn run_pcc_with<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
    options: &PccOptions<T>,
) -> Result<PccTrace<T>> {
    treatments.check(table.ndim())?;
    if !(table.total() > T::zero()) {
        return input("collapsing needs a table with positive total");
    }
    if let Some(q) = options.stop_quotient {
        if !(q >= T::zero()) {
            return input(format!("stop quotient {q} must be nonnegative"));
        }
    }
    let original_shape = table.shape().to_vec();
    let total_df = table.cell_count() - 1;
    let mut current = table.clone();
    let mut partition = Partition::identity(&original_shape);
    let mut steps = vec![PccStep {
        r: 0,
        dim: None,
        pair: None,
        key: Vec::new(),
        partition: partition.clone(),
        shape: original_shape.clone(),
        dev: T::zero(),
        dfmod: total_df,
        dfres: 0,
        dev_term: T::zero(),
        df_term: 0,
        quotient: T::zero(),
        adj_rsq: T::one(),
        terminal: false,
    }];
    let (mut dev, mut dfres) = (T::zero(), 0usize);

    loop {
        let Some(pick) = select_merge(&current, treatments)? else {
            if let Some(row) = terminal_row(
                &current,
                treatments,
                &partition,
                steps.len(),
                dev,
                dfres,
                total_df,
            ) {
                steps.push(row);
            }
            break;
        };
        if matches!(options.stop_quotient, Some(q) if pick.quotient > q) {
            break;
        }
        let step_partition = merge_partition(current.shape(), pick.dim, pick.u, pick.v);
        current = current.apply_partition(&step_partition)?;
        partition = partition.compose(&step_partition)?;
        dev += pick.g2;
        dfres += pick.df;
        steps.push(PccStep {
            r: steps.len(),
            dim: Some(pick.dim),
            pair: Some((pick.u, pick.v)),
            key: partition.key(pick.dim).to_vec(),
            partition: partition.clone(),
            shape: current.shape().to_vec(),
            dev,
            dfmod: total_df - dfres,
            dfres,
            dev_term: pick.g2,
            df_term: pick.df,
            quotient: pick.quotient,
            adj_rsq: T::one(),
            terminal: false,
        });
    }

    let (dev_last, dfres_last) = steps
        .last()
        .map(|s| (s.dev, s.dfres))
        .unwrap_or((T::zero(), 0));
    let mut degenerate = false;
    for step in &mut steps {
        let (value, flag) = adjusted_rsq(step.dev, step.dfres, dev_last, dfres_last);
        step.adj_rsq = value;
        degenerate |= flag;
    }
    Ok(PccTrace {
        steps,
        original_shape,
        treatments: treatments.clone(),
        total: table.total(),
        degenerate,
    })
}

/// Merges `v` into `u` on `dim`; later categories shift down one, which keeps
/// groups numbered by first occurrence.
fn merge_partition(shape: &[usize], dim: usize, u: usize, v: usize) -> Partition {
    let (lo, hi) = (u.min(v), u.max(v));
    let mut keys: Vec<Vec<usize>> = shape.iter().map(|&r| (0..r).collect()).collect();
    keys[dim] = (0..shape[dim])
        .map(|c| match c.cmp(&hi) {
            std::cmp::Ordering::Less => c,
            std::cmp::Ordering::Equal => lo,
            std::cmp::Ordering::Greater => c - 1,
        })
        .collect();
    Partition::new(keys).expect("merge keys are non-empty")
}

/// Closing row once the only collapsible categories left sit in a single
/// marginal vector. Merging them would change neither the expanded model nor
/// the parameter count, so the row repeats the last state with `dev_term` 0
/// and reports the vector's own `r − 1` as `df_term`. It names the first
/// variable already reduced to one category.
fn terminal_row<T: Scalar>(
    current: &SparseTable<T>,
    treatments: &TreatmentConfig,
    partition: &Partition,
    r: usize,
    dev: T,
    dfres: usize,
    total_df: usize,
) -> Option<PccStep<T>> {
    let shape = current.shape();
    let open = treatments
        .as_slice()
        .iter()
        .zip(shape)
        .position(|(&t, &r)| t != Treatment::Fixed && r >= 2)?;
    let dim = shape.iter().position(|&r| r == 1).unwrap_or(open);
    Some(PccStep {
        r,
        dim: Some(dim),
        pair: None,
        key: partition.key(dim).to_vec(),
        partition: partition.clone(),
        shape: shape.to_vec(),
        dev,
        dfmod: total_df - dfres,
        dfres,
        dev_term: T::zero(),
        df_term: current.cell_count() - 1,
        quotient: T::zero(),
        adj_rsq: T::one(),
        terminal: true,
    })
}
