//! Brute-force search over every joint partition of the categories.
//!
//! Only feasible for small tables: a nominal variable with `r` categories has
//! Bell(r) partitions, an ordinal one `2^(r−1)` contiguous groupings. Used to
//! measure how far the greedy sequence is from the best partition of each
//! shape.

use std::collections::BTreeMap;

use crate::error::{input, Error, Result};
use crate::pcc::TreatmentConfig;
use crate::scalar::Scalar;
use crate::table::{ExpandedModel, Partition, SparseTable, Treatment};

/// Bell number `B(n)`, saturating at `u128::MAX`.
pub fn bell_number(n: usize) -> u128 {
    // Bell triangle
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().expect("row is never empty"));
        for &x in &row {
            let prev = *next.last().expect("just pushed");
            next.push(prev.saturating_add(x));
        }
        row = next;
    }
    row[0]
}

fn choices(r: usize, treatment: Treatment) -> u128 {
    match treatment {
        Treatment::Nominal => bell_number(r),
        Treatment::Ordinal => 1u128
            .checked_shl((r.max(1) - 1) as u32)
            .unwrap_or(u128::MAX),
        Treatment::Fixed => 1,
    }
}

/// Number of joint partitions the search would visit.
pub fn enumeration_size(shape: &[usize], treatments: &TreatmentConfig) -> u128 {
    shape
        .iter()
        .zip(treatments.as_slice())
        .fold(1u128, |acc, (&r, &t)| acc.saturating_mul(choices(r, t)))
}

/// Key vectors for one variable, in lexical order.
fn variable_keys(r: usize, treatment: Treatment) -> Vec<Vec<usize>> {
    match treatment {
        Treatment::Fixed => vec![(0..r).collect()],
        Treatment::Ordinal => (0..1usize << (r - 1))
            .map(|cuts| {
                let mut key = vec![0; r];
                for c in 1..r {
                    key[c] = key[c - 1] + ((cuts >> (c - 1)) & 1);
                }
                key
            })
            .collect(),
        Treatment::Nominal => {
            // restricted growth strings: key[c] <= 1 + max(key[..c])
            let mut out = Vec::new();
            let mut key = vec![0; r];
            fn fill(c: usize, max: usize, key: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
                if c == key.len() {
                    out.push(key.clone());
                    return;
                }
                for g in 0..=max + 1 {
                    key[c] = g;
                    fill(c + 1, max.max(g), key, out);
                }
            }
            if r == 1 {
                out.push(key);
            } else {
                fill(1, 0, &mut key, &mut out);
            }
            out
        }
    }
}

/// Deviance of the saturated model on the collapsed table, expanded to the
/// original shape, against the original table.
pub fn partition_loss<T: Scalar>(table: &SparseTable<T>, partition: &Partition) -> Result<T> {
    let n = table.total();
    if !(n > T::zero()) {
        return input("partition loss needs a table with positive total");
    }
    let probabilities = table.apply_partition(partition)?.scaled(T::one() / n)?;
    let marginals = table.one_way_all();
    ExpandedModel::new(&probabilities, partition, &marginals)?.deviance(table)
}

/// Parameter count of an expanded collapsed saturated model:
/// `Π g_k − 1 + Σ (r_k − g_k)`.
pub fn expanded_dfmod(partition: &Partition) -> usize {
    let cells: usize = partition.group_counts().iter().product();
    let within: usize = partition
        .keys()
        .iter()
        .zip(partition.group_counts())
        .map(|(key, &g)| key.len() - g)
        .sum();
    cells - 1 + within
}

/// Every joint partition allowed by `treatments` with its loss.
pub fn enumerate_partitions<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
    cap: u128,
) -> Result<Vec<(Partition, T)>> {
    if treatments.len() != table.ndim() {
        return input("one treatment per variable is required");
    }
    let size = enumeration_size(table.shape(), treatments);
    if size > cap {
        return Err(Error::Infeasible { size, cap });
    }
    let per_var: Vec<Vec<Vec<usize>>> = table
        .shape()
        .iter()
        .zip(treatments.as_slice())
        .map(|(&r, &t)| variable_keys(r, t))
        .collect();
    let mut out = Vec::with_capacity(size as usize);
    let mut pos = vec![0usize; per_var.len()];
    'joint: loop {
        let keys = per_var
            .iter()
            .zip(&pos)
            .map(|(v, &i)| v[i].clone())
            .collect();
        let partition = Partition::new(keys)?;
        let loss = partition_loss(table, &partition)?;
        out.push((partition, loss));
        for k in (0..pos.len()).rev() {
            pos[k] += 1;
            if pos[k] < per_var[k].len() {
                continue 'joint;
            }
            pos[k] = 0;
        }
        break;
    }
    Ok(out)
}

/// Lowest-loss partition with a given collapsed shape.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeOptimum<T> {
    pub shape: Vec<usize>,
    pub partition: Partition,
    pub loss: T,
    pub dfmod: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult<T> {
    pub evaluated: usize,
    /// One entry per reachable shape, in lexicographic shape order.
    pub optima: Vec<ShapeOptimum<T>>,
}

impl<T: Scalar> ExhaustiveResult<T> {
    pub fn best_for(&self, shape: &[usize]) -> Option<&ShapeOptimum<T>> {
        self.optima.iter().find(|o| o.shape == shape)
    }
}

/// Global minimum-loss partition for every collapsed shape. The first
/// partition in enumeration order wins ties.
pub fn exhaustive_partition_search<T: Scalar>(
    table: &SparseTable<T>,
    treatments: &TreatmentConfig,
    cap: u128,
) -> Result<ExhaustiveResult<T>> {
    let all = enumerate_partitions(table, treatments, cap)?;
    let evaluated = all.len();
    let mut best: BTreeMap<Vec<usize>, (Partition, T)> = BTreeMap::new();
    for (partition, loss) in all {
        let shape = partition.group_counts().to_vec();
        match best.get(&shape) {
            Some((_, b)) if !(loss < *b) => {}
            _ => {
                best.insert(shape, (partition, loss));
            }
        }
    }
    let optima = best
        .into_iter()
        .map(|(shape, (partition, loss))| ShapeOptimum {
            dfmod: expanded_dfmod(&partition),
            shape,
            partition,
            loss,
        })
        .collect();
    Ok(ExhaustiveResult { evaluated, optima })
}
