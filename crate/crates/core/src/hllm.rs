//! Hierarchical log-linear models: parameter counts, iterative proportional
//! fitting, backward selection by information gradient, partition models and
//! Pearson ratios.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{input, Error, Result};
use crate::scalar::{rel_eq, Scalar};
use crate::table::{DenseTable, ExpandedModel, Partition, SparseTable};

/// A set of variable indices, stored as a bit mask (variable `k` is bit `k`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Term(u64);

impl Term {
    pub const EMPTY: Term = Term(0);

    pub fn new(vars: &[usize]) -> Result<Term> {
        let mut bits = 0u64;
        for &v in vars {
            if v >= 64 {
                return input(format!("variable index {v} exceeds the 64-variable limit"));
            }
            bits |= 1 << v;
        }
        Ok(Term(bits))
    }

    pub fn from_bits(bits: u64) -> Term {
        Term(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, var: usize) -> bool {
        var < 64 && self.0 & (1 << var) != 0
    }

    pub fn is_subset_of(self, other: Term) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn without(self, var: usize) -> Term {
        Term(self.0 & !(1 << var))
    }

    /// Variables in ascending order.
    pub fn vars(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&k| self.0 & (1 << k) != 0)
    }

    /// Ordering by the ascending list of variable indices.
    pub fn lexical_cmp(self, other: Term) -> Ordering {
        self.vars().cmp(other.vars())
    }

    fn max_var(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }

    /// Parameters contributed by this term: `Π_{k∈m} (r_k − 1)`.
    pub fn df(self, shape: &[usize]) -> usize {
        self.vars().map(|k| shape[k] - 1).product()
    }
}

/// A hierarchical model given by its generators (maximal terms).
///
/// Generators are kept free of subsets and sorted by descending bit mask, the
/// order used when reports list terms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModelSpec {
    generators: Vec<Term>,
}

impl ModelSpec {
    pub fn new(generators: impl IntoIterator<Item = Term>) -> ModelSpec {
        let all: BTreeSet<Term> = generators.into_iter().filter(|t| !t.is_empty()).collect();
        let mut maximal: Vec<Term> = all
            .iter()
            .copied()
            .filter(|&t| !all.iter().any(|&o| o != t && t.is_subset_of(o)))
            .collect();
        maximal.sort_by(|a, b| b.cmp(a));
        ModelSpec {
            generators: maximal,
        }
    }

    pub fn saturated(variables: usize) -> ModelSpec {
        ModelSpec::new([Term((0..variables).fold(0, |b, k| b | 1 << k))])
    }

    pub fn main_effects(variables: usize) -> ModelSpec {
        ModelSpec::new((0..variables).map(|k| Term(1 << k)))
    }

    pub fn generators(&self) -> &[Term] {
        &self.generators
    }

    /// Every term implied by the generators, including the empty term.
    pub fn closure(&self) -> BTreeSet<Term> {
        let mut out = BTreeSet::from([Term::EMPTY]);
        for &g in &self.generators {
            // walk all submasks of g
            let mut sub = g.0;
            loop {
                out.insert(Term(sub));
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & g.0;
            }
        }
        out
    }

    /// The model with `term` removed and replaced by its maximal faces.
    pub fn remove(&self, term: Term) -> ModelSpec {
        let mut gens: Vec<Term> = self
            .generators
            .iter()
            .copied()
            .filter(|&g| g != term)
            .collect();
        gens.extend(term.vars().map(|k| term.without(k)));
        ModelSpec::new(gens)
    }

    pub fn max_var(&self) -> Option<usize> {
        self.generators.iter().filter_map(|t| t.max_var()).max()
    }

    /// Renders generators as `[ab][c]`, joining variable names; names longer
    /// than one character are separated by `*`.
    pub fn display_with<S: AsRef<str>>(&self, names: &[S]) -> String {
        if self.generators.is_empty() {
            return "[]".to_string();
        }
        let single = names.iter().all(|n| n.as_ref().chars().count() == 1);
        self.generators
            .iter()
            .map(|g| {
                let parts: Vec<String> = g
                    .vars()
                    .map(|k| {
                        names
                            .get(k)
                            .map_or_else(|| k.to_string(), |n| n.as_ref().to_string())
                    })
                    .collect();
                format!("[{}]", parts.join(if single { "" } else { "*" }))
            })
            .collect()
    }

    /// Parses `[ab][c]`-style generator lists. Inside brackets, names are
    /// separated by `*` or `,`; without separators each character is a name.
    pub fn parse<S: AsRef<str>>(text: &str, names: &[S]) -> Result<ModelSpec> {
        let lookup = |name: &str| -> Result<usize> {
            names
                .iter()
                .position(|n| n.as_ref() == name)
                .ok_or_else(|| Error::Input(format!("unknown variable {name:?} in generators")))
        };
        let mut gens = Vec::new();
        let mut rest = text.trim();
        if rest.is_empty() {
            return input("empty generator list");
        }
        while !rest.is_empty() {
            let Some(body) = rest.strip_prefix('[') else {
                return input(format!("expected '[' in generator list at {rest:?}"));
            };
            let Some(end) = body.find(']') else {
                return input("unterminated '[' in generator list");
            };
            let inner = body[..end].trim();
            let vars: Vec<usize> = if inner.is_empty() {
                Vec::new()
            } else if inner.contains(['*', ',']) {
                inner
                    .split(['*', ','])
                    .map(|s| lookup(s.trim()))
                    .collect::<Result<_>>()?
            } else if let Ok(k) = lookup(inner) {
                vec![k]
            } else {
                inner
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| lookup(&c.to_string()))
                    .collect::<Result<_>>()?
            };
            gens.push(Term::new(&vars)?);
            rest = body[end + 1..].trim_start();
        }
        Ok(ModelSpec::new(gens))
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (0..=self.max_var().unwrap_or(0))
            .map(|k| char::from(b'a' + (k % 26) as u8).to_string())
            .collect();
        f.write_str(&self.display_with(&names))
    }
}

/// Number of free parameters: the sum of `Π_{k∈m}(r_k − 1)` over the non-empty
/// terms of the closure.
pub fn model_df(spec: &ModelSpec, shape: &[usize]) -> usize {
    spec.closure()
        .into_iter()
        .filter(|t| !t.is_empty())
        .map(|t| t.df(shape))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IpfOptions<T> {
    /// Largest allowed absolute gap between fitted and observed generator
    /// marginals, in count units.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for IpfOptions<T> {
    fn default() -> Self {
        IpfOptions {
            tol: T::of(1e-8),
            max_iter: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult<T> {
    pub spec: ModelSpec,
    /// Expected counts.
    pub fitted: SparseTable<T>,
    pub dev: T,
    pub dfmod: usize,
    pub dfres: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Observed marginal of one generator together with the cell-to-marginal map.
struct MarginPlan<T> {
    index: Vec<usize>,
    observed: Vec<T>,
}

impl<T: Scalar> MarginPlan<T> {
    fn new(table: &SparseTable<T>, term: Term) -> Self {
        let shape = table.shape();
        let vars: Vec<usize> = term.vars().collect();
        let mut sub_strides = vec![0usize; shape.len()];
        let mut size = 1;
        for &k in vars.iter().rev() {
            sub_strides[k] = size;
            size *= shape[k];
        }
        let strides = table.strides();
        let index = (0..table.cell_count())
            .map(|i| {
                vars.iter()
                    .map(|&k| ((i / strides[k]) % shape[k]) * sub_strides[k])
                    .sum()
            })
            .collect::<Vec<usize>>();
        let mut observed = vec![T::zero(); size];
        for &(i, c) in table.linear_cells() {
            observed[index[i]] += c;
        }
        MarginPlan { index, observed }
    }

    fn fitted(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.observed.len()];
        for (&j, &v) in self.index.iter().zip(values) {
            out[j] += v;
        }
        out
    }

    fn gap(&self, values: &[T]) -> T {
        self.fitted(values)
            .iter()
            .zip(&self.observed)
            .map(|(&f, &o)| (f - o).abs())
            .fold(T::zero(), T::max)
    }

    fn scale(&self, values: &mut [T]) {
        let fitted = self.fitted(values);
        let factors: Vec<T> = fitted
            .iter()
            .zip(&self.observed)
            .map(|(&f, &o)| if f > T::zero() { o / f } else { T::zero() })
            .collect();
        for (v, &j) in values.iter_mut().zip(&self.index) {
            *v *= factors[j];
        }
    }
}

fn deviance_dense<T: Scalar>(observed: &SparseTable<T>, fitted: &[T]) -> Result<T> {
    let mut sum = T::zero();
    for &(i, c) in observed.linear_cells() {
        if !(fitted[i] > T::zero()) {
            return Err(Error::Degenerate(format!(
                "observed count {c} at {:?} has zero fitted value",
                observed.coords_of(i)
            )));
        }
        sum += c * (c / fitted[i]).ln();
    }
    Ok(sum + sum)
}

fn check_spec(spec: &ModelSpec, ndim: usize) -> Result<()> {
    match spec.max_var() {
        Some(k) if k >= ndim => input(format!("model refers to variable {k}, table has {ndim}")),
        _ => Ok(()),
    }
}

/// Maximum-likelihood expected counts by iterative proportional scaling from
/// a uniform start. Stops once every generator marginal is within `tol` of the
/// observed marginal; otherwise returns the last iterate with
/// `converged = false`.
pub fn ipf_fit<T: Scalar>(
    table: &SparseTable<T>,
    spec: &ModelSpec,
    tol: T,
    max_iter: usize,
) -> Result<FitResult<T>> {
    check_spec(spec, table.ndim())?;
    let n = table.total();
    if !(n > T::zero()) {
        return input("model fitting needs a table with positive total");
    }
    if !(tol > T::zero()) {
        return input(format!("tolerance {tol} must be positive"));
    }
    let cells = table.cell_count();
    let mut values = vec![n / T::of_usize(cells); cells];
    let plans: Vec<MarginPlan<T>> = spec
        .generators()
        .iter()
        .map(|&g| MarginPlan::new(table, g))
        .collect();

    let mut iterations = 0;
    if spec.generators().iter().any(|g| g.len() == table.ndim()) {
        // saturated: the fit is the table itself
        values = table.to_dense().values().to_vec();
        iterations = 1;
    }
    let mut converged = plans.iter().all(|p| p.gap(&values) <= tol);
    while !converged && iterations < max_iter {
        for plan in &plans {
            plan.scale(&mut values);
        }
        iterations += 1;
        converged = plans.iter().all(|p| p.gap(&values) <= tol);
    }

    let dev = deviance_dense(table, &values)?;
    let dfmod = model_df(spec, table.shape());
    Ok(FitResult {
        spec: spec.clone(),
        fitted: SparseTable::from_dense(table.shape().to_vec(), &values)?,
        dev,
        dfmod,
        dfres: cells - 1 - dfmod,
        iterations,
        converged,
    })
}

pub fn ipf_fit_with<T: Scalar>(
    table: &SparseTable<T>,
    spec: &ModelSpec,
    options: &IpfOptions<T>,
) -> Result<FitResult<T>> {
    ipf_fit(table, spec, options.tol, options.max_iter)
}

/// One row of a backward selection trace.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardRow<T> {
    pub r: usize,
    pub spec: ModelSpec,
    /// Term removed to reach this model; `None` for the starting row.
    pub removed: Option<Term>,
    pub dev: T,
    pub dfmod: usize,
    pub dfres: usize,
    pub dev_term: T,
    pub df_term: usize,
    pub adj_rsq: T,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardTrace<T> {
    pub shape: Vec<usize>,
    pub rows: Vec<BackwardRow<T>>,
}

impl<T: Scalar> BackwardTrace<T> {
    pub fn curve(&self) -> Vec<(usize, T)> {
        self.rows.iter().map(|r| (r.dfmod, r.dev)).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Backward elimination down to main effects.
///
/// At each step every generator with two or more variables is tried for
/// removal; the one with the smallest `Δdev / Δdf` is dropped. A removal that
/// frees no parameters (some variable of the term has one category) leaves the
/// model unchanged and scores 0. Ties go to the lexically smallest term.
pub fn backward_select<T: Scalar>(
    table: &SparseTable<T>,
    start: &ModelSpec,
) -> Result<BackwardTrace<T>> {
    backward_select_with(table, start, &IpfOptions::default())
}

pub fn backward_select_with<T: Scalar>(
    table: &SparseTable<T>,
    start: &ModelSpec,
    options: &IpfOptions<T>,
) -> Result<BackwardTrace<T>> {
    let first = ipf_fit_with(table, start, options)?;
    let mut rows = vec![BackwardRow {
        r: 0,
        spec: start.clone(),
        removed: None,
        dev: first.dev,
        dfmod: first.dfmod,
        dfres: first.dfres,
        dev_term: first.dev,
        df_term: first.dfres,
        adj_rsq: T::one(),
        converged: first.converged,
    }];
    let tol = T::of(1e-12);
    let mut current = first;
    loop {
        let mut candidates: Vec<Term> = current
            .spec
            .generators()
            .iter()
            .copied()
            .filter(|g| g.len() >= 2)
            .collect();
        if candidates.is_empty() {
            break;
        }
        candidates.sort_by(|a, b| a.lexical_cmp(*b));
        let mut best: Option<(T, Term, FitResult<T>)> = None;
        for term in candidates {
            let mut fit = ipf_fit_with(table, &current.spec.remove(term), options)?;
            let df = current.dfmod - fit.dfmod;
            let quotient = if df == 0 {
                fit.dev = current.dev;
                T::zero()
            } else {
                (fit.dev - current.dev) / T::of_usize(df)
            };
            match &best {
                Some((q, _, _)) if !(quotient < *q) || rel_eq(quotient, *q, tol) => {}
                _ => best = Some((quotient, term, fit)),
            }
        }
        let (_, term, fit) = best.expect("at least one candidate");
        rows.push(BackwardRow {
            r: rows.len(),
            spec: fit.spec.clone(),
            removed: Some(term),
            dev: fit.dev,
            dfmod: fit.dfmod,
            dfres: fit.dfres,
            dev_term: fit.dev - current.dev,
            df_term: current.dfmod - fit.dfmod,
            adj_rsq: T::one(),
            converged: fit.converged,
        });
        current = fit;
    }
    let (dev_last, dfres_last) = rows.last().map(|r| (r.dev, r.dfres)).expect("starting row");
    for row in &mut rows {
        row.adj_rsq = crate::pcc::adjusted_rsq(row.dev, row.dfres, dev_last, dfres_last).0;
    }
    Ok(BackwardTrace {
        shape: table.shape().to_vec(),
        rows,
    })
}

/// Fits `spec` on the collapsed table and expands the fit to the original
/// shape, matching the original one-way marginals within each group.
///
/// Deviance is against the original table. `dfmod` counts the model's
/// parameters on the collapsed shape plus the `r_k − g_k` within-group
/// marginal proportions fixed by the expansion.
pub fn fit_hllpm<T: Scalar>(
    original: &SparseTable<T>,
    partition: &Partition,
    spec: &ModelSpec,
) -> Result<FitResult<T>> {
    fit_hllpm_with(original, partition, spec, &IpfOptions::default())
}

pub fn fit_hllpm_with<T: Scalar>(
    original: &SparseTable<T>,
    partition: &Partition,
    spec: &ModelSpec,
    options: &IpfOptions<T>,
) -> Result<FitResult<T>> {
    let collapsed = original.apply_partition(partition)?;
    let fit = ipf_fit_with(&collapsed, spec, options)?;
    let n = original.total();
    let probabilities = fit.fitted.scaled(T::one() / n)?;
    let marginals = original.one_way_all();
    let expanded = ExpandedModel::new(&probabilities, partition, &marginals)?;
    let dev = expanded.deviance(original)?;
    let fitted = expanded.to_table()?.scaled(n)?;
    let within: usize = partition
        .keys()
        .iter()
        .zip(partition.group_counts())
        .map(|(key, &g)| key.len() - g)
        .sum();
    let dfmod = fit.dfmod + within;
    Ok(FitResult {
        spec: spec.clone(),
        fitted,
        dev,
        dfmod,
        dfres: original.cell_count() - 1 - dfmod,
        iterations: fit.iterations,
        converged: fit.converged,
    })
}

/// Expected counts under mutual independence of all variables.
pub fn independence_model<T: Scalar>(table: &SparseTable<T>) -> Result<SparseTable<T>> {
    let n = table.total();
    if !(n > T::zero()) {
        return input("independence model needs a table with positive total");
    }
    let margins = table.one_way_all();
    let values: Vec<T> = (0..table.cell_count())
        .map(|i| {
            table
                .coords_of(i)
                .iter()
                .enumerate()
                .fold(n, |acc, (k, &c)| acc * margins[k][c] / n)
        })
        .collect();
    SparseTable::from_dense(table.shape().to_vec(), &values)
}

/// Observed cell proportion over reference cell proportion, cell by cell.
///
/// Both tables are normalized by their own totals, so `reference` may hold
/// expected counts or probabilities. A cell empty in both gives 1; a positive
/// observation over a zero expectation is an error.
pub fn pearson_ratios<T: Scalar>(
    observed: &SparseTable<T>,
    reference: &SparseTable<T>,
) -> Result<DenseTable<T>> {
    if observed.shape() != reference.shape() {
        return input(format!(
            "observed shape {:?} differs from reference shape {:?}",
            observed.shape(),
            reference.shape()
        ));
    }
    let (n_obs, n_ref) = (observed.total(), reference.total());
    if !(n_obs > T::zero()) || !(n_ref > T::zero()) {
        return input("Pearson ratios need tables with positive totals");
    }
    let obs = observed.to_dense();
    let exp = reference.to_dense();
    let values = obs
        .values()
        .iter()
        .zip(exp.values())
        .enumerate()
        .map(|(i, (&o, &e))| {
            if e > T::zero() {
                Ok((o / n_obs) / (e / n_ref))
            } else if o == T::zero() {
                Ok(T::one())
            } else {
                Err(Error::Degenerate(format!(
                    "observed count {o} at {:?} has zero expectation",
                    obs.coords_of(i)
                )))
            }
        })
        .collect::<Result<Vec<T>>>()?;
    DenseTable::new(observed.shape().to_vec(), values)
}
