//! Command dispatch: each command reads the data once and renders one or
//! more named artifacts.

use std::path::{Path, PathBuf};

use catcollapse::hllm::{backward_select, fit_hllpm, independence_model, ipf_fit, ModelSpec};
use catcollapse::pcc::{candidate_matrices, exhaustive_partition_search};
use catcollapse::{
    expand_model, loss_matrix, pearson_ratios, run_pcc_with, PccOptions, Table, Trace, Treatment,
    TreatmentConfig,
};

use crate::data::{read_counts, Dataset, SchemeConfig};
use crate::error::{CliError, CliResult};
use crate::report::{self, Precision};

pub const DEFAULT_ORACLE_CAP: u128 = 1_000_000;
const IPF_TOL: f64 = 1e-8;
const IPF_MAX_ITER: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data: PathBuf,
    pub scheme: Option<SchemeConfig>,
    pub out: Option<PathBuf>,
    /// Stop collapsing before the first merge whose quotient exceeds this.
    pub stop_quotient: Option<f64>,
    pub precision: Precision,
}

impl RunConfig {
    pub fn new(data: impl Into<PathBuf>) -> Self {
        RunConfig {
            data: data.into(),
            scheme: None,
            out: None,
            stop_quotient: None,
            precision: Precision::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Pcc {
        loss_matrices: bool,
    },
    LossMatrix {
        dim: Option<String>,
    },
    Hllm {
        generators: Option<String>,
        step: Option<usize>,
    },
    Ratios {
        step: Option<usize>,
        current: bool,
    },
    Curve,
    Oracle {
        cap: u128,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Set when a model fit stopped at the iteration limit.
    pub not_converged: Option<String>,
}

impl Outcome {
    fn single(name: &str, contents: String) -> Self {
        Outcome {
            artifacts: vec![Artifact {
                name: name.into(),
                contents,
            }],
            not_converged: None,
        }
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.contents.as_str())
    }

    /// Writes every artifact into `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> CliResult<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

pub fn load(config: &RunConfig) -> CliResult<Dataset> {
    read_counts(&config.data, config.scheme.as_ref())
}

pub fn run_command(config: &RunConfig, command: &Command) -> CliResult<Outcome> {
    if matches!(config.stop_quotient, Some(q) if q.is_nan() || q < 0.0) {
        return Err(CliError::Input("stop quotient must be nonnegative".into()));
    }
    let data = load(config)?;
    let p = config.precision;
    match command {
        Command::Pcc { loss_matrices } => {
            let trace = trace(&data, config)?;
            let mut outcome = Outcome::single("trace.tsv", report::trace_tsv(&trace, p));
            if *loss_matrices {
                outcome.artifacts.push(Artifact {
                    name: "loss_matrices.tsv".into(),
                    contents: step_loss_matrices(&data, &trace, p)?,
                });
            }
            Ok(outcome)
        }
        Command::LossMatrix { dim } => {
            let dims = match dim {
                Some(d) => vec![resolve_dim(&data, d)?],
                None => (0..data.table.ndim())
                    .filter(|&k| data.treatments()[k] != Treatment::Fixed)
                    .collect(),
            };
            let names = data.names();
            let mut text = String::new();
            for k in dims {
                let m = loss_matrix(&data.table, k, data.treatments()[k])?;
                text.push_str(&report::loss_matrix_block("", &names[k], &m, p));
            }
            Ok(Outcome::single("loss_matrix.tsv", text))
        }
        Command::Hllm { generators, step } => hllm(&data, config, generators.as_deref(), *step),
        Command::Ratios { step, current } => ratios(&data, config, *step, *current),
        Command::Curve => {
            let trace = trace(&data, config)?;
            let backward = backward_select(&data.table, &ModelSpec::saturated(data.table.ndim()))?;
            let text = report::curve_csv(&[("pcc", trace.curve()), ("hllm", backward.curve())], p);
            let mut outcome = Outcome::single("curve.csv", text);
            if !backward.all_converged() {
                outcome.not_converged = Some("backward selection on the original table".into());
            }
            Ok(outcome)
        }
        Command::Oracle { cap } => {
            let treatments = TreatmentConfig::new(data.treatments());
            let result = exhaustive_partition_search(&data.table, &treatments, *cap)?;
            let trace = trace(&data, config)?;
            Ok(Outcome::single(
                "oracle.tsv",
                report::oracle_tsv(&result, &trace, p),
            ))
        }
    }
}

fn trace(data: &Dataset, config: &RunConfig) -> CliResult<Trace> {
    let options = PccOptions {
        stop_quotient: config.stop_quotient,
    };
    Ok(run_pcc_with(
        &data.table,
        &TreatmentConfig::new(data.treatments()),
        &options,
    )?)
}

fn resolve_dim(data: &Dataset, text: &str) -> CliResult<usize> {
    if let Some(k) = data.scheme.position(text) {
        return Ok(k);
    }
    match text.parse::<usize>() {
        Ok(k) if k < data.table.ndim() => Ok(k),
        _ => Err(CliError::Input(format!("unknown variable '{text}'"))),
    }
}

fn step_of(trace: &Trace, step: usize) -> CliResult<&catcollapse::Step> {
    trace.steps.get(step).ok_or_else(|| {
        CliError::Input(format!(
            "step {step} not in trace of {} rows",
            trace.steps.len()
        ))
    })
}

/// Loss matrices of the current table before each merge.
fn step_loss_matrices(data: &Dataset, trace: &Trace, p: Precision) -> CliResult<String> {
    let names = data.names();
    let treatments = TreatmentConfig::new(data.treatments());
    let mut text = String::new();
    for step in trace.steps.iter().filter(|s| !s.terminal) {
        let current = data.table.apply_partition(&step.partition)?;
        for m in candidate_matrices(&current, &treatments)? {
            let title = format!("before step {} ", step.r + 1);
            text.push_str(&report::loss_matrix_block(&title, &names[m.dim], &m, p));
        }
    }
    Ok(text)
}

fn hllm(
    data: &Dataset,
    config: &RunConfig,
    generators: Option<&str>,
    step: Option<usize>,
) -> CliResult<Outcome> {
    let names = data.names();
    let p = config.precision;
    let partition = match step {
        Some(r) => Some(step_of(&trace(data, config)?, r)?.partition.clone()),
        None => None,
    };
    let outcome = match generators {
        Some(text) => {
            let spec = ModelSpec::parse(text, &names)?;
            let fit = match &partition {
                Some(part) => fit_hllpm(&data.table, part, &spec)?,
                None => ipf_fit(&data.table, &spec, IPF_TOL, IPF_MAX_ITER)?,
            };
            let mut o = Outcome::single("hllm.tsv", report::fit_tsv(&[(&spec, &fit)], &names, p));
            if !fit.converged {
                o.not_converged = Some(spec.display_with(&names));
            }
            o
        }
        None => {
            let table: Table = match &partition {
                Some(part) => data.table.apply_partition(part)?,
                None => data.table.clone(),
            };
            let trace = backward_select(&table, &ModelSpec::saturated(table.ndim()))?;
            let mut o = Outcome::single("hllm.tsv", report::backward_tsv(&trace, &names, p));
            if !trace.all_converged() {
                o.not_converged = Some("backward selection".into());
            }
            o
        }
    };
    Ok(outcome)
}

fn ratios(
    data: &Dataset,
    config: &RunConfig,
    step: Option<usize>,
    current: bool,
) -> CliResult<Outcome> {
    let names = data.names();
    let labels: Vec<Vec<String>> = data
        .scheme
        .variables()
        .iter()
        .map(|v| v.categories.clone())
        .collect();
    let table = &data.table;
    let (grid, labels) = match step {
        None => (pearson_ratios(table, &independence_model(table)?)?, labels),
        Some(r) => {
            let trace = trace(data, config)?;
            let partition = &step_of(&trace, r)?.partition;
            let collapsed = table.apply_partition(partition)?;
            if current {
                let ids = collapsed
                    .shape()
                    .iter()
                    .map(|&g| (0..g).map(|c| c.to_string()).collect())
                    .collect();
                (
                    pearson_ratios(&collapsed, &independence_model(&collapsed)?)?,
                    ids,
                )
            } else {
                let probabilities = collapsed.scaled(1.0 / table.total())?;
                let expanded = expand_model(&probabilities, partition, &table.one_way_all())?;
                (
                    pearson_ratios(&expanded, &independence_model(table)?)?,
                    labels,
                )
            }
        }
    };
    Ok(Outcome::single(
        "ratios.tsv",
        report::ratios_tsv(&grid, &names, &labels, config.precision),
    ))
}
