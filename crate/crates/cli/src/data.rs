//! Long-format count files and the JSON variable configuration.
//!
//! A counts file has a header naming each variable followed by a `count`
//! column; every row gives one label per variable and a nonnegative count.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use catcollapse::{CategoryScheme, Table, Treatment, VariableDef};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariableConfig {
    pub name: String,
    /// Explicit category order; first-appearance order when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    #[serde(default = "default_treatment")]
    pub treatment: String,
}

fn default_treatment() -> String {
    "nominal".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub variables: Vec<VariableConfig>,
}

impl SchemeConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let config: SchemeConfig = serde_json::from_str(text)
            .map_err(|e| CliError::Input(format!("invalid config: {e}")))?;
        for v in &config.variables {
            parse_treatment(&v.treatment)?;
        }
        Ok(config)
    }
}

fn parse_treatment(text: &str) -> CliResult<Treatment> {
    text.parse::<Treatment>()
        .map_err(|e| CliError::Input(e.to_string()))
}

/// A counts file read into a table, with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scheme: CategoryScheme,
    pub table: Table,
}

impl Dataset {
    pub fn names(&self) -> Vec<String> {
        self.scheme
            .variables()
            .iter()
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn treatments(&self) -> Vec<Treatment> {
        self.scheme.treatments()
    }
}

pub fn read_counts(path: &Path, config: Option<&SchemeConfig>) -> CliResult<Dataset> {
    let file = File::open(path)
        .map_err(|e| CliError::Input(format!("cannot open {}: {e}", path.display())))?;
    read_counts_from(file, config)
}

struct Column {
    labels: Vec<String>,
    lookup: HashMap<String, usize>,
    fixed: bool,
}

impl Column {
    fn index(&mut self, label: &str, name: &str, line: u64) -> CliResult<usize> {
        if let Some(&i) = self.lookup.get(label) {
            return Ok(i);
        }
        if self.fixed {
            return Err(CliError::Input(format!(
                "line {line}: unknown label '{label}' for variable '{name}'"
            )));
        }
        self.labels.push(label.to_string());
        self.lookup.insert(label.to_string(), self.labels.len() - 1);
        Ok(self.labels.len() - 1)
    }
}

pub fn read_counts_from<R: Read>(reader: R, config: Option<&SchemeConfig>) -> CliResult<Dataset> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = csv
        .headers()
        .map_err(|e| CliError::Input(format!("line 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    if header.last().map(String::as_str) != Some("count") || header.len() < 2 {
        return Err(CliError::Input(
            "line 1: header must list the variables followed by 'count'".into(),
        ));
    }
    let file_names = &header[..header.len() - 1];

    // dimension order: the config's when given, else the file's
    let (names, treatments, mut columns, order) = match config {
        Some(cfg) => {
            let mut order = Vec::with_capacity(cfg.variables.len());
            for v in &cfg.variables {
                let pos = file_names
                    .iter()
                    .position(|n| *n == v.name)
                    .ok_or_else(|| {
                        CliError::Input(format!("line 1: variable '{}' not in header", v.name))
                    })?;
                order.push(pos);
            }
            if order.len() != file_names.len() {
                return Err(CliError::Input(format!(
                    "line 1: header has {} variables, config has {}",
                    file_names.len(),
                    order.len()
                )));
            }
            let columns = cfg
                .variables
                .iter()
                .map(|v| {
                    let labels = v.categories.clone().unwrap_or_default();
                    let lookup = labels
                        .iter()
                        .enumerate()
                        .map(|(i, l)| (l.clone(), i))
                        .collect();
                    Column {
                        labels,
                        lookup,
                        fixed: v.categories.is_some(),
                    }
                })
                .collect::<Vec<_>>();
            let treatments = cfg
                .variables
                .iter()
                .map(|v| parse_treatment(&v.treatment))
                .collect::<CliResult<Vec<_>>>()?;
            let names = cfg
                .variables
                .iter()
                .map(|v| v.name.clone())
                .collect::<Vec<_>>();
            (names, treatments, columns, order)
        }
        None => {
            let columns = file_names
                .iter()
                .map(|_| Column {
                    labels: Vec::new(),
                    lookup: HashMap::new(),
                    fixed: false,
                })
                .collect();
            (
                file_names.to_vec(),
                vec![Treatment::Nominal; file_names.len()],
                columns,
                (0..file_names.len()).collect(),
            )
        }
    };

    let mut entries: Vec<(Vec<usize>, f64)> = Vec::new();
    for record in csv.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Input(format!("line {line}: {e}"))
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != header.len() {
            return Err(CliError::Input(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                record.len()
            )));
        }
        let raw = &record[header.len() - 1];
        let count: f64 = raw
            .parse()
            .map_err(|_| CliError::Input(format!("line {line}: count '{raw}' is not a number")))?;
        if !count.is_finite() || count < 0.0 {
            return Err(CliError::Input(format!(
                "line {line}: count {raw} must be a finite nonnegative number"
            )));
        }
        let mut coords = Vec::with_capacity(order.len());
        for (dim, &pos) in order.iter().enumerate() {
            coords.push(columns[dim].index(&record[pos], &names[dim], line)?);
        }
        entries.push((coords, count));
    }

    let variables = names
        .iter()
        .zip(&treatments)
        .zip(columns.iter_mut())
        .map(|((name, &t), col)| {
            if col.labels.is_empty() {
                // a header-only file still needs one category per variable
                col.labels.push(String::new());
            }
            VariableDef::new(name.clone(), std::mem::take(&mut col.labels), t)
        })
        .collect();
    let scheme = CategoryScheme::new(variables)?;
    let table = catcollapse::build_table(&scheme, entries)?;
    Ok(Dataset { scheme, table })
}

/// Writes a dataset in long format. Leading zero rows list every category so
/// that reading the file back reproduces the category order.
pub fn write_counts<W: Write>(writer: W, dataset: &Dataset) -> CliResult<()> {
    let mut out = csv::Writer::from_writer(writer);
    let vars = dataset.scheme.variables();
    let mut header: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    header.push("count");
    out.write_record(&header).map_err(csv_error)?;
    let widest = vars.iter().map(|v| v.categories.len()).max().unwrap_or(0);
    for i in 0..widest {
        let mut row: Vec<String> = vars
            .iter()
            .map(|v| v.categories[i.min(v.categories.len() - 1)].clone())
            .collect();
        row.push("0".into());
        out.write_record(&row).map_err(csv_error)?;
    }
    for (coords, count) in dataset.table.iter() {
        let mut row: Vec<String> = coords
            .iter()
            .zip(vars)
            .map(|(&c, v)| v.categories[c].clone())
            .collect();
        row.push(format!("{count}"));
        out.write_record(&row).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Input(e.to_string())
}
