//! Text renderings of traces, loss matrices, fits and ratio tables.

use std::fmt::Write;

use catcollapse::hllm::ModelSpec;
use catcollapse::pcc::ExhaustiveResult;
use catcollapse::{Backward, DenseTable, Fit, Losses, PairMode, Trace};

/// Decimal places: `deviance` for deviances, `ratio` for ratios and R².
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub deviance: usize,
    pub ratio: usize,
}

impl Default for Precision {
    fn default() -> Self {
        Precision {
            deviance: 2,
            ratio: 3,
        }
    }
}

impl Precision {
    /// Deviances at `digits` places, ratios at no fewer than three.
    pub fn with_deviance(digits: usize) -> Self {
        Precision {
            deviance: digits,
            ratio: digits.max(3),
        }
    }
}

/// Fixed-point rendering without a negative zero.
pub fn fixed(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub const TRACE_HEADER: &str = "r\td\tkey\tdim\tdev\tdfmod\tdfres\tdev_term\tdf_term\tadj_rsq";

pub fn trace_tsv(trace: &Trace, p: Precision) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in &trace.steps {
        let d = s.dim.map(|d| d.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            s.r,
            d,
            join(&s.key),
            join(&s.shape),
            fixed(s.dev, p.deviance),
            s.dfmod,
            s.dfres,
            fixed(s.dev_term, p.deviance),
            s.df_term,
            fixed(s.adj_rsq, p.ratio)
        )
        .expect("writing to a string");
    }
    out
}

/// Upper-triangular block: a title line, a header of category ids and one
/// row per category.
pub fn loss_matrix_block(title: &str, name: &str, m: &Losses, p: Precision) -> String {
    let mut out = String::new();
    let df = m.entries.first().map_or(0, |e| e.df);
    let mode = match m.mode {
        PairMode::AllPairs => "all",
        PairMode::AdjacentOnly => "adjacent",
    };
    writeln!(
        out,
        "# {title}variable {name} (dim {}) pairs {mode} df {df}",
        m.dim
    )
    .expect("writing to a string");
    let ids: Vec<String> = (0..m.size).map(|c| c.to_string()).collect();
    writeln!(out, "{name}\t{}", ids.join("\t")).expect("writing to a string");
    for u in 0..m.size {
        let cells: Vec<String> = (0..m.size)
            .map(|v| {
                if v <= u {
                    return String::new();
                }
                m.get(u, v)
                    .map(|e| fixed(e.g2, p.deviance))
                    .unwrap_or_default()
            })
            .collect();
        writeln!(out, "{u}\t{}", cells.join("\t")).expect("writing to a string");
    }
    out
}

pub const BACKWARD_HEADER: &str =
    "r\tterms\tdev\tdfmod\tdfres\tdev_term\tdf_term\tadj_rsq\tconverged";

pub fn backward_tsv(trace: &Backward, names: &[String], p: Precision) -> String {
    let mut out = String::from(BACKWARD_HEADER);
    out.push('\n');
    for row in &trace.rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.r,
            row.spec.display_with(names),
            fixed(row.dev, p.deviance),
            row.dfmod,
            row.dfres,
            fixed(row.dev_term, p.deviance),
            row.df_term,
            fixed(row.adj_rsq, p.ratio),
            row.converged
        )
        .expect("writing to a string");
    }
    out
}

pub const FIT_HEADER: &str = "terms\tdev\tdfmod\tdfres\titerations\tconverged";

pub fn fit_tsv(fits: &[(&ModelSpec, &Fit)], names: &[String], p: Precision) -> String {
    let mut out = String::from(FIT_HEADER);
    out.push('\n');
    for (spec, fit) in fits {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            spec.display_with(names),
            fixed(fit.dev, p.deviance),
            fit.dfmod,
            fit.dfres,
            fit.iterations,
            fit.converged
        )
        .expect("writing to a string");
    }
    out
}

/// Two-way ratios as a grid; other ranks in long form with one label column
/// per variable.
pub fn ratios_tsv(
    ratios: &DenseTable<f64>,
    names: &[String],
    labels: &[Vec<String>],
    p: Precision,
) -> String {
    let mut out = String::new();
    let shape = ratios.shape();
    if shape.len() == 2 {
        writeln!(out, "{}\\{}\t{}", names[0], names[1], labels[1].join("\t"))
            .expect("writing to a string");
        for i in 0..shape[0] {
            let row: Vec<String> = (0..shape[1])
                .map(|j| fixed(ratios.get(&[i, j]), p.ratio))
                .collect();
            writeln!(out, "{}\t{}", labels[0][i], row.join("\t")).expect("writing to a string");
        }
        return out;
    }
    writeln!(out, "{}\tratio", names.join("\t")).expect("writing to a string");
    for (idx, &value) in ratios.values().iter().enumerate() {
        let coords = ratios.coords_of(idx);
        let cells: Vec<&str> = coords
            .iter()
            .enumerate()
            .map(|(k, &c)| labels[k][c].as_str())
            .collect();
        writeln!(out, "{}\t{}", cells.join("\t"), fixed(value, p.ratio))
            .expect("writing to a string");
    }
    out
}

pub const CURVE_HEADER: &str = "series,dfmod,dev";

pub fn curve_csv(series: &[(&str, Vec<(usize, f64)>)], p: Precision) -> String {
    let mut out = String::from(CURVE_HEADER);
    out.push('\n');
    for (name, points) in series {
        for &(dfmod, dev) in points {
            writeln!(out, "{name},{dfmod},{}", fixed(dev, p.deviance))
                .expect("writing to a string");
        }
    }
    out
}

pub const ORACLE_HEADER: &str = "shape\tkeys\tloss\tdfmod\tgreedy_dev\tgap";

/// Best partition per shape next to the greedy trace's deviance at that
/// shape, when the trace passes through it.
pub fn oracle_tsv(result: &ExhaustiveResult<f64>, trace: &Trace, p: Precision) -> String {
    let mut out = String::from(ORACLE_HEADER);
    out.push('\n');
    for o in &result.optima {
        let keys: Vec<String> = o.partition.keys().iter().map(|k| join(k)).collect();
        let greedy = trace
            .steps
            .iter()
            .find(|s| s.shape == o.shape)
            .map(|s| s.dev);
        let (g, gap) = match greedy {
            Some(d) => (fixed(d, p.deviance), fixed(d - o.loss, p.deviance)),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{g}\t{gap}",
            join(&o.shape),
            keys.join(" | "),
            fixed(o.loss, p.deviance),
            o.dfmod
        )
        .expect("writing to a string");
    }
    out
}
