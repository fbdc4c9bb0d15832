use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use catcollapse_cli::run::DEFAULT_ORACLE_CAP;
use catcollapse_cli::{run_command, CliError, Command, Precision, RunConfig, SchemeConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "catcollapse",
    version,
    about = "Paired category collapsing for contingency tables"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Long-format counts CSV (variable columns, then `count`)
    #[arg(long)]
    data: PathBuf,
    /// JSON variable configuration (names, category order, treatment)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for report files; stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop collapsing before the first merge with a larger G²/df
    #[arg(long, value_name = "X")]
    stop_quotient: Option<f64>,
    /// Decimal places for deviances (ratios and R² use at least 3)
    #[arg(long, value_name = "N", default_value_t = 2)]
    precision: usize,
}

#[derive(Subcommand)]
enum Cmd {
    /// Collapsing trace
    Pcc {
        #[command(flatten)]
        common: Common,
        /// Also write the loss matrices of the current table before each step
        #[arg(long)]
        loss_matrices: bool,
    },
    /// Pairwise information-loss matrices of the original table
    Lossmatrix {
        #[command(flatten)]
        common: Common,
        /// Variable name or index (all collapsible variables when absent)
        #[arg(long)]
        dim: Option<String>,
    },
    /// Log-linear fit or backward selection
    Hllm {
        #[command(flatten)]
        common: Common,
        /// Model to fit, e.g. "[oa][ro][s]"; backward selection when absent
        #[arg(long)]
        generators: Option<String>,
        /// Use the partition of this collapsing step
        #[arg(long)]
        step: Option<usize>,
    },
    /// Pearson ratios against the independence model
    Ratios {
        #[command(flatten)]
        common: Common,
        /// Expanded model of this collapsing step
        #[arg(long)]
        step: Option<usize>,
        /// Ratios of the collapsed table itself rather than the expanded model
        #[arg(long, requires = "step")]
        current: bool,
    },
    /// Deviance against parameter count for collapsing and log-linear models
    Curve {
        #[command(flatten)]
        common: Common,
    },
    /// Exhaustive search for the best partition of each shape
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Largest number of partitions to enumerate
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: u128,
    },
}

fn split(cmd: Cmd) -> (Common, Command) {
    match cmd {
        Cmd::Pcc {
            common,
            loss_matrices,
        } => (common, Command::Pcc { loss_matrices }),
        Cmd::Lossmatrix { common, dim } => (common, Command::LossMatrix { dim }),
        Cmd::Hllm {
            common,
            generators,
            step,
        } => (common, Command::Hllm { generators, step }),
        Cmd::Ratios {
            common,
            step,
            current,
        } => (common, Command::Ratios { step, current }),
        Cmd::Curve { common } => (common, Command::Curve),
        Cmd::Oracle { common, cap } => (common, Command::Oracle { cap }),
    }
}

fn execute(common: Common, command: Command) -> Result<(), CliError> {
    let scheme = common
        .config
        .as_deref()
        .map(SchemeConfig::load)
        .transpose()?;
    let config = RunConfig {
        data: common.data,
        scheme,
        out: common.out,
        stop_quotient: common.stop_quotient,
        precision: Precision::with_deviance(common.precision),
    };
    let outcome = run_command(&config, &command)?;
    match &config.out {
        Some(dir) => outcome.write_to(dir)?,
        None => {
            let mut stdout = std::io::stdout().lock();
            for a in &outcome.artifacts {
                stdout.write_all(a.contents.as_bytes())?;
            }
        }
    }
    match outcome.not_converged {
        Some(what) => Err(CliError::NotConverged(what)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    let (common, command) = split(cli.command);
    match execute(common, command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("catcollapse: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
