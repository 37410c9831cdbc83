//! The `cogs` command line: `explain`, `count`, `check` and `enumerate`.
//!
//! Exit codes: 0 success, 1 parse or I/O error, 2 semantic error, 3 no path
//! within the depth bound.

pub mod instance;
pub mod render;
pub mod report;

use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::counterfactual::{count_counterfactuals, enumerate_counterfactuals, Limits};
use crate::error::Error;
use crate::planner::{find_minimal_paths, PlanOptions, DEFAULT_MAX_DEPTH};
use crate::rules::parse_ruleset;
use crate::schema::State;
use crate::semantics::Model;
use instance::{load_instance, InstanceError};
use report::{check_json, path_json, set_json, CountJson, EnumerateJson, Payload, RunReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SEMANTIC: i32 = 2;
pub const EXIT_NO_PATH: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "cogs",
    version,
    about = "Counterfactual goal states and intervention paths for rule-based decisions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Table,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Rule file.
    pub rules: PathBuf,
    /// CSV instance file with a header row.
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Data row of the instance file to use, counting from 0.
    #[arg(long, default_value_t = 0)]
    pub row: usize,
    /// Pin immutable features to the instance's values.
    #[arg(long)]
    pub fix_immutables: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Minimal intervention paths from the instance to a counterfactual.
    Explain {
        #[command(flatten)]
        common: CommonArgs,
        /// Every minimal path rather than the first.
        #[arg(long)]
        all: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
        max_depth: usize,
    },
    /// Number of counterfactual sets over the abstract state space.
    Count {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decision outcome and causal consistency of the instance.
    Check {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Every counterfactual set.
    Enumerate {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Explain { common, .. }
            | Command::Count { common }
            | Command::Check { common }
            | Command::Enumerate { common } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Explain { .. } => "explain",
            Command::Count { .. } => "count",
            Command::Check { .. } => "check",
            Command::Enumerate { .. } => "enumerate",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Rules { path: PathBuf, source: Error },
    #[error("{path}: {source}")]
    Instance {
        path: PathBuf,
        source: InstanceError,
    },
    #[error(transparent)]
    Run(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        let core = match self {
            CliError::Rules { source, .. } => source,
            CliError::Run(e) => e,
            _ => return EXIT_INPUT,
        };
        match core {
            Error::NoPathFound { .. } => EXIT_NO_PATH,
            e if e.is_semantic() => EXIT_SEMANTIC,
            _ => EXIT_INPUT,
        }
    }
}

/// Output of a successful command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    /// Table rendering, without the timing line.
    pub text: String,
}

impl Outcome {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
                s.push('\n');
                s
            }
            Format::Table => format!("{}Time (ms): {:.3}\n", self.text, self.report.elapsed_ms),
        }
    }
}

pub fn load_model(path: &FsPath) -> Result<Model, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let rules = parse_ruleset(&text).map_err(|e| CliError::Rules {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    Model::new(rules).map_err(|source| CliError::Rules {
        path: path.to_path_buf(),
        source,
    })
}

fn load_state(model: &Model, path: &FsPath, row: usize) -> Result<State, CliError> {
    let file = fs::File::open(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let instance =
        load_instance(file, model.schema(), row).map_err(|source| CliError::Instance {
            path: path.to_path_buf(),
            source,
        })?;
    Ok(model.box_of(&instance)?)
}

fn required_instance<'a>(common: &'a CommonArgs, command: &str) -> Result<&'a FsPath, CliError> {
    common
        .instance
        .as_deref()
        .ok_or_else(|| CliError::Usage(format!("`{command}` needs an instance file")))
}

/// Runs one command and times it from file loading to result.
pub fn execute(command: &Command, limits: &Limits) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let common = command.common();
    let model = load_model(&common.rules)?;

    let pin = if common.fix_immutables {
        let path = required_instance(common, "--fix-immutables")?;
        Some(load_state(&model, path, common.row)?)
    } else {
        None
    };

    let (result, text) = match command {
        Command::Explain { all, max_depth, .. } => {
            let initial = load_state(&model, required_instance(common, "explain")?, common.row)?;
            let options = PlanOptions {
                max_depth: *max_depth,
                all: *all,
                fix_immutables: common.fix_immutables,
                limits: *limits,
            };
            let paths = find_minimal_paths(&model, &initial, &options)?;
            let text = render::paths_text(&model, &paths);
            let paths = paths.iter().map(|p| path_json(&model, p)).collect();
            (Payload::Paths { paths }, text)
        }
        Command::Check { .. } => {
            let state = load_state(&model, required_instance(common, "check")?, common.row)?;
            let outcome = model.decide(&state);
            let verdict = model.causally_consistent(&state);
            (
                Payload::Check(check_json(&model, &outcome, &verdict)),
                render::check_text(&model, &outcome, &verdict),
            )
        }
        Command::Count { .. } => {
            let count = count_counterfactuals(&model, pin.as_ref(), limits)?;
            let dataset = dataset_name(&common.rules);
            let features = model.schema().len();
            (
                Payload::Count(CountJson {
                    dataset: dataset.clone(),
                    features,
                    count,
                }),
                render::count_text(&dataset, features, count),
            )
        }
        Command::Enumerate { .. } => {
            let sets = enumerate_counterfactuals(&model, pin.as_ref(), limits)?;
            let text = render::sets_text(&model, &sets);
            (
                Payload::Enumerate(EnumerateJson {
                    count: sets.len(),
                    sets: sets.iter().map(|s| set_json(&model, s)).collect(),
                }),
                text,
            )
        }
    };

    Ok(Outcome {
        report: RunReport {
            command: command.name().to_string(),
            elapsed_ms: started.elapsed().as_secs_f64() * 1e3,
            result,
        },
        text,
    })
}

fn dataset_name(rules: &FsPath) -> String {
    rules
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "rules".into())
}

/// Runs the parsed command line, writing results to `out` and diagnostics to
/// `err`. Returns the process exit code.
pub fn run(cli: &Cli, limits: &Limits, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(&cli.command, limits) {
        Ok(outcome) => {
            let format = cli.command.common().format;
            if out.write_all(outcome.render(format).as_bytes()).is_err() {
                return EXIT_INPUT;
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "cogs {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}
