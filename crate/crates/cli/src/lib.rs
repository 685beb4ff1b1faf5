//! The `relmonad` command line: run programs, check triples, execute proof
//! scripts and generate verification conditions for the registered case
//! studies.

use std::time::Instant;

use thiserror::Error;

use relmonad::casestudies::dfs::DfsError;
use relmonad::hoare::{CompositionError, ProofError, VcError};
use relmonad::kernel::EvalError;

pub mod manifest;
pub mod report;
mod targets;

pub use manifest::{parse_param, Format, RunManifest, BUILTIN_FUEL, FUEL_ENV};
pub use report::{Leaf, Report, Stats};
pub use targets::{target_infos, TargetInfo};

/// Exit status for usage and configuration errors.
pub const EXIT_USAGE: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Run,
    Check,
    Prove,
    Vcgen,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Run => "run",
            Command::Check => "check",
            Command::Prove => "prove",
            Command::Vcgen => "vcgen",
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CliError {
    #[error("unknown target `{0}` (see `relmonad list`)")]
    UnknownTarget(String),
    #[error("target `{target}` does not support `{command}`")]
    UnsupportedCommand { target: String, command: &'static str },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("unknown predicate `{name}` (known: {known})")]
    UnknownPredicate { name: String, known: String },
    #[error("state space has {bound} elements, above the cap of {cap}")]
    StateSpaceTooLarge { bound: u128, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Vc(#[from] VcError),
    #[error("proof script: {0}")]
    Proof(ProofError),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<DfsError> for CliError {
    fn from(e: DfsError) -> Self {
        match e {
            DfsError::StateSpaceTooLarge { bound, cap } => CliError::StateSpaceTooLarge { bound, cap },
            DfsError::Eval(e) => CliError::Eval(e),
            DfsError::Proof(e) => CliError::Proof(e),
            e @ (DfsError::InvalidEdge { .. } | DfsError::InvalidStart(_)) => {
                CliError::InvalidParameter { name: "graph".into(), reason: e.to_string() }
            }
        }
    }
}

/// A proof script error that names a failing check, as a report leaf.
pub(crate) fn failing_leaf(e: &ProofError) -> Option<Leaf> {
    match e {
        ProofError::Composition(CompositionError::UncheckedLeaf { group, label, verdict, .. }) => {
            Some(match verdict.strip_prefix("counterexample: ") {
                Some(w) => Leaf::new(group, label, "counterexample", Some(w.to_string())),
                None => Leaf::new(group, label, "inconclusive", None),
            })
        }
        ProofError::Composition(CompositionError::SchemaMismatch { node, reason }) => {
            Some(Leaf::new("composition", node, "counterexample", Some(reason.clone())))
        }
        _ => None,
    }
}

pub fn execute(cmd: Command, m: &RunManifest) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut report = targets::dispatch(cmd, m)?;
    report.stats.wall_ms = start.elapsed().as_millis() as u64;
    Ok(report)
}

pub fn cmd_run(m: &RunManifest) -> Result<Report, CliError> {
    execute(Command::Run, m)
}

pub fn cmd_check(m: &RunManifest) -> Result<Report, CliError> {
    execute(Command::Check, m)
}

pub fn cmd_prove(m: &RunManifest) -> Result<Report, CliError> {
    execute(Command::Prove, m)
}

pub fn cmd_vcgen(m: &RunManifest) -> Result<Report, CliError> {
    execute(Command::Vcgen, m)
}

/// The target table printed by `list`.
pub fn cmd_list(format: Format) -> String {
    let infos = target_infos();
    match format {
        Format::Json => serde_json::to_string_pretty(&infos).expect("serializes") + "\n",
        Format::Text => {
            let width = infos.iter().map(|t| t.name.len()).max().unwrap_or(0);
            infos
                .iter()
                .map(|t| {
                    format!(
                        "{:width$}  [{}]  {}\n{:width$}  params: {}\n",
                        t.name,
                        t.commands.join(", "),
                        t.summary,
                        "",
                        if t.params.is_empty() { "none".to_string() } else { t.params.join(", ") },
                    )
                })
                .collect()
        }
    }
}

/// Renders `report` in `format` and writes it to `out` or returns it.
pub fn emit(report: &Report, format: Format, out: Option<&std::path::Path>) -> Result<Option<String>, CliError> {
    let text = match format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    match out {
        Some(path) => {
            std::fs::write(path, &text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}
