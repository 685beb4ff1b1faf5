//! Registered targets and what each command does with them.

use serde::Serialize;

use relmonad::hoare::{CheckEntry, CheckReport};

use crate::{Command, CliError, Leaf, Report, RunManifest};

mod dfs;
mod kmp;
mod rules;
mod small;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TargetInfo {
    pub name: String,
    pub commands: Vec<&'static str>,
    pub params: Vec<&'static str>,
    pub summary: String,
}

pub fn target_infos() -> Vec<TargetInfo> {
    let mut out = small::infos();
    out.push(dfs::info());
    out.push(kmp::info());
    out.push(rules::info());
    out
}

pub(crate) fn dispatch(cmd: Command, m: &RunManifest) -> Result<Report, CliError> {
    let info = target_infos()
        .into_iter()
        .find(|t| t.name == m.target)
        .ok_or_else(|| CliError::UnknownTarget(m.target.clone()))?;
    if !info.commands.contains(&cmd.name()) {
        return Err(CliError::UnsupportedCommand { target: m.target.clone(), command: cmd.name() });
    }
    m.only_params(&info.params)?;
    match m.target.as_str() {
        "dfs" => dfs::dispatch(cmd, m),
        "kmp" => kmp::dispatch(cmd, m),
        "rules" => rules::prove(m),
        _ => small::dispatch(cmd, m),
    }
}

/// Stable order of proof groups in reports; unknown groups keep their
/// relative order after the known ones.
fn group_rank(group: &str) -> usize {
    const ORDER: [&str; 7] = [
        "Group 1", "Group 2", "Group 3", "Group 4", "frame", "init", "loop",
    ];
    ORDER.iter().position(|g| group.starts_with(g)).unwrap_or(ORDER.len())
}

/// Leaves of a proof tree grouped by group label, tree order within a group.
fn proof_leaves(checks: &[CheckEntry]) -> Vec<Leaf> {
    let mut entries: Vec<(usize, &CheckEntry)> = checks.iter().enumerate().collect();
    entries.sort_by_key(|(i, e)| (group_rank(&e.group), *i));
    entries.into_iter().map(|(_, e)| Leaf::from_entry(e)).collect()
}

fn states_checked(checks: &[CheckEntry]) -> usize {
    checks.iter().map(|c| c.report.states_checked).sum()
}

/// A report with one leaf for a single triple check.
fn single_check(target: &str, label: &str, r: &CheckReport<String>, iterations: usize) -> Report {
    let mut report = Report::new(target);
    report.leaves.push(Leaf::from_report("triple", label, r));
    report.conclusion = Some(label.to_string());
    report.stats.states = r.states_checked;
    report.stats.iterations = iterations;
    report.summarize();
    report
}

/// Guards enumeration sizes before any evaluation.
fn within_cap(bound: u128, m: &RunManifest, default_cap: usize) -> Result<(), CliError> {
    let cap = m.state_cap.unwrap_or(default_cap);
    if bound > cap as u128 {
        return Err(CliError::StateSpaceTooLarge { bound, cap });
    }
    Ok(())
}
