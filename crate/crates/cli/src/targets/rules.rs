//! The randomized rule-soundness suite.

use relmonad::soundness::rule_soundness_suite;

use super::TargetInfo;
use crate::{CliError, Leaf, Report, RunManifest};

pub fn info() -> TargetInfo {
    TargetInfo {
        name: "rules".into(),
        commands: vec!["prove"],
        params: vec!["seed", "instances"],
        summary: "soundness of the twelve Hoare rules on random instances (default seed 0, 200 each)".into(),
    }
}

pub fn prove(m: &RunManifest) -> Result<Report, CliError> {
    let seed = m.int_param("seed", 0)?;
    let instances = m.int_param("instances", 200)?;
    if !(1..=100_000).contains(&instances) {
        return Err(CliError::InvalidParameter { name: "instances".into(), reason: "must be in 1..=100000".into() });
    }
    let mut report = Report::new("rules");
    for r in rule_soundness_suite(seed as u64, instances as usize) {
        let label = format!("{}: {} accepted, {} rejected", r.rule, r.accepted, r.rejected);
        let leaf = if let Some(w) = r.failures.first() {
            Leaf::new("rule soundness", &label, "counterexample", Some(w.clone()))
        } else if r.inconclusive > 0 || r.accepted < instances as usize {
            Leaf::new("rule soundness", &label, "inconclusive", None)
        } else {
            Leaf::new("rule soundness", &label, "holds", None)
        };
        report.stats.states += r.accepted;
        report.leaves.push(leaf);
    }
    report.summarize();
    Ok(report)
}
