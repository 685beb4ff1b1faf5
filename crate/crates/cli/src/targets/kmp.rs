//! KMP matching, over one explicit context or every bounded one.

use relmonad::casestudies::kmp::{match_loop, KmpContext, DEFAULT_FILLER};
use relmonad::casestudies::kmp_proof::{kmp_proof_with, kmp_prover, kmp_triple, KmpProofConfig};
use relmonad::hoare::{check_triple, compose};
use relmonad::kernel::{eval, EvalContext};

use super::{proof_leaves, single_check, states_checked, within_cap, TargetInfo};
use crate::{failing_leaf, CliError, Command, Leaf, Report, RunManifest};

/// Default cap on the number of bounded contexts.
const CONTEXT_CAP: usize = 20_000;

pub fn info() -> TargetInfo {
    TargetInfo {
        name: "kmp".into(),
        commands: vec!["run", "check", "prove"],
        params: vec!["patn", "text", "next", "alphabet", "max_patn", "max_text"],
        summary: "KMP match_loop; patn/text/next for one context, else all patterns of length \
                  1..=max_patn and texts of length 0..=max_text over alphabet (default ab, 3, 5)"
            .into(),
    }
}

fn invalid(name: &str, reason: impl Into<String>) -> CliError {
    CliError::InvalidParameter { name: name.into(), reason: reason.into() }
}

fn explicit(m: &RunManifest, patn: &str) -> Result<KmpContext, CliError> {
    for p in ["alphabet", "max_patn", "max_text"] {
        if m.get(p).is_some() {
            return Err(invalid(p, "not used with an explicit patn"));
        }
    }
    let text = m.get("text").unwrap_or("");
    if patn.contains(DEFAULT_FILLER) || text.contains(DEFAULT_FILLER) {
        return Err(invalid("patn", format!("`{DEFAULT_FILLER}` is reserved as the filler character")));
    }
    match m.get("next") {
        None => KmpContext::with_oracle_next(patn, text).map_err(|e| invalid("patn", e.to_string())),
        Some(spec) => {
            let next = spec
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<i64>().map_err(|_| invalid("next", format!("`{s}` is not an integer"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(KmpContext::new(patn, text, next))
        }
    }
}

fn config(m: &RunManifest) -> Result<KmpProofConfig, CliError> {
    let mut cfg = match m.get("patn") {
        Some(p) => KmpProofConfig::single(explicit(m, p)?),
        None => {
            if m.get("text").is_some() || m.get("next").is_some() {
                return Err(invalid("patn", "text and next need an explicit patn"));
            }
            let alphabet: Vec<char> = m.get("alphabet").unwrap_or("ab").chars().collect();
            let mut sorted = alphabet.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if alphabet.is_empty() || sorted.len() != alphabet.len() || alphabet.contains(&DEFAULT_FILLER) {
                return Err(invalid("alphabet", "needs distinct characters other than the filler"));
            }
            let max_patn = m.int_param("max_patn", 3)?;
            let max_text = m.int_param("max_text", 5)?;
            if max_patn < 1 {
                return Err(invalid("max_patn", "patterns are non-empty, so at least 1"));
            }
            if max_text < 0 {
                return Err(invalid("max_text", "must be non-negative"));
            }
            let words = |lo: i64, hi: i64| -> u128 { (lo..=hi).map(|l| (alphabet.len() as u128).saturating_pow(l as u32)).sum() };
            within_cap(words(1, max_patn).saturating_mul(words(0, max_text)), m, CONTEXT_CAP)?;
            KmpProofConfig::bounded(&alphabet, max_patn as usize, max_text as usize)
        }
    };
    cfg.fuel = Some(m.resolved_fuel()?);
    Ok(cfg)
}

pub fn dispatch(cmd: Command, m: &RunManifest) -> Result<Report, CliError> {
    match cmd {
        Command::Run => run(m),
        Command::Check => {
            let cfg = config(m)?;
            let ctx = EvalContext::new().with_state_domain(cfg.contexts.clone()).with_fuel(m.resolved_fuel()?);
            let t = kmp_triple();
            let r = check_triple(&t, &cfg.contexts, &ctx)?.erase();
            Ok(single_check("kmp", &t.label(), &r, ctx.stats().fix_iterations))
        }
        _ => prove(m),
    }
}

fn run(m: &RunManifest) -> Result<Report, CliError> {
    let patn = m.get("patn").ok_or_else(|| invalid("patn", "`run` needs an explicit patn (and text)"))?;
    let c = explicit(m, patn)?;
    let ctx = EvalContext::new().with_fuel(m.resolved_fuel()?);
    let e = eval(&match_loop(), &c, &ctx)?;
    let mut report = Report::new("kmp");
    report.conclusion = Some(format!("match_loop on {c:?}"));
    report.verdict = if e.complete { "complete" } else { "incomplete" }.into();
    report.outcomes = Some(e.values().iter().map(|v| v.to_string()).collect());
    report.stats.states = 1;
    report.stats.iterations = ctx.stats().fix_iterations;
    Ok(report)
}

fn prove(m: &RunManifest) -> Result<Report, CliError> {
    let cfg = config(m)?;
    let prover = kmp_prover(&cfg);
    let mut report = Report::new("kmp");
    let node = match kmp_proof_with(&prover, &cfg) {
        Ok(node) => node,
        Err(e) => {
            let leaf = failing_leaf(&e).ok_or(CliError::Proof(e))?;
            report.leaves.push(leaf);
            report.summarize();
            report.stats.iterations = prover.ctx().stats().fix_iterations;
            return Ok(report);
        }
    };
    let checks = node.checks();
    report.leaves = proof_leaves(&checks);
    report.stats.states = states_checked(&checks);
    match compose(&node) {
        Ok(t) => {
            report.conclusion = Some(t.label());
            report.leaves.push(Leaf::new("composition", "compose", "holds", None));
            let r = prover.recheck(&t)?;
            report.leaves.push(Leaf::from_report("composition", "conclusion re-checked by enumeration", &r));
        }
        Err(e) => report.leaves.push(Leaf::new("composition", "compose", "counterexample", Some(e.to_string()))),
    }
    report.stats.iterations = prover.ctx().stats().fix_iterations;
    report.summarize();
    Ok(report)
}
