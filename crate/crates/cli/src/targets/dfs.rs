//! Depth-first search on a graph given by vertex names and edges.

use std::collections::BTreeMap;

use relmonad::casestudies::dfs::{
    dfs, dfs_proof_with, dfs_reachability_triple, dfs_state_domain, stack_discipline_violations,
    DfsState, PreGraph, Vertex, DEFAULT_STATE_CAP,
};
use relmonad::hoare::{check_triple, compose, Prover};
use relmonad::kernel::{eval, EvalContext, FiniteDomain};

use super::{proof_leaves, single_check, states_checked, TargetInfo};
use crate::{failing_leaf, CliError, Command, Leaf, Report, RunManifest};

pub fn info() -> TargetInfo {
    TargetInfo {
        name: "dfs".into(),
        commands: vec!["run", "check", "prove"],
        params: vec!["vertices", "edges", "start"],
        summary: "depth-first search; default the path a->b->c from a".into(),
    }
}

/// A graph with named vertices.
struct Named {
    names: Vec<String>,
    pg: PreGraph,
    start: Vertex,
}

impl Named {
    fn name(&self, v: Vertex) -> &str {
        &self.names[v as usize]
    }

    fn render(&self, s: &DfsState) -> String {
        let visited: Vec<&str> = s.visited.iter().map(|v| self.name(*v)).collect();
        let mut out = format!("visited={{{}}}", visited.join(","));
        if !s.stack.is_empty() {
            let stack: Vec<&str> = s.stack.iter().map(|v| self.name(*v)).collect();
            out += &format!(" stack=[{}]", stack.join(","));
        }
        out
    }
}

fn invalid(name: &str, reason: impl Into<String>) -> CliError {
    CliError::InvalidParameter { name: name.into(), reason: reason.into() }
}

fn graph(m: &RunManifest) -> Result<Named, CliError> {
    let names: Vec<String> = m
        .get("vertices")
        .unwrap_or("a,b,c")
        .split(',')
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if names.is_empty() {
        return Err(invalid("vertices", "at least one vertex is needed"));
    }
    let mut index = BTreeMap::new();
    for (i, n) in names.iter().enumerate() {
        if index.insert(n.clone(), i as Vertex).is_some() {
            return Err(invalid("vertices", format!("`{n}` is listed twice")));
        }
    }
    let lookup = |param: &str, n: &str| {
        index.get(n.trim()).copied().ok_or_else(|| invalid(param, format!("`{}` is not a vertex", n.trim())))
    };
    let mut edges = Vec::new();
    let spec = m.get("edges").unwrap_or(if m.get("vertices").is_some() { "" } else { "a->b,b->c" });
    for e in spec.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (x, y) = e.split_once("->").ok_or_else(|| invalid("edges", format!("`{e}` is not of the form x->y")))?;
        edges.push((lookup("edges", x)?, lookup("edges", y)?));
    }
    let start = lookup("start", m.get("start").unwrap_or(&names[0]))?;
    let pg = PreGraph::new(0..names.len() as Vertex, &edges)?;
    Ok(Named { names, pg, start })
}

pub fn dispatch(cmd: Command, m: &RunManifest) -> Result<Report, CliError> {
    let g = graph(m)?;
    let cap = m.state_cap.unwrap_or(DEFAULT_STATE_CAP);
    let fuel = m.resolved_fuel()?;
    let dom = dfs_state_domain(&g.pg, cap)?;
    match cmd {
        Command::Run => {
            let ctx = EvalContext::new().with_state_domain(dom).with_fuel(fuel);
            let e = eval(&dfs(&g.pg, g.start), &DfsState::default(), &ctx)?;
            let mut report = Report::new("dfs");
            report.conclusion = Some(format!("dfs({}) from stack = nil, visited = ∅", g.name(g.start)));
            report.verdict = if e.complete { "complete" } else { "incomplete" }.into();
            report.outcomes = Some(e.outcomes.iter().map(|(_, s)| g.render(s)).collect());
            report.stats.states = 1;
            report.stats.iterations = ctx.stats().fix_iterations;
            Ok(report)
        }
        Command::Check => {
            let ctx = EvalContext::new().with_state_domain(dom).with_fuel(fuel);
            let t = dfs_reachability_triple(&g.pg, g.start);
            let init = FiniteDomain::new([DfsState::default()]);
            let r = check_triple(&t, &init, &ctx)?.erase();
            let mut report = single_check("dfs", &t.label(), &r, ctx.stats().fix_iterations);
            let bad = stack_discipline_violations(&g.pg, g.start, cap)?;
            report.leaves.push(Leaf::new(
                "stack discipline",
                "nodup(stack) ∧ stack ⊆ visited on every reached state",
                if bad.is_empty() { "holds" } else { "counterexample" },
                bad.first().map(|s| g.render(s)),
            ));
            report.summarize();
            Ok(report)
        }
        _ => prove(&g, dom, fuel),
    }
}

fn prove(g: &Named, dom: FiniteDomain<DfsState>, fuel: usize) -> Result<Report, CliError> {
    let prover = Prover::new(dom).with_fuel(fuel);
    let mut report = Report::new("dfs");
    let node = match dfs_proof_with(&prover, &g.pg, g.start) {
        Ok(node) => node,
        Err(relmonad::casestudies::dfs::DfsError::Proof(e)) => {
            let leaf = failing_leaf(&e).ok_or(CliError::Proof(e))?;
            report.leaves.push(leaf);
            report.summarize();
            report.stats.iterations = prover.ctx().stats().fix_iterations;
            return Ok(report);
        }
        Err(e) => return Err(e.into()),
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
        Err(e) => {
            report.leaves.push(Leaf::new("composition", "compose", "counterexample", Some(e.to_string())));
        }
    }
    report.stats.iterations = prover.ctx().stats().fix_iterations;
    report.summarize();
    Ok(report)
}
