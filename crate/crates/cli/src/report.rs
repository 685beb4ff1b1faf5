//! Reports with a fixed field order, rendered as text or JSON.

use serde::Serialize;

use relmonad::hoare::{CheckEntry, CheckReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Leaf {
    pub label: String,
    pub group: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl Leaf {
    pub fn new(group: &str, label: &str, verdict: &str, witness: Option<String>) -> Self {
        Leaf { label: label.into(), group: group.into(), verdict: verdict.into(), witness }
    }

    pub fn from_report(group: &str, label: &str, r: &CheckReport<String>) -> Self {
        Leaf::new(group, label, r.verdict_name(), r.witness().cloned())
    }

    pub fn from_entry(e: &CheckEntry) -> Self {
        Leaf::from_report(&e.group, &e.label, &e.report)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    /// States (or domain elements) enumerated.
    pub states: usize,
    /// Kleene rounds performed.
    pub iterations: usize,
    /// Excluded from golden comparison.
    pub wall_ms: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub target: String,
    /// `holds`, `counterexample` or `inconclusive`; `run` reports
    /// `complete` or `incomplete`, `vcgen` without discharge `generated`.
    pub verdict: String,
    pub leaves: Vec<Leaf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<String>>,
    pub stats: Stats,
}

impl Report {
    pub fn new(target: &str) -> Self {
        Report {
            target: target.into(),
            verdict: "holds".into(),
            leaves: Vec::new(),
            conclusion: None,
            outcomes: None,
            stats: Stats::default(),
        }
    }

    /// The overall verdict from the leaves: any counterexample, else any
    /// inconclusive, else holds.
    pub fn summarize(&mut self) {
        self.verdict = if self.leaves.iter().any(|l| l.verdict == "counterexample") {
            "counterexample"
        } else if self.leaves.iter().any(|l| l.verdict == "inconclusive") {
            "inconclusive"
        } else {
            "holds"
        }
        .into();
    }

    /// 0 holds (or complete / generated), 1 counterexample, 2 inconclusive.
    pub fn exit_code(&self) -> i32 {
        match self.verdict.as_str() {
            "counterexample" => 1,
            "inconclusive" | "incomplete" => 2,
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("target: {}\nverdict: {}\n", self.target, self.verdict);
        if let Some(c) = &self.conclusion {
            out += &format!("conclusion: {c}\n");
        }
        if !self.leaves.is_empty() {
            out += "leaves:\n";
            for l in &self.leaves {
                out += &format!("  [{}] {}: {}\n", l.group, l.label, l.verdict);
                if let Some(w) = &l.witness {
                    out += &format!("    witness: {w}\n");
                }
            }
        }
        if let Some(os) = &self.outcomes {
            out += "outcomes:\n";
            for o in os {
                out += &format!("  {o}\n");
            }
        }
        out += &format!(
            "stats: states={} iterations={} wall_ms={}\n",
            self.stats.states, self.stats.iterations, self.stats.wall_ms
        );
        out
    }
}
