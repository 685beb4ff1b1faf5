//! Verification conditions for basic blocks.
//!
//! The generator normalizes the program, then enumerates its execution
//! paths symbolically: every guard and state transition along a path becomes
//! a hypothesis, and at each `ret` every postcondition conjunct becomes a
//! goal. States are named by snapshots `s0, s1, ...`, one per transition.
//! Goals already among the hypotheses are dropped, and a path guard implied
//! by the remaining hypotheses is omitted from the rendering.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::kernel::{render_env, Env, FiniteDomain, Node, Prog, State, Value, FALSE_LABEL};

use super::assertion::paren_if_compound;
use super::check::{CheckReport, HoareTriple, Verdict};
use super::normalize::normalize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VcError {
    #[error("`{0}` is not a basic-block construct; apply a loop rule first")]
    UnsupportedConstruct(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactOrigin {
    Pre,
    Guard,
    Transition,
    Goal,
}

type SnapTest<S> = Rc<dyn Fn(&[S]) -> bool>;

struct Fact<S> {
    label: String,
    origin: FactOrigin,
    /// Highest snapshot index the fact reads.
    last_snap: usize,
    test: SnapTest<S>,
}

impl<S> Clone for Fact<S> {
    fn clone(&self) -> Self {
        Fact {
            label: self.label.clone(),
            origin: self.origin,
            last_snap: self.last_snap,
            test: self.test.clone(),
        }
    }
}

struct Instance<S> {
    env: Env,
    hyps: Vec<Fact<S>>,
    goal: Fact<S>,
    snapshots: usize,
}

/// One proof obligation: for every binder assignment and every choice of
/// state snapshots, the hypotheses imply the goal.
pub struct Vc<S> {
    pub binders: Vec<String>,
    pub hypotheses: Vec<String>,
    pub goal: String,
    instances: Vec<Instance<S>>,
}

impl<S: State> Vc<S> {
    pub fn render(&self) -> String {
        if self.hypotheses.is_empty() {
            return self.goal.clone();
        }
        let hyps: Vec<String> = self.hypotheses.iter().map(|h| paren_if_compound(h)).collect();
        format!("{} ⟹ {}", hyps.join(" ∧ "), self.goal)
    }

    pub fn instances(&self) -> usize {
        self.instances.len()
    }

    /// Decides the VC by enumeration over binder assignments and snapshots.
    pub fn discharge(&self, dom: &FiniteDomain<S>) -> CheckReport<String> {
        let mut states_checked = 0;
        for inst in &self.instances {
            let mut snaps = Vec::with_capacity(inst.snapshots);
            let mut refuted = None;
            search(inst, dom, &mut snaps, &mut states_checked, &mut refuted);
            if let Some(states) = refuted {
                let mut w = String::new();
                if !inst.env.is_empty() {
                    w.push_str(&format!("with {}: ", render_env(&inst.env)));
                }
                w.push_str(&format!("states {states:?}"));
                return CheckReport {
                    verdict: Verdict::Counterexample(w),
                    states_checked,
                    complete: true,
                };
            }
        }
        CheckReport {
            verdict: Verdict::Holds,
            states_checked,
            complete: true,
        }
    }
}

impl<S: State> fmt::Debug for Vc<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn search<S: State>(
    inst: &Instance<S>,
    dom: &FiniteDomain<S>,
    snaps: &mut Vec<S>,
    checked: &mut usize,
    refuted: &mut Option<Vec<S>>,
) {
    if refuted.is_some() {
        return;
    }
    if snaps.len() == inst.snapshots {
        *checked += 1;
        if !(inst.goal.test)(snaps) {
            *refuted = Some(snaps.clone());
        }
        return;
    }
    let k = snaps.len();
    for s in dom {
        snaps.push(s.clone());
        let ok = inst
            .hyps
            .iter()
            .filter(|h| h.last_snap == k)
            .all(|h| (h.test)(snaps));
        if ok {
            search(inst, dom, snaps, checked, refuted);
        }
        snaps.pop();
        if refuted.is_some() {
            return;
        }
    }
}

struct Path<S> {
    facts: Vec<Fact<S>>,
    snap: usize,
}

impl<S> Clone for Path<S> {
    fn clone(&self) -> Self {
        Path {
            facts: self.facts.clone(),
            snap: self.snap,
        }
    }
}

fn at_snap(label: &str, snap: usize) -> String {
    if snap == 0 {
        label.to_string()
    } else {
        format!("{label} [s{snap}]")
    }
}

type Sink<'a, S> = dyn FnMut(&Value, Option<&str>, Path<S>) -> Result<(), VcError> + 'a;

fn walk<S: State>(p: &Prog<S>, path: Path<S>, dom: &FiniteDomain<S>, k: &mut Sink<'_, S>) -> Result<(), VcError> {
    match p.node() {
        Node::Ret { value, sym } => k(value, sym.as_deref(), path),
        Node::Bind { first, rest } => walk(first, path, dom, &mut |v, sym, p2| {
            walk(&rest.apply_sym(v, sym), p2, dom, &mut *k)
        }),
        Node::Choice(l, r) => {
            walk(l, path.clone(), dom, k)?;
            walk(r, path, dom, k)
        }
        Node::Assume { label, pred } => {
            let mut path = path;
            let (n, pred) = (path.snap, pred.clone());
            path.facts.push(Fact {
                label: at_snap(label, n),
                origin: FactOrigin::Guard,
                last_snap: n,
                test: Rc::new(move |ss: &[S]| pred(&ss[n])),
            });
            k(&Value::Unit, None, path)
        }
        Node::AssumePure { label, holds } => {
            if !holds && label == FALSE_LABEL {
                return Ok(());
            }
            let mut path = path;
            let holds = *holds;
            path.facts.push(Fact {
                label: label.clone(),
                origin: FactOrigin::Guard,
                last_snap: 0,
                test: Rc::new(move |_: &[S]| holds),
            });
            k(&Value::Unit, None, path)
        }
        Node::Any(d) => {
            for a in d {
                k(a, Some(&a.to_string()), path.clone())?;
            }
            Ok(())
        }
        Node::Update { label, rel, .. } => {
            let mut path = path;
            let (n, rel) = (path.snap, rel.clone());
            path.facts.push(Fact {
                label: format!("update({label}) [s{n} ⇝ s{}]", n + 1),
                origin: FactOrigin::Transition,
                last_snap: n + 1,
                test: Rc::new(move |ss: &[S]| rel(&ss[n], &ss[n + 1])),
            });
            path.snap = n + 1;
            k(&Value::Unit, None, path)
        }
        Node::Step { label, outcomes } => {
            let n = path.snap;
            let values: std::collections::BTreeSet<Value> = dom
                .iter()
                .flat_map(|s| outcomes(s).into_iter().map(|(a, _)| a))
                .collect();
            for a in values {
                let mut path = path.clone();
                let (f, a2) = (outcomes.clone(), a.clone());
                path.facts.push(Fact {
                    label: format!("({a}, s{}) ∈ {label}(s{n})", n + 1),
                    origin: FactOrigin::Transition,
                    last_snap: n + 1,
                    test: Rc::new(move |ss: &[S]| {
                        f(&ss[n]).iter().any(|(b, t)| *b == a2 && *t == ss[n + 1])
                    }),
                });
                path.snap = n + 1;
                k(&a, Some(&a.to_string()), path)?;
            }
            Ok(())
        }
        Node::Rec { .. } | Node::Call(_) => Err(VcError::UnsupportedConstruct(p.describe())),
    }
}

/// Reduces a triple over a basic block to verification conditions.
/// `dom` supplies the states used to enumerate `step` results and to
/// simplify the rendering.
pub fn vc_gen<S: State>(t: &HoareTriple<S>, dom: &FiniteDomain<S>) -> Result<Vec<Vc<S>>, VcError> {
    let mut raw: Vec<Instance<S>> = Vec::new();
    for env in t.binders.assignments() {
        let prog = normalize(&t.prog.build(&env));
        let pre: Vec<Fact<S>> = t
            .pre
            .atoms()
            .iter()
            .map(|a| {
                let (a2, e) = (a.clone(), env.clone());
                Fact {
                    label: a.label().to_string(),
                    origin: FactOrigin::Pre,
                    last_snap: 0,
                    test: Rc::new(move |ss: &[S]| a2.holds(&e, &ss[0])),
                }
            })
            .collect();
        let start = Path {
            facts: Vec::new(),
            snap: 0,
        };
        walk(&prog, start, dom, &mut |v, sym, path| {
            let n = path.snap;
            let mut hyps = path.facts.clone();
            hyps.extend(pre.iter().cloned());
            let sym = sym.map(str::to_string).unwrap_or_else(|| v.to_string());
            for atom in t.post.atoms() {
                let label = at_snap(&atom.render_at(&sym), n);
                if atom.var().is_none() && hyps.iter().any(|h| h.label == label) {
                    continue;
                }
                let (atom, e, v) = (atom.clone(), env.clone(), v.clone());
                raw.push(Instance {
                    env: env.clone(),
                    hyps: hyps.clone(),
                    goal: Fact {
                        label,
                        origin: FactOrigin::Goal,
                        last_snap: n,
                        test: Rc::new(move |ss: &[S]| atom.holds(&e, &v, &ss[n])),
                    },
                    snapshots: n + 1,
                });
            }
            Ok(())
        })?;
    }
    let mut vcs: Vec<Vc<S>> = Vec::new();
    for inst in raw {
        let hypotheses: Vec<String> = inst.hyps.iter().map(|h| h.label.clone()).collect();
        match vcs
            .iter_mut()
            .find(|vc| vc.goal == inst.goal.label && vc.hypotheses == hypotheses)
        {
            Some(vc) => vc.instances.push(inst),
            None => vcs.push(Vc {
                binders: t.binders.names(),
                hypotheses,
                goal: inst.goal.label.clone(),
                instances: vec![inst],
            }),
        }
    }
    for vc in &mut vcs {
        simplify(vc, dom);
        let snaps = vc.instances.iter().map(|i| i.snapshots).max().unwrap_or(1);
        if std::mem::size_of::<S>() > 0 {
            vc.binders.extend((0..snaps).map(|k| format!("s{k}")));
        }
    }
    Ok(vcs)
}

/// Limit on snapshot assignments enumerated per instance while simplifying.
const SIMPLIFY_LIMIT: usize = 100_000;

/// Drops each path guard that the other hypotheses imply in every instance.
fn simplify<S: State>(vc: &mut Vc<S>, dom: &FiniteDomain<S>) {
    let mut idx = 0;
    while idx < vc.hypotheses.len() {
        let is_guard = vc.instances.iter().all(|i| i.hyps[idx].origin == FactOrigin::Guard);
        if is_guard && vc.instances.iter().all(|i| implied(i, idx, dom)) {
            vc.hypotheses.remove(idx);
            for inst in &mut vc.instances {
                inst.hyps.remove(idx);
            }
        } else {
            idx += 1;
        }
    }
}

fn implied<S: State>(inst: &Instance<S>, idx: usize, dom: &FiniteDomain<S>) -> bool {
    let combos = dom.len().checked_pow(inst.snapshots as u32).unwrap_or(usize::MAX);
    if combos > SIMPLIFY_LIMIT {
        return false;
    }
    let target = inst.hyps[idx].clone();
    let rest: Vec<Fact<S>> = inst
        .hyps
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != idx)
        .map(|(_, h)| h.clone())
        .collect();
    let probe = Instance {
        env: inst.env.clone(),
        hyps: rest,
        goal: target,
        snapshots: inst.snapshots,
    };
    let mut snaps = Vec::new();
    let mut checked = 0;
    let mut refuted = None;
    search(&probe, dom, &mut snaps, &mut checked, &mut refuted);
    refuted.is_none()
}
