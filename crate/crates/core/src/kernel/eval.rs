//! The relational denotation of programs over finite domains.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use thiserror::Error;

use super::domain::FiniteDomain;
use super::prog::{Node, Prog, State};
use super::value::Value;
use crate::fixpoint;

/// Default Kleene iteration budget per recursion.
pub const DEFAULT_FUEL: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("update `{0}` needs a registered state domain")]
    MissingStateDomain(String),
}

/// The slice `{(a, s2) | (s1, a, s2) ∈ c}` of a program's relation.
pub type OutcomeSet<S> = BTreeSet<(Value, S)>;

/// Result of evaluating one program at one initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation<S> {
    pub outcomes: OutcomeSet<S>,
    /// False when some recursion ran out of fuel before stabilizing; the
    /// outcomes are then an under-approximation.
    pub complete: bool,
}

impl<S: State> Evaluation<S> {
    pub fn empty() -> Self {
        Evaluation {
            outcomes: BTreeSet::new(),
            complete: true,
        }
    }

    pub fn singleton(value: Value, state: S) -> Self {
        let mut outcomes = BTreeSet::new();
        outcomes.insert((value, state));
        Evaluation {
            outcomes,
            complete: true,
        }
    }

    pub fn values(&self) -> BTreeSet<Value> {
        self.outcomes.iter().map(|(v, _)| v.clone()).collect()
    }

    fn absorb(&mut self, other: Evaluation<S>) {
        self.outcomes.extend(other.outcomes);
        self.complete &= other.complete;
    }
}

/// Counters accumulated over every evaluation run under one context.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Kleene rounds performed, summed over all recursions.
    pub fix_iterations: usize,
    /// Recursions evaluated.
    pub recursions: usize,
    /// Recursions that ran out of fuel.
    pub unstabilized: usize,
    /// Rounds where some table entry shrank, i.e. the functional was
    /// observed to be non-monotone.
    pub chain_violations: usize,
}

/// Registered domains, the fuel bound and run statistics.
pub struct EvalContext<S> {
    state_domain: Option<Rc<FiniteDomain<S>>>,
    fuel: usize,
    stats: RefCell<EvalStats>,
    observed: Option<RefCell<BTreeSet<S>>>,
}

impl<S: State> EvalContext<S> {
    pub fn new() -> Self {
        EvalContext {
            state_domain: None,
            fuel: DEFAULT_FUEL,
            stats: RefCell::new(EvalStats::default()),
            observed: None,
        }
    }

    pub fn with_state_domain(mut self, dom: FiniteDomain<S>) -> Self {
        self.state_domain = Some(Rc::new(dom));
        self
    }

    pub fn with_shared_state_domain(mut self, dom: Rc<FiniteDomain<S>>) -> Self {
        self.state_domain = Some(dom);
        self
    }

    pub fn with_fuel(mut self, fuel: usize) -> Self {
        self.fuel = fuel;
        self
    }

    /// Records every state that appears as an outcome of any sub-program.
    pub fn observing(mut self) -> Self {
        self.observed = Some(RefCell::new(BTreeSet::new()));
        self
    }

    pub fn state_domain(&self) -> Option<&FiniteDomain<S>> {
        self.state_domain.as_deref()
    }

    pub fn fuel(&self) -> usize {
        self.fuel
    }

    pub fn stats(&self) -> EvalStats {
        self.stats.borrow().clone()
    }

    pub(crate) fn record(&self, f: impl FnOnce(&mut EvalStats)) {
        f(&mut self.stats.borrow_mut());
    }

    pub fn observed_states(&self) -> BTreeSet<S> {
        self.observed
            .as_ref()
            .map(|o| o.borrow().clone())
            .unwrap_or_default()
    }

    fn observe(&self, eval: &Evaluation<S>) {
        if let Some(obs) = &self.observed {
            let mut obs = obs.borrow_mut();
            for (_, s) in &eval.outcomes {
                if !obs.contains(s) {
                    obs.insert(s.clone());
                }
            }
        }
    }
}

impl<S: State> Default for EvalContext<S> {
    fn default() -> Self {
        Self::new()
    }
}

/// Evaluates `p` from the initial state `s`.
pub fn eval<S: State>(p: &Prog<S>, s: &S, ctx: &EvalContext<S>) -> Result<Evaluation<S>, EvalError> {
    let result = match p.node() {
        Node::Ret { value, .. } => Evaluation::singleton(value.clone(), s.clone()),
        Node::Bind { first, rest } => {
            let head = eval(first, s, ctx)?;
            let mut out = Evaluation::empty();
            out.complete = head.complete;
            for (a, s2) in &head.outcomes {
                out.absorb(eval(&rest.apply(a), s2, ctx)?);
            }
            out
        }
        Node::Choice(l, r) => {
            let mut out = eval(l, s, ctx)?;
            out.absorb(eval(r, s, ctx)?);
            out
        }
        Node::Assume { pred, .. } => {
            if pred(s) {
                Evaluation::singleton(Value::Unit, s.clone())
            } else {
                Evaluation::empty()
            }
        }
        Node::AssumePure { holds, .. } => {
            if *holds {
                Evaluation::singleton(Value::Unit, s.clone())
            } else {
                Evaluation::empty()
            }
        }
        Node::Any(dom) => Evaluation {
            outcomes: dom.iter().map(|a| (a.clone(), s.clone())).collect(),
            complete: true,
        },
        Node::Update { label, rel, image } => {
            let dom = ctx
                .state_domain()
                .ok_or_else(|| EvalError::MissingStateDomain(label.clone()))?;
            let outcomes = match image {
                Some(image) => image(s)
                    .into_iter()
                    .filter(|s2| dom.contains(s2) && rel(s, s2))
                    .map(|s2| (Value::Unit, s2))
                    .collect(),
                None => dom
                    .iter()
                    .filter(|s2| rel(s, s2))
                    .map(|s2| (Value::Unit, s2.clone()))
                    .collect(),
            };
            Evaluation {
                outcomes,
                complete: true,
            }
        }
        Node::Step { outcomes, .. } => Evaluation {
            outcomes: outcomes(s).into_iter().collect(),
            complete: true,
        },
        Node::Rec { body, arg, .. } => fixpoint::solve(body, arg, s, ctx)?,
        Node::Call(site) => site.lookup(s),
    };
    ctx.observe(&result);
    Ok(result)
}

/// The relation of `p` tabulated over every initial state of a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Denotation<S> {
    pub table: BTreeMap<S, OutcomeSet<S>>,
    pub complete: bool,
}

impl<S: State> Denotation<S> {
    /// Whether every `(s1, a, s2)` of `self` is also in `other`.
    pub fn included_in(&self, other: &Denotation<S>) -> bool {
        self.table.iter().all(|(s, outs)| match other.table.get(s) {
            Some(theirs) => outs.is_subset(theirs),
            None => outs.is_empty(),
        })
    }

    /// First `(s1, a, s2)` in canonical order that one side has and the
    /// other lacks.
    pub fn first_difference(&self, other: &Denotation<S>) -> Option<(S, Value, S)> {
        let keys: BTreeSet<&S> = self.table.keys().chain(other.table.keys()).collect();
        let empty = BTreeSet::new();
        for s in keys {
            let a = self.table.get(s).unwrap_or(&empty);
            let b = other.table.get(s).unwrap_or(&empty);
            if let Some((v, s2)) = a.symmetric_difference(b).next() {
                return Some((s.clone(), v.clone(), s2.clone()));
            }
        }
        None
    }
}

pub fn denote<S: State>(
    p: &Prog<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<Denotation<S>, EvalError> {
    let mut table = BTreeMap::new();
    let mut complete = true;
    for s in dom {
        let e = eval(p, s, ctx)?;
        complete &= e.complete;
        table.insert(s.clone(), e.outcomes);
    }
    Ok(Denotation { table, complete })
}
