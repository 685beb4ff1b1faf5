//! The state relation monad with errors.
//!
//! A program denotes a pair: the normal relation `nrm ⊆ Σ × A × Σ` and the
//! set `err ⊆ Σ` of initial states from which it may fail. `assert(P)`
//! fails exactly where `P` does not hold; every other primitive is
//! error-free, and `bind` fails when its head fails or some normal outcome
//! of the head leads to a failing continuation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use crate::hoare::{check_implication, CheckReport, ImplWitness, PostCond, Pred, TripleWitness, Verdict};
use crate::kernel::{
    eval, Continuation, Env, EvalContext, EvalError, FiniteDomain, OutcomeSet, Prog, Relation,
    State, StatePred, Value,
};

type ErrCont<S> = Rc<dyn Fn(&Value) -> ErrProg<S>>;

pub enum ErrNode<S> {
    Ret(Value),
    Bind { first: ErrProg<S>, label: String, rest: ErrCont<S> },
    Choice(ErrProg<S>, ErrProg<S>),
    Assume { label: String, pred: StatePred<S> },
    Any(FiniteDomain<Value>),
    Update { label: String, rel: Relation<S> },
    Assert { label: String, pred: StatePred<S> },
}

pub struct ErrProg<S>(Rc<ErrNode<S>>);

impl<S> Clone for ErrProg<S> {
    fn clone(&self) -> Self {
        ErrProg(self.0.clone())
    }
}

pub fn err_ret<S: State>(a: impl Into<Value>) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Ret(a.into())))
}

pub fn err_bind<S: State>(
    first: ErrProg<S>,
    label: impl Into<String>,
    rest: impl Fn(&Value) -> ErrProg<S> + 'static,
) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Bind {
        first,
        label: label.into(),
        rest: Rc::new(rest),
    }))
}

pub fn err_choice<S: State>(l: ErrProg<S>, r: ErrProg<S>) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Choice(l, r)))
}

pub fn err_assume<S: State>(label: impl Into<String>, pred: impl Fn(&S) -> bool + 'static) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Assume {
        label: label.into(),
        pred: Rc::new(pred),
    }))
}

pub fn err_any<S: State>(dom: FiniteDomain<Value>) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Any(dom)))
}

pub fn err_update<S: State>(label: impl Into<String>, rel: impl Fn(&S, &S) -> bool + 'static) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Update {
        label: label.into(),
        rel: Rc::new(rel),
    }))
}

/// Fails on states where `pred` does not hold; otherwise returns `tt`.
pub fn assert<S: State>(label: impl Into<String>, pred: impl Fn(&S) -> bool + 'static) -> ErrProg<S> {
    ErrProg(Rc::new(ErrNode::Assert {
        label: label.into(),
        pred: Rc::new(pred),
    }))
}

impl<S: State> ErrProg<S> {
    pub fn node(&self) -> &ErrNode<S> {
        &self.0
    }

    /// The same syntax as a kernel program, with `assert` read as `assume`.
    pub fn erase(&self) -> Prog<S> {
        match self.node() {
            ErrNode::Ret(v) => Prog::ret(v.clone()),
            ErrNode::Bind { first, label, rest } => {
                let rest = rest.clone();
                Prog::bind(first.erase(), Continuation::new(label.clone(), move |v| rest(v).erase()))
            }
            ErrNode::Choice(l, r) => Prog::choice(l.erase(), r.erase()),
            ErrNode::Assume { label, pred } | ErrNode::Assert { label, pred } => {
                let pred = pred.clone();
                Prog::assume(label.clone(), move |s| pred(s))
            }
            ErrNode::Any(d) => Prog::any(d.clone()),
            ErrNode::Update { label, rel } => {
                let rel = rel.clone();
                Prog::update(label.clone(), move |a, b| rel(a, b))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self.node() {
            ErrNode::Ret(v) => format!("ret({v})"),
            ErrNode::Bind { first, label, .. } => format!("x ← {};; {label}", first.describe()),
            ErrNode::Choice(l, r) => format!("choice({}, {})", l.describe(), r.describe()),
            ErrNode::Assume { label, .. } => format!("assume({label})"),
            ErrNode::Any(d) => format!("any(<{} values>)", d.len()),
            ErrNode::Update { label, .. } => format!("update({label})"),
            ErrNode::Assert { label, .. } => format!("assert({label})"),
        }
    }
}

impl<S: State> fmt::Debug for ErrProg<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ErrProg[{}]", self.describe())
    }
}

/// Normal outcomes from one initial state, and whether it is an error state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrEvaluation<S> {
    pub nrm: OutcomeSet<S>,
    pub err: bool,
}

pub fn eval_err<S: State>(p: &ErrProg<S>, s: &S, ctx: &EvalContext<S>) -> Result<ErrEvaluation<S>, EvalError> {
    let single = |v: Value| ErrEvaluation {
        nrm: [(v, s.clone())].into_iter().collect(),
        err: false,
    };
    let none = || ErrEvaluation {
        nrm: BTreeSet::new(),
        err: false,
    };
    Ok(match p.node() {
        ErrNode::Ret(v) => single(v.clone()),
        ErrNode::Bind { first, rest, .. } => {
            let head = eval_err(first, s, ctx)?;
            let mut out = ErrEvaluation {
                nrm: BTreeSet::new(),
                err: head.err,
            };
            for (a, s2) in &head.nrm {
                let tail = eval_err(&rest(a), s2, ctx)?;
                out.nrm.extend(tail.nrm);
                out.err |= tail.err;
            }
            out
        }
        ErrNode::Choice(l, r) => {
            let mut a = eval_err(l, s, ctx)?;
            let b = eval_err(r, s, ctx)?;
            a.nrm.extend(b.nrm);
            a.err |= b.err;
            a
        }
        ErrNode::Assume { pred, .. } => {
            if pred(s) {
                single(Value::Unit)
            } else {
                none()
            }
        }
        ErrNode::Any(d) => ErrEvaluation {
            nrm: d.iter().map(|v| (v.clone(), s.clone())).collect(),
            err: false,
        },
        ErrNode::Update { .. } => ErrEvaluation {
            nrm: eval(&p.erase(), s, ctx)?.outcomes,
            err: false,
        },
        ErrNode::Assert { pred, .. } => {
            if pred(s) {
                single(Value::Unit)
            } else {
                ErrEvaluation {
                    nrm: BTreeSet::new(),
                    err: true,
                }
            }
        }
    })
}

/// `(nrm, err)` tabulated over a domain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrDenotation<S> {
    pub nrm: BTreeMap<S, OutcomeSet<S>>,
    pub err: BTreeSet<S>,
}

pub fn denote_err<S: State>(
    p: &ErrProg<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<ErrDenotation<S>, EvalError> {
    let mut nrm = BTreeMap::new();
    let mut err = BTreeSet::new();
    for s in dom {
        let e = eval_err(p, s, ctx)?;
        if e.err {
            err.insert(s.clone());
        }
        nrm.insert(s.clone(), e.nrm);
    }
    Ok(ErrDenotation { nrm, err })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ErrWitness<S> {
    /// A normal outcome violating the postcondition.
    Normal(TripleWitness<S>),
    /// A precondition state from which the program may fail.
    Error { initial: S },
}

impl<S: State> fmt::Display for ErrWitness<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ErrWitness::Normal(w) => w.fmt(f),
            ErrWitness::Error { initial } => write!(f, "may fail from {initial:?}"),
        }
    }
}

/// Holds when every normal outcome from a `pre` state satisfies `post` and
/// no `pre` state is an error state.
pub fn check_triple_err<S: State>(
    pre: &Pred<S>,
    c: &ErrProg<S>,
    post: &PostCond<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<ErrWitness<S>>, EvalError> {
    let env = Env::new();
    let mut states_checked = 0;
    for s in dom {
        if !pre.holds(&env, s) {
            continue;
        }
        states_checked += 1;
        let e = eval_err(c, s, ctx)?;
        let fail = |w| CheckReport {
            verdict: Verdict::Counterexample(w),
            states_checked,
            complete: true,
        };
        if e.err {
            return Ok(fail(ErrWitness::Error { initial: s.clone() }));
        }
        if let Some((a, s2)) = e.nrm.iter().find(|(a, s2)| !post.holds(&env, a, s2)) {
            return Ok(fail(ErrWitness::Normal(TripleWitness {
                env: env.clone(),
                initial: s.clone(),
                value: a.clone(),
                final_state: s2.clone(),
            })));
        }
    }
    Ok(CheckReport {
        verdict: Verdict::Holds,
        states_checked,
        complete: true,
    })
}

/// Side condition of the assert rule: `{P} assert(R) {λ_. P ∧ R}` is valid
/// once `P → R`.
pub fn assert_rule_side_condition<S: State>(
    pre: &Pred<S>,
    guard: &Pred<S>,
    dom: &FiniteDomain<S>,
) -> CheckReport<ImplWitness<S>> {
    check_implication(pre, guard, dom)
}
