//! Exhaustive checking of triples and implications over finite domains.

use std::fmt;

use crate::kernel::{eval, render_env, Env, EvalContext, EvalError, FiniteDomain, State, Value};

use super::assertion::{Binders, PostCond, Pred, ProgFamily};

/// Outcome of a bounded check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Counterexample(W),
    /// No violation was found but some evaluation was incomplete.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport<W> {
    pub verdict: Verdict<W>,
    /// Initial states (or domain elements) on which the hypothesis held.
    pub states_checked: usize,
    pub complete: bool,
}

impl<W> CheckReport<W> {
    pub fn holds(&self) -> bool {
        matches!(self.verdict, Verdict::Holds)
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self.verdict, Verdict::Counterexample(_))
    }

    pub fn witness(&self) -> Option<&W> {
        match &self.verdict {
            Verdict::Counterexample(w) => Some(w),
            _ => None,
        }
    }

    pub fn map_witness<V>(self, f: impl FnOnce(W) -> V) -> CheckReport<V> {
        CheckReport {
            verdict: match self.verdict {
                Verdict::Holds => Verdict::Holds,
                Verdict::Counterexample(w) => Verdict::Counterexample(f(w)),
                Verdict::Inconclusive => Verdict::Inconclusive,
            },
            states_checked: self.states_checked,
            complete: self.complete,
        }
    }

    pub fn verdict_name(&self) -> &'static str {
        match self.verdict {
            Verdict::Holds => "holds",
            Verdict::Counterexample(_) => "counterexample",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl<W: fmt::Display> CheckReport<W> {
    pub fn erase(self) -> CheckReport<String> {
        self.map_witness(|w| w.to_string())
    }
}

/// Combines reports of independent checks: the first counterexample wins,
/// then inconclusive, then holds.
pub fn merge_reports(reports: Vec<CheckReport<String>>) -> CheckReport<String> {
    let mut states_checked = 0;
    let mut complete = true;
    let mut inconclusive = false;
    for r in reports {
        states_checked += r.states_checked;
        complete &= r.complete;
        match r.verdict {
            Verdict::Counterexample(w) => {
                return CheckReport {
                    verdict: Verdict::Counterexample(w),
                    states_checked,
                    complete,
                }
            }
            Verdict::Inconclusive => inconclusive = true,
            Verdict::Holds => {}
        }
    }
    CheckReport {
        verdict: if inconclusive {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        },
        states_checked,
        complete,
    }
}

/// `(s1, a, s2)` violating a triple, with the binder assignment.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TripleWitness<S> {
    pub env: Env,
    pub initial: S,
    pub value: Value,
    pub final_state: S,
}

impl<S: State> fmt::Display for TripleWitness<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.env.is_empty() {
            write!(f, "with {}: ", render_env(&self.env))?;
        }
        write!(
            f,
            "from {:?} returns {} in {:?}",
            self.initial, self.value, self.final_state
        )
    }
}

/// An element refuting an implication.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImplWitness<S> {
    pub env: Env,
    pub state: S,
    /// The result value, for implications between postconditions.
    pub value: Option<Value>,
}

impl<S: State> fmt::Display for ImplWitness<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.env.is_empty() {
            write!(f, "with {}: ", render_env(&self.env))?;
        }
        if let Some(v) = &self.value {
            write!(f, "value {v}, ")?;
        }
        write!(f, "state {:?}", self.state)
    }
}

/// `∀ binders, {pre} prog {post}`.
pub struct HoareTriple<S> {
    pub binders: Binders,
    pub pre: Pred<S>,
    pub prog: ProgFamily<S>,
    pub post: PostCond<S>,
}

impl<S> Clone for HoareTriple<S> {
    fn clone(&self) -> Self {
        HoareTriple {
            binders: self.binders.clone(),
            pre: self.pre.clone(),
            prog: self.prog.clone(),
            post: self.post.clone(),
        }
    }
}

impl<S: State> HoareTriple<S> {
    pub fn new(binders: Binders, pre: Pred<S>, prog: ProgFamily<S>, post: PostCond<S>) -> Self {
        HoareTriple {
            binders,
            pre,
            prog,
            post,
        }
    }

    /// A closed triple with no binders.
    pub fn closed(pre: Pred<S>, prog: ProgFamily<S>, post: PostCond<S>) -> Self {
        HoareTriple::new(Binders::none(), pre, prog, post)
    }

    pub fn label(&self) -> String {
        let body = format!(
            "{{{}}} {} {{{}}}",
            self.pre.label(),
            self.prog.label(),
            self.post.label()
        );
        if self.binders.is_empty() {
            body
        } else {
            format!("∀ {}, {body}", self.binders.names().join(" "))
        }
    }
}

impl<S: State> fmt::Debug for HoareTriple<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Decides `∀ binders, ∀ s1 a s2, pre(s1) ∧ (s1, a, s2) ∈ prog → post(a, s2)`
/// over the given state domain.
pub fn check_triple<S: State>(
    t: &HoareTriple<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<TripleWitness<S>>, EvalError> {
    check_triple_from(t, &Env::new(), dom, ctx)
}

/// [`check_triple`] with some binders already fixed by `env`.
pub fn check_triple_from<S: State>(
    t: &HoareTriple<S>,
    env: &Env,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<TripleWitness<S>>, EvalError> {
    let mut states_checked = 0;
    let mut complete = true;
    for env in t.binders.assignments_from(env) {
        let mut prog = None;
        for s in dom {
            if !t.pre.holds(&env, s) {
                continue;
            }
            states_checked += 1;
            let prog = prog.get_or_insert_with(|| t.prog.build(&env));
            let e = eval(prog, s, ctx)?;
            complete &= e.complete;
            for (a, s2) in &e.outcomes {
                if !t.post.holds(&env, a, s2) {
                    return Ok(CheckReport {
                        verdict: Verdict::Counterexample(TripleWitness {
                            env: env.clone(),
                            initial: s.clone(),
                            value: a.clone(),
                            final_state: s2.clone(),
                        }),
                        states_checked,
                        complete,
                    });
                }
            }
        }
    }
    Ok(CheckReport {
        verdict: if complete {
            Verdict::Holds
        } else {
            Verdict::Inconclusive
        },
        states_checked,
        complete,
    })
}

/// Decides `∀ s ∈ dom, p(s) → q(s)`.
pub fn check_implication<S: State>(
    p: &Pred<S>,
    q: &Pred<S>,
    dom: &FiniteDomain<S>,
) -> CheckReport<ImplWitness<S>> {
    check_implication_over(&Binders::none(), p, q, dom)
}

/// Decides `∀ binders, ∀ s ∈ dom, p(s) → q(s)`.
pub fn check_implication_over<S: State>(
    binders: &Binders,
    p: &Pred<S>,
    q: &Pred<S>,
    dom: &FiniteDomain<S>,
) -> CheckReport<ImplWitness<S>> {
    let mut states_checked = 0;
    for env in binders.assignments() {
        for s in dom {
            if !p.holds(&env, s) {
                continue;
            }
            states_checked += 1;
            if !q.holds(&env, s) {
                return CheckReport {
                    verdict: Verdict::Counterexample(ImplWitness {
                        env,
                        state: s.clone(),
                        value: None,
                    }),
                    states_checked,
                    complete: true,
                };
            }
        }
    }
    CheckReport {
        verdict: Verdict::Holds,
        states_checked,
        complete: true,
    }
}

/// Decides `∀ binders, ∀ v ∈ values, ∀ s ∈ dom, q2(v, s) → q1(v, s)`.
pub fn check_post_implication<S: State>(
    binders: &Binders,
    q2: &PostCond<S>,
    q1: &PostCond<S>,
    values: &FiniteDomain<Value>,
    dom: &FiniteDomain<S>,
) -> CheckReport<ImplWitness<S>> {
    let mut states_checked = 0;
    for env in binders.assignments() {
        for v in values {
            for s in dom {
                if !q2.holds(&env, v, s) {
                    continue;
                }
                states_checked += 1;
                if !q1.holds(&env, v, s) {
                    return CheckReport {
                        verdict: Verdict::Counterexample(ImplWitness {
                            env,
                            state: s.clone(),
                            value: Some(v.clone()),
                        }),
                        states_checked,
                        complete: true,
                    };
                }
            }
        }
    }
    CheckReport {
        verdict: Verdict::Holds,
        states_checked,
        complete: true,
    }
}

/// Checks that every value `prog` returns from a `pre` state lies in
/// `values`.
pub fn check_value_cover<S: State>(
    binders: &Binders,
    pre: &Pred<S>,
    prog: &ProgFamily<S>,
    values: &FiniteDomain<Value>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<TripleWitness<S>>, EvalError> {
    let values = values.clone();
    let post = PostCond::value("v", "v ∈ values", move |_, v| values.contains(v));
    let t = HoareTriple::new(binders.clone(), pre.clone(), prog.clone(), post);
    check_triple(&t, dom, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Prog;

    fn unit_dom() -> FiniteDomain<()> {
        FiniteDomain::unit()
    }

    #[test]
    fn ret_five_equals_five() {
        let t = HoareTriple::closed(
            Pred::truth(),
            ProgFamily::constant("ret(5)", Prog::ret(5)),
            PostCond::value("r", "r = 5", |_, v| *v == Value::Int(5)),
        );
        let r = check_triple(&t, &unit_dom(), &EvalContext::new()).unwrap();
        assert!(r.holds());
        assert_eq!(r.states_checked, 1);
    }

    #[test]
    fn any_refuted_by_second_value() {
        let t = HoareTriple::closed(
            Pred::truth(),
            ProgFamily::constant("any({1,2})", Prog::any(FiniteDomain::ints(1..=2))),
            PostCond::value("r", "r = 1", |_, v| *v == Value::Int(1)),
        );
        let r = check_triple(&t, &unit_dom(), &EvalContext::new()).unwrap();
        let w = r.witness().unwrap();
        assert_eq!(w.value, Value::Int(2));
        assert_eq!((w.initial, w.final_state), ((), ()));
    }

    #[test]
    fn diverging_program_is_inconclusive() {
        let spin = crate::fixpoint::repeat_break("spin", |x: &Value| {
            crate::fixpoint::continue_(Value::Int(x.expect_int() + 1))
        });
        let t = HoareTriple::closed(
            Pred::truth(),
            ProgFamily::new("spin(0)", move |_| spin(&Value::Int(0))),
            PostCond::truth(),
        );
        let ctx = EvalContext::new().with_fuel(20);
        let r = check_triple(&t, &unit_dom(), &ctx).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.complete);
    }

    #[test]
    fn implications() {
        let dom = FiniteDomain::new(0u8..10);
        let p = Pred::state("s even", |s: &u8| s % 2 == 0);
        let q = Pred::state("s < 9", |s: &u8| *s < 9);
        assert!(check_implication(&p, &p, &dom).holds());
        assert!(check_implication(&Pred::falsity(), &q, &dom).holds());
        assert!(check_implication(&p, &q, &dom).holds());
        let r = check_implication(&q, &p, &dom);
        assert_eq!(r.witness().unwrap().state, 1);
    }

    #[test]
    fn binders_are_quantified() {
        let b = Binders::one("x", FiniteDomain::ints(1..=20));
        let t = HoareTriple::new(
            b,
            Pred::pure("x ≥ 1", |env| env["x"].expect_int() >= 1),
            ProgFamily::new("ret(x)", |env| Prog::ret(env["x"].clone())),
            PostCond::value("y", "y ≥ 1", |_, v| v.expect_int() >= 1),
        );
        let r = check_triple(&t, &unit_dom(), &EvalContext::new()).unwrap();
        assert!(r.holds());
        assert_eq!(r.states_checked, 20);
    }

    #[test]
    fn merge_prefers_counterexamples() {
        let holds: CheckReport<String> = CheckReport { verdict: Verdict::Holds, states_checked: 2, complete: true };
        let inc = CheckReport { verdict: Verdict::Inconclusive, states_checked: 1, complete: false };
        let cex = CheckReport { verdict: Verdict::Counterexample("w".into()), states_checked: 1, complete: true };
        assert_eq!(merge_reports(vec![holds.clone(), inc.clone()]).verdict, Verdict::Inconclusive);
        assert_eq!(merge_reports(vec![inc, cex, holds]).verdict, Verdict::Counterexample("w".into()));
    }
}
