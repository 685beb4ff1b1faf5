//! Checkers for the recursion rules.
//!
//! The Fix rule quantifies over every program `W` satisfying the triple.
//! Validity is antitone in the program relation, so it suffices to check the
//! premise for the largest such `W`: the specification program `specW`,
//! which from `s1` may return any `(r, s2)` unless `P(a)(s1)` holds, in
//! which case exactly the outcomes with `Q(a)(r, s2)`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::rc::Rc;

use thiserror::Error;

use crate::fixpoint::{break_part, continue_part};
use crate::kernel::{
    eval, render_env, Env, EvalContext, EvalError, FiniteDomain, Functional, Handle, Prog, State,
    Value,
};

use super::assertion::{Binders, PostCond, Pred, ProgFamily};
use super::check::{check_triple, check_value_cover, merge_reports, CheckReport, HoareTriple, Verdict};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoopRuleError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("functional is not monotone at argument {arg}: F(⊥) has outcomes F(specW) lacks")]
    MonotonicityViolation { arg: Value },
}

fn env_with(var: &str, a: &Value) -> Env {
    let mut env = Env::new();
    env.insert(var.to_string(), a.clone());
    env
}

/// The greatest program satisfying `∀a, {P(a)} W(a) {Q(a)}` within the
/// registered value and state domains. Arguments outside `arg_dom` are
/// recorded in `escaped`.
pub fn spec_program<S: State>(
    arg_var: &str,
    pre: &Pred<S>,
    post: &PostCond<S>,
    arg_dom: &FiniteDomain<Value>,
    values: &FiniteDomain<Value>,
    dom: &FiniteDomain<S>,
    escaped: Rc<RefCell<BTreeSet<Value>>>,
) -> Handle<S> {
    let arg_var = arg_var.to_string();
    let pre = pre.clone();
    let post = post.clone();
    let arg_dom = arg_dom.clone();
    let values = values.clone();
    let dom = dom.clone();
    Rc::new(move |a: &Value| {
        if !arg_dom.contains(a) {
            escaped.borrow_mut().insert(a.clone());
        }
        let env = env_with(&arg_var, a);
        let pre = pre.clone();
        let post = post.clone();
        let values = values.clone();
        let dom = dom.clone();
        Prog::step(format!("specW({a})"), move |s1| {
            let constrained = pre.holds(&env, s1);
            let mut out = Vec::new();
            for r in &values {
                for s2 in &dom {
                    if !constrained || post.holds(&env, r, s2) {
                        out.push((r.clone(), s2.clone()));
                    }
                }
            }
            out
        })
    })
}

/// Checks `∀a ∈ arg_dom, {P(a)} F(specW)(a) {Q(a)}`. `P` and `Q` read the
/// argument as the variable `arg_var`; `values` must contain every result
/// `Q` admits.
#[allow(clippy::too_many_arguments)]
pub fn fix_rule_check<S: State>(
    body: &Functional<S>,
    arg_var: &str,
    pre: &Pred<S>,
    post: &PostCond<S>,
    arg_dom: &FiniteDomain<Value>,
    values: &FiniteDomain<Value>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<String>, LoopRuleError> {
    let escaped = Rc::new(RefCell::new(BTreeSet::new()));
    let spec = spec_program(arg_var, pre, post, arg_dom, values, dom, escaped.clone());
    let bottom: Handle<S> = Rc::new(|_: &Value| Prog::fail());
    let mut states_checked = 0;
    let mut complete = true;
    for a in arg_dom {
        let env = env_with(arg_var, a);
        let with_spec = body(&spec, a);
        let with_bottom = body(&bottom, a);
        for s in dom {
            let lo = eval(&with_bottom, s, ctx)?;
            let hi = eval(&with_spec, s, ctx)?;
            complete &= hi.complete && lo.complete;
            if !lo.outcomes.is_subset(&hi.outcomes) {
                return Err(LoopRuleError::MonotonicityViolation { arg: a.clone() });
            }
            if !pre.holds(&env, s) {
                continue;
            }
            states_checked += 1;
            if let Some((r, s2)) = hi.outcomes.iter().find(|(r, s2)| !post.holds(&env, r, s2)) {
                return Ok(CheckReport {
                    verdict: Verdict::Counterexample(format!(
                        "with {}: from {s:?} returns {r} in {s2:?}",
                        render_env(&env)
                    )),
                    states_checked,
                    complete,
                });
            }
        }
    }
    let verdict = if complete && escaped.borrow().is_empty() {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    };
    Ok(CheckReport {
        verdict,
        states_checked,
        complete,
    })
}

/// Checks both premises of the loop rule over `arg_dom`, plus that every
/// continued argument stays inside `arg_dom`:
/// `{P(a)} x ← f(a);; continue_case(x) {P}` and
/// `{P(a)} x ← f(a);; break_case(x) {Q}`.
pub fn repeat_break_rule_check<S: State>(
    body: Rc<dyn Fn(&Value) -> Prog<S>>,
    arg_var: &str,
    pre: &Pred<S>,
    post: &PostCond<S>,
    arg_dom: &FiniteDomain<Value>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<String>, LoopRuleError> {
    let binders = Binders::one(arg_var, arg_dom.clone());
    let var = arg_var.to_string();
    let b = body.clone();
    let cont_prog = ProgFamily::new("x ← f(a);; continue_case(x)", move |env| {
        continue_part(b(&env[&var]))
    });
    let var = arg_var.to_string();
    let b = body.clone();
    let brk_prog = ProgFamily::new("x ← f(a);; break_case(x)", move |env| {
        break_part(b(&env[&var]))
    });
    let cont = HoareTriple::new(
        binders.clone(),
        pre.clone(),
        cont_prog.clone(),
        PostCond::bind_var(arg_var, pre),
    );
    let brk = HoareTriple::new(binders.clone(), pre.clone(), brk_prog, post.clone());
    let r_cont = check_triple(&cont, dom, ctx)?.erase();
    let r_brk = check_triple(&brk, dom, ctx)?.erase();
    let cover = check_value_cover(&binders, pre, &cont_prog, arg_dom, dom, ctx)?;
    let cover = match cover.verdict {
        Verdict::Counterexample(_) => CheckReport {
            verdict: Verdict::Inconclusive,
            states_checked: cover.states_checked,
            complete: cover.complete,
        },
        _ => cover.erase(),
    };
    Ok(merge_reports(vec![r_cont, r_brk, cover]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::{break_, continue_, lfix_rc};

    fn fib_oracle(n: i64) -> i64 {
        let (mut a, mut b) = (0, 1);
        for _ in 0..n {
            let t = a + b;
            a = b;
            b = t;
        }
        a
    }

    fn fib_body() -> Functional<()> {
        Rc::new(|w: &Handle<()>, n: &Value| {
            let n = n.expect_int();
            if n <= 1 {
                Prog::ret(n)
            } else {
                let w2 = w.clone();
                w(&Value::Int(n - 1)).then("x ↦ y ← W(n-2);; ret(x+y)", move |x| {
                    let x = x.expect_int();
                    w2(&Value::Int(n - 2)).then("ret(x+y)", move |y| Prog::ret(x + y.expect_int()))
                })
            }
        })
    }

    fn fib_post() -> PostCond<()> {
        PostCond::value("r", "r = fib(n)", |env, r| r.expect_int() == fib_oracle(env["n"].expect_int()))
    }

    #[test]
    fn fibonacci_fix_rule() {
        let values = FiniteDomain::new((0..=21).map(Value::Int));
        let r = fix_rule_check(
            &fib_body(),
            "n",
            &Pred::truth(),
            &fib_post(),
            &FiniteDomain::ints(0..=8),
            &values,
            &FiniteDomain::unit(),
            &EvalContext::new(),
        )
        .unwrap();
        assert!(r.holds(), "{r:?}");
        let direct = HoareTriple::new(
            Binders::one("n", FiniteDomain::ints(0..=8)),
            Pred::truth(),
            {
                let fib = lfix_rc("fib", fib_body());
                ProgFamily::new("fib(n)", move |env| fib(&env["n"]))
            },
            fib_post(),
        );
        assert!(check_triple(&direct, &FiniteDomain::unit(), &EvalContext::new()).unwrap().holds());
    }

    #[test]
    fn non_recursive_body_is_a_plain_check() {
        let body: Functional<()> = Rc::new(|_, a: &Value| Prog::ret(a.expect_int() + 1));
        let post = PostCond::value("r", "r = n+1", |env, r| r.expect_int() == env["n"].expect_int() + 1);
        let r = fix_rule_check(
            &body,
            "n",
            &Pred::truth(),
            &post,
            &FiniteDomain::ints(0..=3),
            &FiniteDomain::ints(0..=5),
            &FiniteDomain::unit(),
            &EvalContext::new(),
        )
        .unwrap();
        assert!(r.holds());
    }

    #[test]
    fn false_post_is_refuted() {
        let post = PostCond::value("r", "false", |_, _| false);
        let r = fix_rule_check(
            &fib_body(),
            "n",
            &Pred::truth(),
            &post,
            &FiniteDomain::ints(0..=3),
            &FiniteDomain::ints(0..=3),
            &FiniteDomain::unit(),
            &EvalContext::new(),
        )
        .unwrap();
        assert!(r.is_counterexample());
    }

    #[test]
    fn escaping_arguments_are_inconclusive() {
        let body: Functional<()> = Rc::new(|w: &Handle<()>, a: &Value| w(&Value::Int(a.expect_int() + 1)));
        let r = fix_rule_check(
            &body,
            "n",
            &Pred::truth(),
            &PostCond::truth(),
            &FiniteDomain::ints(0..=3),
            &FiniteDomain::ints(0..=0),
            &FiniteDomain::unit(),
            &EvalContext::new(),
        )
        .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn non_monotone_functional_is_rejected() {
        let body: Functional<()> = Rc::new(|w: &Handle<()>, a: &Value| {
            let here = w(a);
            Prog::step("flip", move |s| {
                let inner = eval(&here, s, &EvalContext::new()).unwrap();
                if inner.outcomes.is_empty() {
                    vec![(Value::Int(1), *s)]
                } else {
                    vec![]
                }
            })
        });
        let err = fix_rule_check(
            &body,
            "n",
            &Pred::truth(),
            &PostCond::truth(),
            &FiniteDomain::ints(0..=0),
            &FiniteDomain::ints(0..=1),
            &FiniteDomain::unit(),
            &EvalContext::new(),
        )
        .unwrap_err();
        assert_eq!(err, LoopRuleError::MonotonicityViolation { arg: Value::Int(0) });
    }

    #[test]
    fn break_only_body() {
        let pre = Pred::pure("x ≥ 1", |env: &Env| env["x"].expect_int() >= 1);
        let body: Rc<dyn Fn(&Value) -> Prog<()>> = Rc::new(|a: &Value| break_(a.clone()));
        let post = PostCond::bind_var("x", &pre);
        let r = repeat_break_rule_check(body, "x", &pre, &post, &FiniteDomain::ints(1..=5), &FiniteDomain::unit(), &EvalContext::new())
            .unwrap();
        assert!(r.holds());
    }

    #[test]
    fn escaping_continue_is_inconclusive() {
        let pre = Pred::truth();
        let body: Rc<dyn Fn(&Value) -> Prog<()>> = Rc::new(|a: &Value| {
            let n = a.expect_int();
            if n >= 3 { break_(n) } else { continue_(n + 1) }
        });
        let r = repeat_break_rule_check(body, "x", &pre, &PostCond::truth(), &FiniteDomain::ints(0..=2), &FiniteDomain::unit(), &EvalContext::new())
            .unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
