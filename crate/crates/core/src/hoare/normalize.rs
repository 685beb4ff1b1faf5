//! Monad-law rewriting and program equivalence.

use std::fmt::Write as _;
use std::rc::Rc;

use crate::kernel::{
    denote, eval, Continuation, EvalContext, EvalError, FiniteDomain, Functional, Handle, Node,
    Prog, State, Value,
};

use super::assertion::{Binders, ProgFamily};
use super::check::{CheckReport, Verdict};

/// Rewrites `p` to right-nested bind normal form:
/// `bind(ret(x), f) → f(x)`, `bind(bind(c, f), g) → bind(c, λx. bind(f(x), g))`
/// and `bind(c, ret) → c`. Continuations are normalized lazily, at the
/// moment they are applied.
pub fn normalize<S: State>(p: &Prog<S>) -> Prog<S> {
    match p.node() {
        Node::Bind { first, rest } => match first.node() {
            Node::Ret { value, sym } => normalize(&rest.apply_sym(value, sym.as_deref())),
            Node::Bind { first: c, rest: f } => {
                let f = f.clone();
                let g = rest.clone();
                let label = format!("{} ; {}", f.label(), g.label());
                let inner = Continuation::with_sym(label, move |x, sym| {
                    Prog::bind(f.apply_sym(x, sym), g.clone())
                });
                normalize(&Prog::bind(c.clone(), inner))
            }
            _ if rest.is_identity() => normalize(first),
            _ => Prog::bind(normalize(first), rest.map(|q| normalize(&q))),
        },
        Node::Choice(l, r) => Prog::choice(normalize(l), normalize(r)),
        Node::Rec { label, body, arg } => {
            let body = body.clone();
            let normalized: Functional<S> =
                Rc::new(move |w: &Handle<S>, a: &Value| normalize(&body(w, a)));
            Prog::rec(label.clone(), normalized, arg.clone())
        }
        _ => p.clone(),
    }
}

/// Renders the execution tree of `p` from `s`: constructors, with every
/// continuation unfolded at each intermediate outcome. Recursions are shown
/// by their argument only. Two programs with the same shape at every state
/// are structurally equal for the purposes of normalization.
pub fn shape<S: State>(p: &Prog<S>, s: &S, ctx: &EvalContext<S>) -> Result<String, EvalError> {
    let mut out = String::new();
    shape_into(p, s, ctx, &mut out)?;
    Ok(out)
}

fn shape_into<S: State>(
    p: &Prog<S>,
    s: &S,
    ctx: &EvalContext<S>,
    out: &mut String,
) -> Result<(), EvalError> {
    match p.node() {
        Node::Bind { first, rest } => {
            out.push_str("bind(");
            shape_into(first, s, ctx, out)?;
            out.push_str(", {");
            for (i, (a, s2)) in eval(first, s, ctx)?.outcomes.iter().enumerate() {
                if i > 0 {
                    out.push_str("; ");
                }
                let _ = write!(out, "{a} @ {s2:?} ↦ ");
                shape_into(&rest.apply(a), s2, ctx, out)?;
            }
            out.push_str("})");
        }
        Node::Choice(l, r) => {
            out.push_str("choice(");
            shape_into(l, s, ctx, out)?;
            out.push_str(", ");
            shape_into(r, s, ctx, out)?;
            out.push(')');
        }
        Node::Ret { value, .. } => {
            let _ = write!(out, "ret({value})");
        }
        _ => out.push_str(&p.describe()),
    }
    Ok(())
}

/// Decides `denote(p) = denote(q)` over the domain.
pub fn equiv_check<S: State>(
    p: &Prog<S>,
    q: &Prog<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<(S, Value, S)>, EvalError> {
    let dp = denote(p, dom, ctx)?;
    let dq = denote(q, dom, ctx)?;
    let complete = dp.complete && dq.complete;
    let verdict = match dp.first_difference(&dq) {
        Some(w) => Verdict::Counterexample(w),
        None if complete => Verdict::Holds,
        None => Verdict::Inconclusive,
    };
    Ok(CheckReport {
        verdict,
        states_checked: dom.len(),
        complete,
    })
}

/// [`equiv_check`] for every member of two families.
pub fn equiv_check_family<S: State>(
    binders: &Binders,
    p: &ProgFamily<S>,
    q: &ProgFamily<S>,
    dom: &FiniteDomain<S>,
    ctx: &EvalContext<S>,
) -> Result<CheckReport<String>, EvalError> {
    let mut states_checked = 0;
    let mut complete = true;
    for env in binders.assignments() {
        let r = equiv_check(&p.build(&env), &q.build(&env), dom, ctx)?;
        states_checked += r.states_checked;
        complete &= r.complete;
        match r.verdict {
            Verdict::Holds => {}
            Verdict::Counterexample((s1, a, s2)) => {
                return Ok(CheckReport {
                    verdict: Verdict::Counterexample(format!(
                        "with {}: ({s1:?}, {a}, {s2:?}) is in exactly one side",
                        crate::kernel::render_env(&env)
                    )),
                    states_checked,
                    complete,
                })
            }
            Verdict::Inconclusive => {}
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
