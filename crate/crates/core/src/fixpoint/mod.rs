//! Recursion through Kleene iteration, loops with break, and the counted
//! loop.
//!
//! A `Rec` node is evaluated by materializing the chain `W0 = ∅`,
//! `W(n+1) = F(W(n))` on the finitely many `(argument, state)` pairs the
//! iteration actually visits. Each round recomputes only the entries whose
//! recursive calls read something that changed in the previous round; since
//! evaluation is deterministic the skipped entries would have come out
//! identical. Iteration stops when a round changes nothing (the chain has
//! stabilized and the table is the least fixed point on the visited pairs) or
//! when the fuel budget runs out, in which case the result is reported as
//! incomplete.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use crate::kernel::{
    eval, Continuation, EvalContext, EvalError, Evaluation, Functional, Handle, Node, OutcomeSet,
    Prog, State, Value,
};

type Key<S> = (Value, S);

static CHAIN_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

/// Chain-inclusion violations observed by every evaluation in this process.
pub fn total_chain_violations() -> usize {
    CHAIN_VIOLATIONS.load(Ordering::Relaxed)
}

struct Frame<S> {
    /// The current iterate, restricted to the visited pairs.
    table: RefCell<BTreeMap<Key<S>, OutcomeSet<S>>>,
    /// Pairs read during the current round that have no entry yet.
    discovered: RefCell<BTreeSet<Key<S>>>,
    /// Pairs read while evaluating the entry currently being recomputed.
    deps: RefCell<Option<BTreeSet<Key<S>>>>,
}

/// A recursive call `W(arg)` inside a `Rec` body.
pub struct CallSite<S> {
    frame: Rc<Frame<S>>,
    arg: Value,
}

impl<S> Clone for CallSite<S> {
    fn clone(&self) -> Self {
        CallSite {
            frame: self.frame.clone(),
            arg: self.arg.clone(),
        }
    }
}

impl<S: State> CallSite<S> {
    pub fn arg(&self) -> &Value {
        &self.arg
    }

    pub(crate) fn lookup(&self, s: &S) -> Evaluation<S> {
        let key = (self.arg.clone(), s.clone());
        if let Some(deps) = self.frame.deps.borrow_mut().as_mut() {
            deps.insert(key.clone());
        }
        match self.frame.table.borrow().get(&key) {
            Some(outs) => Evaluation {
                outcomes: outs.clone(),
                complete: true,
            },
            None => {
                self.frame.discovered.borrow_mut().insert(key);
                Evaluation::empty()
            }
        }
    }
}

/// Where the Kleene chain of one recursion ended up.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FixEvalState {
    /// Number of rounds computed (the index of the last iterate).
    pub iterate: usize,
    pub stabilized: bool,
    pub fuel: usize,
    /// Rounds in which some entry lost outcomes.
    pub chain_violations: usize,
}

/// Evaluates `Rec(body, arg)` at `s`, also returning the chain summary.
pub fn solve_traced<S: State>(
    body: &Functional<S>,
    arg: &Value,
    s: &S,
    ctx: &EvalContext<S>,
) -> Result<(Evaluation<S>, FixEvalState), EvalError> {
    let frame = Rc::new(Frame {
        table: RefCell::new(BTreeMap::new()),
        discovered: RefCell::new(BTreeSet::new()),
        deps: RefCell::new(None),
    });
    let handle: Handle<S> = {
        let frame = frame.clone();
        Rc::new(move |a: &Value| {
            Prog::from_node(Node::Call(CallSite {
                frame: frame.clone(),
                arg: a.clone(),
            }))
        })
    };

    let root: Key<S> = (arg.clone(), s.clone());
    let mut pending: BTreeSet<Key<S>> = [root.clone()].into_iter().collect();
    let mut entries: BTreeMap<Key<S>, (bool, BTreeSet<Key<S>>)> = BTreeMap::new();
    let mut state = FixEvalState {
        iterate: 0,
        stabilized: false,
        fuel: ctx.fuel(),
        chain_violations: 0,
    };

    while state.iterate < ctx.fuel() {
        state.iterate += 1;
        let mut round = Vec::with_capacity(pending.len());
        for key in &pending {
            *frame.deps.borrow_mut() = Some(BTreeSet::new());
            let result = eval(&body(&handle, &key.0), &key.1, ctx);
            let deps = frame.deps.borrow_mut().take().unwrap_or_default();
            round.push((key.clone(), result?, deps));
        }

        let mut changed: BTreeSet<Key<S>> = BTreeSet::new();
        let mut shrank = false;
        {
            let mut table = frame.table.borrow_mut();
            for (key, e, deps) in round {
                let old = table.get(&key);
                let same = match old {
                    Some(old) => {
                        shrank |= !old.is_subset(&e.outcomes);
                        *old == e.outcomes
                    }
                    None => e.outcomes.is_empty(),
                };
                if !same {
                    changed.insert(key.clone());
                }
                entries.insert(key.clone(), (e.complete, deps));
                table.insert(key, e.outcomes);
            }
        }
        if shrank {
            state.chain_violations += 1;
            CHAIN_VIOLATIONS.fetch_add(1, Ordering::Relaxed);
        }

        let discovered: BTreeSet<Key<S>> = {
            let table = frame.table.borrow();
            frame
                .discovered
                .take()
                .into_iter()
                .filter(|k| !table.contains_key(k))
                .collect()
        };
        if changed.is_empty() && discovered.is_empty() {
            state.stabilized = true;
            break;
        }
        pending = discovered;
        for (key, (_, deps)) in &entries {
            if !deps.is_disjoint(&changed) {
                pending.insert(key.clone());
            }
        }
    }

    ctx.record(|st| {
        st.recursions += 1;
        st.fix_iterations += state.iterate;
        st.chain_violations += state.chain_violations;
        if !state.stabilized {
            st.unstabilized += 1;
        }
    });

    let outcomes = frame.table.borrow().get(&root).cloned().unwrap_or_default();
    let complete = state.stabilized && entries.values().all(|(c, _)| *c);
    Ok((Evaluation { outcomes, complete }, state))
}

pub(crate) fn solve<S: State>(
    body: &Functional<S>,
    arg: &Value,
    s: &S,
    ctx: &EvalContext<S>,
) -> Result<Evaluation<S>, EvalError> {
    solve_traced(body, arg, s, ctx).map(|(e, _)| e)
}

/// `Lfix(F)`: the least fixed point of a functional, as a function from
/// arguments to programs.
pub fn lfix<S: State>(
    label: impl Into<String>,
    body: impl Fn(&Handle<S>, &Value) -> Prog<S> + 'static,
) -> Handle<S> {
    lfix_rc(label, Rc::new(body))
}

pub fn lfix_rc<S: State>(label: impl Into<String>, body: Functional<S>) -> Handle<S> {
    let label = label.into();
    Rc::new(move |a: &Value| Prog::rec(label.clone(), body.clone(), a.clone()))
}

/// Typed view of a loop-body result.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum ContinueOrBreak {
    Continue(Value),
    Break(Value),
}

impl From<ContinueOrBreak> for Value {
    fn from(c: ContinueOrBreak) -> Value {
        match c {
            ContinueOrBreak::Continue(a) => Value::by_continue(a),
            ContinueOrBreak::Break(b) => Value::by_break(b),
        }
    }
}

impl TryFrom<&Value> for ContinueOrBreak {
    type Error = ();

    fn try_from(v: &Value) -> Result<Self, ()> {
        match v {
            Value::Continue(a) => Ok(ContinueOrBreak::Continue((**a).clone())),
            Value::Break(b) => Ok(ContinueOrBreak::Break((**b).clone())),
            _ => Err(()),
        }
    }
}

/// `ret (by_continue a)`
pub fn continue_<S: State>(a: impl Into<Value>) -> Prog<S> {
    Prog::ret(Value::by_continue(a.into()))
}

/// `continue` with the payload's symbolic text.
pub fn continue_as<S: State>(a: impl Into<Value>, sym: impl Into<String>) -> Prog<S> {
    Prog::ret_as(Value::by_continue(a.into()), sym)
}

/// `ret (by_break b)`
pub fn break_<S: State>(b: impl Into<Value>) -> Prog<S> {
    Prog::ret(Value::by_break(b.into()))
}

pub fn break_as<S: State>(b: impl Into<Value>, sym: impl Into<String>) -> Prog<S> {
    Prog::ret_as(Value::by_break(b.into()), sym)
}

/// `continue_case`: unwraps `by_continue a` to `ret a`; any other value has
/// no outcomes.
pub fn continue_case<S: State>() -> Continuation<S> {
    Continuation::with_sym("continue_case(x)", |x, sym| match x {
        Value::Continue(a) => Prog::ret_sym((**a).clone(), sym.map(str::to_string)),
        _ => Prog::fail(),
    })
}

/// `break_case`: unwraps `by_break b` to `ret b`.
pub fn break_case<S: State>() -> Continuation<S> {
    Continuation::with_sym("break_case(x)", |x, sym| match x {
        Value::Break(b) => Prog::ret_sym((**b).clone(), sym.map(str::to_string)),
        _ => Prog::fail(),
    })
}

/// `x <- body(a);; continue_case(x)`
pub fn continue_part<S: State>(body_at_a: Prog<S>) -> Prog<S> {
    Prog::bind(body_at_a, continue_case())
}

/// `x <- body(a);; break_case(x)`
pub fn break_part<S: State>(body_at_a: Prog<S>) -> Prog<S> {
    Prog::bind(body_at_a, break_case())
}

/// One unfolding of a loop with break: `x <- body(a);; match x with
/// by_continue a' => W a' | by_break b => ret b`.
pub fn repeat_break_f<S: State>(body: Rc<dyn Fn(&Value) -> Prog<S>>) -> Functional<S> {
    Rc::new(move |w: &Handle<S>, a: &Value| {
        let w = w.clone();
        Prog::bind(
            body(a),
            Continuation::with_sym("match x", move |x, sym| match x {
                Value::Continue(next) => w(next),
                Value::Break(b) => Prog::ret_sym((**b).clone(), sym.map(str::to_string)),
                _ => Prog::fail(),
            }),
        )
    })
}

/// `repeat_break body = Lfix (repeat_break_f body)`
pub fn repeat_break<S: State>(
    label: impl Into<String>,
    body: impl Fn(&Value) -> Prog<S> + 'static,
) -> Handle<S> {
    lfix_rc(label, repeat_break_f(Rc::new(body)))
}

pub type RangeBody<S> = Rc<dyn Fn(i64, &Value) -> Prog<S>>;

/// A for-loop with break: `i` runs over `[lo, hi)` threading the
/// accumulator; `by_break b` leaves early, running off the end yields
/// `by_continue` of the final accumulator.
pub fn range_iter_break<S: State>(lo: i64, hi: i64, body: RangeBody<S>, init: Value) -> Prog<S> {
    if lo >= hi {
        return continue_(init);
    }
    let next = body.clone();
    Prog::bind(
        body(lo, &init),
        Continuation::with_sym("range step", move |x, sym| match x {
            Value::Continue(a) => range_iter_break(lo + 1, hi, next.clone(), (**a).clone()),
            Value::Break(b) => Prog::ret_sym(Value::Break(b.clone()), sym.map(str::to_string)),
            _ => Prog::fail(),
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{denote, FiniteDomain};

    fn fib_oracle(n: u64) -> u64 {
        let (mut a, mut b) = (0u64, 1u64);
        for _ in 0..n {
            let t = a + b;
            a = b;
            b = t;
        }
        a
    }

    fn fibonacci() -> Handle<()> {
        lfix("Fibonacci", |w: &Handle<()>, n: &Value| {
            let n = n.expect_int();
            let w = w.clone();
            Prog::choice(
                Prog::assume_pure("n ≤ 1", n <= 1).seq(Prog::ret(n)),
                Prog::assume_pure("n > 1", n > 1).seq(w(&Value::Int(n - 1)).then("x", move |x| {
                    let x = x.expect_int();
                    w(&Value::Int(n - 2)).then("y", move |y| Prog::ret(x + y.expect_int()))
                })),
            )
        })
    }

    #[test]
    fn fibonacci_matches_recurrence() {
        let fib = fibonacci();
        let ctx = EvalContext::new();
        for n in 0..=12 {
            let e = eval(&fib(&Value::Int(n)), &(), &ctx).unwrap();
            assert!(e.complete, "n = {n}");
            let expected: BTreeSet<(Value, ())> =
                [(Value::Int(fib_oracle(n as u64) as i64), ())].into_iter().collect();
            assert_eq!(e.outcomes, expected, "n = {n}");
        }
        assert_eq!(ctx.stats().chain_violations, 0);
        assert_eq!(ctx.stats().unstabilized, 0);
    }

    #[test]
    fn identity_functional_is_bottom() {
        let f: Functional<()> = Rc::new(|w: &Handle<()>, a: &Value| w(a));
        let ctx = EvalContext::new();
        let (e, st) = solve_traced(&f, &Value::Int(0), &(), &ctx).unwrap();
        assert!(e.outcomes.is_empty());
        assert!(e.complete);
        assert!(st.stabilized);
        assert_eq!(st.iterate, 1);
    }

    #[test]
    fn divergent_loop_is_incomplete_not_an_error() {
        // while true: x := x + 1 never reaches a fixed point on unbounded ints
        let up = repeat_break("up", |x: &Value| continue_::<()>(x.expect_int() + 1));
        let ctx = EvalContext::new().with_fuel(20);
        let e = eval(&up(&Value::Int(0)), &(), &ctx).unwrap();
        assert!(!e.complete);
        assert!(e.outcomes.is_empty());
        assert_eq!(ctx.stats().unstabilized, 1);
    }

    #[test]
    fn spinning_on_one_state_stabilizes_empty() {
        let spin = repeat_break("spin", |x: &Value| continue_::<()>(x.clone()));
        let ctx = EvalContext::new().with_fuel(5);
        let e = eval(&spin(&Value::Int(0)), &(), &ctx).unwrap();
        assert!(e.complete);
        assert!(e.outcomes.is_empty());
    }

    #[test]
    fn single_break_is_ret() {
        let lp = repeat_break("brk", |a: &Value| break_::<u8>(a.clone()));
        let dom = FiniteDomain::new(0u8..3);
        let ctx = EvalContext::new();
        for x in 0..4 {
            let x = Value::Int(x);
            assert_eq!(
                denote(&lp(&x), &dom, &ctx).unwrap(),
                denote(&Prog::ret(x.clone()), &dom, &ctx).unwrap()
            );
        }
    }

    #[test]
    fn tagged_returns() {
        let ctx = EvalContext::new();
        let c = eval(&continue_::<u8>(3), &0, &ctx).unwrap();
        assert_eq!(c.values(), [Value::by_continue(Value::Int(3))].into_iter().collect());
        let b = eval(&break_::<u8>(7), &0, &ctx).unwrap();
        assert_eq!(b.values(), [Value::by_break(Value::Int(7))].into_iter().collect());
    }

    #[test]
    fn case_splitters() {
        let ctx = EvalContext::new();
        let cc = |v: Value| eval(&Prog::<u8>::ret(v).then_cont(continue_case()), &1, &ctx).unwrap();
        let bc = |v: Value| eval(&Prog::<u8>::ret(v).then_cont(break_case()), &1, &ctx).unwrap();
        assert_eq!(cc(Value::by_continue(Value::Int(4))).values(), [Value::Int(4)].into_iter().collect());
        assert!(cc(Value::by_break(Value::Int(9))).outcomes.is_empty());
        assert_eq!(bc(Value::by_break(Value::Int(9))).values(), [Value::Int(9)].into_iter().collect());
        assert!(bc(Value::by_continue(Value::Int(9))).outcomes.is_empty());
    }

    #[test]
    fn continue_then_continue_case_is_ret() {
        let dom = FiniteDomain::new(0u8..2);
        let ctx = EvalContext::new();
        let lhs = continue_part(continue_::<u8>(5));
        assert_eq!(
            denote(&lhs, &dom, &ctx).unwrap(),
            denote(&Prog::ret(5), &dom, &ctx).unwrap()
        );
    }

    #[test]
    fn empty_range_continues_with_init() {
        let body: RangeBody<()> = Rc::new(|_, a| continue_(a.clone()));
        let ctx = EvalContext::new();
        let e = eval(&range_iter_break(0, 0, body.clone(), Value::Int(9)), &(), &ctx).unwrap();
        assert_eq!(e.values(), [Value::by_continue(Value::Int(9))].into_iter().collect());
        let e = eval(&range_iter_break(3, 1, body, Value::Int(9)), &(), &ctx).unwrap();
        assert_eq!(e.values(), [Value::by_continue(Value::Int(9))].into_iter().collect());
    }

    #[test]
    fn first_iteration_break() {
        let body: RangeBody<()> = Rc::new(|i, _| break_(i * 10));
        let ctx = EvalContext::new();
        let e = eval(&range_iter_break(2, 6, body, Value::Unit), &(), &ctx).unwrap();
        assert_eq!(e.values(), [Value::by_break(Value::Int(20))].into_iter().collect());
    }

    #[test]
    fn non_breaking_range_is_a_left_fold() {
        let body: RangeBody<()> = Rc::new(|i, a| continue_(a.expect_int() * 3 + i));
        let ctx = EvalContext::new();
        let e = eval(&range_iter_break(1, 5, body, Value::Int(1)), &(), &ctx).unwrap();
        let folded = (1..5).fold(1i64, |acc, i| acc * 3 + i);
        assert_eq!(e.values(), [Value::by_continue(Value::Int(folded))].into_iter().collect());
    }

    #[test]
    fn non_monotone_functional_is_reported() {
        // F(W)(a) = ret 1 when W(a) is empty, no outcomes otherwise.
        let f: Functional<()> = Rc::new(|w: &Handle<()>, a: &Value| {
            let here = w(a);
            Prog::step("flip", move |s: &()| {
                let seen = eval(&here, s, &EvalContext::new()).unwrap();
                if seen.outcomes.is_empty() {
                    vec![(Value::Int(1), *s)]
                } else {
                    vec![]
                }
            })
        });
        let ctx = EvalContext::new().with_fuel(6);
        let (e, st) = solve_traced(&f, &Value::Unit, &(), &ctx).unwrap();
        assert!(!st.stabilized);
        assert!(!e.complete);
        assert!(st.chain_violations >= 2);
        assert_eq!(ctx.stats().chain_violations, st.chain_violations);
    }
}
