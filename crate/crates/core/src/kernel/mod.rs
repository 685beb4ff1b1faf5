//! Program syntax and its relational semantics.
//!
//! A program over states `S` denotes a ternary relation: `(s1, a, s2)` is in
//! the relation when the program may start in `s1`, terminate in `s2` and
//! return `a`. [`eval`] materializes the slice of that relation at one initial
//! state; [`denote`] tabulates it over a whole [`FiniteDomain`].
//!
//! The stateless set monad is the special case `S = ()`.

mod domain;
mod eval;
mod prog;
mod value;

pub use domain::FiniteDomain;
pub use eval::{
    denote, eval, Denotation, EvalContext, EvalError, EvalStats, Evaluation, OutcomeSet,
    DEFAULT_FUEL,
};
pub use prog::{
    Continuation, Functional, Handle, Image, Node, Prog, Relation, State, StatePred,
    StepFn, FALSE_LABEL,
};
pub use value::{render_env, Env, Value};

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn outs<S: State>(p: &Prog<S>, s: &S, ctx: &EvalContext<S>) -> BTreeSet<(Value, S)> {
        let e = eval(p, s, ctx).unwrap();
        assert!(e.complete);
        e.outcomes
    }

    fn set<S: State>(items: Vec<(i64, S)>) -> BTreeSet<(Value, S)> {
        items.into_iter().map(|(v, s)| (Value::Int(v), s)).collect()
    }

    #[test]
    fn ret_keeps_state() {
        let ctx = EvalContext::new();
        assert_eq!(outs(&Prog::ret(5), &'a', &ctx), set(vec![(5, 'a')]));
        let unit = outs(&Prog::<u8>::ret(()), &3, &EvalContext::new());
        assert_eq!(unit, [(Value::Unit, 3u8)].into_iter().collect());
    }

    #[test]
    fn choice_is_union() {
        let ctx = EvalContext::new();
        let p = Prog::choice(Prog::ret(1), Prog::ret(2));
        assert_eq!(outs(&p, &0u8, &ctx), set(vec![(1, 0), (2, 0)]));
    }

    #[test]
    fn assume_filters() {
        let ctx = EvalContext::new();
        let yes = Prog::<u8>::assume("true", |_| true);
        let no = Prog::<u8>::assume("false", |_| false);
        assert_eq!(outs(&yes, &7, &ctx), [(Value::Unit, 7)].into_iter().collect());
        assert!(outs(&no, &7, &ctx).is_empty());
    }

    #[test]
    fn dead_pure_guard_kills_everything() {
        let ctx = EvalContext::new();
        let p = Prog::<u8>::assume_pure("false", false).seq(Prog::ret(1));
        let e = eval(&p, &0, &ctx).unwrap();
        assert!(e.outcomes.is_empty());
        assert!(e.complete);
    }

    #[test]
    fn any_enumerates_domain() {
        let ctx = EvalContext::new();
        let p = Prog::<u8>::any(FiniteDomain::ints(1..=3));
        assert_eq!(outs(&p, &0, &ctx), set(vec![(1, 0), (2, 0), (3, 0)]));
        let empty = Prog::<u8>::any(FiniteDomain::empty());
        assert!(outs(&empty, &0, &ctx).is_empty());
    }

    #[test]
    fn bind_over_any() {
        let ctx = EvalContext::new();
        let p = Prog::<u8>::any(FiniteDomain::ints(1..=2))
            .then("x ↦ ret(x+1)", |x| Prog::ret(x.expect_int() + 1));
        assert_eq!(outs(&p, &0, &ctx), set(vec![(2, 0), (3, 0)]));
    }

    #[test]
    fn update_enumerates_registered_domain() {
        let ctx = EvalContext::new().with_state_domain(FiniteDomain::new(vec!['a', 'b']));
        let id = Prog::update("s2 = s1", |s1: &char, s2: &char| s1 == s2);
        let none = Prog::update("false", |_: &char, _: &char| false);
        let all = Prog::update("true", |_: &char, _: &char| true);
        assert_eq!(outs(&id, &'a', &ctx), [(Value::Unit, 'a')].into_iter().collect());
        assert!(outs(&none, &'a', &ctx).is_empty());
        assert_eq!(
            outs(&all, &'a', &ctx),
            [(Value::Unit, 'a'), (Value::Unit, 'b')].into_iter().collect()
        );
    }

    #[test]
    fn update_without_domain_is_an_error() {
        let ctx = EvalContext::<char>::new();
        let p = Prog::update("true", |_: &char, _: &char| true);
        assert_eq!(
            eval(&p, &'a', &ctx),
            Err(EvalError::MissingStateDomain("true".into()))
        );
    }

    #[test]
    fn image_hint_agrees_with_plain_relation() {
        let dom = FiniteDomain::new(0u8..6);
        let ctx = EvalContext::new().with_state_domain(dom.clone());
        let plain = Prog::update("s2 = s1 + 1", |a: &u8, b: &u8| *b == a + 1);
        let hinted = Prog::update_with_image("s2 = s1 + 1", |a: &u8, b: &u8| *b == a + 1, |a| vec![a + 1]);
        assert_eq!(denote(&plain, &dom, &ctx), denote(&hinted, &dom, &ctx));
    }

    #[test]
    fn denote_tabulates_each_initial_state() {
        let dom = FiniteDomain::new(vec!['a', 'b']);
        let ctx = EvalContext::new();
        let d = denote(&Prog::ret(1), &dom, &ctx).unwrap();
        assert!(d.complete);
        assert_eq!(d.table[&'a'], set(vec![(1, 'a')]));
        assert_eq!(d.table[&'b'], set(vec![(1, 'b')]));
    }

    #[test]
    fn set_monad_has_a_single_row() {
        let dom = FiniteDomain::unit();
        let ctx = EvalContext::new();
        let d = denote(&Prog::choice(Prog::ret(1), Prog::ret(2)), &dom, &ctx).unwrap();
        assert_eq!(d.table.len(), 1);
        assert!(d.table[&()].iter().all(|(_, s)| *s == ()));
    }

    #[test]
    fn left_identity_on_a_concrete_program() {
        let dom = FiniteDomain::new(0u8..3);
        let ctx = EvalContext::new();
        let f = |x: &Value| Prog::choice(Prog::ret(x.expect_int() * 2), Prog::ret(0));
        let lhs = Prog::ret(3).then("f", f);
        assert_eq!(
            denote(&lhs, &dom, &ctx).unwrap(),
            denote(&f(&Value::Int(3)), &dom, &ctx).unwrap()
        );
    }
}
