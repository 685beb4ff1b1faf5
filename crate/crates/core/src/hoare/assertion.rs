//! Labeled assertions over an environment of named variables and a state.
//!
//! A Hoare claim in a proof script is usually a family: `∀ j, {P(j)} c(j)
//! {Q}`. The free variables of the family live in an [`Env`]; predicates,
//! postconditions and programs all read from it. Labels are the symbolic
//! identity of an assertion: the proof composer matches rule schemas by
//! comparing label sets, so two atoms with the same label must mean the same
//! thing.

use std::collections::BTreeSet;
use std::fmt;
use std::rc::Rc;

use itertools::Itertools;

use crate::kernel::{Env, FiniteDomain, Prog, State, Value};

type AtomFn<S> = Rc<dyn Fn(&Env, &S) -> bool>;
type PostFn<S> = Rc<dyn Fn(&Env, &Value, &S) -> bool>;

/// One labeled conjunct of a precondition.
pub struct Atom<S> {
    label: String,
    test: AtomFn<S>,
}

impl<S> Clone for Atom<S> {
    fn clone(&self) -> Self {
        Atom {
            label: self.label.clone(),
            test: self.test.clone(),
        }
    }
}

impl<S> Atom<S> {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn holds(&self, env: &Env, s: &S) -> bool {
        (self.test)(env, s)
    }
}

/// A conjunction of labeled state predicates; the empty conjunction is
/// `true`.
pub struct Pred<S> {
    atoms: Vec<Atom<S>>,
}

impl<S> Clone for Pred<S> {
    fn clone(&self) -> Self {
        Pred {
            atoms: self.atoms.clone(),
        }
    }
}

impl<S: State> Pred<S> {
    pub fn new(label: impl Into<String>, test: impl Fn(&Env, &S) -> bool + 'static) -> Self {
        Pred {
            atoms: vec![Atom {
                label: label.into(),
                test: Rc::new(test),
            }],
        }
    }

    /// A predicate that reads only the state.
    pub fn state(label: impl Into<String>, test: impl Fn(&S) -> bool + 'static) -> Self {
        Pred::new(label, move |_, s| test(s))
    }

    /// A predicate that reads only the environment.
    pub fn pure(label: impl Into<String>, test: impl Fn(&Env) -> bool + 'static) -> Self {
        Pred::new(label, move |env, _| test(env))
    }

    pub fn truth() -> Self {
        Pred { atoms: Vec::new() }
    }

    pub fn falsity() -> Self {
        Pred::pure("false", |_| false)
    }

    pub fn and(&self, other: &Pred<S>) -> Self {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            if !atoms.iter().any(|b| b.label == a.label) {
                atoms.push(a.clone());
            }
        }
        Pred { atoms }
    }

    pub fn all(preds: &[&Pred<S>]) -> Self {
        preds.iter().fold(Pred::truth(), |acc, p| acc.and(p))
    }

    /// `∃x ∈ dom, P(x)` as a single atom.
    pub fn exists(var: &str, dom: &FiniteDomain<Value>, inner: &Pred<S>) -> Self {
        let label = format!("∃{var}, {}", inner.label());
        let var = var.to_string();
        let dom = dom.clone();
        let inner = inner.clone();
        Pred::new(label, move |env, s| {
            dom.iter().any(|x| {
                let mut env = env.clone();
                env.insert(var.clone(), x.clone());
                inner.holds(&env, s)
            })
        })
    }

    pub fn holds(&self, env: &Env, s: &S) -> bool {
        self.atoms.iter().all(|a| a.holds(env, s))
    }

    pub fn atoms(&self) -> &[Atom<S>] {
        &self.atoms
    }

    pub fn is_truth(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn label(&self) -> String {
        if self.atoms.is_empty() {
            return "true".into();
        }
        self.atoms.iter().map(|a| paren_if_compound(&a.label)).join(" ∧ ")
    }

    pub fn label_set(&self) -> BTreeSet<String> {
        self.atoms.iter().map(|a| a.label.clone()).collect()
    }

    /// Same conjuncts, in any order.
    pub fn same_as(&self, other: &Pred<S>) -> bool {
        self.label_set() == other.label_set()
    }

    /// Whether every conjunct of `other` is a conjunct of `self`.
    pub fn entails_syntactically(&self, other: &Pred<S>) -> bool {
        other.label_set().is_subset(&self.label_set())
    }

    /// Replaces variable `var` by the expression `expr`, whose value is
    /// computed from the environment.
    pub fn subst(&self, var: &str, text: &str, expr: Rc<dyn Fn(&Env) -> Value>) -> Self {
        Pred {
            atoms: self
                .atoms
                .iter()
                .map(|a| {
                    let test = a.test.clone();
                    let var = var.to_string();
                    let expr = expr.clone();
                    Atom {
                        label: subst_var(&a.label, &var, text),
                        test: Rc::new(move |env: &Env, s: &S| {
                            let mut env = env.clone();
                            let v = expr(&env);
                            env.insert(var.clone(), v);
                            test(&env, s)
                        }),
                    }
                })
                .collect(),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.atoms.iter().any(|a| mentions_var(&a.label, var))
    }
}

impl<S: State> fmt::Debug for Pred<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Pred[{}]", self.label())
    }
}

/// One labeled conjunct of a postcondition. `var` names the result the
/// label refers to; lifted state predicates have none.
pub struct PostAtom<S> {
    label: String,
    var: Option<String>,
    test: PostFn<S>,
}

impl<S> Clone for PostAtom<S> {
    fn clone(&self) -> Self {
        PostAtom {
            label: self.label.clone(),
            var: self.var.clone(),
            test: self.test.clone(),
        }
    }
}

impl<S> PostAtom<S> {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn var(&self) -> Option<&str> {
        self.var.as_deref()
    }

    pub fn holds(&self, env: &Env, v: &Value, s: &S) -> bool {
        (self.test)(env, v, s)
    }

    /// The label with the result variable replaced by `sym`.
    pub fn render_at(&self, sym: &str) -> String {
        match &self.var {
            Some(var) => subst_var(&self.label, var, sym),
            None => self.label.clone(),
        }
    }
}

/// A conjunction of labeled conditions on the result value and final state.
pub struct PostCond<S> {
    atoms: Vec<PostAtom<S>>,
}

impl<S> Clone for PostCond<S> {
    fn clone(&self) -> Self {
        PostCond {
            atoms: self.atoms.clone(),
        }
    }
}

impl<S: State> PostCond<S> {
    pub fn new(
        var: impl Into<String>,
        label: impl Into<String>,
        test: impl Fn(&Env, &Value, &S) -> bool + 'static,
    ) -> Self {
        PostCond {
            atoms: vec![PostAtom {
                label: label.into(),
                var: Some(var.into()),
                test: Rc::new(test),
            }],
        }
    }

    /// A condition on the result alone.
    pub fn value(
        var: impl Into<String>,
        label: impl Into<String>,
        test: impl Fn(&Env, &Value) -> bool + 'static,
    ) -> Self {
        PostCond::new(var, label, move |env, v, _| test(env, v))
    }

    /// `λ_ s. P(s)`
    pub fn lift(pred: &Pred<S>) -> Self {
        PostCond {
            atoms: pred
                .atoms
                .iter()
                .map(|a| {
                    let test = a.test.clone();
                    PostAtom {
                        label: a.label.clone(),
                        var: None,
                        test: Rc::new(move |env: &Env, _: &Value, s: &S| test(env, s)),
                    }
                })
                .collect(),
        }
    }

    /// Reads predicate `pred` as a postcondition whose result is the
    /// variable `var` of `pred`: `λv s. pred[var := v](s)`.
    pub fn bind_var(var: &str, pred: &Pred<S>) -> Self {
        PostCond {
            atoms: pred
                .atoms
                .iter()
                .map(|a| {
                    let test = a.test.clone();
                    let name = var.to_string();
                    PostAtom {
                        label: a.label.clone(),
                        var: if mentions_var(&a.label, var) {
                            Some(var.to_string())
                        } else {
                            None
                        },
                        test: Rc::new(move |env: &Env, v: &Value, s: &S| {
                            let mut env = env.clone();
                            env.insert(name.clone(), v.clone());
                            test(&env, s)
                        }),
                    }
                })
                .collect(),
        }
    }

    pub fn truth() -> Self {
        PostCond { atoms: Vec::new() }
    }

    pub fn and(&self, other: &PostCond<S>) -> Self {
        let mut atoms = self.atoms.clone();
        for a in &other.atoms {
            if !atoms.iter().any(|b| b.label == a.label) {
                atoms.push(a.clone());
            }
        }
        PostCond { atoms }
    }

    pub fn holds(&self, env: &Env, v: &Value, s: &S) -> bool {
        self.atoms.iter().all(|a| a.holds(env, v, s))
    }

    pub fn atoms(&self) -> &[PostAtom<S>] {
        &self.atoms
    }

    /// The single result variable referred to, if any.
    pub fn var(&self) -> Option<String> {
        let vars: BTreeSet<&str> = self.atoms.iter().filter_map(|a| a.var()).collect();
        if vars.len() == 1 {
            vars.into_iter().next().map(str::to_string)
        } else {
            None
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.atoms
            .iter()
            .filter_map(|a| a.var().map(str::to_string))
            .collect()
    }

    /// The postcondition as a predicate on the environment extended with
    /// the result under its own variable name.
    pub fn as_pred(&self) -> Pred<S> {
        Pred {
            atoms: self
                .atoms
                .iter()
                .map(|a| {
                    let test = a.test.clone();
                    let var = a.var.clone();
                    Atom {
                        label: a.label.clone(),
                        test: Rc::new(move |env: &Env, s: &S| {
                            let v = var
                                .as_ref()
                                .and_then(|n| env.get(n).cloned())
                                .unwrap_or(Value::Unit);
                            test(env, &v, s)
                        }),
                    }
                })
                .collect(),
        }
    }

    /// `Q(a)`: the precondition of `ret(a)` in the Ret rule.
    pub fn at(&self, sym: &str, value: Rc<dyn Fn(&Env) -> Value>) -> Pred<S> {
        Pred {
            atoms: self
                .atoms
                .iter()
                .map(|a| {
                    let test = a.test.clone();
                    let value = value.clone();
                    Atom {
                        label: a.render_at(sym),
                        test: Rc::new(move |env: &Env, s: &S| test(env, &value(env), s)),
                    }
                })
                .collect(),
        }
    }

    pub fn label(&self) -> String {
        if self.atoms.is_empty() {
            return "true".into();
        }
        self.atoms.iter().map(|a| paren_if_compound(&a.label)).join(" ∧ ")
    }

    pub fn label_set(&self) -> BTreeSet<String> {
        self.atoms.iter().map(|a| a.label.clone()).collect()
    }

    pub fn same_as(&self, other: &PostCond<S>) -> bool {
        self.label_set() == other.label_set()
    }

    pub fn mentions(&self, var: &str) -> bool {
        self.atoms
            .iter()
            .any(|a| a.var() != Some(var) && mentions_var(&a.label, var))
    }
}

impl<S: State> fmt::Debug for PostCond<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Post[{}]", self.label())
    }
}

/// The quantified variables of a family, each over a finite domain.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Binders {
    vars: Vec<(String, FiniteDomain<Value>)>,
}

impl Binders {
    pub fn none() -> Self {
        Binders::default()
    }

    pub fn one(var: &str, dom: FiniteDomain<Value>) -> Self {
        Binders::none().with(var, dom)
    }

    pub fn with(mut self, var: &str, dom: FiniteDomain<Value>) -> Self {
        self.vars.retain(|(n, _)| n != var);
        self.vars.push((var.to_string(), dom));
        self
    }

    pub fn without(&self, var: &str) -> Self {
        Binders {
            vars: self.vars.iter().filter(|(n, _)| n != var).cloned().collect(),
        }
    }

    pub fn get(&self, var: &str) -> Option<&FiniteDomain<Value>> {
        self.vars.iter().find(|(n, _)| n == var).map(|(_, d)| d)
    }

    pub fn names(&self) -> Vec<String> {
        self.vars.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn contains(&self, var: &str) -> bool {
        self.get(var).is_some()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Equal up to the order of the variables.
    pub fn same_as(&self, other: &Binders) -> bool {
        self.vars.len() == other.vars.len()
            && self.vars.iter().all(|(n, d)| other.get(n) == Some(d))
    }

    /// Every assignment, in canonical order; one empty environment when
    /// there are no binders.
    pub fn assignments(&self) -> Vec<Env> {
        if self.vars.is_empty() {
            return vec![Env::new()];
        }
        self.vars
            .iter()
            .map(|(_, d)| d.elements().to_vec())
            .multi_cartesian_product()
            .map(|vals| {
                self.vars
                    .iter()
                    .map(|(n, _)| n.clone())
                    .zip(vals)
                    .collect::<Env>()
            })
            .collect()
    }

    /// Assignments extending `env` (variables already bound are kept).
    pub fn assignments_from(&self, env: &Env) -> Vec<Env> {
        let free = Binders {
            vars: self
                .vars
                .iter()
                .filter(|(n, _)| !env.contains_key(n))
                .cloned()
                .collect(),
        };
        free.assignments()
            .into_iter()
            .map(|mut e| {
                e.extend(env.iter().map(|(k, v)| (k.clone(), v.clone())));
                e
            })
            .collect()
    }

    pub fn label(&self) -> String {
        self.vars.iter().map(|(n, d)| format!("{n} ∈ <{}>", d.len())).join(", ")
    }
}

type BuildFn<S> = Rc<dyn Fn(&Env) -> Prog<S>>;

/// A program indexed by the binders of a family.
pub struct ProgFamily<S> {
    label: String,
    build: BuildFn<S>,
}

impl<S> Clone for ProgFamily<S> {
    fn clone(&self) -> Self {
        ProgFamily {
            label: self.label.clone(),
            build: self.build.clone(),
        }
    }
}

impl<S: State> ProgFamily<S> {
    pub fn new(label: impl Into<String>, build: impl Fn(&Env) -> Prog<S> + 'static) -> Self {
        ProgFamily {
            label: label.into(),
            build: Rc::new(build),
        }
    }

    pub fn constant(label: impl Into<String>, prog: Prog<S>) -> Self {
        ProgFamily::new(label, move |_| prog.clone())
    }

    pub fn build(&self, env: &Env) -> Prog<S> {
        (self.build)(env)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mentions(&self, var: &str) -> bool {
        mentions_var(&self.label, var)
    }

    pub fn builder(&self) -> BuildFn<S> {
        self.build.clone()
    }
}

impl<S: State> fmt::Debug for ProgFamily<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProgFamily[{}]", self.label)
    }
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits a label into identifier tokens and everything else.
fn tokens(label: &str) -> Vec<(bool, String)> {
    let mut out: Vec<(bool, String)> = Vec::new();
    for c in label.chars() {
        let ident = is_ident_char(c);
        match out.last_mut() {
            Some((was_ident, tok)) if *was_ident == ident && ident => tok.push(c),
            _ => out.push((ident, c.to_string())),
        }
    }
    out
}

/// Replaces every identifier token equal to `var` by `text`.
pub fn subst_var(label: &str, var: &str, text: &str) -> String {
    tokens(label)
        .into_iter()
        .map(|(ident, tok)| if ident && tok == var { text.to_string() } else { tok })
        .collect()
}

pub fn mentions_var(label: &str, var: &str) -> bool {
    tokens(label).into_iter().any(|(ident, tok)| ident && tok == var)
}

/// Parenthesizes labels that would otherwise read ambiguously inside a
/// conjunction.
pub(crate) fn paren_if_compound(label: &str) -> String {
    let already = label.starts_with('(') && label.ends_with(')') && balanced_outer(label);
    if !already && (label.contains(',') || label.contains(" ∧ ") || label.contains(" ∨ ") || label.contains(" → ")) {
        format!("({label})")
    } else {
        label.to_string()
    }
}

fn balanced_outer(label: &str) -> bool {
    let mut depth = 0i32;
    let n = label.chars().count();
    for (i, c) in label.chars().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        if depth == 0 && i + 1 < n {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitution_respects_identifier_boundaries() {
        assert_eq!(subst_var("y ≥ 1", "y", "x/2"), "x/2 ≥ 1");
        assert_eq!(subst_var("jrange(j')", "j", "0"), "jrange(j')");
        assert_eq!(subst_var("jrange(j')", "j'", "0"), "jrange(0)");
        assert_eq!(subst_var("partial_match(i, j)", "i", "i+1"), "partial_match(i+1, j)");
        assert!(mentions_var("no_occur(i)", "i"));
        assert!(!mentions_var("no_occur(i)", "j"));
    }

    #[test]
    fn compound_labels_get_parentheses() {
        assert_eq!(paren_if_compound("∃k, x = 2k"), "(∃k, x = 2k)");
        assert_eq!(paren_if_compound("x ≥ 1"), "x ≥ 1");
        assert_eq!(paren_if_compound("(a ∧ b)"), "(a ∧ b)");
        assert_eq!(paren_if_compound("(a) ∧ (b)"), "((a) ∧ (b))");
    }

    #[test]
    fn conjunction_is_label_set_union() {
        let p = Pred::<()>::pure("a", |_| true);
        let q = Pred::<()>::pure("b", |_| false);
        let pq = p.and(&q).and(&p);
        assert_eq!(pq.label(), "a ∧ b");
        assert!(pq.same_as(&q.and(&p)));
        assert!(!pq.holds(&Env::new(), &()));
        assert!(Pred::<()>::truth().holds(&Env::new(), &()));
    }

    #[test]
    fn binders_enumerate_products() {
        let b = Binders::one("x", FiniteDomain::ints(0..=1)).with("y", FiniteDomain::ints(0..=2));
        let envs = b.assignments();
        assert_eq!(envs.len(), 6);
        assert_eq!(envs[0]["x"], Value::Int(0));
        assert_eq!(envs[5]["y"], Value::Int(2));
        assert_eq!(Binders::none().assignments(), vec![Env::new()]);
    }

    #[test]
    fn post_as_pred_reads_its_variable() {
        let q = PostCond::<()>::value("r", "r = 5", |_, v| *v == Value::Int(5));
        let p = q.as_pred();
        let mut env = Env::new();
        env.insert("r".into(), Value::Int(5));
        assert!(p.holds(&env, &()));
        env.insert("r".into(), Value::Int(4));
        assert!(!p.holds(&env, &()));
    }

    #[test]
    fn ret_rule_precondition_substitutes_the_value() {
        let q = PostCond::<()>::value("y", "y ≥ 1", |_, v| v.expect_int() >= 1);
        let pre = q.at("x/2", Rc::new(|env: &Env| Value::Int(env["x"].expect_int() / 2)));
        assert_eq!(pre.label(), "x/2 ≥ 1");
        let mut env = Env::new();
        env.insert("x".into(), Value::Int(3));
        assert!(pre.holds(&env, &()));
        env.insert("x".into(), Value::Int(1));
        assert!(!pre.holds(&env, &()));
    }
}
