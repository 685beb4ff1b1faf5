//! Proof trees: rule applications over checked leaves.
//!
//! A proof has two stages. First every leaf triple, implication and side
//! condition is decided by enumeration and its report stored in the tree
//! ([`Prover`] does this while building nodes). Then [`compose`] walks the
//! tree bottom-up, checks that each node's children fit the rule schema and
//! computes the conclusion. Schemas are matched on labels: programs by their
//! family label, assertions by their set of atom labels.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::fixpoint::{lfix_rc, range_iter_break, repeat_break, RangeBody};
use crate::kernel::{
    EvalContext, EvalError, Env, FiniteDomain, Functional, Prog, State, Value,
};

use super::assertion::{mentions_var, subst_var, Binders, PostCond, Pred, ProgFamily};
use super::check::{
    check_implication_over, check_post_implication, check_triple, check_value_cover,
    CheckReport, HoareTriple, Verdict,
};
use super::loops::{fix_rule_check, LoopRuleError};
use super::normalize::equiv_check_family;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("{node}: schema mismatch: {reason}")]
    SchemaMismatch { node: String, reason: String },
    #[error("{node}: side condition not established ({verdict})")]
    UncheckedLeaf {
        node: String,
        group: String,
        label: String,
        verdict: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProofError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Composition(#[from] CompositionError),
    #[error(transparent)]
    Loop(#[from] LoopRuleError),
}

/// An expression over the binders with its display text.
pub struct ValueExpr {
    pub text: String,
    eval: Rc<dyn Fn(&Env) -> Value>,
}

impl Clone for ValueExpr {
    fn clone(&self) -> Self {
        ValueExpr {
            text: self.text.clone(),
            eval: self.eval.clone(),
        }
    }
}

impl ValueExpr {
    pub fn new(text: impl Into<String>, eval: impl Fn(&Env) -> Value + 'static) -> Self {
        ValueExpr {
            text: text.into(),
            eval: Rc::new(eval),
        }
    }

    pub fn constant(v: Value) -> Self {
        let text = v.to_string();
        ValueExpr::new(text, move |_| v.clone())
    }

    pub fn var(name: &str) -> Self {
        let n = name.to_string();
        ValueExpr::new(name, move |env| env[&n].clone())
    }

    pub fn eval(&self, env: &Env) -> Value {
        (self.eval)(env)
    }

    pub fn func(&self) -> Rc<dyn Fn(&Env) -> Value> {
        self.eval.clone()
    }
}

impl fmt::Debug for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

pub type EnvRelation<S> = Rc<dyn Fn(&Env, &S, &S) -> bool>;
pub type EnvStep<S> = Rc<dyn Fn(&Env, &S) -> Vec<(Value, S)>>;

/// `∀ binders, ∀ s, hyp(s) → concl(s)`.
#[derive(Clone)]
pub enum ImplProof<S> {
    Checked {
        group: String,
        label: String,
        binders: Binders,
        hyp: Pred<S>,
        concl: Pred<S>,
        report: CheckReport<String>,
    },
    /// Dropping conjuncts.
    Weaken {
        binders: Binders,
        hyp: Pred<S>,
        concl: Pred<S>,
    },
    /// `P → Q1` and `P → Q2` give `P → Q1 ∧ Q2`.
    And(Box<ImplProof<S>>, Box<ImplProof<S>>),
    /// `P → Q` and `Q → R` give `P → R`.
    Chain(Box<ImplProof<S>>, Box<ImplProof<S>>),
}

/// `∀ binders, ∀ v s, hyp(v, s) → concl(v, s)`, possibly only for `v` in
/// a finite value domain; those domains are reported so the enclosing
/// node can demand a value cover.
#[derive(Clone)]
pub enum PostImplProof<S> {
    Checked {
        group: String,
        label: String,
        binders: Binders,
        hyp: PostCond<S>,
        concl: PostCond<S>,
        values: FiniteDomain<Value>,
        report: CheckReport<String>,
    },
    Weaken {
        binders: Binders,
        hyp: PostCond<S>,
        concl: PostCond<S>,
    },
    /// An implication between predicates over `binders + [var]`, read with
    /// `var` as the result.
    FromPred { var: String, proof: ImplProof<S> },
    And(Box<PostImplProof<S>>, Box<PostImplProof<S>>),
    Chain(Box<PostImplProof<S>>, Box<PostImplProof<S>>),
}

#[derive(Clone)]
pub enum ProofNode<S> {
    Leaf {
        group: String,
        label: String,
        triple: HoareTriple<S>,
        report: CheckReport<String>,
    },
    /// `{Q(e)} ret(e) {Q}`
    Ret {
        binders: Binders,
        value: ValueExpr,
        post: PostCond<S>,
    },
    /// `{P} f {Q}` and `∀x, {Q(x)} g(x) {R}` give `{P} x ← f;; g(x) {R}`.
    Bind {
        var: String,
        left: Box<ProofNode<S>>,
        right: Box<ProofNode<S>>,
        cover: CheckReport<String>,
    },
    Choice {
        left: Box<ProofNode<S>>,
        right: Box<ProofNode<S>>,
    },
    /// `{P} assume(R) {P ∧ R}`
    Assume {
        binders: Binders,
        pre: Pred<S>,
        guard: Pred<S>,
    },
    /// `{P} any(D) {λv. v ∈ D ∧ P}`
    Any {
        binders: Binders,
        pre: Pred<S>,
        var: String,
        values: FiniteDomain<Value>,
    },
    /// `{P} update(R) {λ_ s2. ∃s1, P(s1) ∧ R(s1, s2)}`
    Update {
        binders: Binders,
        pre: Pred<S>,
        label: String,
        rel: EnvRelation<S>,
        states: Rc<FiniteDomain<S>>,
    },
    /// `{P} step(f) {λa s2. ∃s1, P(s1) ∧ (a, s2) ∈ f(s1)}`
    Step {
        binders: Binders,
        pre: Pred<S>,
        label: String,
        step: EnvStep<S>,
        states: Rc<FiniteDomain<S>>,
    },
    /// `P1 → P2`, `{P2} f {Q2}`, `Q2 → Q1` give `{P1} f {Q1}`.
    Conseq {
        pre: ImplProof<S>,
        child: Box<ProofNode<S>>,
        post: PostImplProof<S>,
        covers: Vec<(FiniteDomain<Value>, CheckReport<String>)>,
    },
    /// `∀x, {P(x)} f {Q}` gives `{∃x, P(x)} f {Q}`.
    PreEx {
        var: String,
        child: Box<ProofNode<S>>,
    },
    /// `{P} f {Q1}` and `{P} f {Q2}` give `{P} f {Q1 ∧ Q2}`.
    Conj {
        left: Box<ProofNode<S>>,
        right: Box<ProofNode<S>>,
    },
    /// `∀a, {P(a)} Lfix(F)(a) {Q(a)}` from the premise checked on `specW`.
    Fix {
        label: String,
        arg_var: String,
        arg_dom: FiniteDomain<Value>,
        body: Functional<S>,
        pre: Pred<S>,
        post: PostCond<S>,
        report: CheckReport<String>,
    },
    /// `{P(a)} x ← f(a);; continue_case(x) {P}` and
    /// `{P(a)} x ← f(a);; break_case(x) {Q}` give
    /// `{P(a)} repeat_break(f)(a) {Q}`.
    RepeatBreak {
        arg_var: String,
        body: ProgFamily<S>,
        cont: Box<ProofNode<S>>,
        brk: Box<ProofNode<S>>,
        cover: CheckReport<String>,
    },
    /// The loop rule for `range_iter_break(lo, hi, f, a0)` with invariant
    /// `I(i, a)`:
    /// `{lo ≤ i < hi ∧ I(i, a)} x ← f(i, a);; continue_case(x) {λa'. I(i+1, a')}`
    /// and `{lo ≤ i < hi ∧ I(i, a)} x ← f(i, a);; break_case(x) {Q}` give
    /// `{I(lo, a0)} range_iter_break(lo, hi, f, a0)
    ///   {λr. case r: by_continue(a) ⇒ I(hi, a) | by_break(b) ⇒ Q(b)}`.
    RangeIter(Box<RangeIterRule<S>>),
    /// Replaces the program by an equivalent one.
    Equiv {
        child: Box<ProofNode<S>>,
        target: ProgFamily<S>,
        report: CheckReport<String>,
    },
}

#[derive(Clone)]
pub struct RangeIterRule<S> {
    pub index_var: String,
    pub acc_var: String,
    pub lo: ValueExpr,
    pub hi: ValueExpr,
    pub init: ValueExpr,
    pub inv: Pred<S>,
    pub body: ProgFamily<S>,
    pub cont: ProofNode<S>,
    pub brk: ProofNode<S>,
    pub cover: CheckReport<String>,
}

/// Label of the range guard atom.
pub fn range_guard_label(index_var: &str, lo: &str, hi: &str) -> String {
    format!("{lo} ≤ {index_var} < {hi}")
}

pub fn range_guard<S: State>(index_var: &str, lo: &ValueExpr, hi: &ValueExpr) -> Pred<S> {
    let (lo_f, hi_f, i) = (lo.func(), hi.func(), index_var.to_string());
    Pred::pure(range_guard_label(index_var, &lo.text, &hi.text), move |env| {
        let v = env[&i].expect_int();
        lo_f(env).expect_int() <= v && v < hi_f(env).expect_int()
    })
}

/// Label of the continue-case program built from a loop body.
pub fn continue_label(body: &str) -> String {
    format!("x ← {body};; continue_case(x)")
}

pub fn break_label(body: &str) -> String {
    format!("x ← {body};; break_case(x)")
}

/// The continue-case premise program of a loop body family.
pub fn continue_family<S: State>(body: &ProgFamily<S>) -> ProgFamily<S> {
    let b = body.clone();
    ProgFamily::new(continue_label(body.label()), move |env| {
        crate::fixpoint::continue_part(b.build(env))
    })
}

pub fn break_family<S: State>(body: &ProgFamily<S>) -> ProgFamily<S> {
    let b = body.clone();
    ProgFamily::new(break_label(body.label()), move |env| {
        crate::fixpoint::break_part(b.build(env))
    })
}

fn mismatch(node: &str, reason: impl Into<String>) -> CompositionError {
    CompositionError::SchemaMismatch {
        node: node.to_string(),
        reason: reason.into(),
    }
}

fn require(node: &str, report: &CheckReport<String>) -> Result<(), CompositionError> {
    require_named(node, "rule", node, report)
}

fn require_named(node: &str, group: &str, label: &str, report: &CheckReport<String>) -> Result<(), CompositionError> {
    let fail = |verdict: String| CompositionError::UncheckedLeaf {
        node: node.to_string(),
        group: group.to_string(),
        label: label.to_string(),
        verdict,
    };
    match &report.verdict {
        Verdict::Holds => Ok(()),
        Verdict::Counterexample(w) => Err(fail(format!("counterexample: {w}"))),
        Verdict::Inconclusive => Err(fail("inconclusive".into())),
    }
}

fn same_binders(node: &str, a: &Binders, b: &Binders) -> Result<(), CompositionError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(mismatch(
            node,
            format!("binders [{}] vs [{}]", a.names().join(", "), b.names().join(", ")),
        ))
    }
}

fn same_pre<S: State>(node: &str, what: &str, a: &Pred<S>, b: &Pred<S>) -> Result<(), CompositionError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(mismatch(node, format!("{what}: {{{}}} vs {{{}}}", a.label(), b.label())))
    }
}

fn same_post<S: State>(
    node: &str,
    what: &str,
    a: &PostCond<S>,
    b: &PostCond<S>,
) -> Result<(), CompositionError> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(mismatch(node, format!("{what}: {{{}}} vs {{{}}}", a.label(), b.label())))
    }
}

/// Derives `(binders, hyp, concl)` of an implication proof.
pub fn compose_impl<S: State>(p: &ImplProof<S>) -> Result<(Binders, Pred<S>, Pred<S>), CompositionError> {
    match p {
        ImplProof::Checked {
            group,
            label,
            binders,
            hyp,
            concl,
            report,
        } => {
            require_named(&format!("implication {group}/{label}"), group, label, report)?;
            Ok((binders.clone(), hyp.clone(), concl.clone()))
        }
        ImplProof::Weaken { binders, hyp, concl } => {
            if hyp.entails_syntactically(concl) {
                Ok((binders.clone(), hyp.clone(), concl.clone()))
            } else {
                Err(mismatch(
                    "Weaken",
                    format!("{{{}}} is not a sub-conjunction of {{{}}}", concl.label(), hyp.label()),
                ))
            }
        }
        ImplProof::And(a, b) => {
            let (ba, ha, ca) = compose_impl(a)?;
            let (bb, hb, cb) = compose_impl(b)?;
            same_binders("And", &ba, &bb)?;
            same_pre("And", "hypotheses", &ha, &hb)?;
            Ok((ba, ha, ca.and(&cb)))
        }
        ImplProof::Chain(a, b) => {
            let (ba, ha, ca) = compose_impl(a)?;
            let (bb, hb, cb) = compose_impl(b)?;
            same_binders("Chain", &ba, &bb)?;
            same_pre("Chain", "middle", &ca, &hb)?;
            Ok((ba, ha, cb))
        }
    }
}

type PostImplConclusion<S> = (Binders, PostCond<S>, PostCond<S>, Vec<FiniteDomain<Value>>);

/// Derives `(binders, hyp, concl, value domains needing a cover)`.
pub fn compose_post_impl<S: State>(p: &PostImplProof<S>) -> Result<PostImplConclusion<S>, CompositionError> {
    match p {
        PostImplProof::Checked {
            group,
            label,
            binders,
            hyp,
            concl,
            values,
            report,
        } => {
            require_named(&format!("implication {group}/{label}"), group, label, report)?;
            Ok((binders.clone(), hyp.clone(), concl.clone(), vec![values.clone()]))
        }
        PostImplProof::Weaken { binders, hyp, concl } => {
            if concl.label_set().is_subset(&hyp.label_set()) {
                Ok((binders.clone(), hyp.clone(), concl.clone(), Vec::new()))
            } else {
                Err(mismatch(
                    "Weaken",
                    format!("{{{}}} is not a sub-conjunction of {{{}}}", concl.label(), hyp.label()),
                ))
            }
        }
        PostImplProof::FromPred { var, proof } => {
            let (binders, hyp, concl) = compose_impl(proof)?;
            let values = binders
                .get(var)
                .ok_or_else(|| mismatch("FromPred", format!("`{var}` is not bound by the implication")))?
                .clone();
            Ok((
                binders.without(var),
                PostCond::bind_var(var, &hyp),
                PostCond::bind_var(var, &concl),
                vec![values],
            ))
        }
        PostImplProof::And(a, b) => {
            let (ba, ha, ca, mut va) = compose_post_impl(a)?;
            let (bb, hb, cb, vb) = compose_post_impl(b)?;
            same_binders("And", &ba, &bb)?;
            same_post("And", "hypotheses", &ha, &hb)?;
            va.extend(vb);
            Ok((ba, ha, ca.and(&cb), va))
        }
        PostImplProof::Chain(a, b) => {
            let (ba, ha, ca, mut va) = compose_post_impl(a)?;
            let (bb, hb, cb, vb) = compose_post_impl(b)?;
            same_binders("Chain", &ba, &bb)?;
            same_post("Chain", "middle", &ca, &hb)?;
            va.extend(vb);
            Ok((ba, ha, cb, va))
        }
    }
}

fn binder_extension(node: &str, outer: &Binders, inner: &Binders, var: &str) -> Result<FiniteDomain<Value>, CompositionError> {
    let dom = inner
        .get(var)
        .ok_or_else(|| mismatch(node, format!("`{var}` is not bound by the premise")))?
        .clone();
    same_binders(node, &inner.without(var), outer)?;
    Ok(dom)
}

/// Builds the conclusion of `node` after validating every schema and side
/// condition beneath it.
pub fn compose<S: State>(node: &ProofNode<S>) -> Result<HoareTriple<S>, CompositionError> {
    match node {
        ProofNode::Leaf {
            group,
            label,
            triple,
            report,
        } => {
            require_named(&format!("leaf {group}/{label}"), group, label, report)?;
            Ok(triple.clone())
        }
        ProofNode::Ret { binders, value, post } => {
            let vars = post.vars();
            if vars.len() > 1 {
                return Err(mismatch("Ret", "postcondition names more than one result"));
            }
            let pre = post.at(&value.text, value.func());
            let v = value.clone();
            let prog = ProgFamily::new(format!("ret({})", value.text), move |env| {
                Prog::ret_as(v.eval(env), v.text.clone())
            });
            Ok(HoareTriple::new(binders.clone(), pre, prog, post.clone()))
        }
        ProofNode::Bind {
            var,
            left,
            right,
            cover,
        } => {
            let l = compose(left)?;
            let r = compose(right)?;
            let node = "Bind";
            if !l.post.vars().iter().all(|v| v == var) {
                return Err(mismatch(node, format!("left postcondition does not speak about `{var}`")));
            }
            binder_extension(node, &l.binders, &r.binders, var)?;
            same_pre(node, "right precondition", &r.pre, &l.post.as_pred())?;
            if r.post.mentions(var) {
                return Err(mismatch(node, format!("`{var}` escapes into the postcondition")));
            }
            require("Bind value cover", cover)?;
            let (f, g, x) = (l.prog.clone(), r.prog.clone(), var.clone());
            let label = format!("{var} ← {};; {}", l.prog.label(), r.prog.label());
            let prog = ProgFamily::new(label.clone(), move |env| {
                let (g, x, env2) = (g.clone(), x.clone(), env.clone());
                f.build(env).then(label.clone(), move |v| {
                    let mut e = env2.clone();
                    e.insert(x.clone(), v.clone());
                    g.build(&e)
                })
            });
            Ok(HoareTriple::new(l.binders, l.pre, prog, r.post))
        }
        ProofNode::Choice { left, right } => {
            let l = compose(left)?;
            let r = compose(right)?;
            same_binders("Choice", &l.binders, &r.binders)?;
            same_pre("Choice", "preconditions", &l.pre, &r.pre)?;
            same_post("Choice", "postconditions", &l.post, &r.post)?;
            let (f, g) = (l.prog.clone(), r.prog.clone());
            let prog = ProgFamily::new(
                format!("choice({}, {})", l.prog.label(), r.prog.label()),
                move |env| Prog::choice(f.build(env), g.build(env)),
            );
            Ok(HoareTriple::new(l.binders, l.pre, prog, l.post))
        }
        ProofNode::Assume { binders, pre, guard } => {
            let g = guard.clone();
            let label = guard.label();
            let prog = ProgFamily::new(format!("assume({label})"), move |env| {
                let (g, env) = (g.clone(), env.clone());
                Prog::assume(label.clone(), move |s| g.holds(&env, s))
            });
            Ok(HoareTriple::new(
                binders.clone(),
                pre.clone(),
                prog,
                PostCond::lift(&pre.and(guard)),
            ))
        }
        ProofNode::Any {
            binders,
            pre,
            var,
            values,
        } => {
            if pre.mentions(var) {
                return Err(mismatch("Any", format!("precondition mentions the result `{var}`")));
            }
            let d = values.clone();
            let prog = ProgFamily::new(format!("any(<{} values>)", values.len()), move |_| Prog::any(d.clone()));
            let d = values.clone();
            let member = PostCond::value(var.clone(), format!("{var} ∈ D"), move |_, v| d.contains(v));
            Ok(HoareTriple::new(
                binders.clone(),
                pre.clone(),
                prog,
                member.and(&PostCond::lift(pre)),
            ))
        }
        ProofNode::Update {
            binders,
            pre,
            label,
            rel,
            states,
        } => {
            let r = rel.clone();
            let l = label.clone();
            let prog = ProgFamily::new(format!("update({label})"), move |env| {
                let (r, env) = (r.clone(), env.clone());
                Prog::update(l.clone(), move |a, b| r(&env, a, b))
            });
            let (r, p, states) = (rel.clone(), pre.clone(), states.clone());
            let post = Pred::new(format!("∃s1, {} ∧ {label}", pre.label()), move |env, s2| {
                states.iter().any(|s1| p.holds(env, s1) && r(env, s1, s2))
            });
            Ok(HoareTriple::new(binders.clone(), pre.clone(), prog, PostCond::lift(&post)))
        }
        ProofNode::Step {
            binders,
            pre,
            label,
            step,
            states,
        } => {
            let f = step.clone();
            let l = label.clone();
            let prog = ProgFamily::new(label.clone(), move |env| {
                let (f, env) = (f.clone(), env.clone());
                Prog::step(l.clone(), move |s| f(&env, s))
            });
            let (f, p, states) = (step.clone(), pre.clone(), states.clone());
            let post = PostCond::new(
                "a",
                format!("∃s1, {} ∧ (a, s2) ∈ {label}(s1)", pre.label()),
                move |env, a, s2| {
                    states.iter().any(|s1| {
                        p.holds(env, s1) && f(env, s1).iter().any(|(b, t)| b == a && t == s2)
                    })
                },
            );
            Ok(HoareTriple::new(binders.clone(), pre.clone(), prog, post))
        }
        ProofNode::Conseq {
            pre,
            child,
            post,
            covers,
        } => {
            let c = compose(child)?;
            let (bp, p1, p2) = compose_impl(pre)?;
            let (bq, q2, q1, needed) = compose_post_impl(post)?;
            same_binders("Conseq", &bp, &c.binders)?;
            same_binders("Conseq", &bq, &c.binders)?;
            same_pre("Conseq", "strengthened precondition", &p2, &c.pre)?;
            same_post("Conseq", "weakened postcondition", &q2, &c.post)?;
            for dom in &needed {
                match covers.iter().find(|(d, _)| d == dom) {
                    Some((_, r)) => require("Conseq value cover", r)?,
                    None => {
                        return Err(mismatch("Conseq", "missing value cover for a finite implication"))
                    }
                }
            }
            Ok(HoareTriple::new(c.binders, p1, c.prog, q1))
        }
        ProofNode::PreEx { var, child } => {
            let c = compose(child)?;
            let dom = c
                .binders
                .get(var)
                .ok_or_else(|| mismatch("PreEx", format!("`{var}` is not bound")))?
                .clone();
            if c.prog.mentions(var) {
                return Err(mismatch("PreEx", format!("program mentions `{var}`")));
            }
            if c.post.mentions(var) {
                return Err(mismatch("PreEx", format!("postcondition mentions `{var}`")));
            }
            let witness = dom
                .iter()
                .next()
                .cloned()
                .ok_or_else(|| mismatch("PreEx", format!("domain of `{var}` is empty")))?;
            let (f, x) = (c.prog.clone(), var.clone());
            let prog = ProgFamily::new(c.prog.label().to_string(), move |env| {
                let mut e = env.clone();
                e.insert(x.clone(), witness.clone());
                f.build(&e)
            });
            let pre = Pred::exists(var, &dom, &c.pre);
            Ok(HoareTriple::new(c.binders.without(var), pre, prog, c.post))
        }
        ProofNode::Conj { left, right } => {
            let l = compose(left)?;
            let r = compose(right)?;
            same_binders("Conj", &l.binders, &r.binders)?;
            same_pre("Conj", "preconditions", &l.pre, &r.pre)?;
            if l.prog.label() != r.prog.label() {
                return Err(mismatch(
                    "Conj",
                    format!("programs `{}` vs `{}`", l.prog.label(), r.prog.label()),
                ));
            }
            Ok(HoareTriple::new(l.binders, l.pre, l.prog, l.post.and(&r.post)))
        }
        ProofNode::Fix {
            label,
            arg_var,
            arg_dom,
            body,
            pre,
            post,
            report,
        } => {
            require(&format!("Fix premise of {label}"), report)?;
            let w = lfix_rc(label.clone(), body.clone());
            let a = arg_var.clone();
            let prog = ProgFamily::new(format!("{label}({arg_var})"), move |env| w(&env[&a]));
            Ok(HoareTriple::new(
                Binders::one(arg_var, arg_dom.clone()),
                pre.clone(),
                prog,
                post.clone(),
            ))
        }
        ProofNode::RepeatBreak {
            arg_var,
            body,
            cont,
            brk,
            cover,
        } => {
            let node = "RepeatBreak";
            let c = compose(cont)?;
            let b = compose(brk)?;
            same_binders(node, &c.binders, &b.binders)?;
            if !c.binders.contains(arg_var) {
                return Err(mismatch(node, format!("`{arg_var}` is not bound by the premises")));
            }
            if c.prog.label() != continue_label(body.label()) {
                return Err(mismatch(node, format!("continue premise runs `{}`", c.prog.label())));
            }
            if b.prog.label() != break_label(body.label()) {
                return Err(mismatch(node, format!("break premise runs `{}`", b.prog.label())));
            }
            same_pre(node, "premise preconditions", &c.pre, &b.pre)?;
            if c.post.label_set() != c.pre.label_set() || !c.post.vars().iter().all(|v| v == arg_var) {
                return Err(mismatch(node, "continue premise must re-establish the precondition"));
            }
            require("RepeatBreak argument cover", cover)?;
            let (f, a) = (body.clone(), arg_var.clone());
            let label = format!("repeat_break({})({arg_var})", body.label());
            let name = label.clone();
            let prog = ProgFamily::new(label, move |env| {
                let (f, a2, env2) = (f.clone(), a.clone(), env.clone());
                let w = repeat_break(name.clone(), move |v: &Value| {
                    let mut e = env2.clone();
                    e.insert(a2.clone(), v.clone());
                    f.build(&e)
                });
                w(&env[&a])
            });
            Ok(HoareTriple::new(c.binders, c.pre, prog, b.post))
        }
        ProofNode::RangeIter(rule) => compose_range(rule),
        ProofNode::Equiv {
            child,
            target,
            report,
        } => {
            let c = compose(child)?;
            require(&format!("equivalence with {}", target.label()), report)?;
            Ok(HoareTriple::new(c.binders, c.pre, target.clone(), c.post))
        }
    }
}

/// Labels of `inv` after substituting the index and accumulator.
fn inv_labels_at<S: State>(inv: &Pred<S>, i: &str, i_text: &str, a: &str, a_text: &str) -> std::collections::BTreeSet<String> {
    inv.atoms()
        .iter()
        .map(|atom| subst_var(&subst_var(atom.label(), i, i_text), a, a_text))
        .collect()
}

fn inv_at<S: State>(inv: &Pred<S>, i: &str, i_expr: &ValueExpr, a: &str, a_expr: &ValueExpr) -> Pred<S> {
    // Both expressions are evaluated in the outer environment.
    let (ie, ae) = (i_expr.func(), a_expr.func());
    let (iv, av) = (i.to_string(), a.to_string());
    let mut atoms: Option<Pred<S>> = None;
    for atom in inv.atoms() {
        let label = subst_var(&subst_var(atom.label(), i, &i_expr.text), a, &a_expr.text);
        let atom = atom.clone();
        let (ie, ae, iv, av) = (ie.clone(), ae.clone(), iv.clone(), av.clone());
        let p = Pred::new(label, move |env, s| {
            let mut e = env.clone();
            let (i_val, a_val) = (ie(env), ae(env));
            e.insert(iv.clone(), i_val);
            e.insert(av.clone(), a_val);
            atom.holds(&e, s)
        });
        atoms = Some(match atoms {
            Some(acc) => acc.and(&p),
            None => p,
        });
    }
    atoms.unwrap_or_else(Pred::truth)
}

fn compose_range<S: State>(rule: &RangeIterRule<S>) -> Result<HoareTriple<S>, CompositionError> {
    let node = "RangeIter";
    let RangeIterRule {
        index_var: i,
        acc_var: a,
        lo,
        hi,
        init,
        inv,
        body,
        cont,
        brk,
        cover,
    } = rule;
    let c = compose(cont)?;
    let b = compose(brk)?;
    same_binders(node, &c.binders, &b.binders)?;
    let outer = c.binders.without(i).without(a);
    let i_dom = binder_extension(node, &outer, &c.binders.without(a), i)?;
    let a_dom = c
        .binders
        .get(a)
        .ok_or_else(|| mismatch(node, format!("`{a}` is not bound by the premises")))?
        .clone();
    if c.prog.label() != continue_label(body.label()) {
        return Err(mismatch(node, format!("continue premise runs `{}`", c.prog.label())));
    }
    if b.prog.label() != break_label(body.label()) {
        return Err(mismatch(node, format!("break premise runs `{}`", b.prog.label())));
    }
    let guarded = range_guard::<S>(i, lo, hi).and(inv);
    same_pre(node, "continue premise precondition", &c.pre, &guarded)?;
    same_pre(node, "break premise precondition", &b.pre, &guarded)?;
    let next = inv_labels_at(inv, i, &format!("{i}+1"), a, a);
    if c.post.label_set() != next || !c.post.vars().iter().all(|v| v == a) {
        return Err(mismatch(node, format!("continue premise must establish the invariant at {i}+1")));
    }
    if b.post.mentions(i) || b.post.mentions(a) {
        return Err(mismatch(node, "break postcondition mentions the loop variables"));
    }
    require("RangeIter accumulator cover", cover)?;
    for env in outer.assignments() {
        let (l, h) = (lo.eval(&env).expect_int(), hi.eval(&env).expect_int());
        if (l..h).any(|k| !i_dom.contains(&Value::Int(k))) {
            return Err(mismatch(node, format!("index domain misses part of [{l}, {h})")));
        }
        if !a_dom.contains(&init.eval(&env)) {
            return Err(mismatch(node, "initial accumulator outside its domain"));
        }
    }
    let pre = inv_at(inv, i, lo, a, init);
    let (f, iv, av) = (body.clone(), i.clone(), a.clone());
    let (lo_f, hi_f, init_f) = (lo.func(), hi.func(), init.func());
    let label = format!("range_iter_break({}, {}, {}, {})", lo.text, hi.text, body.label(), init.text);
    let prog = ProgFamily::new(label, move |env| {
        let (f, iv, av, env2) = (f.clone(), iv.clone(), av.clone(), env.clone());
        let step: RangeBody<S> = Rc::new(move |k, acc| {
            let mut e = env2.clone();
            e.insert(iv.clone(), Value::Int(k));
            e.insert(av.clone(), acc.clone());
            f.build(&e)
        });
        range_iter_break(lo_f(env).expect_int(), hi_f(env).expect_int(), step, init_f(env))
    });
    let (inv2, brk_post, hi_f) = (inv.clone(), b.post.clone(), hi.func());
    let (iv, av) = (i.clone(), a.clone());
    let at_end = inv_labels_at(inv, i, &hi.text, a, a);
    let label = format!(
        "case r: by_continue({a}) ⇒ {} | by_break(b) ⇒ {}",
        at_end.into_iter().collect::<Vec<_>>().join(" ∧ "),
        brk_post.label()
    );
    let post = PostCond::new("r", label, move |env, r, s| match r {
        Value::Continue(acc) => {
            let mut e = env.clone();
            e.insert(iv.clone(), hi_f(env));
            e.insert(av.clone(), (**acc).clone());
            inv2.holds(&e, s)
        }
        Value::Break(v) => brk_post.holds(env, v, s),
        _ => false,
    });
    Ok(HoareTriple::new(outer, pre, prog, post))
}

/// A named side condition found in a proof tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckEntry {
    pub group: String,
    pub kind: &'static str,
    pub label: String,
    pub report: CheckReport<String>,
}

impl<S: State> ProofNode<S> {
    /// Every stored report, in tree order.
    pub fn checks(&self) -> Vec<CheckEntry> {
        let mut out = Vec::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut Vec<CheckEntry>) {
        let entry = |group: &str, kind, label: String, report: &CheckReport<String>| CheckEntry {
            group: group.to_string(),
            kind,
            label,
            report: report.clone(),
        };
        match self {
            ProofNode::Leaf {
                group,
                label,
                report,
                ..
            } => out.push(entry(group, "triple", label.clone(), report)),
            ProofNode::Ret { .. }
            | ProofNode::Assume { .. }
            | ProofNode::Any { .. }
            | ProofNode::Update { .. }
            | ProofNode::Step { .. } => {}
            ProofNode::Bind {
                left, right, cover, ..
            } => {
                left.collect(out);
                right.collect(out);
                out.push(entry("rule", "cover", "bind value cover".into(), cover));
            }
            ProofNode::Choice { left, right } | ProofNode::Conj { left, right } => {
                left.collect(out);
                right.collect(out);
            }
            ProofNode::Conseq {
                pre,
                child,
                post,
                covers,
            } => {
                collect_impl(pre, out);
                child.collect(out);
                collect_post_impl(post, out);
                for (_, r) in covers {
                    out.push(entry("rule", "cover", "consequence value cover".into(), r));
                }
            }
            ProofNode::PreEx { child, .. } => child.collect(out),
            ProofNode::Fix { label, report, .. } => {
                out.push(entry("rule", "fix", format!("{label} on specW"), report))
            }
            ProofNode::RepeatBreak {
                cont, brk, cover, ..
            } => {
                cont.collect(out);
                brk.collect(out);
                out.push(entry("rule", "cover", "loop argument cover".into(), cover));
            }
            ProofNode::RangeIter(rule) => {
                rule.cont.collect(out);
                rule.brk.collect(out);
                out.push(entry("rule", "cover", "loop accumulator cover".into(), &rule.cover));
            }
            ProofNode::Equiv {
                child,
                target,
                report,
            } => {
                child.collect(out);
                out.push(entry("rule", "equiv", format!("≡ {}", target.label()), report));
            }
        }
    }
}

fn collect_impl<S: State>(p: &ImplProof<S>, out: &mut Vec<CheckEntry>) {
    match p {
        ImplProof::Checked {
            group,
            label,
            report,
            ..
        } => out.push(CheckEntry {
            group: group.clone(),
            kind: "implication",
            label: label.clone(),
            report: report.clone(),
        }),
        ImplProof::Weaken { .. } => {}
        ImplProof::And(a, b) | ImplProof::Chain(a, b) => {
            collect_impl(a, out);
            collect_impl(b, out);
        }
    }
}

fn collect_post_impl<S: State>(p: &PostImplProof<S>, out: &mut Vec<CheckEntry>) {
    match p {
        PostImplProof::Checked {
            group,
            label,
            report,
            ..
        } => out.push(CheckEntry {
            group: group.clone(),
            kind: "implication",
            label: label.clone(),
            report: report.clone(),
        }),
        PostImplProof::Weaken { .. } => {}
        PostImplProof::FromPred { proof, .. } => collect_impl(proof, out),
        PostImplProof::And(a, b) | PostImplProof::Chain(a, b) => {
            collect_post_impl(a, out);
            collect_post_impl(b, out);
        }
    }
}

/// Builds proof nodes and computes their reports over one state domain.
pub struct Prover<S> {
    dom: Rc<FiniteDomain<S>>,
    ctx: EvalContext<S>,
}

impl<S: State> Prover<S> {
    pub fn new(dom: FiniteDomain<S>) -> Self {
        let dom = Rc::new(dom);
        Prover {
            ctx: EvalContext::new().with_shared_state_domain(dom.clone()),
            dom,
        }
    }

    pub fn with_fuel(mut self, fuel: usize) -> Self {
        self.ctx = EvalContext::new()
            .with_shared_state_domain(self.dom.clone())
            .with_fuel(fuel);
        self
    }

    pub fn dom(&self) -> &FiniteDomain<S> {
        &self.dom
    }

    pub fn ctx(&self) -> &EvalContext<S> {
        &self.ctx
    }

    pub fn leaf(
        &self,
        group: &str,
        label: &str,
        triple: HoareTriple<S>,
    ) -> Result<ProofNode<S>, ProofError> {
        let report = check_triple(&triple, &self.dom, &self.ctx)?.erase();
        Ok(ProofNode::Leaf {
            group: group.into(),
            label: label.into(),
            triple,
            report,
        })
    }

    pub fn implication(
        &self,
        group: &str,
        label: &str,
        binders: &Binders,
        hyp: &Pred<S>,
        concl: &Pred<S>,
    ) -> ImplProof<S> {
        let report = check_implication_over(binders, hyp, concl, &self.dom).erase();
        ImplProof::Checked {
            group: group.into(),
            label: label.into(),
            binders: binders.clone(),
            hyp: hyp.clone(),
            concl: concl.clone(),
            report,
        }
    }

    pub fn post_implication(
        &self,
        group: &str,
        label: &str,
        binders: &Binders,
        hyp: &PostCond<S>,
        concl: &PostCond<S>,
        values: &FiniteDomain<Value>,
    ) -> PostImplProof<S> {
        let report = check_post_implication(binders, hyp, concl, values, &self.dom).erase();
        PostImplProof::Checked {
            group: group.into(),
            label: label.into(),
            binders: binders.clone(),
            hyp: hyp.clone(),
            concl: concl.clone(),
            values: values.clone(),
            report,
        }
    }

    pub fn bind(&self, var: &str, left: ProofNode<S>, right: ProofNode<S>) -> Result<ProofNode<S>, ProofError> {
        let l = compose(&left)?;
        let r = compose(&right)?;
        let values = binder_extension("Bind", &l.binders, &r.binders, var)?;
        let cover = check_value_cover(&l.binders, &l.pre, &l.prog, &values, &self.dom, &self.ctx)?.erase();
        Ok(ProofNode::Bind {
            var: var.into(),
            left: Box::new(left),
            right: Box::new(right),
            cover,
        })
    }

    pub fn conseq(
        &self,
        pre: ImplProof<S>,
        child: ProofNode<S>,
        post: PostImplProof<S>,
    ) -> Result<ProofNode<S>, ProofError> {
        let (_, p1, _) = compose_impl(&pre)?;
        let (_, _, _, needed) = compose_post_impl(&post)?;
        let c = compose(&child)?;
        let mut covers: Vec<(FiniteDomain<Value>, CheckReport<String>)> = Vec::new();
        for values in needed {
            if covers.iter().any(|(d, _)| *d == values) {
                continue;
            }
            let r = check_value_cover(&c.binders, &p1, &c.prog, &values, &self.dom, &self.ctx)?.erase();
            covers.push((values, r));
        }
        Ok(ProofNode::Conseq {
            pre,
            child: Box::new(child),
            post,
            covers,
        })
    }

    /// Strengthens the precondition only.
    pub fn strengthen(&self, pre: ImplProof<S>, child: ProofNode<S>) -> Result<ProofNode<S>, ProofError> {
        let c = compose(&child)?;
        let post = PostImplProof::Weaken {
            binders: c.binders.clone(),
            hyp: c.post.clone(),
            concl: c.post.clone(),
        };
        self.conseq(pre, child, post)
    }

    /// Weakens the postcondition only.
    pub fn weaken(&self, child: ProofNode<S>, post: PostImplProof<S>) -> Result<ProofNode<S>, ProofError> {
        let c = compose(&child)?;
        let pre = ImplProof::Weaken {
            binders: c.binders.clone(),
            hyp: c.pre.clone(),
            concl: c.pre.clone(),
        };
        self.conseq(pre, child, post)
    }

    pub fn repeat_break(
        &self,
        arg_var: &str,
        body: ProgFamily<S>,
        cont: ProofNode<S>,
        brk: ProofNode<S>,
    ) -> Result<ProofNode<S>, ProofError> {
        let c = compose(&cont)?;
        let values = c
            .binders
            .get(arg_var)
            .ok_or_else(|| mismatch("RepeatBreak", format!("`{arg_var}` is not bound by the premises")))?
            .clone();
        let cover = check_value_cover(&c.binders, &c.pre, &c.prog, &values, &self.dom, &self.ctx)?.erase();
        Ok(ProofNode::RepeatBreak {
            arg_var: arg_var.into(),
            body,
            cont: Box::new(cont),
            brk: Box::new(brk),
            cover,
        })
    }

    #[allow(clippy::too_many_arguments)]
    pub fn range_iter(
        &self,
        index_var: &str,
        acc_var: &str,
        lo: ValueExpr,
        hi: ValueExpr,
        init: ValueExpr,
        inv: Pred<S>,
        body: ProgFamily<S>,
        cont: ProofNode<S>,
        brk: ProofNode<S>,
    ) -> Result<ProofNode<S>, ProofError> {
        let c = compose(&cont)?;
        let values = c
            .binders
            .get(acc_var)
            .ok_or_else(|| mismatch("RangeIter", format!("`{acc_var}` is not bound by the premises")))?
            .clone();
        let cover = check_value_cover(&c.binders, &c.pre, &c.prog, &values, &self.dom, &self.ctx)?.erase();
        Ok(ProofNode::RangeIter(Box::new(RangeIterRule {
            index_var: index_var.into(),
            acc_var: acc_var.into(),
            lo,
            hi,
            init,
            inv,
            body,
            cont,
            brk,
            cover,
        })))
    }

    #[allow(clippy::too_many_arguments)]
    pub fn fix(
        &self,
        label: &str,
        arg_var: &str,
        arg_dom: FiniteDomain<Value>,
        body: Functional<S>,
        pre: Pred<S>,
        post: PostCond<S>,
        values: &FiniteDomain<Value>,
    ) -> Result<ProofNode<S>, ProofError> {
        let report = fix_rule_check(&body, arg_var, &pre, &post, &arg_dom, values, &self.dom, &self.ctx)?;
        Ok(ProofNode::Fix {
            label: label.into(),
            arg_var: arg_var.into(),
            arg_dom,
            body,
            pre,
            post,
            report,
        })
    }

    pub fn equiv(&self, child: ProofNode<S>, target: ProgFamily<S>) -> Result<ProofNode<S>, ProofError> {
        let c = compose(&child)?;
        let report = equiv_check_family(&c.binders, &c.prog, &target, &self.dom, &self.ctx)?;
        Ok(ProofNode::Equiv {
            child: Box::new(child),
            target,
            report,
        })
    }

    pub fn update(
        &self,
        binders: &Binders,
        pre: &Pred<S>,
        label: &str,
        rel: impl Fn(&Env, &S, &S) -> bool + 'static,
    ) -> ProofNode<S> {
        ProofNode::Update {
            binders: binders.clone(),
            pre: pre.clone(),
            label: label.into(),
            rel: Rc::new(rel),
            states: self.dom.clone(),
        }
    }

    pub fn step(
        &self,
        binders: &Binders,
        pre: &Pred<S>,
        label: &str,
        step: impl Fn(&Env, &S) -> Vec<(Value, S)> + 'static,
    ) -> ProofNode<S> {
        ProofNode::Step {
            binders: binders.clone(),
            pre: pre.clone(),
            label: label.into(),
            step: Rc::new(step),
            states: self.dom.clone(),
        }
    }

    /// Re-checks a composed conclusion by enumeration.
    pub fn recheck(&self, t: &HoareTriple<S>) -> Result<CheckReport<String>, EvalError> {
        Ok(check_triple(t, &self.dom, &self.ctx)?.erase())
    }
}

/// Whether any label of `t` mentions `var`.
pub fn triple_mentions<S: State>(t: &HoareTriple<S>, var: &str) -> bool {
    t.pre.mentions(var) || t.post.mentions(var) || mentions_var(t.prog.label(), var)
}
