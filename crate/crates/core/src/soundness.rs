//! Randomized soundness suite for the twelve Hoare rules: whenever
//! `compose` accepts a node built from checked premises, the conclusion is
//! re-checked by enumeration.

use std::collections::BTreeSet;
use std::rc::Rc;

use crate::fixpoint::{break_part, continue_part, lfix_rc};
use crate::gen::{reachable, Gen, Outcomes};
use crate::hoare::{
    break_family, compose, continue_family, Binders, HoareTriple, PostCond, Pred, ProgFamily,
    ProofError, ProofNode, Prover, ValueExpr,
};
use crate::kernel::{Env, Functional, Handle, Prog, Value};

pub const RULES: [&str; 12] = [
    "Bind",
    "Ret",
    "Choice",
    "Assume",
    "Any",
    "Update",
    "Step",
    "Conseq",
    "PreEx",
    "Conj",
    "Fix",
    "RepeatBreak",
];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleOutcome {
    pub rule: &'static str,
    /// Instances where `compose` returned a conclusion.
    pub accepted: usize,
    /// Instances where some premise failed or the schema did not match.
    pub rejected: usize,
    /// Accepted instances whose conclusion does not hold.
    pub failures: Vec<String>,
    /// Accepted instances whose re-check was inconclusive.
    pub inconclusive: usize,
}

const GROUP: &str = "random";

type Built = Result<(Prover<u8>, ProofNode<u8>), ProofError>;

/// Runs `rule` until `instances` are accepted (or ten times as many
/// attempts were made).
pub fn rule_soundness(rule: &'static str, seed: u64, instances: usize) -> RuleOutcome {
    let index = RULES.iter().position(|r| *r == rule).expect("known rule") as u64;
    let mut out = RuleOutcome { rule, accepted: 0, rejected: 0, failures: Vec::new(), inconclusive: 0 };
    let mut attempt = 0u64;
    while out.accepted < instances && attempt < 10 * instances as u64 {
        let mut g = Gen::new(seed.wrapping_mul(0x9E37_79B9).wrapping_add(index << 32).wrapping_add(attempt));
        attempt += 1;
        let built = build(rule, &mut g);
        let Ok((prover, node)) = built else {
            out.rejected += 1;
            continue;
        };
        let Ok(t) = compose(&node) else {
            out.rejected += 1;
            continue;
        };
        out.accepted += 1;
        match prover.recheck(&t) {
            Ok(r) if r.holds() => {}
            Ok(r) if r.is_counterexample() => {
                out.failures.push(format!("{}: {}", t.label(), r.witness().cloned().unwrap_or_default()))
            }
            Ok(_) => out.inconclusive += 1,
            Err(e) => out.failures.push(format!("{}: {e}", t.label())),
        }
    }
    out
}

pub fn rule_soundness_suite(seed: u64, instances: usize) -> Vec<RuleOutcome> {
    RULES.iter().map(|r| rule_soundness(r, seed, instances)).collect()
}

fn build(rule: &str, g: &mut Gen) -> Built {
    match rule {
        "Bind" => bind(g),
        "Ret" => ret(g),
        "Choice" => choice(g),
        "Assume" => assume(g),
        "Any" => any(g),
        "Update" => update(g),
        "Step" => step(g),
        "Conseq" => conseq(g),
        "PreEx" => pre_ex(g),
        "Conj" => conj(g),
        "Fix" => fix(g),
        _ => repeat_break(g),
    }
}

fn prover(g: &Gen) -> Prover<u8> {
    Prover::new(g.state_domain())
}

/// A postcondition that usually covers `must` and sometimes is random.
fn post_for(g: &mut Gen, var: &str, must: &Outcomes) -> PostCond<u8> {
    if g.coin(0.8) {
        g.post_covering(var, must)
    } else {
        let set = g.outcome_set(0.5);
        g.post_of(var, set)
    }
}

fn ret(g: &mut Gen) -> Built {
    let set = g.outcome_set(0.5);
    let post = g.post_of("r", set);
    let node = if g.coin(0.5) {
        ProofNode::Ret { binders: Binders::none(), value: ValueExpr::constant(g.value()), post }
    } else {
        ProofNode::Ret { binders: Binders::one("x", g.value_domain()), value: ValueExpr::var("x"), post }
    };
    Ok((prover(g), node))
}

fn assume(g: &mut Gen) -> Built {
    let (pre, guard) = (g.pred(), g.pred());
    Ok((prover(g), ProofNode::Assume { binders: Binders::none(), pre, guard }))
}

fn any(g: &mut Gen) -> Built {
    let pre = g.pred();
    let values = crate::kernel::FiniteDomain::new(g.value_set().into_iter().map(Value::Int));
    Ok((prover(g), ProofNode::Any { binders: Binders::none(), pre, var: "r".into(), values }))
}

fn update(g: &mut Gen) -> Built {
    let p = prover(g);
    let pre = g.pred();
    let rel = g.state_relation();
    let label = g.fresh("U");
    let node = p.update(&Binders::none(), &pre, &label, move |_, a, b| rel.contains(&(*a, *b)));
    Ok((p, node))
}

fn step(g: &mut Gen) -> Built {
    let p = prover(g);
    let pre = g.pred();
    let table = g.step_table();
    let label = g.fresh("T");
    let node = p.step(&Binders::none(), &pre, &label, move |_, s| table[*s as usize].iter().cloned().collect());
    Ok((p, node))
}

fn choice(g: &mut Gen) -> Built {
    let p = prover(g);
    let pre = g.pred();
    let (f, h) = (g.prog(2), g.prog(2));
    let mut must = reachable(&f, &pre, &Env::new(), p.dom());
    must.extend(reachable(&h, &pre, &Env::new(), p.dom()));
    let post = post_for(g, "r", &must);
    let (lf, lh) = (g.fresh("f"), g.fresh("g"));
    let left = p.leaf(GROUP, &lf, HoareTriple::closed(pre.clone(), ProgFamily::constant(lf.clone(), f), post.clone()))?;
    let right = p.leaf(GROUP, &lh, HoareTriple::closed(pre, ProgFamily::constant(lh.clone(), h), post))?;
    Ok((p, ProofNode::Choice { left: Box::new(left), right: Box::new(right) }))
}

fn conj(g: &mut Gen) -> Built {
    let p = prover(g);
    let pre = g.pred();
    let f = g.prog(2);
    let must = reachable(&f, &pre, &Env::new(), p.dom());
    let (q1, q2) = (post_for(g, "r", &must), post_for(g, "r", &must));
    let name = g.fresh("f");
    let fam = ProgFamily::constant(name.clone(), f);
    let left = p.leaf(GROUP, &name, HoareTriple::closed(pre.clone(), fam.clone(), q1))?;
    let right = p.leaf(GROUP, &name, HoareTriple::closed(pre, fam, q2))?;
    Ok((p, ProofNode::Conj { left: Box::new(left), right: Box::new(right) }))
}

fn conseq(g: &mut Gen) -> Built {
    let p = prover(g);
    let strong: BTreeSet<u8> = g.state_set();
    let weak: BTreeSet<u8> = if g.coin(0.8) {
        strong.union(&g.state_set()).cloned().collect()
    } else {
        g.state_set()
    };
    let (p1, p2) = (g.pred_of(strong), g.pred_of(weak));
    let f = g.prog(2);
    let must = reachable(&f, &p2, &Env::new(), p.dom());
    let q2_set: Outcomes = {
        let mut s = g.outcome_set(0.2);
        s.extend(must);
        s
    };
    let q1_set: Outcomes = if g.coin(0.8) {
        q2_set.union(&g.outcome_set(0.3)).cloned().collect()
    } else {
        g.outcome_set(0.5)
    };
    let (q2, q1) = (g.post_of("r", q2_set), g.post_of("r", q1_set));
    let name = g.fresh("f");
    let child = p.leaf(GROUP, &name, HoareTriple::closed(p2.clone(), ProgFamily::constant(name.clone(), f), q2.clone()))?;
    let pre = p.implication(GROUP, "P1 → P2", &Binders::none(), &p1, &p2);
    let post = p.post_implication(GROUP, "Q2 → Q1", &Binders::none(), &q2, &q1, &g.value_domain());
    let node = p.conseq(pre, child, post)?;
    Ok((p, node))
}

fn bind(g: &mut Gen) -> Built {
    let p = prover(g);
    let values = g.value_domain();
    let pre = g.pred();
    let f = g.prog(2);
    let must = reachable(&f, &pre, &Env::new(), p.dom());
    let qx = post_for(g, "x", &must);
    let lf = g.fresh("f");
    let left = p.leaf(GROUP, &lf, HoareTriple::closed(pre, ProgFamily::constant(lf.clone(), f), qx.clone()))?;
    let table: Vec<Prog<u8>> = (0..g.value_count()).map(|_| g.prog(2)).collect();
    let mid = qx.as_pred();
    let mut must = BTreeSet::new();
    for (x, h) in table.iter().enumerate() {
        let env: Env = [("x".to_string(), Value::Int(x as i64))].into_iter().collect();
        must.extend(reachable(h, &mid, &env, p.dom()));
    }
    let post = post_for(g, "r", &must);
    let lg = format!("{}(x)", g.fresh("g"));
    let prog = ProgFamily::new(lg.clone(), move |env| table[env["x"].expect_int() as usize].clone());
    let right = p.leaf(GROUP, &lg, HoareTriple::new(Binders::one("x", values), mid, prog, post))?;
    let node = p.bind("x", left, right)?;
    Ok((p, node))
}

fn pre_ex(g: &mut Gen) -> Built {
    let p = prover(g);
    let values = g.value_domain();
    let pairs: BTreeSet<(i64, u8)> = g.outcome_set(0.4).into_iter().map(|(v, s)| (v.expect_int(), s)).collect();
    let label = format!("(k, s) ∈ {}", g.fresh("P"));
    let ghost = pairs.clone();
    let pre = Pred::new(label, move |env: &Env, s: &u8| ghost.contains(&(env["k"].expect_int(), *s)));
    let f = g.prog(2);
    let states: BTreeSet<u8> = pairs.iter().map(|(_, s)| *s).collect();
    let some_k = g.pred_of(states);
    let must = reachable(&f, &some_k, &Env::new(), p.dom());
    let post = post_for(g, "r", &must);
    let name = g.fresh("f");
    let child = p.leaf(GROUP, &name, HoareTriple::new(Binders::one("k", values), pre, ProgFamily::constant(name.clone(), f), post))?;
    Ok((p, ProofNode::PreEx { var: "k".into(), child: Box::new(child) }))
}

/// `F(W)(a) = choice(base(a), x ← W(a');; k_a(x))`, with the recursive
/// branch present for most arguments.
fn fix(g: &mut Gen) -> Built {
    let p = prover(g);
    let values = g.value_domain();
    let n = g.value_count();
    let cases: Vec<(Prog<u8>, Option<(i64, Rc<dyn Fn(&Value) -> Prog<u8>>)>)> = (0..n)
        .map(|_| {
            let base = g.prog(1);
            let rec = if g.coin(0.7) { Some((g.int(), g.kleisli(1))) } else { None };
            (base, rec)
        })
        .collect();
    let body: Functional<u8> = Rc::new(move |w: &Handle<u8>, a: &Value| {
        let (base, rec) = &cases[a.expect_int() as usize];
        match rec {
            Some((next, k)) => {
                let k = k.clone();
                Prog::choice(base.clone(), w(&Value::Int(*next)).then("k_a", move |x| k(x)))
            }
            None => base.clone(),
        }
    });
    let pre_pairs: BTreeSet<(i64, u8)> = if g.coin(0.5) {
        values.iter().flat_map(|a| p.dom().iter().map(move |s| (a.expect_int(), *s))).collect()
    } else {
        g.outcome_set(0.6).into_iter().map(|(v, s)| (v.expect_int(), s)).collect()
    };
    let pre_label = format!("(a, s) ∈ {}", g.fresh("P"));
    let pp = pre_pairs.clone();
    let pre = Pred::new(pre_label, move |env: &Env, s: &u8| pp.contains(&(env["a"].expect_int(), *s)));
    let w = lfix_rc("F", body.clone());
    let mut post_set: BTreeSet<(i64, Value, u8)> = BTreeSet::new();
    for a in values.iter() {
        let env: Env = [("a".to_string(), a.clone())].into_iter().collect();
        for (v, s) in reachable(&w(a), &pre, &env, p.dom()) {
            post_set.insert((a.expect_int(), v, s));
        }
        for (v, s) in g.outcome_set(0.15) {
            post_set.insert((a.expect_int(), v, s));
        }
    }
    if g.coin(0.1) {
        if let Some(first) = post_set.iter().next().cloned() {
            post_set.remove(&first);
        }
    }
    let post_label = format!("(a, r, s) ∈ {}", g.fresh("Q"));
    let post = PostCond::new("r", post_label, move |env, v, s| post_set.contains(&(env["a"].expect_int(), v.clone(), *s)));
    let node = p.fix("F", "a", values.clone(), body, pre, post, &values)?;
    Ok((p, node))
}

fn repeat_break(g: &mut Gen) -> Built {
    let p = prover(g);
    let values = g.value_domain();
    let bodies: Vec<Prog<u8>> = (0..g.value_count()).map(|_| g.loop_body(1)).collect();
    let env_at = |a: i64| -> Env { [("a".to_string(), Value::Int(a))].into_iter().collect() };
    let mut inv: BTreeSet<(i64, u8)> = g.outcome_set(0.3).into_iter().map(|(v, s)| (v.expect_int(), s)).collect();
    if g.coin(0.85) {
        loop {
            let mut grown = inv.clone();
            for &(a, s) in &inv {
                let at = g.pred_of([s].into_iter().collect());
                for (v, s2) in reachable(&continue_part(bodies[a as usize].clone()), &at, &env_at(a), p.dom()) {
                    grown.insert((v.expect_int(), s2));
                }
            }
            if grown == inv {
                break;
            }
            inv = grown;
        }
    }
    let inv_label = format!("(a, s) ∈ {}", g.fresh("I"));
    let inv_set = inv.clone();
    let inv_pred = Pred::new(inv_label, move |env: &Env, s: &u8| inv_set.contains(&(env["a"].expect_int(), *s)));
    let mut must = BTreeSet::new();
    for (a, b) in bodies.iter().enumerate() {
        must.extend(reachable(&break_part(b.clone()), &inv_pred, &env_at(a as i64), p.dom()));
    }
    let q = post_for(g, "r", &must);
    let name = format!("{}(a)", g.fresh("body"));
    let body = ProgFamily::new(name, move |env| bodies[env["a"].expect_int() as usize].clone());
    let by_a = Binders::one("a", values);
    let cont = p.leaf(
        GROUP,
        "continue",
        HoareTriple::new(by_a.clone(), inv_pred.clone(), continue_family(&body), PostCond::bind_var("a", &inv_pred)),
    )?;
    let brk = p.leaf(GROUP, "break", HoareTriple::new(by_a, inv_pred, break_family(&body), q))?;
    let node = p.repeat_break("a", body, cont, brk)?;
    Ok((p, node))
}
