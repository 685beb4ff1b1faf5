//! The stateless examples and the hailstone and `ret` basic blocks.

use std::rc::Rc;

use relmonad::casestudies::small::{hailstone_continue_triple, small_examples, SmallExample};
use relmonad::hoare::{check_triple, vc_gen, Binders, HoareTriple, PostCond, Pred, ProgFamily};
use relmonad::kernel::{eval, Env, EvalContext, FiniteDomain, Prog, Value};

use super::{single_check, within_cap, TargetInfo};
use crate::{CliError, Command, Leaf, Report, RunManifest};

/// Largest parameter range a check enumerates by default.
const RANGE_CAP: usize = 100_000;

const BLOCKS: [(&str, &str); 3] = [
    ("hailstone-positivity", "{x ≥ 1} y ← hailstone_body(x);; continue_case(y) {y ≥ 1} over x ∈ [lo, hi]"),
    ("hailstone-continue", "the same basic block, for VC generation"),
    ("ret-example", "{x ≥ 0} ret(x+1) {r ≥ 1} over x ∈ [lo, hi]"),
];

pub fn infos() -> Vec<TargetInfo> {
    let mut out: Vec<TargetInfo> = small_examples()
        .iter()
        .map(|ex| TargetInfo {
            name: ex.name.into(),
            commands: vec!["run", "check"],
            params: vec![ex.param, "lo", "hi", "pre", "post"],
            summary: format!(
                "{}({}); default {} = {}, claim checked over [{}, {}]",
                ex.name, ex.param, ex.param, ex.default, ex.claim_range.0, ex.claim_range.1
            ),
        })
        .collect();
    for (name, summary) in BLOCKS {
        out.push(TargetInfo {
            name: name.into(),
            commands: vec!["check", "vcgen"],
            params: vec!["lo", "hi", "discharge"],
            summary: summary.into(),
        });
    }
    out
}

pub fn dispatch(cmd: Command, m: &RunManifest) -> Result<Report, CliError> {
    if let Some(ex) = small_examples().into_iter().find(|e| e.name == m.target) {
        return match cmd {
            Command::Run => run(&ex, m),
            _ => check(&ex, m),
        };
    }
    let (lo, hi) = range(m, if m.target == "ret-example" { (0, 10) } else { (1, 20) })?;
    let triple = if m.target == "ret-example" { ret_example(lo, hi) } else { hailstone_continue_triple(lo, hi) };
    let ctx = EvalContext::new().with_fuel(m.resolved_fuel()?);
    match cmd {
        Command::Vcgen => vcgen(m, &triple),
        _ => {
            let r = check_triple(&triple, &FiniteDomain::unit(), &ctx)?.erase();
            Ok(single_check(&m.target, &triple.label(), &r, ctx.stats().fix_iterations))
        }
    }
}

fn range(m: &RunManifest, default: (i64, i64)) -> Result<(i64, i64), CliError> {
    let lo = m.int_param("lo", default.0)?;
    let hi = m.int_param("hi", default.1)?;
    if hi < lo {
        return Err(CliError::InvalidParameter { name: "hi".into(), reason: format!("{hi} is below lo = {lo}") });
    }
    within_cap((hi - lo) as u128 + 1, m, RANGE_CAP)?;
    Ok((lo, hi))
}

fn run(ex: &SmallExample, m: &RunManifest) -> Result<Report, CliError> {
    for p in ["lo", "hi", "pre", "post"] {
        if m.get(p).is_some() {
            return Err(CliError::InvalidParameter { name: p.into(), reason: "only used by `check`".into() });
        }
    }
    let v = m.int_param(ex.param, ex.default)?;
    let ctx = EvalContext::new().with_fuel(m.resolved_fuel()?);
    let e = eval(&(ex.program)(v), &(), &ctx)?;
    let mut report = Report::new(ex.name);
    report.conclusion = Some(format!("{}({} = {v})", ex.name, ex.param));
    report.verdict = if e.complete { "complete" } else { "incomplete" }.into();
    report.outcomes = Some(e.values().iter().map(|v| v.to_string()).collect());
    report.stats.states = 1;
    report.stats.iterations = ctx.stats().fix_iterations;
    Ok(report)
}

type PurePred = Rc<dyn Fn(i64) -> bool>;
type ResultPred = Rc<dyn Fn(i64, i64) -> bool>;

const PRE_NAMES: [&str; 6] = ["claim", "true", "nonneg", "positive", "even", "odd"];
const POST_NAMES: [&str; 11] = [
    "claim", "true", "false", "nonneg", "positive", "zero", "one", "even", "odd", "le-param", "eq-param",
];

fn unknown(name: &str, known: &[&str]) -> CliError {
    CliError::UnknownPredicate { name: name.into(), known: known.join(", ") }
}

/// A named precondition on the parameter `p`.
fn pre_named(name: &str, p: &str) -> Result<(String, PurePred), CliError> {
    let (label, f): (String, PurePred) = match name {
        "nonneg" => (format!("{p} ≥ 0"), Rc::new(|x| x >= 0)),
        "positive" => (format!("{p} ≥ 1"), Rc::new(|x| x >= 1)),
        "even" => (format!("even({p})"), Rc::new(|x| x % 2 == 0)),
        "odd" => (format!("odd({p})"), Rc::new(|x| x % 2 != 0)),
        _ => return Err(unknown(name, &PRE_NAMES)),
    };
    Ok((label, f))
}

/// A named postcondition on the result `r` and the parameter `p`.
fn post_named(name: &str, p: &str) -> Result<(String, ResultPred), CliError> {
    let (label, f): (String, ResultPred) = match name {
        "true" => ("true".into(), Rc::new(|_, _| true)),
        "false" => ("false".into(), Rc::new(|_, _| false)),
        "nonneg" => ("r ≥ 0".into(), Rc::new(|r, _| r >= 0)),
        "positive" => ("r ≥ 1".into(), Rc::new(|r, _| r >= 1)),
        "zero" => ("r = 0".into(), Rc::new(|r, _| r == 0)),
        "one" => ("r = 1".into(), Rc::new(|r, _| r == 1)),
        "even" => ("even(r)".into(), Rc::new(|r, _| r % 2 == 0)),
        "odd" => ("odd(r)".into(), Rc::new(|r, _| r % 2 != 0)),
        "le-param" => (format!("r ≤ {p}"), Rc::new(|r, x| r <= x)),
        "eq-param" => (format!("r = {p}"), Rc::new(|r, x| r == x)),
        _ => return Err(unknown(name, &POST_NAMES)),
    };
    Ok((label, f))
}

/// The registered claim, with `pre`/`post` replaced by registry entries
/// when given.
fn claim(ex: &SmallExample, m: &RunManifest) -> Result<HoareTriple<()>, CliError> {
    let (lo, hi) = range(m, ex.claim_range)?;
    let base = (ex.claim)(lo, hi);
    let param = ex.param.to_string();
    let int_of = move |env: &Env| env[&param].expect_int();
    let pre = match m.get("pre").unwrap_or("claim") {
        "claim" => base.pre.clone(),
        "true" => Pred::truth(),
        name => {
            let (label, f) = pre_named(name, ex.param)?;
            let at = int_of.clone();
            Pred::pure(label, move |env| f(at(env)))
        }
    };
    let post = match m.get("post").unwrap_or("claim") {
        "claim" => base.post.clone(),
        name => {
            let (label, f) = post_named(name, ex.param)?;
            let at = int_of.clone();
            PostCond::value("r", label, move |env, v: &Value| v.as_int().is_some_and(|r| f(r, at(env))))
        }
    };
    Ok(HoareTriple::new(base.binders.clone(), pre, base.prog.clone(), post))
}

fn check(ex: &SmallExample, m: &RunManifest) -> Result<Report, CliError> {
    if m.get(ex.param).is_some() {
        return Err(CliError::InvalidParameter {
            name: ex.param.into(),
            reason: "`check` ranges over [lo, hi]; use `run` for one value".into(),
        });
    }
    let triple = claim(ex, m)?;
    let ctx = EvalContext::new().with_fuel(m.resolved_fuel()?);
    let r = check_triple(&triple, &FiniteDomain::unit(), &ctx)?.erase();
    Ok(single_check(ex.name, &triple.label(), &r, ctx.stats().fix_iterations))
}

/// `∀x ∈ [lo, hi], {x ≥ 0} ret(x+1) {r ≥ 1}`
fn ret_example(lo: i64, hi: i64) -> HoareTriple<()> {
    HoareTriple::new(
        Binders::one("x", FiniteDomain::ints(lo..=hi)),
        Pred::pure("x ≥ 0", |env| env["x"].expect_int() >= 0),
        ProgFamily::new("ret(x+1)", |env| {
            let x = env["x"].expect_int();
            Prog::ret_as(x + 1, "x+1")
        }),
        PostCond::value("r", "r ≥ 1", |_, v| v.expect_int() >= 1),
    )
}

fn vcgen(m: &RunManifest, triple: &HoareTriple<()>) -> Result<Report, CliError> {
    let discharge = m.bool_param("discharge", true)?;
    let vcs = vc_gen(triple, &FiniteDomain::unit())?;
    let mut report = Report::new(&m.target);
    report.conclusion = Some(triple.label());
    for vc in &vcs {
        if discharge {
            let r = vc.discharge(&FiniteDomain::unit());
            report.stats.states += r.states_checked;
            report.leaves.push(Leaf::from_report("vc", &vc.render(), &r));
        } else {
            report.leaves.push(Leaf::new("vc", &vc.render(), "pending", None));
        }
    }
    if discharge {
        report.summarize();
    } else {
        report.verdict = "generated".into();
    }
    Ok(report)
}
