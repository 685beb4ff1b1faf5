//! Property checks shared by the proptest suite and the acceptance target.
//! Each returns `Err` with a description of the first failure.

#![allow(dead_code)]

use std::collections::BTreeSet;
use std::rc::Rc;
use std::sync::atomic::{AtomicUsize, Ordering};

use relmonad::casestudies::dfs::{dfs, dfs_state_domain, DfsState, PreGraph, DEFAULT_STATE_CAP};
use relmonad::casestudies::kmp::KmpContext;
use relmonad::errmonad::{check_triple_err, denote_err, err_bind, ErrProg};
use relmonad::fixpoint::{continue_, range_iter_break, repeat_break, RangeBody};
use relmonad::gen::{reachable, Gen};
use relmonad::hoare::{check_triple, equiv_check, normalize, vc_gen, HoareTriple, Pred, ProgFamily};
use relmonad::kernel::{denote, eval, Continuation, Denotation, Env, EvalContext, Prog, Value};

/// Chain-inclusion violations seen by every context created here.
pub static CHAIN_VIOLATIONS: AtomicUsize = AtomicUsize::new(0);

fn ctx_for(g: &Gen) -> EvalContext<u8> {
    EvalContext::new().with_state_domain(g.state_domain())
}

fn record<S: relmonad::kernel::State>(ctx: &EvalContext<S>) {
    CHAIN_VIOLATIONS.fetch_add(ctx.stats().chain_violations, Ordering::Relaxed);
}

fn den(p: &Prog<u8>, g: &Gen) -> Denotation<u8> {
    let ctx = ctx_for(g);
    let d = denote(p, &g.state_domain(), &ctx).expect("generated programs evaluate");
    record(&ctx);
    d
}

fn same(what: &str, a: &Prog<u8>, b: &Prog<u8>, g: &Gen) -> Result<(), String> {
    let (da, db) = (den(a, g), den(b, g));
    match da.first_difference(&db) {
        None => Ok(()),
        Some(w) => Err(format!("{what}: {} vs {} differ at {w:?}", a.describe(), b.describe())),
    }
}

fn cont(f: &Rc<dyn Fn(&Value) -> Prog<u8>>, label: &str) -> Continuation<u8> {
    let f = f.clone();
    Continuation::new(label, move |v| f(v))
}

/// Left identity, right identity and associativity on one seed.
pub fn monad_laws(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let p = g.prog(3);
    let (f, k) = (g.kleisli(2), g.kleisli(2));
    let a = g.value();
    same("left identity", &Prog::bind(Prog::ret(a.clone()), cont(&f, "f")), &f(&a), &g)?;
    same("right identity", &Prog::bind(p.clone(), Continuation::ret()), &p, &g)?;
    let lhs = Prog::bind(Prog::bind(p.clone(), cont(&f, "f")), cont(&k, "k"));
    let (f2, k2) = (f.clone(), k.clone());
    let rhs = Prog::bind(p, Continuation::new("x ↦ f(x) >>= k", move |x| Prog::bind(f2(x), cont(&k2, "k"))));
    same("associativity", &lhs, &rhs, &g)
}

pub fn normalize_preserves(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let p = g.prog(4);
    same("normalize", &p, &normalize(&p), &g)
}

/// `check_triple` agrees with the reachable-outcome oracle.
pub fn checker_matches_oracle(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let p = g.prog(3);
    let pre_set = g.state_set();
    let pre = g.pred_of(pre_set);
    let post_set = if g.coin(0.5) {
        let must = reachable(&p, &pre, &Env::new(), &g.state_domain());
        let mut s = g.outcome_set(0.3);
        s.extend(must);
        s
    } else {
        g.outcome_set(0.6)
    };
    let post = g.post_of("r", post_set.clone());
    let t = HoareTriple::closed(pre.clone(), ProgFamily::constant("p", p.clone()), post);
    let ctx = ctx_for(&g);
    let r = check_triple(&t, &g.state_domain(), &ctx).map_err(|e| e.to_string())?;
    let expected = reachable(&p, &pre, &Env::new(), &g.state_domain()).is_subset(&post_set);
    if r.holds() != expected || r.is_counterexample() == expected {
        return Err(format!("checker says {:?}, oracle {expected} on {}", r.verdict_name(), p.describe()));
    }
    Ok(())
}

/// When every generated VC discharges, the triple holds, and conversely.
pub fn vcgen_agrees(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let p = g.prog(3);
    let pre = g.pred();
    let post = if g.coin(0.5) {
        let must = reachable(&p, &pre, &Env::new(), &g.state_domain());
        g.post_covering("r", &must)
    } else {
        let s = g.outcome_set(0.6);
        g.post_of("r", s)
    };
    let t = HoareTriple::closed(pre, ProgFamily::constant("p", p.clone()), post);
    let dom = g.state_domain();
    let vcs = vc_gen(&t, &dom).map_err(|e| e.to_string())?;
    let discharged = vcs.iter().all(|vc| vc.discharge(&dom).holds());
    let ctx = ctx_for(&g);
    let holds = check_triple(&t, &dom, &ctx).map_err(|e| e.to_string())?.holds();
    if discharged != holds {
        let goals: Vec<String> = vcs.iter().map(|v| v.render()).collect();
        return Err(format!("VCs {discharged}, triple {holds} for {}: {goals:?}", p.describe()));
    }
    Ok(())
}

fn tabulated(bodies: Vec<Prog<u8>>) -> impl Fn(&Value) -> Prog<u8> {
    move |a: &Value| match a.as_int() {
        Some(i) if (0..bodies.len() as i64).contains(&i) => bodies[i as usize].clone(),
        _ => Prog::fail(),
    }
}

/// `repeat_break` equals its one-step unrolling, and a stabilized loop
/// gives the same denotation under more fuel.
pub fn repeat_break_unrolls(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let bodies: Vec<Prog<u8>> = (0..g.value_count()).map(|_| g.loop_body(2)).collect();
    let body = Rc::new(tabulated(bodies));
    let b2 = body.clone();
    let w = repeat_break("W", move |a: &Value| b2(a));
    let a = g.value();
    let lhs = w(&a);
    let w2 = w.clone();
    let rhs = Prog::bind(
        body(&a),
        Continuation::new("match", move |x| match x {
            Value::Continue(next) => w2(next),
            Value::Break(b) => Prog::ret((**b).clone()),
            _ => Prog::fail(),
        }),
    );
    let (dl, dr) = (den(&lhs, &g), den(&rhs, &g));
    if !(dl.complete && dr.complete) {
        return Err(format!("loop did not stabilize: {}", lhs.describe()));
    }
    if let Some(d) = dl.first_difference(&dr) {
        return Err(format!("unrolling differs at {d:?}"));
    }
    let big = EvalContext::new().with_state_domain(g.state_domain()).with_fuel(5000);
    let db = denote(&lhs, &g.state_domain(), &big).map_err(|e| e.to_string())?;
    record(&big);
    if db != dl {
        return Err("more fuel changed a stabilized denotation".into());
    }
    Ok(())
}

/// A range loop whose body never breaks is the left fold of the body.
pub fn range_is_fold(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let n = (seed % 4) as i64;
    let steps: Vec<Continuation<u8>> = (0..n).map(|_| g.continuation(1)).collect();
    let init = g.value();
    let st = steps.clone();
    let body: RangeBody<u8> = Rc::new(move |i, acc| st[i as usize].apply(acc).then("continue", |v| continue_(v.clone())));
    let lhs = range_iter_break(0, n, body, init.clone());
    let mut fold = Prog::ret(init);
    for k in steps {
        fold = Prog::bind(fold, k);
    }
    let rhs = fold.then("continue", |v| continue_(v.clone()));
    same("range fold", &lhs, &rhs, &g)
}

/// Erasure, error monotonicity of bind, and `check_triple_err` against the
/// kernel checker.
pub fn errmonad_invariants(seed: u64) -> Result<(), String> {
    let mut g = Gen::new(seed);
    let dom = g.state_domain();
    let ctx = ctx_for(&g);
    let c: ErrProg<u8> = g.err_prog(3);
    let dc = denote_err(&c, &dom, &ctx).map_err(|e| e.to_string())?;
    let dk = denote(&c.erase(), &dom, &ctx).map_err(|e| e.to_string())?;
    if dc.nrm != dk.table {
        return Err(format!("erasure differs for {}", c.describe()));
    }
    let table: Vec<ErrProg<u8>> = (0..g.value_count()).map(|_| g.err_prog(2)).collect();
    let t2 = table.clone();
    let b = err_bind(c.clone(), "f", move |v| match v.as_int() {
        Some(i) if (0..t2.len() as i64).contains(&i) => t2[i as usize].clone(),
        _ => relmonad::errmonad::err_assume("false", |_| false),
    });
    let db = denote_err(&b, &dom, &ctx).map_err(|e| e.to_string())?;
    if !dc.err.is_subset(&db.err) {
        return Err(format!("bind lost errors of {}", c.describe()));
    }
    // err(bind) = err(c) ∪ {s | some normal outcome lands in err(f(a))}
    let mut expect: BTreeSet<u8> = dc.err.clone();
    for (s, outs) in &dc.nrm {
        for (a, s2) in outs {
            let Some(i) = a.as_int().filter(|i| (0..table.len() as i64).contains(i)) else { continue };
            if denote_err(&table[i as usize], &dom, &ctx).map_err(|e| e.to_string())?.err.contains(s2) {
                expect.insert(*s);
            }
        }
    }
    if expect != db.err {
        return Err(format!("bind error set {:?}, expected {expect:?}", db.err));
    }
    let pre = g.pred();
    let any_post = g.outcome_set(0.7);
    let post = g.post_of("r", any_post);
    let re = check_triple_err(&pre, &c, &post, &dom, &ctx).map_err(|e| e.to_string())?;
    let kernel = HoareTriple::closed(pre.clone(), ProgFamily::constant("c", c.erase()), post.clone());
    let rk = check_triple(&kernel, &dom, &ctx).map_err(|e| e.to_string())?;
    let pre_err = dom.iter().any(|s| pre.holds(&Env::new(), s) && dc.err.contains(s));
    if re.holds() != (rk.holds() && !pre_err) {
        return Err(format!("check_triple_err {} vs kernel {} / error {pre_err}", re.verdict_name(), rk.verdict_name()));
    }
    record(&ctx);
    Ok(())
}

fn assume_of(p: &Pred<u8>) -> Prog<u8> {
    let p2 = p.clone();
    Prog::assume(p.label(), move |s| p2.holds(&Env::new(), s))
}

/// `x ← f;; assume p;; y ← g;; assume q;; h x y` and the form that first
/// returns `(x, y)`.
pub fn c1_c2(f: Prog<u8>, g: Prog<u8>, p: Pred<u8>, q: Pred<u8>, h: Rc<dyn Fn(i64, i64) -> Prog<u8>>) -> (Prog<u8>, Prog<u8>) {
    let (ap, aq) = (assume_of(&p), assume_of(&q));
    let (g1, aq1, h1) = (g.clone(), aq.clone(), h.clone());
    let c1 = f.clone().then("x ↦ …", move |x| {
        let x = x.expect_int();
        let (aq, h) = (aq1.clone(), h1.clone());
        ap.clone().seq(g1.clone().then("y ↦ …", move |y| aq.clone().seq(h(x, y.expect_int()))))
    });
    let ap = assume_of(&p);
    let block = f.then("x ↦ …", move |x| {
        let (x, aq) = (x.clone(), aq.clone());
        ap.clone().seq(g.clone().then("y ↦ …", move |y| aq.clone().seq(Prog::ret(Value::pair(x.clone(), y.clone())))))
    });
    let c2 = block.then("(x, y) ↦ h x y", move |xy| {
        let t = xy.as_tuple().expect("pair");
        h(t[0].expect_int(), t[1].expect_int())
    });
    (c1, c2)
}

/// The c1/c2 equivalence for random `f`, `g`, `h` over at most 3 states.
pub fn c1_c2_equiv(seed: u64) -> Result<(), String> {
    let gen = Gen::new(seed);
    let sizes = (gen.state_count().min(3), gen.value_count());
    let mut gen = Gen::with_sizes(seed ^ 0x5bd1e995, sizes.0, sizes.1);
    let (f, g) = (gen.prog(2), gen.prog(2));
    let (p, q) = (gen.pred(), gen.pred());
    let n = gen.value_count();
    let hs: Vec<Prog<u8>> = (0..n * n).map(|_| gen.prog(2)).collect();
    let h: Rc<dyn Fn(i64, i64) -> Prog<u8>> = Rc::new(move |x, y| hs[(x * n + y) as usize].clone());
    let (c1, c2) = c1_c2(f, g, p, q, h);
    let ctx = ctx_for(&gen);
    let r = equiv_check(&c1, &c2, &gen.state_domain(), &ctx).map_err(|e| e.to_string())?;
    record(&ctx);
    if !r.holds() {
        return Err(format!("c1 and c2 differ: {:?}", r.witness()));
    }
    Ok(())
}

/// Runs `dfs` from the empty state and compares every final visited set
/// with the closure oracle. Also rejects empty outcome sets.
pub fn dfs_matches_closure(g: &PreGraph, u: u32) -> Result<(), String> {
    let dom = dfs_state_domain(g, DEFAULT_STATE_CAP).map_err(|e| e.to_string())?;
    let ctx = EvalContext::new().with_state_domain(dom);
    let e = eval(&dfs(g, u), &DfsState::default(), &ctx).map_err(|e| e.to_string())?;
    record(&ctx);
    let expect = closure(g, u);
    if !e.complete || e.outcomes.is_empty() {
        return Err(format!("{g:?} from {u}: no complete result"));
    }
    match e.outcomes.iter().find(|(_, s)| s.visited != expect) {
        Some((_, s)) => Err(format!("{g:?} from {u}: visited {:?}, reach {expect:?}", s.visited)),
        None => Ok(()),
    }
}

/// Reflexive-transitive closure by Warshall's algorithm.
pub fn closure(g: &PreGraph, u: u32) -> BTreeSet<u32> {
    let vs: Vec<u32> = g.vertices().iter().copied().collect();
    let idx = |v: u32| vs.iter().position(|&w| w == v).unwrap();
    let n = vs.len();
    let mut m = vec![vec![false; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = true;
    }
    for (x, y) in g.edges() {
        m[idx(x)][idx(y)] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] && m[k][j] {
                    m[i][j] = true;
                }
            }
        }
    }
    (0..n).filter(|&j| m[idx(u)][j]).map(|j| vs[j]).collect()
}

/// A random graph on `n` vertices with edge density one in three.
pub fn random_graph(g: &mut Gen, n: u32) -> PreGraph {
    let mut edges = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if g.coin(0.3) {
                edges.push((x, y));
            }
        }
    }
    PreGraph::new(0..n, &edges).unwrap()
}

/// The KMP predicates restated over strings.
pub mod kmp_brute {
    use super::KmpContext;

    fn s(cs: &[char]) -> String {
        cs.iter().collect()
    }

    /// Characters of `l` at indices in `[a, b)`.
    fn window(l: &[char], a: i64, b: i64) -> String {
        l.iter().enumerate().filter(|(k, _)| a <= *k as i64 && (*k as i64) < b).map(|(_, c)| *c).collect()
    }

    fn prefix(c: &KmpContext, n: i64) -> String {
        s(&c.patn).chars().take(n.max(0) as usize).collect()
    }

    pub fn jrange(c: &KmpContext, j: i64) -> bool {
        j >= 0 && (j as usize) < c.next.len()
    }

    pub fn partial_match(c: &KmpContext, i: i64, j: i64) -> bool {
        (0..=i).contains(&j) && prefix(c, j) == window(&c.text, i - j, i)
    }

    pub fn presuffix(c: &KmpContext, a: i64, b: i64) -> bool {
        let (pa, pb) = (prefix(c, a), prefix(c, b));
        pa.len() <= pb.len() && pb[..pa.len()] == pa && pb[pb.len() - pa.len()..] == pa
    }

    pub fn proper_presuffix(c: &KmpContext, a: i64, b: i64) -> bool {
        a < b && presuffix(c, a, b)
    }

    pub fn presuffix_bound(c: &KmpContext, a: i64, b: i64) -> bool {
        !(0..b).any(|k| proper_presuffix(c, k, b) && !presuffix(c, k, a))
    }

    /// Each `next[i]` is the longest proper border of `patn[0..i+1]`.
    pub fn prefix_func(c: &KmpContext) -> bool {
        let p = s(&c.patn);
        c.next.iter().enumerate().all(|(i, &n)| {
            let w: String = p.chars().take(i + 1).collect();
            let longest = (0..w.len()).rev().find(|&k| w.starts_with(&w[..k]) && w.ends_with(&w[..k]));
            i < p.len() && longest == Some(n as usize)
        })
    }

    fn occurrences(c: &KmpContext) -> Vec<i64> {
        let (p, t) = (s(&c.patn), s(&c.text));
        (0..=t.len()).filter(|&k| t[k..].starts_with(&p)).map(|k| k as i64).collect()
    }

    pub fn no_occur(c: &KmpContext, i: i64) -> bool {
        occurrences(c).iter().all(|&k| k > i - c.patn.len() as i64)
    }

    pub fn first_occur(c: &KmpContext, i: i64) -> bool {
        s(&c.text).find(&s(&c.patn)).map(|k| k as i64) == Some(i)
    }

    pub fn partial_bound(c: &KmpContext, i: i64, j: i64) -> bool {
        (0..=i).filter(|&z| partial_match(c, i, z)).max().is_none_or(|z| z <= j)
    }

    pub fn presuffix_inv(c: &KmpContext, i: i64, j: i64) -> bool {
        let at = |l: &[char], k: i64| usize::try_from(k).ok().and_then(|k| l.get(k)).copied().unwrap_or(c.default);
        (1..=i + 1)
            .filter(|&k| partial_match(c, i + 1, k))
            .all(|k| presuffix(c, k - 1, j) && at(&c.patn, k - 1) == at(&c.text, i))
    }
}

/// Compares the ten predicates with `kmp_brute` over a grid of arguments,
/// for the context and for every same-length table perturbation.
pub fn kmp_predicates_agree(c: &KmpContext) -> Result<usize, String> {
    let mut compared = 0;
    let (lp, lt) = (c.patn.len() as i64, c.text.len() as i64);
    let mut check = |name: &str, args: String, mine: bool, theirs: bool| {
        compared += 1;
        if mine == theirs {
            Ok(())
        } else {
            Err(format!("{name}({args}) on {c:?}: library {mine}, brute force {theirs}"))
        }
    };
    for i in -1..=lt + 1 {
        check("no_occur", format!("{i}"), c.no_occur(i), kmp_brute::no_occur(c, i))?;
        check("first_occur", format!("{i}"), c.first_occur(i), kmp_brute::first_occur(c, i))?;
        for j in -1..=lp + 1 {
            let a = format!("{i}, {j}");
            check("partial_match", a.clone(), c.partial_match(i, j), kmp_brute::partial_match(c, i, j))?;
            check("partial_bound", a.clone(), c.partial_bound(i, j), kmp_brute::partial_bound(c, i, j))?;
            check("presuffix_inv", a, c.presuffix_inv(i, j), kmp_brute::presuffix_inv(c, i, j))?;
        }
    }
    for a in -1..=lp + 1 {
        check("jrange", format!("{a}"), c.jrange(a), kmp_brute::jrange(c, a))?;
        for b in -1..=lp + 1 {
            let args = format!("{a}, {b}");
            check("presuffix", args.clone(), c.presuffix(a, b), kmp_brute::presuffix(c, a, b))?;
            check("proper_presuffix", args.clone(), c.proper_presuffix(a, b), kmp_brute::proper_presuffix(c, a, b))?;
            check("presuffix_bound", args, c.presuffix_bound(a, b), kmp_brute::presuffix_bound(c, a, b))?;
        }
    }
    check("prefix_func", String::new(), c.prefix_func(), kmp_brute::prefix_func(c))?;
    for k in 0..c.next.len() {
        for v in 0..=k as i64 + 1 {
            let mut d = c.clone();
            d.next[k] = v;
            check("prefix_func", format!("next = {:?}", d.next), d.prefix_func(), kmp_brute::prefix_func(&d))?;
        }
    }
    Ok(compared)
}

/// Exact value set of a unit-state program.
pub fn values_of(p: &Prog<()>, fuel: usize) -> Result<(BTreeSet<Value>, bool), String> {
    let ctx = EvalContext::new().with_fuel(fuel);
    let e = eval(p, &(), &ctx).map_err(|e| e.to_string())?;
    record(&ctx);
    Ok((e.values(), e.complete))
}
