//! The two-stage correctness proof of the KMP match loop.
//!
//! Stage one is a set of leaves, each a basic-block triple or an
//! implication checked by enumeration and tagged with its logical group.
//! Stage two glues them with Conj, Conseq, Bind, Choice, the loop rules
//! and Equiv, ending at the real `match_loop`.

use super::kmp::preds::*;
use super::kmp::{context_domain, inner_body, match_body, match_loop, Ch, Ix, KmpContext};
use crate::hoare::{
    break_family, compose, continue_family, range_guard, Binders, HoareTriple, ImplProof, PostCond,
    PostImplProof, Pred, ProgFamily, ProofError, ProofNode, Prover, ValueExpr,
};
use crate::kernel::{FiniteDomain, Prog, Value};

pub const GROUP_RANGE: &str = "Group 1: range";
pub const GROUP_MATCH: &str = "Group 2: partial match";
pub const GROUP_BOUND: &str = "Group 3: partial bound";
pub const GROUP_POST: &str = "Group 4: post loop";
pub const GROUP_FRAME: &str = "frame";

/// What the proof ranges over.
pub struct KmpProofConfig {
    pub contexts: FiniteDomain<KmpContext>,
    pub max_patn: i64,
    pub max_text: i64,
    /// When false, the facts drawn from `prefix_func(next)` are checked
    /// without it, so a bad table shows up as a failing implication.
    pub trust_prefix_func: bool,
    pub fuel: Option<usize>,
}

impl KmpProofConfig {
    /// Every pattern of length `1..=max_patn` and text of length
    /// `0..=max_text` over `alphabet`, with oracle tables.
    pub fn bounded(alphabet: &[char], max_patn: usize, max_text: usize) -> Self {
        KmpProofConfig {
            contexts: context_domain(alphabet, max_patn, max_text),
            max_patn: max_patn as i64,
            max_text: max_text as i64,
            trust_prefix_func: true,
            fuel: None,
        }
    }

    /// A single given context, table included.
    pub fn single(ctx: KmpContext) -> Self {
        KmpProofConfig {
            max_patn: ctx.patn_len().max(ctx.next_len()),
            max_text: ctx.text_len(),
            contexts: FiniteDomain::new([ctx]),
            trust_prefix_func: false,
            fuel: None,
        }
    }
}

fn all(ps: &[&Pred<KmpContext>]) -> Pred<KmpContext> {
    Pred::all(ps)
}

fn weaken(b: &Binders, hyp: &Pred<KmpContext>, concl: &Pred<KmpContext>) -> ImplProof<KmpContext> {
    ImplProof::Weaken {
        binders: b.clone(),
        hyp: hyp.clone(),
        concl: concl.clone(),
    }
}

/// `hyp → lemma_hyp → concl`, the first step by dropping conjuncts.
fn via(b: &Binders, hyp: &Pred<KmpContext>, lemma_hyp: &Pred<KmpContext>, lemma: ImplProof<KmpContext>) -> ImplProof<KmpContext> {
    ImplProof::Chain(Box::new(weaken(b, hyp, lemma_hyp)), Box::new(lemma))
}

fn and_all(mut parts: Vec<ImplProof<KmpContext>>) -> ImplProof<KmpContext> {
    let first = parts.remove(0);
    parts
        .into_iter()
        .fold(first, |acc, p| ImplProof::And(Box::new(acc), Box::new(p)))
}

fn conj_all(mut nodes: Vec<ProofNode<KmpContext>>) -> ProofNode<KmpContext> {
    let first = nodes.remove(0);
    nodes.into_iter().fold(first, |acc, n| ProofNode::Conj {
        left: Box::new(acc),
        right: Box::new(n),
    })
}

fn post_weaken(b: &Binders, hyp: &PostCond<KmpContext>, concl: &PostCond<KmpContext>) -> PostImplProof<KmpContext> {
    PostImplProof::Weaken {
        binders: b.clone(),
        hyp: hyp.clone(),
        concl: concl.clone(),
    }
}

fn int(env: &crate::kernel::Env, v: &str) -> i64 {
    env[v].expect_int()
}

/// The proof tree; `compose` of the root gives
/// `{patn ≠ nil ∧ patn.len = next.len ∧ prefix_func(next)} match_loop {…}`.
pub fn kmp_proof_script(cfg: &KmpProofConfig) -> Result<ProofNode<KmpContext>, ProofError> {
    kmp_proof_with(&kmp_prover(cfg), cfg)
}

/// The prover over the configured contexts and fuel.
pub fn kmp_prover(cfg: &KmpProofConfig) -> Prover<KmpContext> {
    let prover = Prover::new(cfg.contexts.clone());
    match cfg.fuel {
        Some(f) => prover.with_fuel(f),
        None => prover,
    }
}

/// [`kmp_proof_script`] with evaluation statistics collected in `pv`.
pub fn kmp_proof_with(pv: &Prover<KmpContext>, cfg: &KmpProofConfig) -> Result<ProofNode<KmpContext>, ProofError> {

    let (i, i1, j, jp) = (Ix::var("i"), Ix::plus("i", 1), Ix::var("j"), Ix::var("j'"));
    let n_dom = FiniteDomain::ints(0..=cfg.max_text);
    let i_dom = FiniteDomain::ints(0..=cfg.max_text - 1);
    let j_dom = FiniteDomain::ints(0..=cfg.max_patn);
    let r_dom = {
        let mut v: Vec<Value> = (0..=cfg.max_text).map(|k| Value::by_break(Value::Int(k))).collect();
        v.extend((0..=cfg.max_patn).map(|k| Value::by_continue(Value::Int(k))));
        FiniteDomain::new(v)
    };

    let b0 = Binders::none();
    let b1 = Binders::one("n", n_dom.clone());
    let b3 = b1.clone().with("i", i_dom).with("j", j_dom.clone());
    let b3g = b3.clone().with("_g", FiniteDomain::new([Value::Unit]));
    let b4 = b3.clone().with("j'", j_dom.clone());

    let f_n = is_text_len("n");
    let (h1, h2, h3) = (next_le_patn(), prefix_func(), next_in_range());
    let ir = in_text(&i);
    let lo = ValueExpr::constant(Value::Int(0));
    let hi = ValueExpr::var("n");
    let gd: Pred<KmpContext> = range_guard("i", &lo, &hi);

    // Outer invariant over (i, j), and the precondition of its premises.
    let inv = all(&[
        &f_n,
        &h1,
        &h2,
        &h3,
        &jrange(&j),
        &partial_match(&i, &j),
        &partial_bound(&i, &j),
        &no_occur(&i),
    ]);
    let g = gd.and(&inv);
    // Facts carried unchanged through the inner loop.
    let frame_in = all(&[&gd, &f_n, &h1, &h2, &h3, &ir, &no_occur(&i)]);
    // Inner invariant over j.
    let inner_inv = frame_in.and(&all(&[&jrange(&j), &partial_match(&i, &j), &presuffix_inv(&i, &j)]));
    // What holds of the inner loop's result j'.
    let k_pred = all(&[&in_patn(&jp), &partial_match(&i1, &jp), &partial_bound(&i1, &jp)]).and(&frame_in);
    let k_post = PostCond::bind_var("j'", &k_pred);

    let ne = Pred::new("text[i] ≠ patn[j]", |env, s: &KmpContext| {
        s.text_at(int(env, "i")) != s.patn_at(int(env, "j"))
    });

    let inner_fam = ProgFamily::new("inner_body(text[i], j)", |env| inner_body(&Ch::TextAt(int(env, "i")), int(env, "j")));
    let inner_cf = continue_family(&inner_fam);
    let inner_bf = break_family(&inner_fam);

    let blk_next = ProgFamily::new("assume(j ≠ 0);; ret(next[j-1])", |env| {
        let j = int(env, "j");
        Prog::assume_pure("j ≠ 0", j != 0).seq(Prog::read("next[j-1]", move |s: &KmpContext| {
            Value::Int(s.next_at((j - 1).max(0)))
        }))
    });
    let blk_eq = ProgFamily::new("assume(text[i] = patn[j]);; ret(j+1)", |env| {
        let (i, j) = (int(env, "i"), int(env, "j"));
        Prog::assume("text[i] = patn[j]", move |s: &KmpContext| s.text_at(i) == s.patn_at(j)).seq(Prog::ret_as(j + 1, "j+1"))
    });
    let blk_zero = ProgFamily::new("assume(j = 0);; ret(0)", |env| {
        Prog::assume_pure("j = 0", int(env, "j") == 0).seq(Prog::ret_as(0, "0"))
    });
    let blk_lt = ProgFamily::new("assume(j' < patn.len);; ret(j')", |env| {
        let jp = int(env, "j'");
        Prog::assume("j' < patn.len", move |s: &KmpContext| jp < s.patn_len()).seq(Prog::ret_as(jp, "j'"))
    });
    let blk_hit = ProgFamily::new("assume(j' = patn.len);; ret(i - patn.len + 1)", |env| {
        let (i, jp) = (int(env, "i"), int(env, "j'"));
        Prog::assume("j' = patn.len", move |s: &KmpContext| jp == s.patn_len()).seq(Prog::read(
            "i - patn.len + 1",
            move |s: &KmpContext| Value::Int((i - s.patn_len() + 1).max(0)),
        ))
    });

    let leaf = |group: &str, label: &str, b: &Binders, pre: &Pred<KmpContext>, prog: &ProgFamily<KmpContext>, post: PostCond<KmpContext>| {
        pv.leaf(group, label, HoareTriple::new(b.clone(), pre.clone(), prog.clone(), post))
    };
    // Strengthens a node's precondition to `pre` by dropping conjuncts.
    let widen = |pre: &Pred<KmpContext>, node: ProofNode<KmpContext>| -> Result<ProofNode<KmpContext>, ProofError> {
        let t = compose(&node)?;
        pv.strengthen(weaken(&t.binders, pre, &t.pre), node)
    };

    // ---- inner loop, continue premise ----
    let g1_cont = leaf(
        GROUP_RANGE,
        "jrange preserved when the inner body continues",
        &b3,
        &h3.and(&jrange(&j)),
        &inner_cf,
        PostCond::bind_var("j", &jrange(&j)),
    )?;
    let g2_cont = leaf(
        GROUP_MATCH,
        "partial_match(i, j) preserved by the continue branch",
        &b3g,
        &all(&[&h1, &h2, &jrange(&j), &partial_match(&i, &j)]),
        &blk_next,
        PostCond::bind_var("j", &partial_match(&i, &j)),
    )?;
    let g3_cont = leaf(
        GROUP_BOUND,
        "presuffix_inv(i, j) preserved by the continue branch",
        &b3g,
        &all(&[&h1, &h2, &jrange(&j), &presuffix_inv(&i, &j), &ne]),
        &blk_next,
        PostCond::bind_var("j", &presuffix_inv(&i, &j)),
    )?;
    let after_ne = inner_inv.and(&ne);
    let cont_blocks = ProofNode::Conj {
        left: Box::new(widen(&after_ne, g2_cont)?),
        right: Box::new(widen(&after_ne, g3_cont)?),
    };
    let guard_ne = ProofNode::Assume {
        binders: b3.clone(),
        pre: inner_inv.clone(),
        guard: ne.clone(),
    };
    let cont_bound = pv.equiv(pv.bind("_g", guard_ne.clone(), cont_blocks)?, inner_cf.clone())?;
    let frame_cont = leaf(
        GROUP_FRAME,
        "inner body continue leaves the context facts",
        &b3,
        &inner_inv,
        &inner_cf,
        PostCond::lift(&frame_in),
    )?;
    let inner_cont = conj_all(vec![widen(&inner_inv, g1_cont)?, cont_bound, frame_cont]);

    // ---- inner loop, break premise ----
    let g1_brk = leaf(
        GROUP_RANGE,
        "j' ∈ [0, patn.len] when the inner body breaks",
        &b3,
        &jrange(&j),
        &inner_bf,
        PostCond::bind_var("j'", &in_patn(&jp)),
    )?;
    let g2_eq = leaf(
        GROUP_MATCH,
        "partial_match extended on a character match",
        &b3,
        &all(&[&h1, &ir, &jrange(&j), &partial_match(&i, &j)]),
        &blk_eq,
        PostCond::bind_var("j'", &partial_match(&i1, &jp)),
    )?;
    let g3_eq = leaf(
        GROUP_BOUND,
        "partial_bound(i+1, j') on a character match",
        &b3,
        &all(&[&h1, &jrange(&j), &presuffix_inv(&i, &j)]),
        &blk_eq,
        PostCond::bind_var("j'", &partial_bound(&i1, &jp)),
    )?;
    let g2_zero = leaf(
        GROUP_MATCH,
        "partial_match(i+1, 0) on a restart",
        &b3g,
        &Pred::truth(),
        &blk_zero,
        PostCond::bind_var("j'", &partial_match(&i1, &jp)),
    )?;
    let g3_zero = leaf(
        GROUP_BOUND,
        "partial_bound(i+1, 0) on a restart",
        &b3g,
        &ne.and(&presuffix_inv(&i, &j)),
        &blk_zero,
        PostCond::bind_var("j'", &partial_bound(&i1, &jp)),
    )?;
    let branch_eq = ProofNode::Conj {
        left: Box::new(widen(&inner_inv, g2_eq)?),
        right: Box::new(widen(&inner_inv, g3_eq)?),
    };
    let zero_blocks = ProofNode::Conj {
        left: Box::new(widen(&after_ne, g2_zero)?),
        right: Box::new(widen(&after_ne, g3_zero)?),
    };
    let branch_zero = pv.bind("_g", guard_ne, zero_blocks)?;
    let brk_bound = pv.equiv(
        ProofNode::Choice {
            left: Box::new(branch_eq),
            right: Box::new(branch_zero),
        },
        inner_bf.clone(),
    )?;
    let frame_brk = leaf(
        GROUP_FRAME,
        "inner body break leaves the context facts",
        &b3,
        &inner_inv,
        &inner_bf,
        PostCond::lift(&frame_in),
    )?;
    let inner_brk = conj_all(vec![widen(&inner_inv, g1_brk)?, brk_bound, frame_brk]);

    // ---- inner loop ----
    let inner = pv.repeat_break("j", inner_fam, inner_cont, inner_brk)?;
    let g_ir = g.and(&ir);
    let entry = ImplProof::Chain(
        Box::new(ImplProof::And(
            Box::new(weaken(&b3, &g, &g)),
            Box::new(via(
                &b3,
                &g,
                &gd.and(&f_n),
                pv.implication(GROUP_FRAME, "0 ≤ i < n ∧ n = text.len → i ∈ [0, text.len)", &b3, &gd.and(&f_n), &ir),
            )),
        )),
        Box::new(ImplProof::And(
            Box::new(weaken(&b3, &g_ir, &all(&[&frame_in, &jrange(&j), &partial_match(&i, &j)]))),
            Box::new(via(&b3, &g_ir, &all(&[&h1, &ir, &partial_match(&i, &j), &partial_bound(&i, &j)]), {
                let hyp = all(&[&h1, &ir, &partial_match(&i, &j), &partial_bound(&i, &j)]);
                pv.implication(GROUP_BOUND, "presuffix_inv(i, j) on entering the inner loop", &b3, &hyp, &presuffix_inv(&i, &j))
            })),
        )),
    );
    let inner = pv.strengthen(entry, inner)?;
    debug_assert!(compose(&inner)?.post.same_as(&k_post));

    // ---- after the inner loop: continue ----
    let frame_c = all(&[&f_n, &h1, &h2, &h3, &ir, &no_occur(&i)]);
    let lt_nodes = vec![
        leaf(GROUP_RANGE, "jrange back when the outer loop continues", &b4, &in_patn(&jp), &blk_lt, PostCond::bind_var("j", &jrange(&j)))?,
        leaf(GROUP_MATCH, "partial_match(i+1, j') kept on continue", &b4, &partial_match(&i1, &jp), &blk_lt, PostCond::bind_var("j", &partial_match(&i1, &j)))?,
        leaf(GROUP_BOUND, "partial_bound(i+1, j') kept on continue", &b4, &partial_bound(&i1, &jp), &blk_lt, PostCond::bind_var("j", &partial_bound(&i1, &j)))?,
        leaf(GROUP_FRAME, "outer continue leaves the context facts", &b4, &frame_c, &blk_lt, PostCond::lift(&frame_c))?,
    ];
    let lt = conj_all(lt_nodes.into_iter().map(|n| widen(&k_pred, n)).collect::<Result<_, _>>()?);
    let lt_post = compose(&lt)?.post;
    let next_inv = PostCond::bind_var("j", &all(&[&f_n, &h1, &h2, &h3, &jrange(&j), &partial_match(&i1, &j), &partial_bound(&i1, &j)]));
    let g4_hyp = PostCond::bind_var("j", &all(&[&ir, &jrange(&j), &partial_bound(&i1, &j), &no_occur(&i)]));
    let to_next = PostImplProof::And(
        Box::new(post_weaken(&b4, &lt_post, &next_inv)),
        Box::new(PostImplProof::Chain(
            Box::new(post_weaken(&b4, &lt_post, &g4_hyp)),
            Box::new(pv.post_implication(
                GROUP_POST,
                "i ∈ [0, text.len) ∧ jrange(j') ∧ partial_bound(i+1, j') ∧ no_occur(i) → no_occur(i+1)",
                &b4,
                &g4_hyp,
                &PostCond::lift(&no_occur(&i1)),
                &j_dom,
            )),
        )),
    );
    let lt = pv.weaken(lt, to_next)?;

    // ---- after the inner loop: break on a full match ----
    let hit_nodes = vec![
        leaf(
            GROUP_POST,
            "no_occur part of first_occur",
            &b4,
            &no_occur(&i),
            &blk_hit,
            PostCond::new("r", "no_occur(r + patn.len - 1)", |_, r, s: &KmpContext| {
                s.no_occur(r.expect_int() + s.patn_len() - 1)
            }),
        )?,
        leaf(
            GROUP_POST,
            "occurrence part of first_occur",
            &b4,
            &partial_match(&i1, &jp),
            &blk_hit,
            PostCond::new("r", "text[r..r+patn.len] = patn", |_, r, s: &KmpContext| {
                let r = r.expect_int();
                s.text_slice(r, r + s.patn_len()) == s.patn
            }),
        )?,
    ];
    let hit = conj_all(hit_nodes.into_iter().map(|n| widen(&k_pred, n)).collect::<Result<_, _>>()?);
    let hit_post = compose(&hit)?.post;
    let brk_post = first_occur("b");
    let hit = pv.weaken(
        hit,
        pv.post_implication(GROUP_POST, "definition of first_occur", &b4, &hit_post, &brk_post, &FiniteDomain::ints(0..=cfg.max_text)),
    )?;

    // ---- outer loop ----
    let match_fam = ProgFamily::new("match_body(i, j)", |env| match_body(int(env, "i"), int(env, "j")));
    let outer_cont = pv.equiv(pv.bind("j'", inner.clone(), lt)?, continue_family(&match_fam))?;
    let outer_brk = pv.equiv(pv.bind("j'", inner, hit)?, break_family(&match_fam))?;
    let zero = ValueExpr::constant(Value::Int(0));
    let outer = pv.range_iter("i", "j", lo, hi, zero, inv, match_fam, outer_cont, outer_brk)?;

    // ---- entry and exit of the outer loop ----
    let (nonempty, same) = (patn_nonempty(), same_len());
    let pre0 = match_pre();
    let x = f_n.and(&pre0);
    let outer_t = compose(&outer)?;
    let lit0 = Ix::lit(0);
    let next_facts_hyp = if cfg.trust_prefix_func { h2.clone() } else { Pred::truth() };
    let next_facts_label = format!("{} → {}", next_facts_hyp.label(), h3.label());
    let init = and_all(vec![
        weaken(&b1, &x, &f_n.and(&h2)),
        via(&b1, &x, &same, pv.implication(GROUP_FRAME, "patn.len = next.len → next.len ≤ patn.len", &b1, &same, &h1)),
        via(&b1, &x, &next_facts_hyp, pv.implication(GROUP_RANGE, &next_facts_label, &b1, &next_facts_hyp, &h3)),
        via(&b1, &x, &nonempty.and(&same), pv.implication(GROUP_RANGE, "patn ≠ nil ∧ patn.len = next.len → jrange(0)", &b1, &nonempty.and(&same), &jrange(&lit0))),
        via(&b1, &x, &Pred::truth(), pv.implication(GROUP_MATCH, "partial_match(0, 0)", &b1, &Pred::truth(), &partial_match(&lit0, &lit0))),
        via(&b1, &x, &Pred::truth(), pv.implication(GROUP_BOUND, "partial_bound(0, 0)", &b1, &Pred::truth(), &partial_bound(&lit0, &lit0))),
        via(&b1, &x, &Pred::truth(), pv.implication(GROUP_POST, "no_occur(0)", &b1, &Pred::truth(), &no_occur(&lit0))),
    ]);
    let exit = pv.post_implication(GROUP_POST, "loop exits give the postcondition", &b1, &outer_t.post, &match_post(), &r_dom);
    let outer = pv.conseq(init, outer, exit)?;

    let read_len = pv.leaf(
        GROUP_FRAME,
        "n = text.len",
        HoareTriple::new(
            b0,
            pre0,
            ProgFamily::new("read(text.len)", |_| Prog::read("text.len", |s: &KmpContext| Value::Int(s.text_len()))),
            PostCond::bind_var("n", &x),
        ),
    )?;
    let whole = pv.bind("n", read_len, outer)?;
    pv.equiv(whole, ProgFamily::constant("match_loop", match_loop()))
}

/// The end-to-end claim, for checking directly.
pub fn kmp_triple() -> HoareTriple<KmpContext> {
    HoareTriple::closed(match_pre(), ProgFamily::constant("match_loop", match_loop()), match_post())
}
