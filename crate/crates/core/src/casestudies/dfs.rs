//! Depth-first search over a finite pre-graph, with the reachability claim
//! checked by enumeration and by a composed proof.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fixpoint::{break_, continue_, repeat_break};
use crate::hoare::{
    break_family, check_triple, compose, continue_family, Binders, CheckReport, HoareTriple, PostCond,
    Pred, ProgFamily, ProofError, ProofNode, Prover, ValueExpr,
};
use crate::kernel::{EvalContext, EvalError, FiniteDomain, Prog, Value};

pub type Vertex = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DfsError {
    #[error("edge {edge} refers to a vertex outside the graph")]
    InvalidEdge { edge: usize },
    #[error("start vertex {0} is not in the graph")]
    InvalidStart(Vertex),
    #[error("state space has {bound} states, above the cap of {cap}")]
    StateSpaceTooLarge { bound: u128, cap: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Proof(#[from] ProofError),
}

/// A directed graph with explicit edge identities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreGraph {
    vvalid: BTreeSet<Vertex>,
    evalid: BTreeMap<usize, (Vertex, Vertex)>,
}

impl PreGraph {
    /// Edge `k` of the list gets identity `k`.
    pub fn new(vertices: impl IntoIterator<Item = Vertex>, edges: &[(Vertex, Vertex)]) -> Result<Self, DfsError> {
        let vvalid: BTreeSet<Vertex> = vertices.into_iter().collect();
        let mut evalid = BTreeMap::new();
        for (k, &(x, y)) in edges.iter().enumerate() {
            if !vvalid.contains(&x) || !vvalid.contains(&y) {
                return Err(DfsError::InvalidEdge { edge: k });
            }
            evalid.insert(k, (x, y));
        }
        Ok(PreGraph { vvalid, evalid })
    }

    pub fn vertices(&self) -> &BTreeSet<Vertex> {
        &self.vvalid
    }

    pub fn src(&self, e: usize) -> Option<Vertex> {
        self.evalid.get(&e).map(|p| p.0)
    }

    pub fn dst(&self, e: usize) -> Option<Vertex> {
        self.evalid.get(&e).map(|p| p.1)
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.evalid.values().copied()
    }

    /// `∃e, step_aux pg e x y`
    pub fn step(&self, x: Vertex, y: Vertex) -> bool {
        self.evalid.values().any(|&(a, b)| a == x && b == y)
    }

    pub fn successors(&self, x: Vertex) -> BTreeSet<Vertex> {
        self.edges().filter(|e| e.0 == x).map(|e| e.1).collect()
    }

    /// Reflexive-transitive closure of `step` from `u`.
    pub fn reachable(&self, u: Vertex) -> BTreeSet<Vertex> {
        let mut seen = BTreeSet::from([u]);
        let mut frontier = vec![u];
        while let Some(x) = frontier.pop() {
            for y in self.successors(x) {
                if seen.insert(y) {
                    frontier.push(y);
                }
            }
        }
        seen
    }

    fn vertex_values(&self) -> FiniteDomain<Value> {
        FiniteDomain::new(self.vvalid.iter().map(|&v| vertex_value(v)))
    }
}

/// Every directed graph on `0..n`, one per edge subset.
pub fn all_graphs(n: u32) -> Vec<PreGraph> {
    let pairs: Vec<(Vertex, Vertex)> = (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let edges: Vec<_> = pairs
                .iter()
                .enumerate()
                .filter(|(k, _)| mask >> k & 1 == 1)
                .map(|(_, &e)| e)
                .collect();
            PreGraph::new(0..n, &edges).expect("edges over 0..n")
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DfsState {
    /// Top of the stack first.
    pub stack: Vec<Vertex>,
    pub visited: BTreeSet<Vertex>,
}

pub fn vertex_value(v: Vertex) -> Value {
    Value::Int(v as i64)
}

fn as_vertex(v: &Value) -> Vertex {
    v.expect_int() as Vertex
}

/// `update(λs1 s2. s2.visited = s1.visited ∪ {v} ∧ s2.stack = s1.stack)`
pub fn visit(v: Vertex) -> Prog<DfsState> {
    Prog::update_with_image(
        format!("visit {v}"),
        move |s1: &DfsState, s2: &DfsState| {
            let mut v2 = s1.visited.clone();
            v2.insert(v);
            s2.stack == s1.stack && s2.visited == v2
        },
        move |s1| {
            let mut s2 = s1.clone();
            s2.visited.insert(v);
            vec![s2]
        },
    )
}

/// `update(λs1 s2. s2.stack = v :: s1.stack ∧ s2.visited = s1.visited)`
pub fn push_stack(v: Vertex) -> Prog<DfsState> {
    Prog::update_with_image(
        format!("push_stack {v}"),
        move |s1: &DfsState, s2: &DfsState| {
            s2.visited == s1.visited && s2.stack.first() == Some(&v) && s2.stack[1..] == s1.stack[..]
        },
        move |s1| {
            let mut s2 = s1.clone();
            s2.stack.insert(0, v);
            vec![s2]
        },
    )
}

/// `λs1 v s2. s1.stack = v :: s2.stack ∧ s2.visited = s1.visited`
pub fn pop_stack() -> Prog<DfsState> {
    Prog::step("pop_stack", |s1: &DfsState| match s1.stack.split_first() {
        Some((&v, rest)) => vec![(
            vertex_value(v),
            DfsState {
                stack: rest.to_vec(),
                visited: s1.visited.clone(),
            },
        )],
        None => Vec::new(),
    })
}

/// `assume(λs. ∀v, step(u, v) → v ∈ s.visited)`
pub fn if_all_neighbor_visited(pg: &PreGraph, u: Vertex) -> Prog<DfsState> {
    let succ = pg.successors(u);
    Prog::assume(format!("all neighbors of {u} visited"), move |s: &DfsState| {
        succ.is_subset(&s.visited)
    })
}

pub fn dfs_body(pg: &PreGraph, u: Vertex) -> Prog<DfsState> {
    let pg2 = pg.clone();
    Prog::choice(
        if_all_neighbor_visited(pg, u).seq(Prog::choice(
            Prog::assume("stack = nil", |s: &DfsState| s.stack.is_empty()).seq(break_(Value::Unit)),
            pop_stack().then("v ↦ continue v", |v| continue_(v.clone())),
        )),
        Prog::any(pg.vertex_values()).then("v ↦ …;; continue v", move |v| {
            let v = as_vertex(v);
            Prog::assume("v ∉ visited", move |s: &DfsState| !s.visited.contains(&v))
                .seq(Prog::assume_pure("step u v", pg2.step(u, v)))
                .seq(push_stack(u))
                .seq(visit(v))
                .seq(continue_(vertex_value(v)))
        }),
    )
}

/// `visit u;; repeat_break (DFS_body pg) u`
pub fn dfs(pg: &PreGraph, u: Vertex) -> Prog<DfsState> {
    let pg2 = pg.clone();
    let lp = repeat_break("DFS", move |a: &Value| dfs_body(&pg2, as_vertex(a)));
    visit(u).seq(lp(&vertex_value(u)))
}

fn count_bound(n: u32) -> u128 {
    // subsets × duplicate-free sequences
    let mut seqs: u128 = 0;
    let mut perm: u128 = 1;
    for k in 0..=n as u128 {
        seqs += perm;
        perm *= n as u128 - k;
    }
    (1u128 << n) * seqs
}

fn stacks(vs: &[Vertex], prefix: &mut Vec<Vertex>, out: &mut Vec<Vec<Vertex>>) {
    out.push(prefix.clone());
    for &v in vs {
        if !prefix.contains(&v) {
            prefix.push(v);
            stacks(vs, prefix, out);
            prefix.pop();
        }
    }
}

/// Visited sets over all subsets of the vertices, stacks over all
/// duplicate-free vertex sequences.
pub fn dfs_state_domain(pg: &PreGraph, cap: usize) -> Result<FiniteDomain<DfsState>, DfsError> {
    let vs: Vec<Vertex> = pg.vvalid.iter().copied().collect();
    let bound = count_bound(vs.len() as u32);
    if bound > cap as u128 {
        return Err(DfsError::StateSpaceTooLarge { bound, cap });
    }
    let mut all_stacks = Vec::new();
    stacks(&vs, &mut Vec::new(), &mut all_stacks);
    let mut states = Vec::with_capacity(bound as usize);
    for mask in 0u32..1 << vs.len() {
        let visited: BTreeSet<Vertex> = vs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, &v)| v).collect();
        for st in &all_stacks {
            states.push(DfsState {
                stack: st.clone(),
                visited: visited.clone(),
            });
        }
    }
    Ok(FiniteDomain::new(states))
}

pub const DEFAULT_STATE_CAP: usize = 200_000;

fn empty_state() -> Pred<DfsState> {
    Pred::state("stack = nil ∧ visited = ∅", |s: &DfsState| s.stack.is_empty() && s.visited.is_empty())
}

fn visited_is_reach(pg: &PreGraph, u: Vertex) -> Pred<DfsState> {
    let reach = pg.reachable(u);
    Pred::state(format!("visited = reach({u})"), move |s: &DfsState| s.visited == reach)
}

/// `{stack = nil ∧ visited = ∅} dfs(pg, u) {visited = reach(u)}`
pub fn dfs_reachability_triple(pg: &PreGraph, u: Vertex) -> HoareTriple<DfsState> {
    let p = pg.clone();
    HoareTriple::closed(
        empty_state(),
        ProgFamily::new(format!("dfs({u})"), move |_| dfs(&p, u)),
        PostCond::lift(&visited_is_reach(pg, u)),
    )
}

/// Checks that every terminal visited set equals the reachable set.
pub fn dfs_reachability_check(pg: &PreGraph, u: Vertex, cap: usize) -> Result<CheckReport<String>, DfsError> {
    if !pg.vvalid.contains(&u) {
        return Err(DfsError::InvalidStart(u));
    }
    let dom = dfs_state_domain(pg, cap)?;
    let ctx = EvalContext::new().with_state_domain(dom);
    // Only the empty state satisfies the precondition.
    let init = FiniteDomain::new([DfsState::default()]);
    Ok(check_triple(&dfs_reachability_triple(pg, u), &init, &ctx)?.erase())
}

/// States seen during the search from the empty state that break the stack
/// discipline: duplicates on the stack or unvisited stack vertices.
pub fn stack_discipline_violations(pg: &PreGraph, u: Vertex, cap: usize) -> Result<Vec<DfsState>, DfsError> {
    let dom = dfs_state_domain(pg, cap)?;
    let ctx = EvalContext::new().with_state_domain(dom).observing();
    crate::kernel::eval(&dfs(pg, u), &DfsState::default(), &ctx)?;
    Ok(ctx
        .observed_states()
        .into_iter()
        .filter(|s| {
            let distinct: BTreeSet<_> = s.stack.iter().collect();
            distinct.len() != s.stack.len() || !s.stack.iter().all(|v| s.visited.contains(v))
        })
        .collect())
}

/// Loop invariant of the search from `start`, with current vertex `u`.
fn loop_invariant(pg: &PreGraph, start: Vertex) -> Pred<DfsState> {
    let reach = pg.reachable(start);
    let g = pg.clone();
    let u_of = |env: &crate::kernel::Env| as_vertex(&env["u"]);
    Pred::new("u ∈ visited", move |env, s: &DfsState| s.visited.contains(&u_of(env)))
        .and(&Pred::state(format!("{start} ∈ visited"), move |s: &DfsState| s.visited.contains(&start)))
        .and(&Pred::state("stack ⊆ visited", |s: &DfsState| s.stack.iter().all(|v| s.visited.contains(v))))
        .and(&Pred::state("nodup(stack)", |s: &DfsState| {
            s.stack.iter().collect::<BTreeSet<_>>().len() == s.stack.len()
        }))
        .and(&Pred::state(format!("visited ⊆ reach({start})"), move |s: &DfsState| {
            s.visited.is_subset(&reach)
        }))
        .and(&Pred::new("closed(visited ∖ (stack ∪ {u}))", move |env, s: &DfsState| {
            let u = u_of(env);
            s.visited
                .iter()
                .filter(|w| **w != u && !s.stack.contains(w))
                .all(|&w| g.successors(w).is_subset(&s.visited))
        }))
}

/// A composed proof of the reachability claim: the loop rule over the
/// invariant, a Bind with the initial `visit`, and an equivalence with
/// `dfs` itself.
pub fn dfs_proof_script(pg: &PreGraph, start: Vertex, cap: usize) -> Result<ProofNode<DfsState>, DfsError> {
    if !pg.vvalid.contains(&start) {
        return Err(DfsError::InvalidStart(start));
    }
    dfs_proof_with(&Prover::new(dfs_state_domain(pg, cap)?), pg, start)
}

/// [`dfs_proof_script`] with a prover over [`dfs_state_domain`].
pub fn dfs_proof_with(prover: &Prover<DfsState>, pg: &PreGraph, start: Vertex) -> Result<ProofNode<DfsState>, DfsError> {
    if !pg.vvalid.contains(&start) {
        return Err(DfsError::InvalidStart(start));
    }
    let inv = loop_invariant(pg, start);
    let goal = visited_is_reach(pg, start);
    let by_u = Binders::one("u", pg.vertex_values());
    let g = pg.clone();
    let body = ProgFamily::new("DFS_body(u)", move |env| dfs_body(&g, as_vertex(&env["u"])));

    let cont = prover.leaf(
        "loop",
        "invariant preserved",
        HoareTriple::new(by_u.clone(), inv.clone(), continue_family(&body), PostCond::bind_var("u", &inv)),
    )?;
    let brk = prover.leaf(
        "loop",
        "exit establishes reachability",
        HoareTriple::new(by_u.clone(), inv.clone(), break_family(&body), PostCond::lift(&goal)),
    )?;
    let lp = prover.repeat_break("u", body, cont, brk)?;

    let none = Binders::none();
    let visit_start = prover.update(&none, &empty_state(), &format!("visit {start}"), move |_, s1, s2| {
        s2.stack == s1.stack && {
            let mut v = s1.visited.clone();
            v.insert(start);
            s2.visited == v
        }
    });
    let after_visit = compose(&visit_start).map_err(ProofError::from)?.post.as_pred();
    let unit = none.with("_x", FiniteDomain::new([Value::Unit]));
    let ret = ProofNode::Ret {
        binders: unit.clone(),
        value: ValueExpr::constant(vertex_value(start)),
        post: PostCond::bind_var("u", &inv),
    };
    let ret_pre = compose(&ret).map_err(ProofError::from)?.pre;
    let init = prover.implication("init", "invariant at start", &unit, &after_visit, &ret_pre);
    let ret = prover.strengthen(init, ret)?;
    let head = prover.bind("_x", visit_start, ret)?;
    let whole = prover.bind("u", head, lp)?;
    let g = pg.clone();
    let target = ProgFamily::constant(format!("dfs({start})"), dfs(&g, start));
    Ok(prover.equiv(whole, target)?)
}
