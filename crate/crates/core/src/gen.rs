//! Seeded random programs, predicates and relations over small state and
//! value domains.
//!
//! States are `u8` in `0..states`, values are `Int` in `0..values`. Every
//! generated predicate gets a fresh label, so distinct predicates never
//! share a label.

use std::collections::BTreeSet;
use std::rc::Rc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::errmonad::{assert, err_any, err_assume, err_bind, err_choice, err_ret, err_update, ErrProg};
use crate::fixpoint::{break_, continue_};
use crate::hoare::{PostCond, Pred};
use crate::kernel::{Continuation, Env, FiniteDomain, Prog, Value};

pub type Outcomes = BTreeSet<(Value, u8)>;

pub struct Gen {
    rng: ChaCha8Rng,
    states: u8,
    values: i64,
    next_id: usize,
}

impl Gen {
    /// Domain sizes drawn from `1..=4`.
    pub fn new(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let states = rng.random_range(1..=4u8);
        let values = rng.random_range(1..=4i64);
        Gen { rng, states, values, next_id: 0 }
    }

    pub fn with_sizes(seed: u64, states: u8, values: i64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), states, values, next_id: 0 }
    }

    pub fn state_count(&self) -> u8 {
        self.states
    }

    pub fn value_count(&self) -> i64 {
        self.values
    }

    pub fn state_domain(&self) -> FiniteDomain<u8> {
        FiniteDomain::new(0..self.states)
    }

    pub fn value_domain(&self) -> FiniteDomain<Value> {
        FiniteDomain::ints(0..=self.values - 1)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn fresh(&mut self, prefix: &str) -> String {
        self.next_id += 1;
        format!("{prefix}{}", self.next_id)
    }

    pub fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub fn state(&mut self) -> u8 {
        self.rng.random_range(0..self.states)
    }

    pub fn int(&mut self) -> i64 {
        self.rng.random_range(0..self.values)
    }

    pub fn value(&mut self) -> Value {
        Value::Int(self.int())
    }

    pub fn state_set(&mut self) -> BTreeSet<u8> {
        (0..self.states).filter(|_| self.rng.random_bool(0.5)).collect()
    }

    pub fn value_set(&mut self) -> BTreeSet<i64> {
        (0..self.values).filter(|_| self.rng.random_bool(0.5)).collect()
    }

    /// A random relation on states.
    pub fn state_relation(&mut self) -> BTreeSet<(u8, u8)> {
        let mut rel = BTreeSet::new();
        for a in 0..self.states {
            for b in 0..self.states {
                if self.rng.random_bool(0.4) {
                    rel.insert((a, b));
                }
            }
        }
        rel
    }

    /// A random subset of value × state pairs.
    pub fn outcome_set(&mut self, density: f64) -> Outcomes {
        let mut out = BTreeSet::new();
        for v in 0..self.values {
            for s in 0..self.states {
                if self.rng.random_bool(density) {
                    out.insert((Value::Int(v), s));
                }
            }
        }
        out
    }

    /// `s ∈ P` for a random `P`.
    pub fn pred(&mut self) -> Pred<u8> {
        let set = self.state_set();
        self.pred_of(set)
    }

    pub fn pred_of(&mut self, set: BTreeSet<u8>) -> Pred<u8> {
        let label = format!("s ∈ {}", self.fresh("P"));
        Pred::state(label, move |s| set.contains(s))
    }

    /// `(var, s) ∈ Q` for a set of result/state pairs.
    pub fn post_of(&mut self, var: &str, set: Outcomes) -> PostCond<u8> {
        let label = format!("({var}, s) ∈ {}", self.fresh("Q"));
        PostCond::new(var, label, move |_, v, s| set.contains(&(v.clone(), *s)))
    }

    /// A postcondition containing `must` and random extra pairs.
    pub fn post_covering(&mut self, var: &str, must: &Outcomes) -> PostCond<u8> {
        let mut set = self.outcome_set(0.3);
        set.extend(must.iter().cloned());
        self.post_of(var, set)
    }

    /// A random program of the given depth.
    pub fn prog(&mut self, depth: usize) -> Prog<u8> {
        if depth == 0 || self.rng.random_bool(0.3) {
            return self.leaf();
        }
        match self.rng.random_range(0..3) {
            0 => Prog::choice(self.prog(depth - 1), self.prog(depth - 1)),
            _ => {
                let first = self.prog(depth - 1);
                let k = self.continuation(depth - 1);
                Prog::bind(first, k)
            }
        }
    }

    /// A primitive: ret, assume, any, update or step. Assume and update are
    /// followed by a return so that every result lies in the value domain.
    pub fn leaf(&mut self) -> Prog<u8> {
        match self.rng.random_range(0..5) {
            0 => Prog::ret(self.int()),
            1 => {
                let set = self.state_set();
                Prog::assume(format!("s ∈ {}", self.fresh("A")), move |s| set.contains(s)).seq(Prog::ret(self.int()))
            }
            2 => {
                let vals = self.value_set();
                Prog::any(FiniteDomain::new(vals.into_iter().map(Value::Int)))
            }
            3 => {
                let rel = self.state_relation();
                Prog::update(self.fresh("U"), move |a, b| rel.contains(&(*a, *b))).seq(Prog::ret(self.int()))
            }
            _ => {
                let table = self.step_table();
                Prog::step(self.fresh("T"), move |s| table[*s as usize].iter().cloned().collect())
            }
        }
    }

    /// Outcome sets indexed by initial state.
    pub fn step_table(&mut self) -> Vec<Outcomes> {
        (0..self.states).map(|_| self.outcome_set(0.25)).collect()
    }

    /// A continuation tabulated over the value domain; other values fail.
    pub fn continuation(&mut self, depth: usize) -> Continuation<u8> {
        let table: Vec<Prog<u8>> = (0..self.values).map(|_| self.prog(depth)).collect();
        let label = self.fresh("k");
        Continuation::new(label, move |v| match v.as_int() {
            Some(i) if (0..table.len() as i64).contains(&i) => table[i as usize].clone(),
            _ => Prog::fail(),
        })
    }

    /// A continuation as a plain function, for bind laws.
    pub fn kleisli(&mut self, depth: usize) -> Rc<dyn Fn(&Value) -> Prog<u8>> {
        let k = self.continuation(depth);
        Rc::new(move |v| k.apply(v))
    }

    /// A loop body returning `by_continue`/`by_break` of domain values.
    pub fn loop_body(&mut self, depth: usize) -> Prog<u8> {
        let head = self.prog(depth);
        let exits: Vec<(bool, i64)> = (0..self.values).map(|_| (self.rng.random_bool(0.5), self.int())).collect();
        let label = self.fresh("exit");
        head.then(label, move |v| match v.as_int() {
            Some(i) if (0..exits.len() as i64).contains(&i) => {
                let (cont, w) = exits[i as usize];
                if cont {
                    continue_(w)
                } else {
                    break_(w)
                }
            }
            _ => Prog::fail(),
        })
    }

    /// A random errorful program.
    pub fn err_prog(&mut self, depth: usize) -> ErrProg<u8> {
        if depth == 0 || self.rng.random_bool(0.3) {
            return match self.rng.random_range(0..5) {
                0 => err_ret(self.int()),
                1 => {
                    let set = self.state_set();
                    err_assume(format!("s ∈ {}", self.fresh("A")), move |s| set.contains(s))
                }
                2 => err_any(FiniteDomain::new(self.value_set().into_iter().map(Value::Int))),
                3 => {
                    let rel = self.state_relation();
                    err_update(self.fresh("U"), move |a, b| rel.contains(&(*a, *b)))
                }
                _ => {
                    let set = self.state_set();
                    assert(format!("s ∈ {}", self.fresh("E")), move |s| set.contains(s))
                }
            };
        }
        if self.rng.random_bool(0.4) {
            err_choice(self.err_prog(depth - 1), self.err_prog(depth - 1))
        } else {
            let first = self.err_prog(depth - 1);
            let table: Vec<ErrProg<u8>> = (0..self.values).map(|_| self.err_prog(depth - 1)).collect();
            let label = self.fresh("k");
            err_bind(first, label, move |v| match v.as_int() {
                Some(i) if (0..table.len() as i64).contains(&i) => table[i as usize].clone(),
                _ => err_assume("false", |_| false),
            })
        }
    }
}

/// Outcomes of `p` from every state of `from` that satisfies `pre`.
pub fn reachable(p: &Prog<u8>, pre: &Pred<u8>, env: &Env, dom: &FiniteDomain<u8>) -> Outcomes {
    let ctx = crate::kernel::EvalContext::new().with_state_domain(dom.clone());
    let mut out = BTreeSet::new();
    for s in dom {
        if pre.holds(env, s) {
            out.extend(crate::kernel::eval(p, s, &ctx).expect("generated programs evaluate").outcomes);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{denote, EvalContext};

    #[test]
    fn same_seed_same_program() {
        let mut a = Gen::new(7);
        let mut b = Gen::new(7);
        let (pa, pb) = (a.prog(3), b.prog(3));
        let dom = a.state_domain();
        let ctx = EvalContext::new().with_state_domain(dom.clone());
        assert_eq!(denote(&pa, &dom, &ctx).unwrap().table, denote(&pb, &dom, &ctx).unwrap().table);
    }

    #[test]
    fn values_stay_in_domain() {
        for seed in 0..50 {
            let mut g = Gen::new(seed);
            let p = g.prog(3);
            let dom = g.state_domain();
            let vals = g.value_domain();
            for (v, s) in reachable(&p, &Pred::truth(), &Env::new(), &dom) {
                assert!(vals.contains(&v) && dom.contains(&s));
            }
        }
    }
}
