//! Small stateless examples: branching, nondeterministic choice, recursion
//! and a loop with break.

use std::rc::Rc;

use crate::fixpoint::{break_, continue_as, continue_part, lfix, repeat_break};
use crate::hoare::{Binders, HoareTriple, PostCond, Pred, ProgFamily};
use crate::kernel::{FiniteDomain, Handle, Prog, Value};

/// `choice (assume'(z ≥ 0);; ret z) (assume'(z < 0);; ret (-z))`
pub fn compute_abs(z: i64) -> Prog<()> {
    Prog::choice(
        Prog::assume_pure("z ≥ 0", z >= 0).seq(Prog::ret_as(z, "z")),
        Prog::assume_pure("z < 0", z < 0).seq(Prog::ret_as(-z, "-z")),
    )
}

fn has_proper_factorization(x: i64) -> bool {
    (2..=x).any(|m| (2..=x).any(|n| m * n == x))
}

/// `x ← any nat;; assume'(¬∃ m n, m > 1 ∧ n > 1 ∧ x = m n);; ret x`, with
/// `any` over `0..=bound`. The guard admits 0 and 1 as well as the primes.
pub fn any_prime(bound: i64) -> Prog<()> {
    Prog::any(FiniteDomain::ints(0..=bound)).then("x ↦ assume'(…);; ret x", |x| {
        let v = x.expect_int();
        Prog::assume_pure("¬∃ m n, m > 1 ∧ n > 1 ∧ x = m·n", !has_proper_factorization(v))
            .seq(Prog::ret_as(v, "x"))
    })
}

pub fn is_prime(x: i64) -> bool {
    x >= 2 && (2..x).all(|d| x % d != 0)
}

/// Natural-number subtraction.
fn monus(a: i64, b: i64) -> i64 {
    (a - b).max(0)
}

/// `Lfix (λW n. choice (assume'(n ≤ 1);; ret n)
///   (assume'(n > 1);; x ← W(n-1);; y ← W(n-2);; ret (x+y)))`
pub fn fibonacci() -> Handle<()> {
    lfix("fibonacci", |w: &Handle<()>, n: &Value| {
        let n = n.expect_int();
        let w2 = w.clone();
        Prog::choice(
            Prog::assume_pure("n ≤ 1", n <= 1).seq(Prog::ret(n)),
            Prog::assume_pure("n > 1", n > 1).seq(w(&Value::Int(monus(n, 1))).then(
                "x ↦ y ← W(n-2);; ret(x+y)",
                move |x| {
                    let x = x.expect_int();
                    w2(&Value::Int(monus(n, 2))).then("y ↦ ret(x+y)", move |y| Prog::ret(x + y.expect_int()))
                },
            )),
        )
    })
}

pub fn fib_oracle(n: i64) -> i64 {
    let (mut a, mut b) = (0i64, 1i64);
    for _ in 0..n {
        let t = a + b;
        a = b;
        b = t;
    }
    a
}

/// `∃k, x = 2k + r`, decided by searching the finitely many candidates.
fn exists_k(x: i64, r: i64) -> bool {
    let bound = x.abs() + 1;
    (-bound..=bound).any(|k| x == 2 * k + r)
}

/// The body of `hailstone`.
pub fn hailstone_body(x: i64) -> Prog<()> {
    Prog::choice(
        Prog::assume_pure("x ≤ 1", x <= 1).seq(break_(x)),
        Prog::assume_pure("x > 1", x > 1).seq(Prog::choice(
            Prog::assume_pure("∃k, x = 2k", exists_k(x, 0)).seq(continue_as(x.div_euclid(2), "x/2")),
            Prog::assume_pure("∃k, x = 2k+1", exists_k(x, 1)).seq(continue_as(3 * x + 1, "3x+1")),
        )),
    )
}

pub fn hailstone() -> Handle<()> {
    repeat_break("hailstone", |x: &Value| hailstone_body(x.expect_int()))
}

/// Final value of the hailstone iteration, by direct simulation.
pub fn hailstone_oracle(mut x: i64) -> i64 {
    while x > 1 {
        x = if x % 2 == 0 { x / 2 } else { 3 * x + 1 };
    }
    x
}

fn x_at_least_one() -> Pred<()> {
    Pred::pure("x ≥ 1", |env| env["x"].expect_int() >= 1)
}

/// `∀x ∈ [lo, hi], {x ≥ 1} y ← hailstone_body(x);; continue_case(y) {λy. y ≥ 1}`
pub fn hailstone_continue_triple(lo: i64, hi: i64) -> HoareTriple<()> {
    HoareTriple::new(
        Binders::one("x", FiniteDomain::ints(lo..=hi)),
        x_at_least_one(),
        ProgFamily::new("y ← hailstone_body(x);; continue_case(y)", |env| {
            continue_part(hailstone_body(env["x"].expect_int()))
        }),
        PostCond::value("y", "y ≥ 1", |_, v| v.expect_int() >= 1),
    )
}

/// A named example with a parameter and one checkable claim over a range
/// of that parameter.
pub struct SmallExample {
    pub name: &'static str,
    pub param: &'static str,
    pub default: i64,
    pub claim_range: (i64, i64),
    pub program: Rc<dyn Fn(i64) -> Prog<()>>,
    pub claim: Rc<dyn Fn(i64, i64) -> HoareTriple<()>>,
}

fn family(name: &'static str, param: &'static str, program: Rc<dyn Fn(i64) -> Prog<()>>) -> ProgFamily<()> {
    ProgFamily::new(format!("{name}({param})"), move |env| program(env[param].expect_int()))
}

pub fn small_examples() -> Vec<SmallExample> {
    let abs: Rc<dyn Fn(i64) -> Prog<()>> = Rc::new(compute_abs);
    let prime: Rc<dyn Fn(i64) -> Prog<()>> = Rc::new(any_prime);
    let fib = fibonacci();
    let fib: Rc<dyn Fn(i64) -> Prog<()>> = Rc::new(move |n| fib(&Value::Int(n)));
    let hail = hailstone();
    let hail: Rc<dyn Fn(i64) -> Prog<()>> = Rc::new(move |x| hail(&Value::Int(x)));
    vec![
        SmallExample {
            name: "compute_abs",
            param: "z",
            default: -7,
            claim_range: (-10, 10),
            program: abs.clone(),
            claim: Rc::new(move |lo, hi| {
                HoareTriple::new(
                    Binders::one("z", FiniteDomain::ints(lo..=hi)),
                    Pred::truth(),
                    family("compute_abs", "z", abs.clone()),
                    PostCond::value("r", "r = |z|", |env, r| r.expect_int() == env["z"].expect_int().abs()),
                )
            }),
        },
        SmallExample {
            name: "any_prime",
            param: "n",
            default: 20,
            claim_range: (0, 30),
            program: prime.clone(),
            claim: Rc::new(move |lo, hi| {
                HoareTriple::new(
                    Binders::one("n", FiniteDomain::ints(lo..=hi)),
                    Pred::truth(),
                    family("any_prime", "n", prime.clone()),
                    PostCond::value("r", "r ≤ n ∧ (r ≤ 1 ∨ prime(r))", |env, r| {
                        let r = r.expect_int();
                        r <= env["n"].expect_int() && (r <= 1 || is_prime(r))
                    }),
                )
            }),
        },
        SmallExample {
            name: "fibonacci",
            param: "n",
            default: 8,
            claim_range: (0, 12),
            program: fib.clone(),
            claim: Rc::new(move |lo, hi| {
                HoareTriple::new(
                    Binders::one("n", FiniteDomain::ints(lo..=hi)),
                    Pred::truth(),
                    family("fibonacci", "n", fib.clone()),
                    PostCond::value("r", "r = fib(n)", |env, r| r.expect_int() == fib_oracle(env["n"].expect_int())),
                )
            }),
        },
        SmallExample {
            name: "hailstone",
            param: "x",
            default: 6,
            claim_range: (1, 20),
            program: hail.clone(),
            claim: Rc::new(move |lo, hi| {
                HoareTriple::new(
                    Binders::one("x", FiniteDomain::ints(lo..=hi)),
                    x_at_least_one(),
                    family("hailstone", "x", hail.clone()),
                    PostCond::value("r", "r = 1", |_, r| r.expect_int() == 1),
                )
            }),
        },
    ]
}


#[cfg(test)]
mod vc_tests {
    use super::*;
    use crate::hoare::vc_gen;

    #[test]
    fn hailstone_goals() {
        let vcs = vc_gen(&hailstone_continue_triple(1, 100), &FiniteDomain::unit()).unwrap();
        let text: Vec<String> = vcs.iter().map(|v| v.render()).collect();
        assert_eq!(
            text,
            vec![
                "(∃k, x = 2k) ∧ x ≥ 1 ⟹ x/2 ≥ 1".to_string(),
                "x > 1 ∧ (∃k, x = 2k+1) ∧ x ≥ 1 ⟹ 3x+1 ≥ 1".to_string(),
            ]
        );
        for vc in &vcs {
            assert!(vc.discharge(&FiniteDomain::unit()).holds());
        }
    }
}
