//! KMP matching: the context, the match programs, the predicate family
//! used by its proof, and brute-force oracles.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

use crate::fixpoint::{break_as, continue_, range_iter_break, repeat_break, RangeBody};
use crate::hoare::{PostCond, Pred};
use crate::kernel::{Env, FiniteDomain, Handle, Prog, Value};

pub const DEFAULT_FILLER: char = '#';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KmpError {
    #[error("the pattern is empty")]
    EmptyPattern,
}

/// Pattern, text and prefix table. Reads past the end give `default`
/// (characters) or 0 (table entries).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct KmpContext {
    pub patn: Vec<char>,
    pub text: Vec<char>,
    pub next: Vec<i64>,
    pub default: char,
}

impl fmt::Debug for KmpContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p: String = self.patn.iter().collect();
        let t: String = self.text.iter().collect();
        write!(f, "patn={p:?} text={t:?} next={:?}", self.next)
    }
}

fn slice<T: Clone>(l: &[T], a: i64, b: i64) -> Vec<T> {
    let lo = a.max(0) as usize;
    let hi = (b.max(0) as usize).min(l.len());
    if lo >= hi {
        Vec::new()
    } else {
        l[lo..hi].to_vec()
    }
}

impl KmpContext {
    pub fn new(patn: &str, text: &str, next: Vec<i64>) -> Self {
        KmpContext {
            patn: patn.chars().collect(),
            text: text.chars().collect(),
            next,
            default: DEFAULT_FILLER,
        }
    }

    /// A context whose table comes from `build_next_oracle`.
    pub fn with_oracle_next(patn: &str, text: &str) -> Result<Self, KmpError> {
        Ok(KmpContext::new(patn, text, build_next_oracle(patn)?))
    }

    pub fn patn_len(&self) -> i64 {
        self.patn.len() as i64
    }

    pub fn text_len(&self) -> i64 {
        self.text.len() as i64
    }

    pub fn next_len(&self) -> i64 {
        self.next.len() as i64
    }

    /// `nth j patn default`
    pub fn patn_at(&self, j: i64) -> char {
        usize::try_from(j).ok().and_then(|k| self.patn.get(k)).copied().unwrap_or(self.default)
    }

    /// `nth i text default`
    pub fn text_at(&self, i: i64) -> char {
        usize::try_from(i).ok().and_then(|k| self.text.get(k)).copied().unwrap_or(self.default)
    }

    /// `nth k next 0`
    pub fn next_at(&self, k: i64) -> i64 {
        usize::try_from(k).ok().and_then(|k| self.next.get(k)).copied().unwrap_or(0)
    }

    /// `patn[a..b]`, truncated to the list.
    pub fn patn_slice(&self, a: i64, b: i64) -> Vec<char> {
        slice(&self.patn, a, b)
    }

    /// `text[a..b]`, truncated to the list.
    pub fn text_slice(&self, a: i64, b: i64) -> Vec<char> {
        slice(&self.text, a, b)
    }

    pub fn jrange(&self, j: i64) -> bool {
        0 <= j && j < self.next_len()
    }

    /// `patn[0..j] = text[i-j..i]`
    pub fn partial_match(&self, i: i64, j: i64) -> bool {
        0 <= j && j <= i && self.patn_slice(0, j) == self.text_slice(i - j, i)
    }

    /// `patn[0..a]` is both a prefix and a suffix of `patn[0..b]`.
    pub fn presuffix(&self, a: i64, b: i64) -> bool {
        let (pa, pb) = (self.patn_slice(0, a), self.patn_slice(0, b));
        pb.starts_with(&pa) && pb.ends_with(&pa)
    }

    pub fn proper_presuffix(&self, a: i64, b: i64) -> bool {
        self.presuffix(a, b) && a < b
    }

    pub fn presuffix_bound(&self, a: i64, b: i64) -> bool {
        (0..b).all(|c| !self.proper_presuffix(c, b) || self.presuffix(c, a))
    }

    pub fn prefix_func(&self) -> bool {
        (0..self.next_len()).all(|i| {
            let n = self.next_at(i);
            self.proper_presuffix(n, i + 1) && self.presuffix_bound(n, i + 1)
        })
    }

    /// No occurrence starts in `[0, i - patn.len]`.
    pub fn no_occur(&self, i: i64) -> bool {
        let l = self.patn_len();
        (0..=i - l).all(|j| self.text_slice(j, j + l) != self.patn)
    }

    pub fn first_occur(&self, i: i64) -> bool {
        let l = self.patn_len();
        self.text_slice(i, i + l) == self.patn && self.no_occur(i + l - 1)
    }

    pub fn partial_bound(&self, i: i64, j: i64) -> bool {
        (0..=i).all(|z| !self.partial_match(i, z) || z <= j)
    }

    pub fn presuffix_inv(&self, i: i64, j: i64) -> bool {
        (1..=i + 1).all(|k| {
            !self.partial_match(i + 1, k) || (self.presuffix(k - 1, j) && self.patn_at(k - 1) == self.text_at(i))
        })
    }

    /// `∀k: jrange(k), next[k] ∈ [0, k]`
    pub fn next_in_range(&self) -> bool {
        (0..self.next_len()).all(|k| (0..=k).contains(&self.next_at(k)))
    }
}

/// `next[i]` is the length of the longest proper prefix of `patn[0..i+1]`
/// that is also its suffix, found by trying every candidate length.
pub fn build_next_oracle(patn: &str) -> Result<Vec<i64>, KmpError> {
    let p: Vec<char> = patn.chars().collect();
    if p.is_empty() {
        return Err(KmpError::EmptyPattern);
    }
    Ok((0..p.len())
        .map(|i| {
            let w = &p[..=i];
            (0..=i).rev().find(|&a| w.ends_with(&w[..a])).unwrap_or(0) as i64
        })
        .collect())
}

/// Index of the first occurrence of `patn` in `text`, by trying every
/// position.
pub fn naive_first_occurrence(patn: &[char], text: &[char]) -> Option<usize> {
    if patn.len() > text.len() {
        return None;
    }
    (0..=text.len() - patn.len()).find(|&r| text[r..r + patn.len()] == *patn)
}

/// Every word over `alphabet` with length in `lens`.
pub fn words(alphabet: &[char], lens: std::ops::RangeInclusive<usize>) -> Vec<String> {
    let mut out = Vec::new();
    for n in lens {
        let mut cur = vec![String::new()];
        for _ in 0..n {
            cur = cur
                .into_iter()
                .flat_map(|w| alphabet.iter().map(move |c| format!("{w}{c}")))
                .collect();
        }
        out.extend(cur);
    }
    out
}

/// All contexts with oracle tables for the given bounds.
pub fn context_universe(alphabet: &[char], max_patn: usize, max_text: usize) -> Vec<KmpContext> {
    let mut out = Vec::new();
    for p in words(alphabet, 1..=max_patn) {
        for t in words(alphabet, 0..=max_text) {
            out.push(KmpContext::with_oracle_next(&p, &t).expect("nonempty pattern"));
        }
    }
    out
}

pub fn context_domain(alphabet: &[char], max_patn: usize, max_text: usize) -> FiniteDomain<KmpContext> {
    FiniteDomain::new(context_universe(alphabet, max_patn, max_text))
}

/// The character the inner loop compares against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ch {
    Lit(char),
    /// `nth i text default`, read from the context.
    TextAt(i64),
}

impl Ch {
    fn get(&self, s: &KmpContext) -> char {
        match self {
            Ch::Lit(c) => *c,
            Ch::TextAt(i) => s.text_at(*i),
        }
    }

    fn label(&self) -> String {
        match self {
            Ch::Lit(c) => format!("'{c}'"),
            Ch::TextAt(_) => "text[i]".into(),
        }
    }
}

/// ```text
/// choice (assume (ch = nth j patn default);; break (j+1))
///        (assume (ch ≠ nth j patn default);;
///         choice (assume (j = 0);; break 0)
///                (assume (j ≠ 0);; continue (nth (j-1) next 0)))
/// ```
pub fn inner_body(ch: &Ch, j: i64) -> Prog<KmpContext> {
    let (c1, c2) = (ch.clone(), ch.clone());
    Prog::choice(
        Prog::assume(format!("{} = patn[j]", ch.label()), move |s: &KmpContext| c1.get(s) == s.patn_at(j))
            .seq(break_as(j + 1, "j+1")),
        Prog::assume(format!("{} ≠ patn[j]", ch.label()), move |s: &KmpContext| c2.get(s) != s.patn_at(j)).seq(
            Prog::choice(
                Prog::assume_pure("j = 0", j == 0).seq(break_as(0, "0")),
                Prog::assume_pure("j ≠ 0", j != 0).seq(
                    Prog::read("next[j-1]", move |s: &KmpContext| Value::Int(s.next_at((j - 1).max(0))))
                        .then("x ↦ continue x", |x| continue_(x.clone())),
                ),
            ),
        ),
    )
}

pub fn inner_loop(ch: &Ch) -> Handle<KmpContext> {
    let ch = ch.clone();
    repeat_break(format!("inner_loop({})", ch.label()), move |j: &Value| inner_body(&ch, j.expect_int()))
}

/// ```text
/// j' ← inner_loop (nth i text default) j;;
/// choice (assume (j' = length patn);; break (i - length patn + 1))
///        (assume (j' < length patn);; continue j')
/// ```
pub fn match_body(i: i64, j: i64) -> Prog<KmpContext> {
    inner_loop(&Ch::TextAt(i))(&Value::Int(j)).then("j' ↦ choice(…)", move |jp| {
        let jp = jp.expect_int();
        Prog::choice(
            Prog::assume("j' = patn.len", move |s: &KmpContext| jp == s.patn_len())
                .seq(Prog::read("i - patn.len + 1", move |s: &KmpContext| Value::Int((i - s.patn_len() + 1).max(0))))
                .then("r ↦ break r", |r| crate::fixpoint::break_(r.clone())),
            Prog::assume("j' < patn.len", move |s: &KmpContext| jp < s.patn_len()).seq(continue_(jp)),
        )
    })
}

/// `range_iter_break 0 (length text) match_body 0`, with the text length
/// read from the context first.
pub fn match_loop() -> Prog<KmpContext> {
    let body: RangeBody<KmpContext> = Rc::new(|i, j| match_body(i, j.expect_int()));
    Prog::read("text.len", |s: &KmpContext| Value::Int(s.text_len()))
        .then("n ↦ range_iter_break(0, n, match_body, 0)", move |n| {
            range_iter_break(0, n.expect_int(), body.clone(), Value::Int(0))
        })
}

/// An index expression over the environment, with its display text.
#[derive(Clone)]
pub struct Ix {
    pub text: String,
    f: Rc<dyn Fn(&Env) -> i64>,
}

impl Ix {
    pub fn var(name: &str) -> Self {
        let n = name.to_string();
        Ix {
            text: name.into(),
            f: Rc::new(move |env| env[&n].expect_int()),
        }
    }

    /// `name+k`
    pub fn plus(name: &str, k: i64) -> Self {
        let n = name.to_string();
        Ix {
            text: format!("{name}+{k}"),
            f: Rc::new(move |env| env[&n].expect_int() + k),
        }
    }

    pub fn lit(k: i64) -> Self {
        Ix {
            text: k.to_string(),
            f: Rc::new(move |_| k),
        }
    }

    pub fn eval(&self, env: &Env) -> i64 {
        (self.f)(env)
    }
}

fn pred1(name: &str, a: &Ix, test: fn(&KmpContext, i64) -> bool) -> Pred<KmpContext> {
    let a = a.clone();
    Pred::new(format!("{name}({})", a.text), move |env, s| test(s, a.eval(env)))
}

fn pred2(name: &str, a: &Ix, b: &Ix, test: fn(&KmpContext, i64, i64) -> bool) -> Pred<KmpContext> {
    let (a, b) = (a.clone(), b.clone());
    Pred::new(format!("{name}({}, {})", a.text, b.text), move |env, s| {
        test(s, a.eval(env), b.eval(env))
    })
}

/// Labeled assertions over the context, one per predicate.
pub mod preds {
    use super::*;

    pub fn jrange(j: &Ix) -> Pred<KmpContext> {
        pred1("jrange", j, KmpContext::jrange)
    }

    pub fn partial_match(i: &Ix, j: &Ix) -> Pred<KmpContext> {
        pred2("partial_match", i, j, KmpContext::partial_match)
    }

    pub fn partial_bound(i: &Ix, j: &Ix) -> Pred<KmpContext> {
        pred2("partial_bound", i, j, KmpContext::partial_bound)
    }

    pub fn presuffix_inv(i: &Ix, j: &Ix) -> Pred<KmpContext> {
        pred2("presuffix_inv", i, j, KmpContext::presuffix_inv)
    }

    pub fn no_occur(i: &Ix) -> Pred<KmpContext> {
        pred1("no_occur", i, KmpContext::no_occur)
    }

    pub fn prefix_func() -> Pred<KmpContext> {
        Pred::state("prefix_func(next)", KmpContext::prefix_func)
    }

    pub fn next_in_range() -> Pred<KmpContext> {
        Pred::state("∀k: jrange(k), next[k] ∈ [0, k]", KmpContext::next_in_range)
    }

    pub fn patn_nonempty() -> Pred<KmpContext> {
        Pred::state("patn ≠ nil", |s: &KmpContext| !s.patn.is_empty())
    }

    pub fn same_len() -> Pred<KmpContext> {
        Pred::state("patn.len = next.len", |s: &KmpContext| s.patn.len() == s.next.len())
    }

    pub fn next_le_patn() -> Pred<KmpContext> {
        Pred::state("next.len ≤ patn.len", |s: &KmpContext| s.next.len() <= s.patn.len())
    }

    /// `x ∈ [0, text.len)`
    pub fn in_text(x: &Ix) -> Pred<KmpContext> {
        let x = x.clone();
        Pred::new(format!("{} ∈ [0, text.len)", x.text), move |env, s: &KmpContext| {
            (0..s.text_len()).contains(&x.eval(env))
        })
    }

    /// `x ∈ [0, patn.len]`
    pub fn in_patn(x: &Ix) -> Pred<KmpContext> {
        let x = x.clone();
        Pred::new(format!("{} ∈ [0, patn.len]", x.text), move |env, s: &KmpContext| {
            (0..=s.patn_len()).contains(&x.eval(env))
        })
    }

    /// `n = text.len`
    pub fn is_text_len(n: &str) -> Pred<KmpContext> {
        let n = n.to_string();
        Pred::new(format!("{n} = text.len"), move |env, s: &KmpContext| env[&n].expect_int() == s.text_len())
    }

    pub fn first_occur(var: &str) -> PostCond<KmpContext> {
        PostCond::new(var, format!("first_occur({var})"), |_, v, s: &KmpContext| {
            s.first_occur(v.expect_int())
        })
    }

    /// The end-to-end postcondition of the match loop.
    pub fn match_post() -> PostCond<KmpContext> {
        PostCond::new(
            "r",
            "case r: by_break(i) ⇒ first_occur(i) | by_continue(_) ⇒ no_occur(text.len)",
            |_, r, s: &KmpContext| match r {
                Value::Break(b) => s.first_occur(b.expect_int()),
                Value::Continue(_) => s.no_occur(s.text_len()),
                _ => false,
            },
        )
    }

    /// `patn ≠ nil ∧ patn.len = next.len ∧ prefix_func(next)`
    pub fn match_pre() -> Pred<KmpContext> {
        patn_nonempty().and(&same_len()).and(&prefix_func())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{eval, EvalContext};

    fn run(p: &Prog<KmpContext>, s: &KmpContext) -> Vec<Value> {
        let e = eval(p, s, &EvalContext::new()).unwrap();
        assert!(e.complete);
        assert!(e.outcomes.iter().all(|(_, s2)| s2 == s));
        e.values().into_iter().collect()
    }

    #[test]
    fn oracle_tables() {
        assert_eq!(build_next_oracle("aa").unwrap(), vec![0, 1]);
        assert_eq!(build_next_oracle("ab").unwrap(), vec![0, 0]);
        assert_eq!(build_next_oracle("b").unwrap(), vec![0]);
        assert_eq!(build_next_oracle("abab").unwrap(), vec![0, 0, 1, 2]);
        assert_eq!(build_next_oracle(""), Err(KmpError::EmptyPattern));
    }

    #[test]
    fn oracle_tables_are_prefix_functions() {
        for p in words(&['a', 'b'], 1..=4) {
            assert!(KmpContext::with_oracle_next(&p, "").unwrap().prefix_func(), "{p}");
        }
        assert!(!KmpContext::new("ab", "", vec![0, 1]).prefix_func());
    }

    #[test]
    fn universe_size() {
        assert_eq!(context_universe(&['a', 'b'], 3, 5).len(), 14 * 63);
    }

    #[test]
    fn match_examples() {
        let s = KmpContext::with_oracle_next("ab", "cab").unwrap();
        assert_eq!(run(&match_loop(), &s), vec![Value::by_break(Value::Int(1))]);
        let s = KmpContext::with_oracle_next("ab", "bbb").unwrap();
        let out = run(&match_loop(), &s);
        assert_eq!(out.len(), 1);
        assert!(out[0].is_continue());
        assert!(s.no_occur(3));
    }

    #[test]
    fn inner_body_match_branch_only() {
        let s = KmpContext::with_oracle_next("ab", "").unwrap();
        assert_eq!(run(&inner_body(&Ch::Lit('b'), 1), &s), vec![Value::by_break(Value::Int(2))]);
        assert_eq!(run(&inner_body(&Ch::Lit('a'), 1), &s), vec![Value::by_continue(Value::Int(0))]);
        assert_eq!(run(&inner_body(&Ch::Lit('b'), 0), &s), vec![Value::by_break(Value::Int(0))]);
    }

    #[test]
    fn match_agrees_with_naive_search() {
        let p = match_loop();
        for s in context_universe(&['a', 'b'], 3, 5) {
            let out = run(&p, &s);
            assert_eq!(out.len(), 1, "{s:?}");
            match naive_first_occurrence(&s.patn, &s.text) {
                Some(r) => assert_eq!(out[0], Value::by_break(Value::Int(r as i64)), "{s:?}"),
                None => assert!(out[0].is_continue(), "{s:?}"),
            }
        }
    }

    #[test]
    fn predicate_spot_checks() {
        let s = KmpContext::with_oracle_next("aba", "xaba").unwrap();
        assert!(s.partial_match(2, 1));
        assert!(s.partial_match(4, 3));
        assert!(!s.partial_match(3, 3));
        assert!(s.presuffix(1, 3));
        assert!(s.proper_presuffix(1, 3));
        assert!(!s.presuffix(2, 3));
        assert!(s.first_occur(1));
        assert!(s.no_occur(3));
        assert!(!s.no_occur(4));
        assert!(s.partial_bound(4, 3));
        assert!(s.jrange(2) && !s.jrange(3));
    }
}
