//! Hoare logic over the relational semantics.
//!
//! A triple `{P} c {Q}` holds when every outcome `(a, s2)` of `c` from a
//! state satisfying `P` satisfies `Q`. Triples are decided by enumeration
//! ([`check_triple`]), derived by rule application ([`ProofNode`] and
//! [`compose`]) or reduced to verification conditions ([`vc_gen`]).

mod assertion;
mod check;
mod loops;
mod normalize;
mod proof;
mod vcgen;

pub use assertion::{mentions_var, subst_var, Atom, Binders, PostAtom, PostCond, Pred, ProgFamily};
pub use check::{
    check_implication, check_implication_over, check_post_implication, check_triple,
    check_triple_from, check_value_cover, merge_reports, CheckReport, HoareTriple, ImplWitness,
    TripleWitness, Verdict,
};
pub use loops::{fix_rule_check, repeat_break_rule_check, spec_program, LoopRuleError};
pub use normalize::{equiv_check, equiv_check_family, normalize, shape};
pub use proof::{
    break_family, break_label, compose, compose_impl, compose_post_impl, continue_family,
    continue_label, range_guard, range_guard_label, triple_mentions, CheckEntry,
    CompositionError, EnvRelation, EnvStep, ImplProof, PostImplProof, ProofError, ProofNode,
    Prover, RangeIterRule, ValueExpr,
};
pub use vcgen::{vc_gen, FactOrigin, Vc, VcError};
