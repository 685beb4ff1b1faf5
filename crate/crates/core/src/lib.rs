//! An executable state relation monad.
//!
//! Programs are syntax trees ([`kernel::Prog`]) over a user-chosen state type
//! whose meaning is a ternary relation between initial state, return value and
//! final state. Over finite domains the relation is computed exactly, which
//! makes Hoare triples, monad laws and program equivalences decidable by
//! enumeration. On top of that sit the proof engine ([`hoare`]), the variant
//! with errors ([`errmonad`]) and the worked case studies ([`casestudies`]).

pub mod casestudies;
pub mod errmonad;
pub mod fixpoint;
pub mod gen;
pub mod hoare;
pub mod kernel;
pub mod soundness;

pub use kernel::{
    denote, eval, Continuation, Denotation, Env, EvalContext, EvalError, Evaluation, FiniteDomain,
    Prog, State, Value,
};
