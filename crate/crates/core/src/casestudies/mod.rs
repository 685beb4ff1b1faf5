//! Worked examples: small stateless programs, graph search and string
//! matching.

pub mod dfs;
pub mod kmp;
pub mod kmp_proof;
pub mod small;
