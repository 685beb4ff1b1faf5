mod common;

use proptest::prelude::*;

use relmonad::casestudies::dfs::all_graphs;
use relmonad::casestudies::kmp::{context_universe, KmpContext};
use relmonad::gen::Gen;

fn ok(r: Result<(), String>) -> Result<(), TestCaseError> {
    r.map_err(TestCaseError::fail)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn monad_laws(seed in any::<u64>()) {
        ok(common::monad_laws(seed))?;
    }

    #[test]
    fn normalize_preserves_denotation(seed in any::<u64>()) {
        ok(common::normalize_preserves(seed))?;
    }

    #[test]
    fn checker_matches_reachable_outcomes(seed in any::<u64>()) {
        ok(common::checker_matches_oracle(seed))?;
    }

    #[test]
    fn vcgen_agrees_with_checker(seed in any::<u64>()) {
        ok(common::vcgen_agrees(seed))?;
    }

    #[test]
    fn repeat_break_unrolls(seed in any::<u64>()) {
        ok(common::repeat_break_unrolls(seed))?;
    }

    #[test]
    fn range_loop_is_a_fold(seed in any::<u64>()) {
        ok(common::range_is_fold(seed))?;
    }

    #[test]
    fn errmonad_invariants(seed in any::<u64>()) {
        ok(common::errmonad_invariants(seed))?;
    }

    #[test]
    fn c1_c2_are_equivalent(seed in any::<u64>()) {
        ok(common::c1_c2_equiv(seed))?;
    }

    #[test]
    fn kmp_predicates_on_random_words(patn in "[ab]{1,3}", text in "[abc]{0,6}") {
        let c = KmpContext::with_oracle_next(&patn, &text).unwrap();
        common::kmp_predicates_agree(&c).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn dfs_on_two_vertex_graphs() {
    for g in all_graphs(2) {
        for u in 0..2 {
            common::dfs_matches_closure(&g, u).unwrap();
        }
    }
}

#[test]
fn dfs_on_random_four_vertex_graphs() {
    let mut gen = Gen::new(11);
    for _ in 0..5 {
        let g = common::random_graph(&mut gen, 4);
        common::dfs_matches_closure(&g, 0).unwrap();
    }
}

#[test]
fn kmp_predicates_on_small_universe() {
    for c in context_universe(&['a', 'b'], 2, 3) {
        common::kmp_predicates_agree(&c).unwrap();
    }
}

#[test]
fn closure_oracle() {
    let g = relmonad::casestudies::dfs::PreGraph::new(0..4, &[(0, 1), (1, 2), (3, 0)]).unwrap();
    assert_eq!(common::closure(&g, 0), [0, 1, 2].into());
    assert_eq!(common::closure(&g, 3), [0, 1, 2, 3].into());
    assert_eq!(common::closure(&g, 2), [2].into());
}
