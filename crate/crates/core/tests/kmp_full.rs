use relmonad::casestudies::kmp::{context_universe, naive_first_occurrence, match_loop};
use relmonad::casestudies::kmp_proof::{kmp_proof_script, KmpProofConfig, GROUP_BOUND, GROUP_MATCH, GROUP_POST, GROUP_RANGE};
use relmonad::hoare::{check_triple, compose};
use relmonad::kernel::{eval, EvalContext, Value};

#[test]
fn full_bounds_proof_composes() {
    let cfg = KmpProofConfig::bounded(&['a', 'b'], 3, 5);
    let proof = kmp_proof_script(&cfg).unwrap();
    let checks = proof.checks();
    for g in [GROUP_RANGE, GROUP_MATCH, GROUP_BOUND, GROUP_POST] {
        assert!(checks.iter().any(|c| c.group == g), "no leaf in {g}");
    }
    assert!(checks.iter().all(|c| c.report.holds()));
    let t = compose(&proof).unwrap();
    assert_eq!(t.prog.label(), "match_loop");
    assert!(check_triple(&t, &cfg.contexts, &EvalContext::new()).unwrap().holds());
}

#[test]
fn match_loop_agrees_with_naive_search() {
    let p = match_loop();
    let ctx = EvalContext::new();
    for s in context_universe(&['a', 'b'], 3, 5) {
        let e = eval(&p, &s, &ctx).unwrap();
        assert!(e.complete);
        let vals: Vec<Value> = e.values().into_iter().collect();
        assert_eq!(vals.len(), 1, "{s:?}");
        match naive_first_occurrence(&s.patn, &s.text) {
            Some(r) => assert_eq!(vals[0], Value::by_break(Value::Int(r as i64))),
            None => assert!(vals[0].is_continue()),
        }
    }
}
