use std::process::Command as Proc;

use relmonad_cli::{cmd_check, cmd_list, cmd_prove, cmd_run, cmd_vcgen, CliError, Format, Report, RunManifest};
use serde_json::Value as Json;

fn bin() -> Proc {
    let mut c = Proc::new(env!("CARGO_BIN_EXE_relmonad"));
    c.env_remove("RELMONAD_DEFAULT_FUEL");
    c
}

fn exit_of(args: &[&str]) -> i32 {
    bin().args(args).output().unwrap().status.code().unwrap()
}

/// The JSON report without the timing field.
fn stable_json(report: &str) -> Json {
    let mut v: Json = serde_json::from_str(report).unwrap();
    v["stats"].as_object_mut().unwrap().remove("wall_ms");
    v
}

fn json_of(args: &[&str]) -> (i32, Json) {
    let out = bin().args(args).args(["--format", "json"]).output().unwrap();
    (out.status.code().unwrap(), stable_json(&String::from_utf8(out.stdout).unwrap()))
}

fn leaf_labels(r: &Report) -> Vec<&str> {
    r.leaves.iter().map(|l| l.label.as_str()).collect()
}

#[test]
fn run_hailstone_golden() {
    let (code, v) = json_of(&["run", "--target", "hailstone", "--param", "x=6"]);
    assert_eq!(code, 0);
    let expected: Json = serde_json::from_str(
        r#"{"target": "hailstone", "verdict": "complete", "leaves": [],
            "conclusion": "hailstone(x = 6)", "outcomes": ["1"],
            "stats": {"states": 1, "iterations": 18}}"#,
    )
    .unwrap();
    assert_eq!(v, expected);
}

#[test]
fn run_dfs_on_the_path() {
    let r = cmd_run(&RunManifest::new("dfs")).unwrap();
    assert_eq!(r.outcomes, Some(vec!["visited={a,b,c}".to_string()]));
    assert_eq!(r.verdict, "complete");
    let r = cmd_run(&RunManifest::new("dfs").param("start", "b")).unwrap();
    assert_eq!(r.outcomes, Some(vec!["visited={b,c}".to_string()]));
}

#[test]
fn run_compute_abs_zero() {
    let r = cmd_run(&RunManifest::new("compute_abs").param("z", "0")).unwrap();
    assert_eq!(r.outcomes, Some(vec!["0".to_string()]));
}

#[test]
fn run_kmp_single_context() {
    let r = cmd_run(&RunManifest::new("kmp").param("patn", "ab").param("text", "aab")).unwrap();
    assert_eq!(r.outcomes, Some(vec!["by_break(1)".to_string()]));
    let r = cmd_run(&RunManifest::new("kmp").param("patn", "ab").param("text", "bbb")).unwrap();
    assert_eq!(r.outcomes.unwrap().len(), 1);
}

#[test]
fn check_hailstone_positivity_holds() {
    let r = cmd_check(&RunManifest::new("hailstone-positivity")).unwrap();
    assert_eq!(r.verdict, "holds");
    assert_eq!(r.stats.states, 20);
    assert_eq!(exit_of(&["check", "--target", "hailstone-positivity"]), 0);
}

#[test]
fn false_postcondition_gives_counterexample() {
    let r = cmd_check(&RunManifest::new("compute_abs").param("post", "positive")).unwrap();
    assert_eq!(r.verdict, "counterexample");
    let w = r.leaves[0].witness.as_deref().unwrap();
    assert_eq!(w, "with {z = 0}: from () returns 0 in ()");
    assert_eq!(exit_of(&["check", "--target", "compute_abs", "--param", "post=positive"]), 1);
}

#[test]
fn low_fuel_is_inconclusive_never_holds() {
    let mut m = RunManifest::new("fibonacci");
    m.fuel = Some(2);
    let r = cmd_check(&m).unwrap();
    assert_eq!(r.verdict, "inconclusive");
    assert_eq!(exit_of(&["check", "--target", "fibonacci", "--fuel", "2"]), 2);
    assert_eq!(exit_of(&["check", "--target", "fibonacci"]), 0);
}

#[test]
fn default_fuel_from_environment() {
    let out = bin().args(["check", "--target", "fibonacci"]).env("RELMONAD_DEFAULT_FUEL", "2").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin()
        .args(["check", "--target", "fibonacci", "--fuel", "1000"])
        .env("RELMONAD_DEFAULT_FUEL", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = bin().args(["check", "--target", "fibonacci"]).env("RELMONAD_DEFAULT_FUEL", "lots").output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn vcgen_hailstone_goals() {
    let r = cmd_vcgen(&RunManifest::new("hailstone-continue").param("hi", "100")).unwrap();
    assert_eq!(
        leaf_labels(&r),
        vec!["(∃k, x = 2k) ∧ x ≥ 1 ⟹ x/2 ≥ 1", "x > 1 ∧ (∃k, x = 2k+1) ∧ x ≥ 1 ⟹ 3x+1 ≥ 1"]
    );
    assert_eq!(r.verdict, "holds");
    let r = cmd_vcgen(&RunManifest::new("hailstone-continue").param("discharge", "false")).unwrap();
    assert_eq!(r.verdict, "generated");
    assert!(r.leaves.iter().all(|l| l.verdict == "pending"));
}

#[test]
fn vcgen_ret_gives_one_goal() {
    let r = cmd_vcgen(&RunManifest::new("ret-example")).unwrap();
    assert_eq!(leaf_labels(&r), vec!["x ≥ 0 ⟹ x+1 ≥ 1"]);
    assert_eq!(r.verdict, "holds");
}

#[test]
fn prove_dfs_small_graphs() {
    let r = cmd_prove(&RunManifest::new("dfs")).unwrap();
    assert_eq!(r.verdict, "holds", "{}", r.to_text());
    assert_eq!(r.conclusion.as_deref(), Some("{(stack = nil ∧ visited = ∅)} dfs(0) {visited = reach(0)}"));
    let cyc = RunManifest::new("dfs").param("vertices", "a,b,c").param("edges", "a->b,b->c,c->a").param("start", "c");
    assert_eq!(cmd_prove(&cyc).unwrap().verdict, "holds");
    let r = cmd_check(&cyc).unwrap();
    assert_eq!(r.verdict, "holds");
    assert_eq!(r.leaves.len(), 2);
}

#[test]
fn prove_kmp_reports_all_groups() {
    let r = cmd_prove(&RunManifest::new("kmp").param("max_patn", "2").param("max_text", "3")).unwrap();
    assert_eq!(r.verdict, "holds");
    for g in ["Group 1: range", "Group 2: partial match", "Group 3: partial bound", "Group 4: post loop"] {
        assert!(r.leaves.iter().any(|l| l.group == g), "missing {g}");
    }
    let firsts: Vec<&str> = r.leaves.iter().map(|l| l.group.as_str()).collect();
    let g1_last = firsts.iter().rposition(|g| g.starts_with("Group 1")).unwrap();
    let g2_first = firsts.iter().position(|g| g.starts_with("Group 2")).unwrap();
    assert!(g1_last < g2_first);
    assert!(r.conclusion.unwrap().contains("match_loop"));
}

#[test]
fn prove_kmp_corrupted_table_fails_in_group_one() {
    let m = RunManifest::new("kmp").param("patn", "ab").param("text", "aab").param("next", "0,2");
    let r = cmd_prove(&m).unwrap();
    assert_eq!(r.verdict, "counterexample");
    let bad = r.leaves.iter().find(|l| l.verdict == "counterexample").unwrap();
    assert_eq!(bad.group, "Group 1: range");
    assert!(bad.witness.as_deref().unwrap().contains("next=[0, 2]"));
    assert_eq!(exit_of(&["prove", "--target", "kmp", "--param", "patn=ab", "--param", "next=0,2"]), 1);
}

#[test]
fn prove_rules_suite() {
    let r = cmd_prove(&RunManifest::new("rules").param("instances", "10")).unwrap();
    assert_eq!(r.verdict, "holds");
    assert_eq!(r.leaves.len(), 12);
}

#[test]
fn usage_errors_exit_three() {
    assert_eq!(exit_of(&["check", "--target", "nope"]), 3);
    assert_eq!(exit_of(&["check", "--target", "compute_abs", "--param", "post=bogus"]), 3);
    assert_eq!(exit_of(&["run", "--target", "hailstone", "--param", "x=six"]), 3);
    assert_eq!(exit_of(&["run", "--target", "hailstone", "--param", "y=1"]), 3);
    assert_eq!(exit_of(&["prove", "--target", "hailstone"]), 3);
    assert_eq!(exit_of(&["run"]), 3);
    assert_eq!(exit_of(&["frobnicate"]), 3);
    assert_eq!(exit_of(&["run", "--target", "hailstone", "--param", "x"]), 3);
}

#[test]
fn typed_errors() {
    assert_eq!(cmd_run(&RunManifest::new("nope")), Err(CliError::UnknownTarget("nope".into())));
    assert!(matches!(
        cmd_check(&RunManifest::new("compute_abs").param("pre", "prime")),
        Err(CliError::UnknownPredicate { .. })
    ));
    assert!(matches!(
        cmd_run(&RunManifest::new("dfs").param("edges", "a->z")),
        Err(CliError::InvalidParameter { .. })
    ));
}

#[test]
fn out_of_cap_bounds_are_rejected() {
    let mut m = RunManifest::new("dfs").param("vertices", "a,b,c,d");
    m.state_cap = Some(100);
    assert!(matches!(cmd_run(&m), Err(CliError::StateSpaceTooLarge { cap: 100, .. })));
    let m = RunManifest::new("kmp").param("max_patn", "6").param("max_text", "9");
    assert!(matches!(cmd_prove(&m), Err(CliError::StateSpaceTooLarge { .. })));
    assert_eq!(exit_of(&["check", "--target", "compute_abs", "--param", "hi=1000000"]), 3);
}

#[test]
fn reports_are_deterministic() {
    let args = ["prove", "--target", "dfs", "--param", "edges=a->b,b->a,b->c"];
    let (code1, a) = json_of(&args);
    let (code2, b) = json_of(&args);
    assert_eq!((code1, code2), (0, 0));
    assert_eq!(a, b);
    let first = bin().args(["check", "--target", "compute_abs"]).output().unwrap().stdout;
    let second = bin().args(["check", "--target", "compute_abs"]).output().unwrap().stdout;
    let strip = |s: Vec<u8>| String::from_utf8(s).unwrap().lines().filter(|l| !l.starts_with("stats:")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(first), strip(second));
}

#[test]
fn manifest_file_and_out_path() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("m.json");
    let out = dir.path().join("report.json");
    std::fs::write(
        &manifest,
        format!(r#"{{"target": "hailstone", "params": {{"x": "27"}}, "format": "json", "out": {:?}}}"#, out),
    )
    .unwrap();
    let status = bin().args(["run", "--manifest"]).arg(&manifest).output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let v = stable_json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(v["outcomes"], serde_json::json!(["1"]));
    let over = bin().args(["run", "--manifest"]).arg(&manifest).args(["--param", "x=1", "--out"]).arg(&out).output().unwrap();
    assert_eq!(over.status.code(), Some(0));
    assert_eq!(stable_json(&std::fs::read_to_string(&out).unwrap())["conclusion"], "hailstone(x = 1)");
    std::fs::write(&manifest, r#"{"target": "hailstone", "typo": 1}"#).unwrap();
    assert_eq!(bin().args(["run", "--manifest"]).arg(&manifest).output().unwrap().status.code(), Some(3));
}

#[test]
fn list_names_every_target() {
    let text = cmd_list(Format::Text);
    for t in ["compute_abs", "any_prime", "fibonacci", "hailstone", "hailstone-positivity", "hailstone-continue", "dfs", "kmp", "rules"] {
        assert!(text.contains(t), "{t}");
    }
    let v: Json = serde_json::from_str(&cmd_list(Format::Json)).unwrap();
    assert!(v.as_array().unwrap().len() >= 9);
    let out = bin().arg("list").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}
