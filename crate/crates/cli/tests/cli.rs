use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn fx(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn toffa(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("toffa").chain(args.iter().copied());
    let code = toffa_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn json(args: &[&str]) -> Value {
    let mut a = args.to_vec();
    a.extend(["--format", "structured"]);
    let (code, out, err) = toffa(&a);
    assert_eq!(code, 0, "{err}");
    serde_json::from_str(&out).unwrap()
}

#[test]
fn optimize_prints_the_configuration_and_objective() {
    let (code, out, _) = toffa(&[
        "optimize",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "F1 = {f0, f1, f2, ¬f3, f4, f5, ¬f6, f7, f8, ¬f9, f10}\nobjective = 3.85\n"
    );
}

#[test]
fn top_k_lists_runners_up() {
    let (_, out, _) = toffa(&[
        "optimize",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
        "--top-k",
        "6",
    ]);
    let labels: Vec<&str> = out.lines().filter(|l| l.starts_with('F')).collect();
    assert_eq!(labels.len(), 6);
    assert!(labels[5].starts_with("F6 = "));
}

#[test]
fn ccfs_lists_six_states() {
    let (code, out, _) = toffa(&["ccfs", &fx("gridstix.toffa")]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "ccf1 = {c3, c7}\nccf2 = {c4, c7}\nccf3 = {c5, c7}\nccf4 = {c3, c8}\nccf5 = {c4, c8}\nccf6 = {c5, c8}\n"
    );
}

#[test]
fn check_names_the_faulty_features() {
    let (code, out, _) = toffa(&["check", &fx("gridstix.toffa")]);
    assert_eq!(code, 0);
    let ccf1: Vec<&str> = out.lines().filter(|l| l.contains(": ccf1:")).collect();
    assert_eq!(ccf1.len(), 2);
    assert!(ccf1[0].contains("feature f3"));
    assert!(ccf1[1].contains("feature f9"));
}

#[test]
fn validate_accepts_every_fixture_model() {
    for m in ["gridstix.toffa", "gridstix-ccf.toffa", "minimal.toffa"] {
        let (code, out, _) = toffa(&["validate", &fx(m)]);
        assert_eq!((code, out.as_str()), (0, "ok\n"), "{m}");
    }
}

#[test]
fn invalid_models_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toffa");
    std::fs::write(
        &bad,
        "feature f0 \"R\" root\nfeature f1 \"A\" mandatory of f0\ngoal g1 \"G\"\nhardgoal h1 of g1 or binds f1\n",
    )
    .unwrap();
    let (code, out, _) = toffa(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.starts_with("error["), "{out}");
    let (code, _, err) = toffa(&["ccfs", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("model has errors"));

    std::fs::write(&bad, "feature f0 \"R\" rot\n").unwrap();
    let (code, _, err) = toffa(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("line 1"), "{err}");
    let (code, _, _) = toffa(&["validate", "/no/such/file.toffa"]);
    assert_eq!(code, 1);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(toffa(&["frobnicate"]).0, 2);
    assert_eq!(toffa(&["optimize", &fx("gridstix.toffa")]).0, 2);
    assert_eq!(
        toffa(&["ccfs", &fx("gridstix.toffa"), "--format", "dot"]).0,
        2
    );
    let (code, out, _) = toffa(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("adapt-model"));
}

#[test]
fn prioritize_shows_weights_and_consistency() {
    let (_, out, _) = toffa(&[
        "prioritize",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
    ]);
    assert!(out.contains("goal      g2   0.50    bst"), "{out}");
    assert!(out.contains("softgoal  sg1  0.60    ahp"), "{out}");
    assert!(out.ends_with("lambda_max = 3.00  CI = 0.00  CR = 0.00  consistent\n"));
}

#[test]
fn utility_table_matches_the_worked_values() {
    let (_, out, _) = toffa(&[
        "utility",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
    ]);
    let rows: Vec<Vec<&str>> = out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().collect())
        .collect();
    let utility: Vec<(&str, &str)> = rows.iter().map(|r| (r[0], r[4])).collect();
    assert_eq!(
        utility,
        [
            ("f2", "1.67"),
            ("f3", "-0.10"),
            ("f5", "0.60"),
            ("f6", "0.40"),
            ("f8", "1.58"),
            ("f9", "-0.68")
        ]
    );
}

#[test]
fn several_scenarios_are_only_for_tradeoff() {
    let (code, _, err) = toffa(&[
        "optimize",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("tradeoffs.scn"),
    ]);
    assert_eq!(code, 1);
    assert!(err.contains("P1, P2"));
    let c = json(&[
        "tradeoff",
        &fx("gridstix-ccf.toffa"),
        "--scenario",
        &fx("tradeoffs.scn"),
    ]);
    assert_eq!(c["results"].as_array().unwrap().len(), 6);
}

#[test]
fn structured_output_shares_the_service_documents() {
    let v = json(&[
        "optimize",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
    ]);
    let doc: toffa_service::api::OptimizeDoc = serde_json::from_value(v).unwrap();
    assert_eq!(
        doc.ranked[0].notation,
        "{f0, f1, f2, ¬f3, f4, f5, ¬f6, f7, f8, ¬f9, f10}"
    );

    let v = json(&[
        "tradeoff",
        &fx("gridstix-ccf.toffa"),
        "--scenario",
        &fx("table9.scn"),
    ]);
    let doc: toffa_service::api::TradeoffDoc = serde_json::from_value(v).unwrap();
    assert_eq!(doc.ccf_map.len(), 6);
    assert_eq!(doc.result.scenario, "ccf-analysis");

    let v = json(&["ccfs", &fx("gridstix.toffa")]);
    assert_eq!(v["count"], 6);
}

#[test]
fn adaptation_model_as_graph() {
    let (code, out, _) = toffa(&[
        "adapt-model",
        &fx("gridstix-ccf.toffa"),
        "--scenario",
        &fx("table9.scn"),
        "--format",
        "dot",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("digraph adaptation {"));
    assert_eq!(out.matches(" -> ").count(), 14);
    assert!(out.contains("\"F1\" [shape=doublecircle"));

    let (code, out, _) = toffa(&[
        "adapt-model",
        &fx("gridstix-ccf.toffa"),
        "--scenario",
        &fx("table9.scn"),
        "--initial",
        "F3",
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("initial F3\n"));
    let (code, _, _) = toffa(&[
        "adapt-model",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("table9.scn"),
        "--initial",
        "F7",
    ]);
    assert_eq!(code, 1);
}

#[test]
fn strict_mode_can_make_a_state_infeasible() {
    let (code, out, _) = toffa(&[
        "tradeoff",
        &fx("gridstix.toffa"),
        "--scenario",
        &fx("base.scn"),
        "--strict-context-constraints",
    ]);
    assert_eq!(code, 0);
    assert!(out.contains("ccf1 conflict:"), "{out}");
}

#[test]
fn binary_honors_the_node_limit() {
    let bin = env!("CARGO_BIN_EXE_toffa");
    let base = [
        "optimize".to_string(),
        fx("gridstix.toffa"),
        "--scenario".into(),
        fx("base.scn"),
    ];
    let ok = Command::new(bin).args(&base).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("objective = 3.85"));

    let capped = Command::new(bin)
        .args(&base)
        .env("TOFFA_NODE_LIMIT", "3")
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("search stopped after 3 nodes"));

    let usage = Command::new(bin).arg("optimize").output().unwrap();
    assert_eq!(usage.status.code(), Some(2));
}
