use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value as Json;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gamma-ultra"))
        .args(args)
        .env_remove("GAMMA_ULTRA_SEED")
        .output()
        .expect("the binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 output")
}

/// Run with `--json` and parse the single record.
fn record(args: &[&str]) -> Json {
    let mut all = args.to_vec();
    all.push("--json");
    let out = run(&all);
    assert!(out.status.success(), "{args:?}: {}", stderr(&out));
    serde_json::from_str(stdout(&out).trim()).expect("one JSON record")
}

#[test]
fn example_report_matches_the_golden_file() {
    let out = run(&["examples"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let golden = std::fs::read_to_string(data("examples.golden.jsonl")).unwrap();
    assert_eq!(stdout(&out), golden);
    assert!(stderr(&out).contains("22/22 examples pass"));
}

#[test]
fn example_report_is_reproducible_and_sorted() {
    let (a, b) = (run(&["examples", "--json"]), run(&["examples", "--json"]));
    assert_eq!(stdout(&a), stdout(&b));
    let ids: Vec<String> = stdout(&a)
        .lines()
        .map(|l| serde_json::from_str::<Json>(l).unwrap()["id"].as_str().unwrap().to_string())
        .collect();
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    for line in stdout(&a).lines() {
        let r: Json = serde_json::from_str(line).unwrap();
        assert_eq!(r["status"], "pass", "{line}");
        assert_eq!(r["expected"], r["computed"]);
        assert!(r.get("elapsed_ms").is_none());
    }
}

#[test]
fn examples_can_be_filtered_and_timed() {
    let out = run(&["examples", "--id", "z4-vs-klein", "--id", "inv-tail-sum", "--timings"]);
    assert!(out.status.success());
    let lines: Vec<Json> = stdout(&out).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["id"], "inv-tail-sum");
    assert_eq!(lines[1]["id"], "z4-vs-klein");
    assert!(lines[0]["elapsed_ms"].is_u64());
    let bad = run(&["examples", "--id", "no-such-example"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("no-such-example"));
}

#[test]
fn examples_list_names_every_id() {
    let out = run(&["examples", "--list"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 22);
    assert!(stdout(&out).contains("order-two-divisible"));
}

#[test]
fn eval_decides_sentences_in_finite_groups() {
    let r = record(&["eval", "--structure", &data("z4.json"), "--formula", "exists x. 2*x = 0 & ~(x = 0)"]);
    assert_eq!(r["value"], true);
    let r = record(&["eval", "--structure", &data("z2.json"), "--formula", "forall x. x + x = 0"]);
    assert_eq!(r["value"], true);
    let r = record(&["eval", "--structure", &data("z4.json"), "--formula", "forall x. x + x = 0"]);
    assert_eq!(r["value"], false);
}

#[test]
fn eval_trace_enumerates_the_outer_quantifier() {
    let r = record(&["eval", "--structure", &data("z4.json"), "--formula", "exists x. 2*x = 0 & ~(x = 0)", "--trace"]);
    let trace: Vec<&str> = r["trace"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
    assert_eq!(trace, ["exists x over 4 elements", "x = 0: false", "x = 1: false", "x = 2: true", "x = 3: false"]);
}

#[test]
fn eval_takes_assignments() {
    let z4 = data("z4.json");
    assert_eq!(record(&["eval", "--structure", &z4, "--formula", "2*x = 0", "--assign", "x=2"])["value"], true);
    assert_eq!(record(&["eval", "--structure", &z4, "--formula", "2*x = 0", "--assign", "x=1"])["value"], false);
    let tail = data("tail_sum.json");
    let r = record(&["eval", "--structure", &tail, "--formula", "2^1 | x", "--assign", "x=[[0,1,2]]"]);
    assert_eq!(r["value"], true);
    let r = record(&["eval", "--structure", &tail, "--formula", "2^1 | x", "--assign", "x=[[0,1,1]]"]);
    assert_eq!(r["value"], false);
}

#[test]
fn eval_reports_undecidable_formulas_as_undecided() {
    let r = record(&["eval", "--structure", &data("tail_sum.json"), "--formula", "forall y. exists z. y = 2*z"]);
    assert!(r["value"]["undecided"].is_string(), "{r}");
}

#[test]
fn eval_decides_invariants_sentences_on_presentations() {
    // Inv(x = x, 2^1 | x) >= 2: a 2-adic quotient of order at least 2.
    let sentence = "exists v0. exists v1. (v0 = v0 & v1 = v1 & ~(2^1 | v1 + -v0))";
    let r = record(&["eval", "--structure", &data("z4_torsion.json"), "--formula", sentence, "--trace"]);
    assert_eq!(r["value"], true, "{r}");
    assert!(r["trace"][0].as_str().unwrap().starts_with("invariants sentence"));
    let r = record(&["eval", "--structure", &data("z3_torsion.json"), "--formula", sentence]);
    assert_eq!(r["value"], false, "{r}");
}

#[test]
fn inv_reports_capped_values_with_a_component_trace() {
    let r = record(&["inv", "--structure", &data("tail_sum.json"), "--phi", "x = x", "--psi", "2^1 | x", "--cap", "8", "--trace"]);
    assert_eq!(r["value"]["kind"], "infinite");
    assert_eq!(r["trace"].as_array().unwrap().len(), 1);
    let r = record(&["inv", "--structure", &data("z2_z4_torsion.json"), "--phi", "x = x", "--psi", "2^1 | x", "--trace"]);
    assert_eq!(r["value"], serde_json::json!({"kind": "finite", "value": [4]}));
    assert_eq!(r["trace"].as_array().unwrap().len(), 2);
    let r = record(&["inv", "--structure", &data("z4.json"), "--phi", "x = x", "--psi", "2^1 | x"]);
    assert_eq!(r["value"], serde_json::json!({"kind": "finite", "value": [2]}));
}

#[test]
fn member_of_the_two_power_family() {
    let seq = format!("@{}", data("order_two_sequence.json"));
    let r = record(&["member", "--context", &data("two_power_context.json"), "--sequence", &seq, "--divides", "2^5"]);
    assert_eq!(r["membership"]["verdict"], "member");
    assert_eq!(r["tor"]["verdict"], "member");
    assert_eq!(r["tor"]["order"], serde_json::json!([2]));
    assert_eq!(r["divides"]["verdict"]["verdict"], "holds");
    assert_eq!(r["divides"]["verdict"]["witness_order"], serde_json::json!([64]));
}

#[test]
fn member_in_the_two_adic_ultrapower() {
    let ctx = data("two_adic_context.json");
    let seq = format!("@{}", data("powers_of_two.json"));
    let r = record(&["member", "--context", &ctx, "--sequence", &seq]);
    assert_eq!(r["membership"]["verdict"], "not_member");
    assert_eq!(r["membership"]["certificates"].as_array().unwrap().len(), 8);
    let one = r#"{"tail":{"kind":"const","value":1}}"#;
    let odd = r#"{"tail":{"kind":"geometric","a":1,"c":2,"d":-1}}"#;
    assert_eq!(record(&["member", "--context", &ctx, "--sequence", one])["membership"]["verdict"], "member");
    let r = record(&["member", "--context", &ctx, "--sequence", one, "--plus", odd]);
    assert_eq!(r["membership"]["verdict"], "not_member");
    let bad = run(&["member", "--context", &ctx, "--sequence", one, "--divides", "2^1"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn hull_and_closure_of_the_escape_structure() {
    let esc = data("escape.json");
    let r = record(&["hull", "--structure", &esc, "--type", "~R(x)"]);
    assert_eq!(r["closed"], false);
    assert_eq!(r["hull"]["elements"], serde_json::json!(["a"]));
    let r = record(&["closed-check", "--structure", &esc, "--type", "~R(x)"]);
    assert_eq!(r["result"]["result"], "counter_example");
    assert_eq!(r["result"]["value"], "b");
    let r = record(&["closed-check", "--theory", "torsion", "--tor", "6"]);
    assert_eq!(r["result"]["result"], "witness_scheme");
    let r = record(&["hull", "--structure", &data("z6.json"), "--tor", "2"]);
    assert_eq!(r["hull"]["elements"], serde_json::json!(["0", "3"]));
}

#[test]
fn niceness_over_z6() {
    let r = record(&["nice-check", "--structure", &data("z6.json"), "--formula", "exists y. y + y = x", "--tor", "6", "--depth", "6"]);
    assert_eq!(r["result"]["result"], "witness_scheme");
    let r = record(&["nice-check", "--structure", &data("escape.json"), "--formula", "exists y. F(x) = y", "--type", "~R(x)"]);
    assert_eq!(r["result"]["result"], "counter_example");
}

#[test]
fn los_verify_is_reproducible_under_a_seed() {
    let ctx = data("z6_copies_context.json");
    let args = ["los-verify", "--context", &ctx, "--formula", "x + x = 0", "--samples", "50", "--json"];
    let with_seed = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_gamma-ultra"))
            .args(args)
            .env("GAMMA_ULTRA_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b) = (with_seed("7"), with_seed("7"));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let r: Json = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["seed"], 7);
    let f = &r["report"]["formulas"][0];
    assert_eq!((f["lr_failures"].as_u64(), f["rl_failures"].as_u64()), (Some(0), Some(0)));
    let bad = with_seed("seven");
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr(&bad).contains("GAMMA_ULTRA_SEED"));
}

#[test]
fn los_verify_over_torsion_members() {
    let g = data("z2_z4_torsion.json");
    let r = record(&["los-verify", "--structure", &g, "--structure", &g, "--atom", "1", "--formula", "2^1 | x", "--formula", "exists y. 2*y = x"]);
    assert_eq!(r["holds"], true);
    assert_eq!(r["report"]["isomorphic"], true);
}

#[test]
fn tor_ee_distinguishes_and_equates() {
    let r = record(&["tor-ee", "--structure", &data("z4_torsion.json"), "--structure", &data("klein_torsion.json")]);
    assert_eq!(r["verdict"]["verdict"], "distinguished", "{r}");
    let r = record(&["tor-ee", "--structure", &data("z2_z4_torsion.json"), "--structure", &data("z4_z2_torsion.json"), "--bound", "2", "--cap", "4"]);
    assert_eq!(r["verdict"]["verdict"], "equivalent", "{r}");
    let one = run(&["tor-ee", "--structure", &data("z4_torsion.json")]);
    assert_eq!(one.status.code(), Some(2));
}

#[test]
fn dividing_line_cases() {
    assert_eq!(record(&["dividing-line", "--structure", &data("tail_sum.json")])["verdict"]["case"], "CaseB");
    assert_eq!(record(&["dividing-line", "--structure", &data("prufer.json")])["verdict"]["case"], "CaseA");
}

#[test]
fn errors_name_the_file_and_position() {
    let missing = run(&["eval", "--structure", "no/such/file.json", "--formula", "x = x"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(stderr(&missing).contains("no/such/file.json"));
    let syntax = run(&["eval", "--structure", &data("z4.json"), "--formula", "exists x. (x = "]);
    assert_eq!(syntax.status.code(), Some(2));
    assert!(stderr(&syntax).contains("byte 15"), "{}", stderr(&syntax));
    let dir = std::env::temp_dir().join(format!("gamma-ultra-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"finite_abelian\",\n \"moduli\": [4").unwrap();
    let out = run(&["eval", "--structure", bad.to_str().unwrap(), "--formula", "x = x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}
