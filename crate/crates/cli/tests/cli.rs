use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn rationd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rationd"))
        .args(args)
        .env_remove("RATIOND_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn line<'a>(text: &'a str, prefix: &str) -> &'a str {
    text.lines()
        .find(|l| l.starts_with(prefix))
        .unwrap_or_else(|| panic!("no `{prefix}` line in:\n{text}"))
}

#[test]
fn online_on_tight_instance_gets_half() {
    let path = fixture("tight_model1.json");
    let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", "online1", "--tie-break", "adversarial"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(line(&text, "utility"), "utility   0.500000");
    assert_eq!(line(&text, "matched"), "matched   1 of 2");
}

#[test]
fn offline_on_tight_instance() {
    let path = fixture("tight_model1.json");
    let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", "offline1", "--exact"]);
    assert!(out.status.success());
    assert_eq!(line(&stdout(&out), "utility"), "utility   0.975000 (0.975)");
}

#[test]
fn empty_instance_solves_to_zero() {
    let path = fixture("empty.json");
    for algorithm in ["online1", "online2", "offline1", "oracle2"] {
        let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", algorithm]);
        assert!(out.status.success(), "{algorithm}");
        assert_eq!(line(&stdout(&out), "utility"), "utility   0.000000");
    }
}

#[test]
fn compare_reports_tight_ratio_and_writes_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("tight_model1.json");
    let out = rationd(&[
        "compare",
        path.to_str().unwrap(),
        "--tie-break",
        "adversarial",
        "--metrics-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(line(&text, "ratio"), "ratio     OPT/ALG = 1.950000");
    assert_eq!(line(&text, "status"), "status    tight");
    for name in ["online_metrics.csv", "offline_metrics.csv"] {
        let csv = std::fs::read_to_string(dir.path().join(name)).unwrap();
        assert!(csv.starts_with("day,group,gamma,eta"));
        assert_eq!(csv.lines().count(), 3);
    }
}

#[test]
fn compare_model2_tight() {
    let dir = tempfile::tempdir().unwrap();
    let path = fixture("tight_general.json");
    let out = rationd(&[
        "compare",
        path.to_str().unwrap(),
        "--model2",
        "--tie-break",
        "adversarial",
        "--metrics-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(line(&stdout(&out), "ratio"), "ratio     OPT/ALG = 2.500000");
}

#[test]
fn model2_needs_overall_quotas() {
    let path = fixture("tight_model1.json");
    let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", "online2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_passes_on_fixtures() {
    for (name, model2) in [("tight_model1.json", false), ("tight_general.json", true), ("empty.json", true)] {
        let path = fixture(name);
        let mut args = vec!["verify", path.to_str().unwrap()];
        if model2 {
            args.push("--model2");
        }
        let out = rationd(&args);
        let text = stdout(&out);
        assert!(out.status.success(), "{name}:\n{text}");
        assert!(!text.contains("FAIL"));
    }
}

#[test]
fn verify_rejects_corrupted_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let inst = fixture("tight_model1.json");
    let alloc = dir.path().join("alloc.json");
    let out = rationd(&["solve", inst.to_str().unwrap(), "--algorithm", "offline1", "--out", alloc.to_str().unwrap()]);
    assert!(out.status.success());

    let good = rationd(&["verify", inst.to_str().unwrap(), "--allocation", alloc.to_str().unwrap()]);
    assert!(good.status.success());
    assert!(stdout(&good).contains("PASS  supplied allocation feasible, utility 0.975000"));

    // both agents onto the same category and day
    let text = std::fs::read_to_string(&alloc).unwrap();
    let corrupted = text.replace("\"c2\"", "\"c1\"").replace("\"day\": 2", "\"day\": 1");
    std::fs::write(&alloc, corrupted).unwrap();
    let bad = rationd(&["verify", inst.to_str().unwrap(), "--allocation", alloc.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(4), "{}", stdout(&bad));
    assert!(stdout(&bad).contains("FAIL  supplied allocation infeasible"));
}

#[test]
fn unknown_tie_break_agent_is_usage_error() {
    let path = fixture("tight_model1.json");
    let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", "online1", "--tie-break", "a2,zz"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn explicit_order_changes_online_choice() {
    let path = fixture("tight_model1.json");
    let out = rationd(&["solve", path.to_str().unwrap(), "--algorithm", "online1", "--tie-break", "a2,a1"]);
    assert!(out.status.success());
    assert_eq!(line(&stdout(&out), "utility"), "utility   0.975000");
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let config = fixture("small_config.json");
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let c = dir.path().join("c.json");
    for (out, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        let run = rationd(&["generate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert!(run.status.success());
    }
    let read = |p: &PathBuf| std::fs::read_to_string(p).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));

    let solved = rationd(&["solve", a.to_str().unwrap(), "--algorithm", "online2"]);
    assert!(solved.status.success());
}

#[test]
fn bad_generator_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.json");
    let text = std::fs::read_to_string(fixture("small_config.json")).unwrap();
    std::fs::write(&config, text.replacen("\"num_days\": 10", "\"num_days\": 0", 1)).unwrap();
    let out = rationd(&["generate", "--config", config.to_str().unwrap(), "--out", dir.path().join("o.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("generator config"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(rationd(&["bogus"]).status.code(), Some(2));
    assert_eq!(rationd(&["solve"]).status.code(), Some(2));
    let path = fixture("tight_model1.json");
    assert_eq!(rationd(&["solve", path.to_str().unwrap(), "--algorithm", "nope"]).status.code(), Some(2));
}

#[test]
fn missing_instance_exits_three() {
    let out = rationd(&["verify", "/nonexistent/instance.json"]);
    assert_eq!(out.status.code(), Some(3));
}
