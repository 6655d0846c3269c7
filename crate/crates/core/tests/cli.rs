use std::path::Path;
use std::process::{Command, Output};

use batchdyn::harness::strip_timing;

fn batchdyn(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_batchdyn"))
        .args(args)
        .current_dir(dir)
        .env_remove("BATCHDYN_SEED")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn gen_run_verify_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&batchdyn(
        &["gen", "--n", "40", "--m", "160", "--batches", "6", "--batch-size", "12", "--mix", "0.5", "--seed", "3", "-o", "t.txt"],
        d,
    ));
    let trace = std::fs::read_to_string(d.join("t.txt")).unwrap();
    assert!(trace.starts_with("N 40"));

    for s in ["spanner", "sparse", "sparsifier"] {
        let dump = format!("{s}.out");
        let stats = ok(&batchdyn(&["run", "--structure", s, "--trace", "t.txt", "--k", "2", "--dump", &dump], d));
        let last: serde_json::Value = serde_json::from_str(stats.lines().last().unwrap()).unwrap();
        assert_eq!(last["record"], "summary");
        assert_eq!(last["failures"], 0);
        assert_eq!(stats.lines().count(), 8);

        let mut args = vec!["verify", "--graph", "t.txt", "--structure", dump.as_str()];
        if s == "spanner" {
            args.extend(["--stretch", "3"]);
        }
        let cert: serde_json::Value = serde_json::from_str(ok(&batchdyn(&args, d)).trim()).unwrap();
        assert_eq!(cert["pass"], true, "{s}: {cert}");
    }
}

#[test]
fn runs_repeat_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(&batchdyn(&["gen", "--n", "30", "--m", "90", "--batches", "5", "--seed", "8", "--for", "bundle", "-o", "t.txt"], d));
    let mut seen = Vec::new();
    for name in ["a", "b"] {
        let stats = format!("{name}.jsonl");
        let dump = format!("{name}.out");
        ok(&batchdyn(&["run", "--structure", "bundle", "--trace", "t.txt", "--seed", "5", "--stats", &stats, "--dump", &dump], d));
        let s = std::fs::read_to_string(d.join(&stats)).unwrap();
        seen.push((strip_timing(&s).unwrap(), std::fs::read(d.join(&dump)).unwrap()));
    }
    assert_eq!(seen[0], seen[1]);
}

#[test]
fn decremental_target_rejects_inserts() {
    let dir = tempfile::tempdir().unwrap();
    let out = batchdyn(&["gen", "--n", "10", "--m", "20", "--mix", "0.5", "--for", "estree"], dir.path());
    assert_eq!(out.status.code(), Some(1));

    std::fs::write(dir.path().join("t.txt"), "N 4\nI 0 1\nB\nI 1 2\n").unwrap();
    let out = batchdyn(&["run", "--structure", "estree", "--trace", "t.txt"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn broken_structure_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(d.join("g.txt"), "N 4\nI 0 1\nI 1 2\nI 2 3\nI 0 3\n").unwrap();
    std::fs::write(d.join("h.txt"), "H 0 1\nH 1 2\n").unwrap();
    let out = batchdyn(&["verify", "--graph", "g.txt", "--structure", "h.txt", "--stretch", "3"], d);
    assert_eq!(out.status.code(), Some(2));
    let cert: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(cert["pass"], false);
}

#[test]
fn bench_emits_one_record_per_structure() {
    let dir = tempfile::tempdir().unwrap();
    let out = ok(&batchdyn(
        &["bench", "--structures", "estree", "--structures", "bundle", "--n", "64", "--m", "256", "--batches", "4", "--batch-size", "16"],
        dir.path(),
    ));
    let recs: Vec<serde_json::Value> = out.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.len(), 2);
    assert!(recs.iter().all(|r| r["failures"] == 0));
}
