use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ltpdr::format::{parse_kripke, parse_mdp, parse_mrm, serialize_kripke, serialize_mdp, serialize_mrm};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn ltpdr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltpdr"))
        .args(args)
        .env_remove("LTPDR_TRACE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(stdout(o).trim()).expect("one JSON object")
}

fn path(name: &str) -> String {
    corpus(name).display().to_string()
}

#[test]
fn k1_safe_is_true_with_valid_witness() {
    let o = ltpdr(&[&path("k1_safe.kr"), "--validate-witness"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("RESULT: True\n"), "{out}");
    assert!(out.contains("validated: yes"));
    assert!(out.contains("X_2 = {0, 1}"));
}

#[test]
fn m2_below_ground_truth_is_false() {
    let o = ltpdr(&[&path("m2_1.3.mrm"), "--validate-witness", "--oracle"]);
    assert_eq!(o.status.code(), Some(10));
    assert!(stdout(&o).contains("agrees=yes"));
    let o = ltpdr(&[&path("m2_1.3.mrm"), "--lambda", "inf"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn fuzz_schedule_matches_default() {
    for (file, code) in [("k1_safe.kr", 0), ("k1_unsafe.kr", 10)] {
        let default = ltpdr(&[&path(file)]);
        let fuzz = ltpdr(&[&path(file), "--schedule", "fuzz", "--seed", "7", "--validate-witness"]);
        assert_eq!(default.status.code(), Some(code));
        assert_eq!(fuzz.status.code(), Some(code));
        assert_eq!(stdout(&default).lines().next(), stdout(&fuzz).lines().next());
    }
}

#[test]
fn every_engine_and_kind_on_k1() {
    for kind in ["kripke-forward", "kripke-ibackward"] {
        for (engine, safe, unsafe_) in [("combined", 0, 10), ("opdual", 0, 10), ("positive", 0, 2), ("negative", 2, 10)] {
            let args = ["--kind", kind, "--engine", engine, "--budget", "500", "--validate-witness", "--oracle"];
            let o = ltpdr(&[&[path("k1_safe.kr").as_str()][..], &args].concat());
            assert_eq!(o.status.code(), Some(safe), "{kind} {engine} safe");
            let o = ltpdr(&[&[path("k1_unsafe.kr").as_str()][..], &args].concat());
            assert_eq!(o.status.code(), Some(unsafe_), "{kind} {engine} unsafe");
        }
    }
}

#[test]
fn json_schema_is_stable() {
    let keys = ["path", "kind", "engine", "verdict", "witness", "validated", "stats", "oracle"];
    let stat_keys = [
        "steps", "valid", "unfold", "induction", "candidate", "model", "decide", "conflict", "idle", "frames", "elapsed_ms",
    ];
    let runs: [(&[&str], &str); 4] = [
        (&["k1_safe.kr"], "True"),
        (&["m1_low.mdp"], "False"),
        (&["k1_safe.kr", "--engine", "negative", "--budget", "50"], "BudgetExhausted"),
        (&["m1.mdp", "--engine", "positive", "--budget", "50"], "True"),
    ];
    for (args, verdict) in runs {
        let mut full = vec![path(args[0])];
        full.extend(args[1..].iter().map(|s| s.to_string()));
        full.push("--json".into());
        let full: Vec<&str> = full.iter().map(String::as_str).collect();
        let v = json(&ltpdr(&full));
        let obj = v.as_object().unwrap();
        for k in keys {
            assert!(obj.contains_key(k), "{k} missing for {verdict}");
        }
        assert_eq!(obj.len(), keys.len());
        assert_eq!(v["verdict"], verdict);
        for k in stat_keys {
            assert!(v["stats"].get(k).is_some(), "stats.{k} missing");
        }
        match verdict {
            "True" => assert_eq!(v["witness"]["type"], "invariant"),
            "False" => assert_eq!(v["witness"]["type"], "counterexample"),
            _ => assert!(v["witness"].is_null()),
        }
    }
    let v = json(&ltpdr(&[&path("m2_1.5.mrm"), "--json", "--oracle", "--validate-witness"]));
    assert_eq!(v["validated"], true);
    assert_eq!(v["oracle"]["agrees"], true);
    assert_eq!(v["oracle"]["expected"], true);
    let value = v["oracle"]["value"].as_f64().unwrap();
    assert!((value - 4.0 / 3.0).abs() < 1e-9);
    assert_eq!(v["witness"]["frames"][2], serde_json::json!(["1.5", "0"]));
}

#[test]
fn trace_lines_follow_the_documented_format() {
    let o = Command::new(env!("CARGO_BIN_EXE_ltpdr"))
        .arg(path("k1_safe.kr"))
        .env("LTPDR_TRACE", "1")
        .output()
        .unwrap();
    let err = String::from_utf8_lossy(&o.stderr);
    let lines: Vec<&str> = err.lines().collect();
    assert_eq!(lines.len(), 7, "{err}");
    assert_eq!(lines[0], "step=1 rule=unfold frames=3 obligations=0");
    assert!(lines[6].starts_with("step=7 rule=valid "));
    let quiet = ltpdr(&[&path("k1_safe.kr")]);
    assert!(quiet.stderr.is_empty());
}

#[test]
fn budget_and_stuck_exit_with_two() {
    let o = ltpdr(&[&path("latch0.kr"), "--engine", "negative", "--budget", "100"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).starts_with("RESULT: BudgetExhausted"));
}

#[test]
fn errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.kr");
    std::fs::write(&bad, "states 2\ninit 5\nsafe 0\ntrans\n").unwrap();
    let o = ltpdr(&[bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    let missing = dir.path().join("missing.mdp");
    assert_eq!(ltpdr(&[missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ltpdr(&[&path("m1.mdp"), "--engine", "opdual"]).status.code(), Some(1));
    assert_eq!(ltpdr(&[&path("m1.mdp"), "--engine", "bogus"]).status.code(), Some(1));
    assert_eq!(ltpdr(&[&path("m1.mdp"), "--lambda", "1.5"]).status.code(), Some(1));
    let unknown = dir.path().join("model.txt");
    std::fs::write(&unknown, "states 1\ninit 0\nsafe 0\ntrans\n").unwrap();
    assert_eq!(ltpdr(&[unknown.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(ltpdr(&[unknown.to_str().unwrap(), "--kind", "kripke-forward"]).status.code(), Some(0));
}

#[test]
fn directory_runs_report_every_model() {
    let dir = corpus("");
    let o = ltpdr(&[dir.to_str().unwrap(), "--json", "--oracle", "--validate-witness"]);
    assert_eq!(o.status.code(), Some(10), "worst verdict is False");
    let reports: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    let files = std::fs::read_dir(&dir).unwrap().count();
    assert_eq!(reports.len(), files);
    for r in &reports {
        assert_eq!(r["validated"], true, "{}", r["path"]);
        assert_eq!(r["oracle"]["agrees"], true, "{}", r["path"]);
    }
}

#[test]
fn corpus_round_trips() {
    for entry in std::fs::read_dir(corpus("")).unwrap() {
        let p = entry.unwrap().path();
        let text = std::fs::read_to_string(&p).unwrap();
        match p.extension().and_then(|e| e.to_str()) {
            Some("kr") => {
                let m = parse_kripke(&text).unwrap();
                assert_eq!(parse_kripke(&serialize_kripke(&m)).unwrap(), m, "{}", p.display());
            }
            Some("mdp") => {
                let m = parse_mdp(&text).unwrap();
                assert_eq!(parse_mdp(&serialize_mdp(&m)).unwrap(), m, "{}", p.display());
            }
            Some("mrm") => {
                let m = parse_mrm(&text).unwrap();
                assert_eq!(parse_mrm(&serialize_mrm(&m)).unwrap(), m, "{}", p.display());
            }
            _ => panic!("unexpected corpus file {}", p.display()),
        }
    }
}
