use std::path::Path;
use std::process::{Command, Output};

const E37: &str = "0,0,1,-1,0";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heegner-bound")).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> =
        std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    v.sort();
    v
}

#[test]
fn analyze_writes_a_stable_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["analyze", "--curve", E37, "--label", "37a1", "-D", "7", "-p", "5", "--precision", "40", "--out", out];
    let first = run(&args);
    assert_eq!(code(&first), 0, "{}", String::from_utf8_lossy(&first.stderr));
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    let names = files(dir.path());
    assert_eq!(names.len(), 1, "{names:?}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join(&names[0])).unwrap()).unwrap();
    assert_eq!(report["m0"], 0);
    assert_eq!(report["bounds"]["exponent_kolyvagin"], 0);
    assert_eq!(report["config"]["precision_digits"], 40);

    let md = run(&[
        "analyze",
        "--curve",
        E37,
        "--label",
        "37a1",
        "-D",
        "7",
        "-p",
        "5",
        "--precision",
        "40",
        "--format",
        "md",
        "--out",
        out,
    ]);
    assert_eq!(code(&md), 0);
    assert_eq!(files(dir.path()).len(), 2);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "precision_digits = 30\nsieve_bound = 500\n").unwrap();
    let out = dir.path().join("out");
    let base = [
        "analyze",
        "--curve",
        E37,
        "-D",
        "7",
        "-p",
        "5",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    let o = run(&[&base[..], &["--sieve-bound", "700"]].concat());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let path = String::from_utf8(o.stdout).unwrap();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path.trim()).unwrap()).unwrap();
    assert_eq!(
        (report["config"]["precision_digits"].as_u64(), report["config"]["sieve_bound"].as_u64()),
        (Some(30), Some(700))
    );

    std::fs::write(&cfg, "precision_digit = 30\n").unwrap();
    assert_eq!(code(&run(&base)), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let analyze = |extra: &[&str]| {
        let mut a = vec!["analyze", "--out", out];
        a.extend_from_slice(extra);
        code(&run(&a))
    };
    // D = 8 is not a fundamental discriminant of the right sign
    assert_eq!(analyze(&["--curve", E37, "-D", "8", "-p", "5"]), 2);
    // p divides the conductor
    assert_eq!(analyze(&["--curve", E37, "-D", "7", "-p", "37"]), 2);
    assert_eq!(analyze(&["--curve", "0,0,1,x,0", "-D", "7", "-p", "5"]), 2);
    assert_eq!(analyze(&["--curve", E37, "-D", "7", "-p", "5", "--qseries-max-terms", "10"]), 3);
    // 11a1 has a rational 5-torsion point
    assert_eq!(analyze(&["--curve", "0,-1,1,-10,-20", "-D", "7", "-p", "5"]), 4);
    assert_eq!(analyze(&["--curve", "0,-1,1,-10,-20", "-D", "7", "-p", "5", "--allow-unverified-hypothesis"]), 0);
    assert_eq!(
        code(&run(&["analyze", "--curve-file", "/nonexistent", "--label", "x", "-D", "7", "-p", "5", "--out", out])),
        2
    );
}

#[test]
fn batch_reports_each_job() {
    let dir = tempfile::tempdir().unwrap();
    let curves = dir.path().join("curves.jsonl");
    let jobs = dir.path().join("jobs.jsonl");
    let out = dir.path().join("reports");
    std::fs::write(&curves, "{\"label\":\"37a1\",\"a\":[0,0,1,-1,0]}\n{\"label\":\"43a1\",\"a\":[0,1,1,0,0]}\n")
        .unwrap();
    std::fs::write(&jobs, "{\"label\":\"37a1\",\"d\":7,\"p\":5}\n# skip\n{\"label\":\"43a1\",\"d\":7,\"p\":3}\n")
        .unwrap();
    let args = |j: &Path| {
        vec![
            "batch".to_string(),
            "--curve-file".into(),
            curves.display().to_string(),
            "--jobs".into(),
            j.display().to_string(),
            "--out".into(),
            out.display().to_string(),
            "--precision".into(),
            "40".into(),
            "--sieve-bound".into(),
            "2000".into(),
        ]
    };
    let o = Command::new(env!("CARGO_BIN_EXE_heegner-bound")).args(args(&jobs)).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    assert_eq!(files(&out).len(), 2);

    std::fs::write(&jobs, "{\"label\":\"nope\",\"d\":7,\"p\":5}\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_heegner-bound")).args(args(&jobs)).output().unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn component_commands() {
    let sieve = json(&run(&["sieve", "--curve", E37, "-D", "7", "-p", "3", "--bound", "200"]));
    let ls: Vec<u64> = sieve.as_array().unwrap().iter().map(|k| k["l"].as_u64().unwrap()).collect();
    assert_eq!(ls, [17, 41, 47, 83, 101, 131, 167, 173]);

    let bounds = json(&run(&["bounds", "--curve", "0,-1,1,-10,-20", "-p", "5", "--m0", "1"]));
    assert_eq!(bounds["exponent_kolyvagin"], 2);
    assert_eq!(bounds["exponent_improved"], 0);

    let chi = run(&["chi-ell", "--curve", E37, "-D", "7", "-p", "3", "--bound", "50"]);
    assert_eq!(code(&chi), 0);

    let img = json(&run(&["galois-image", "--curve", E37, "-p", "5", "--bound", "2000"]));
    assert_eq!(img["status"], "surjective");

    let lab = run(&["selmer-lab", "--pm", "9", "--places", "2", "--trials", "20", "--seed", "1"]);
    assert_eq!(code(&lab), 0);
    assert_eq!(json(&lab)["pass"], true);
}
