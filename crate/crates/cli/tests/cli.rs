use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn nipfrac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nipfrac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn preset() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets/example.json")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr_json(out: &Output) -> Value {
    let text = String::from_utf8_lossy(&out.stderr);
    let line = text.lines().last().expect("a diagnostic line");
    serde_json::from_str(line).unwrap_or_else(|e| panic!("{e}: {text}"))
}

fn write_problem(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("problem.json");
    fs::write(&p, body).unwrap();
    p
}

const ZERO: &str = r#"{
  "beta": 1.5,
  "partition": {"u": [0.0, 0.4], "t": [0.2, 1.0]},
  "modes": 3,
  "z0": [0.0],
  "ztilde": [[0.0], [0.0]],
  "h": {"kind": "zero", "params": {}},
  "impulses": [{"kind": "zero", "params": {}}]
}"#;

#[test]
fn zero_problem_gives_zeros_in_one_iteration() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), ZERO);
    let out = dir.path().join("out");
    let r = nipfrac(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--mesh-nodes",
        "32",
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let conv = json(&out.join("convergence.json"));
    assert_eq!(conv["iterations"], 1);
    assert_eq!(conv["converged"], true);
    assert_eq!(conv["flagged"], false);
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "segment_index,segment_kind,t,w1,w2,w3");
    let rows: Vec<&str> = lines.collect();
    // 32 solve nodes on each of two intervals, 8 impulse nodes
    assert_eq!(rows.len(), 32 + 8 + 32);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert!(f[3..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{row}");
    }
    // with an impulse the history term of c survives even for zero data
    let c = json(&out.join("contraction.json"));
    assert_eq!(c["c0"], 0.0);
    assert_eq!(c["intervals"][0]["term2"], 0.0);
    assert_eq!(c["verdict"], true);
}

#[test]
fn check_on_the_preset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let r = nipfrac(&[
        "check",
        "--problem",
        preset().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let c = json(&dir.path().join("contraction.json"));
    assert_eq!(c["verdict"], true);
    let cv = c["c"].as_f64().unwrap();
    assert!(cv > 0.0 && cv < 1.0, "{cv}");
    assert_eq!(c["intervals"].as_array().unwrap().len(), 3);
    assert_eq!(c["lambda_R_source"], "estimated");
    let a = json(&dir.path().join("assumptions.json"));
    assert_eq!(a["all_pass"], true);
    // check writes only the reports
    assert!(!dir.path().join("trajectory.csv").exists());
    assert!(!dir.path().join("convergence.json").exists());
}

#[test]
fn impulse_constant_out_of_range_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let body = ZERO
        .replace(r#""impulses": [{"kind": "zero", "params": {}}]"#, r#""impulses": [{"kind": "linear", "params": {"lambda": 1.5}}]"#)
        .replace(r#""z0": [0.0]"#, r#""z0": [1.0]"#);
    let problem = write_problem(dir.path(), &body);
    let out = dir.path().join("out");
    let r = nipfrac(&[
        "solve",
        "--problem",
        problem.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--mesh-nodes",
        "32",
    ]);
    assert_eq!(r.status.code(), Some(1), "{}", String::from_utf8_lossy(&r.stderr));
    let d = stderr_json(&r);
    assert_eq!(d["status"], "assumption_failure");
    assert_eq!(d["solve_attempted"], true);
    let ids: Vec<&str> = d["failed"].as_array().unwrap().iter().map(|i| i["id"].as_str().unwrap()).collect();
    assert!(ids.contains(&"A3"), "{ids:?}");
    let conv = json(&out.join("convergence.json"));
    assert_eq!(conv["flagged"], true);
    assert_eq!(conv["assumptions_pass"], false);
}

#[test]
fn parse_errors_exit_with_two_and_a_path() {
    let dir = tempfile::tempdir().unwrap();
    let problem = write_problem(dir.path(), &ZERO.replace(r#""modes": 3"#, r#""modes": "three""#));
    let r = nipfrac(&["check", "--problem", problem.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let d = stderr_json(&r);
    assert_eq!(d["kind"], "parse");
    assert_eq!(d["path"], "$.modes");

    let problem = write_problem(dir.path(), &ZERO.replace(r#""t": [0.2, 1.0]"#, r#""t": [0.5, 1.0]"#));
    let r = nipfrac(&["solve", "--problem", problem.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    let d = stderr_json(&r);
    assert_eq!(d["kind"], "validation");
    assert!(d["message"].as_str().unwrap().contains("t_1 = 0.5 must be < u_1 = 0.4"), "{d}");

    let r = nipfrac(&["check", "--problem", "/nonexistent.json", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert_eq!(stderr_json(&r)["kind"], "io");
}

#[test]
fn bad_flags_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().to_str().unwrap();
    let p = preset();
    let p = p.to_str().unwrap();
    for extra in ["--tol=-1", "--modes=0", "--physical-grid=1", "--max-iter=0", "--grading=0.5"] {
        let mut args = vec!["solve", "--problem", p, "--out", o];
        args.push(extra);
        let r = nipfrac(&args);
        assert_eq!(r.status.code(), Some(2), "{extra:?}");
        assert_eq!(stderr_json(&r)["kind"], "validation", "{extra:?}");
    }
    // unknown flags are usage errors
    assert_eq!(nipfrac(&["solve", "--bogus"]).status.code(), Some(2));
}

#[test]
fn non_convergence_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let r = nipfrac(&[
        "solve",
        "--problem",
        preset().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--mesh-nodes",
        "32",
        "--modes",
        "4",
        "--max-iter",
        "2",
    ]);
    assert_eq!(r.status.code(), Some(2));
    let d = stderr_json(&r);
    assert_eq!(d["kind"], "non_convergence");
    assert_eq!(d["iterations"], 2);
    let conv = json(&dir.path().join("convergence.json"));
    assert_eq!(conv["converged"], false);
    assert!(conv["error"].as_str().unwrap().contains("no convergence"));
}

#[test]
fn outputs_are_bit_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let r = nipfrac(&[
            "solve",
            "--problem",
            preset().to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--mesh-nodes",
            "32",
            "--modes",
            "4",
        ]);
        assert_eq!(r.status.code(), Some(0));
        ["trajectory.csv", "convergence.json", "contraction.json", "assumptions.json"]
            .map(|f| fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn physical_grid_view() {
    let dir = tempfile::tempdir().unwrap();
    let r = nipfrac(&[
        "solve",
        "--problem",
        preset().to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--mesh-nodes",
        "32",
        "--modes",
        "4",
        "--physical-grid",
        "9",
    ]);
    assert_eq!(r.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let header: Vec<&str> = csv.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 3 + 9);
    assert_eq!(&header[..4], ["segment_index", "segment_kind", "t", "v0"]);
    let kinds: std::collections::BTreeSet<&str> =
        csv.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(kinds.into_iter().collect::<Vec<_>>(), ["impulse", "solve"]);
}

#[test]
fn verify_identities_writes_a_passing_table() {
    let dir = tempfile::tempdir().unwrap();
    let r = nipfrac(&["verify-identities", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let rows = json(&dir.path().join("identities.json"));
    let rows = rows.as_array().unwrap();
    assert!(rows.len() >= 10);
    for suite in ["special", "fraccalc", "resolvent"] {
        assert!(rows.iter().any(|r| r["suite"] == suite), "{suite}");
    }
    assert!(rows.iter().all(|r| r["pass"] == true));
    let table = fs::read_to_string(dir.path().join("identities.txt")).unwrap();
    assert_eq!(table.lines().count(), rows.len() + 1);
    assert!(!table.contains("FAIL"));
}

#[test]
fn reproduce_example_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let r = nipfrac(&["reproduce-example", "--out", dir.path().to_str().unwrap(), "--mesh-nodes", "64"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["problem.json", "contraction.json", "assumptions.json", "convergence.json", "trajectory.csv", "impulses.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    // the written problem is the shipped preset
    assert_eq!(
        fs::read_to_string(dir.path().join("problem.json")).unwrap(),
        fs::read_to_string(preset()).unwrap()
    );
    let conv = json(&dir.path().join("convergence.json"));
    let c = conv["contraction_constant"].as_f64().unwrap();
    for ratio in conv["ratios"].as_array().unwrap() {
        assert!(ratio.as_f64().unwrap() <= c + 0.05);
    }
    let imp = json(&dir.path().join("impulses.json"));
    let imp = imp.as_array().unwrap();
    assert_eq!(imp.len(), 3);
    assert!(imp.iter().all(|i| i["identity_defect"] == 0.0));
}
