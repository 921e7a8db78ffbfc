use std::path::PathBuf;

use nipfrac::io::{
    parse_problem, parse_problem_str, problem_to_json, trajectory_csv, write_json, CsvView,
};
use nipfrac::mild::{MeshConfig, MildSolver};
use nipfrac::problem::{example_problem, Impulse, Nonlinearity, EXAMPLE_DELTA, EXAMPLE_MODES};
use nipfrac::Error;

const MINIMAL: &str = r#"{
  "beta": 1.5,
  "partition": {"u": [0.0], "t": [1.0]},
  "modes": 1,
  "z0": [0.0],
  "ztilde": [[0.0]],
  "h": {"kind": "zero", "params": {}},
  "impulses": []
}"#;

fn preset_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../presets/example.json")
}

fn small_mesh() -> MeshConfig {
    MeshConfig {
        solve_nodes: 16,
        impulse_nodes: 8,
        grading: 2.0,
    }
}

#[test]
fn minimal_document_is_valid() {
    let spec = parse_problem_str(MINIMAL).unwrap();
    assert_eq!(spec.m(), 0);
    assert_eq!(spec.modes(), 1);
    assert_eq!(spec.beta, 1.5);
    assert_eq!(spec.h, Nonlinearity::Zero {});
    assert!(spec.impulses.is_empty());
    assert_eq!(spec.q_diag, None);
}

#[test]
fn ordering_violation_quotes_the_pair() {
    let doc = MINIMAL
        .replace(r#""u": [0.0]"#, r#""u": [0.0, 0.3]"#)
        .replace(r#""t": [1.0]"#, r#""t": [0.5, 1.0]"#)
        .replace(r#""ztilde": [[0.0]]"#, r#""ztilde": [[0.0], [0.0]]"#)
        .replace(r#""impulses": []"#, r#""impulses": [{"kind": "zero", "params": {}}]"#);
    match parse_problem_str(&doc) {
        Err(Error::Validation(m)) => {
            assert!(m.starts_with("$.partition"), "{m}");
            assert!(m.contains("t_1 = 0.5 must be < u_1 = 0.3"), "{m}");
        }
        other => panic!("expected a validation error, got {other:?}"),
    }
}

#[test]
fn schema_errors_carry_the_path() {
    let cases = [
        (
            MINIMAL.replace(r#""params": {}"#, r#""params": {"lambda": "big"}"#).replace(
                r#""kind": "zero""#,
                r#""kind": "linear""#,
            ),
            "$.h.params.lambda",
        ),
        (MINIMAL.replace(r#""modes": 1"#, r#""modes": -1"#), "$.modes"),
        (MINIMAL.replace(r#""kind": "zero""#, r#""kind": "cubic""#), "$.h.kind"),
        (MINIMAL.replace(r#""z0": [0.0]"#, r#""z0": [0.0], "extra": 1"#), "$.extra"),
        (MINIMAL.replace(r#""beta": 1.5,"#, ""), "$"),
    ];
    for (doc, want) in cases {
        match parse_problem_str(&doc) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, want, "{doc}"),
            other => panic!("expected a parse error at {want}, got {other:?}"),
        }
    }
}

#[test]
fn semantic_violations_are_validation_errors() {
    let bad = [
        MINIMAL.replace(r#""beta": 1.5"#, r#""beta": 2.5"#),
        MINIMAL.replace(r#""modes": 1"#, r#""modes": 0"#),
        MINIMAL.replace(r#""z0": [0.0]"#, r#""z0": [0.0, 1.0]"#),
        MINIMAL.replace(r#""ztilde": [[0.0]]"#, r#""ztilde": []"#),
        MINIMAL.replace(r#""impulses": []"#, r#""impulses": [{"kind": "zero", "params": {}}]"#),
    ];
    for doc in bad {
        assert!(matches!(parse_problem_str(&doc), Err(Error::Validation(_))), "{doc}");
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let e = parse_problem(&PathBuf::from("/nonexistent/problem.json")).unwrap_err();
    assert!(matches!(e, Error::Io(_)), "{e:?}");
}

#[test]
fn shipped_preset_matches_the_example() {
    let spec = parse_problem(&preset_path()).unwrap();
    assert_eq!(spec.m(), 3);
    assert_eq!(spec.modes(), 16);
    assert_eq!(spec.partition.a(), 1.0);
    assert_eq!(spec, example_problem(EXAMPLE_DELTA, EXAMPLE_MODES).unwrap());
    // Dirichlet Laplacian on [0, π]: eigenvalues −γ²
    let eig = spec.resolvent.op().eigenvalues();
    for (g, l) in eig.iter().enumerate() {
        assert_eq!(*l, -(((g + 1) * (g + 1)) as f64));
    }
    let text = std::fs::read_to_string(preset_path()).unwrap();
    assert_eq!(problem_to_json(&spec).unwrap(), text);
}

#[test]
fn round_trip_is_field_identical() {
    let mut spec = example_problem(0.3, 5).unwrap();
    spec.q_diag = Some(0.7);
    spec.impulses[1] = Impulse::Affine {
        lambda: 0.25,
        offset: vec![0.1, -0.2],
    };
    spec.h = Nonlinearity::ModulatedSine {
        epsilon: 0.2,
        omega: 3.0,
    };
    let back = parse_problem_str(&problem_to_json(&spec).unwrap()).unwrap();
    assert_eq!(back.beta, spec.beta);
    assert_eq!(back.partition, spec.partition);
    assert_eq!(back.z0, spec.z0);
    assert_eq!(back.ztilde, spec.ztilde);
    assert_eq!(back.h, spec.h);
    assert_eq!(back.impulses, spec.impulses);
    assert_eq!(back.q_diag, spec.q_diag);
    assert_eq!(back.resolvent, spec.resolvent);
    assert_eq!(back, spec);
}

#[test]
fn csv_views() {
    let spec = example_problem(0.5, 3).unwrap();
    let solver = MildSolver::new(&spec, small_mesh()).unwrap();
    let traj = solver.initial_guess();
    let rows: usize = traj.segments.iter().map(|s| s.times.len()).sum();

    let spectral = trajectory_csv(&traj, CsvView::Spectral).unwrap();
    let lines: Vec<&str> = spectral.lines().collect();
    assert_eq!(lines[0], "segment_index,segment_kind,t,w1,w2,w3");
    assert_eq!(lines.len(), rows + 1);
    assert!(lines[1].starts_with("0,solve,"));
    let first_impulse = lines.iter().position(|l| l.contains(",impulse,")).unwrap();
    assert!(lines[first_impulse].starts_with("1,impulse,"));
    // every value parses back to the stored coefficient
    let seg = &traj.segments[0];
    let fields: Vec<f64> = lines[1].split(',').skip(2).map(|x| x.parse().unwrap()).collect();
    assert_eq!(fields[0], seg.times[0]);
    assert_eq!(&fields[1..], seg.states[0].coeffs());

    let physical = trajectory_csv(&traj, CsvView::Physical { points: 5 }).unwrap();
    let lines: Vec<&str> = physical.lines().collect();
    let header: Vec<&str> = lines[0].split(',').collect();
    assert_eq!(header.len(), 3 + 5);
    assert_eq!(header[3], "v0");
    assert_eq!(header[7], format!("v{}", std::f64::consts::PI));
    assert_eq!(lines.len(), rows + 1);
    // Dirichlet boundary values vanish
    for l in &lines[1..] {
        let f: Vec<f64> = l.split(',').skip(3).map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[0], 0.0);
        assert!(f[4].abs() < 1e-12 * (1.0 + f[2].abs()), "{l}");
    }

    assert!(trajectory_csv(&traj, CsvView::Physical { points: 1 }).is_err());
}

#[test]
fn outputs_are_deterministic() {
    let spec = example_problem(0.5, 3).unwrap();
    let run = || {
        let solver = MildSolver::new(&spec, small_mesh()).unwrap();
        let (traj, report) = solver.solve(1e-10, 30).unwrap();
        (
            trajectory_csv(&traj, CsvView::Spectral).unwrap(),
            nipfrac::io::to_json(&report).unwrap(),
        )
    };
    assert_eq!(run(), run());
}

#[test]
fn json_files_end_with_a_newline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let spec = example_problem(0.5, 2).unwrap();
    write_json(&path, &spec.to_document()).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with("}\n"));
    assert_eq!(parse_problem(&path).unwrap(), spec);
    let keys: Vec<usize> = ["\"beta\"", "\"partition\"", "\"modes\"", "\"z0\"", "\"ztilde\"", "\"h\""]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
    assert!(keys.windows(2).all(|w| w[0] < w[1]), "keys out of order");
}
