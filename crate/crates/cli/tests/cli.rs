use std::path::Path;
use std::process::{Command, Output};

use pencilkit::bench::{self, BenchOptions};
use pencilkit::formats;
use pencilkit_core::dense::{c, Matrix};
use pencilkit_core::harness::{ComparisonRow, ComparisonTable, Method, Outcome, Suite};
use pencilkit_core::{HomogeneousPoint, MatrixPolynomial};
use proptest::prelude::*;

fn pencilkit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pencilkit")).args(args).current_dir(dir).output().unwrap()
}

fn ok(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn sample_polynomial() -> MatrixPolynomial {
    let m = |k: f64| Matrix::from_fn(2, 2, |i, j| c(k + i as f64 - 2.0 * j as f64, 0.5 * (i * j) as f64 - k));
    MatrixPolynomial::new(vec![m(1.0), m(-0.5), m(2.0)]).unwrap()
}

fn outcome() -> impl Strategy<Value = Outcome> {
    prop_oneof![
        (1e-300f64..1e3).prop_map(Outcome::Error),
        Just(Outcome::Error(0.0)),
        Just(Outcome::Failed),
        Just(Outcome::Skipped),
    ]
}

fn point() -> impl Strategy<Value = HomogeneousPoint> {
    (-1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3, -1e3f64..1e3)
        .prop_filter("nonzero", |p| p.0.abs() + p.1.abs() + p.2.abs() + p.3.abs() > 1e-6)
        .prop_map(|(a, b, x, y)| HomogeneousPoint::new(c(a, b), c(x, y)))
}

fn table() -> impl Strategy<Value = ComparisonTable> {
    let methods = proptest::sample::subsequence(Method::ALL.to_vec(), 1..=Method::ALL.len()).prop_shuffle();
    methods.prop_flat_map(|methods| {
        let k = methods.len();
        let row = ("[a-z][a-z0-9_]{0,8}", point(), proptest::collection::vec(outcome(), k));
        proptest::collection::vec(row, 0..12).prop_map(move |rows| ComparisonTable {
            methods: methods.clone(),
            rows: rows
                .into_iter()
                .enumerate()
                .map(|(index, (problem, reference, outcomes))| ComparisonRow { problem, index, reference, outcomes })
                .collect(),
            notes: Vec::new(),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip(t in table()) {
        let mut buf = Vec::new();
        bench::write_csv(&t, &mut buf).unwrap();
        let back = bench::parse_csv(buf.as_slice()).unwrap();
        if t.rows.is_empty() {
            prop_assert!(back.rows.is_empty());
        } else {
            prop_assert_eq!(back, t);
        }
    }
}

#[test]
fn bench_run_round_trips_through_csv() {
    let opts = BenchOptions { suite: Suite::Default, seed: 3, methods: None, scaling: true, config: None };
    let run = bench::run(&opts).unwrap();
    let mut buf = Vec::new();
    bench::write_csv(&run.table, &mut buf).unwrap();
    let mut back = bench::parse_csv(buf.as_slice()).unwrap();
    back.notes = run.table.notes.clone();
    assert_eq!(back, run.table);
    // One line per eigenvalue and method plus the header.
    let lines = String::from_utf8(buf).unwrap().lines().count();
    assert_eq!(lines, 1 + run.table.rows.len() * run.table.methods.len());
}

#[test]
fn linearize_dual_eig_cond_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    formats::write_polynomial(&p.join("a.json"), &sample_polynomial()).unwrap();

    for form in ["companion", "w", "fiedler", "dl", "ortho"] {
        let out = format!("{form}.json");
        ok(&pencilkit(&["linearize", "--form", form, "--input", "a.json", "--output", &out], p));
        let pencil = formats::read_pencil(&p.join(&out)).unwrap();
        assert_eq!(pencil.size(), 4, "{form}");
    }

    let cert = ok(&pencilkit(
        &["dual", "--side", "left", "--method", "qr", "--input", "companion.json", "--output", "m.json"],
        p,
    ));
    let cert: serde_json::Value = serde_json::from_str(&cert).unwrap();
    assert_eq!(cert["verdict"], "left_dual");

    let eig = ok(&pencilkit(&["eig", "--input", "a.json", "--via", "w", "--recover-vectors"], p));
    let eig: serde_json::Value = serde_json::from_str(&eig).unwrap();
    assert_eq!(eig["eigenvalues"].as_array().unwrap().len(), 4);
    assert!(eig["residuals"].as_array().unwrap().iter().all(|r| r["backward_error"].as_f64().unwrap() < 1e-12));
    assert_eq!(eig["w_vectors"].as_array().unwrap().len(), 4);

    let csv = ok(&pencilkit(&["cond", "--input", "a.json", "--report", "csv"], p));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn bench_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = "methods = [\"companion\", \"w\"]\ninclude_builtin = false\n\n[[problem]]\nname = \"tiny\"\nn = 2\nd = 2\nlayout = \"random\"\n";
    std::fs::write(p.join("bench.toml"), cfg).unwrap();
    ok(&pencilkit(&["bench", "--seed", "1", "--out", "out", "--config", "bench.toml"], p));
    let table = bench::parse_csv(std::fs::File::open(p.join("out/results.csv")).unwrap()).unwrap();
    assert_eq!(table.methods, vec![Method::Companion, Method::W]);
    assert_eq!(table.rows.len(), 4);
    assert!(p.join("out/plots/tiny.dat").exists());
    let summary: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("out/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["seed"], 1);
}

#[test]
fn malformed_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let ragged = r#"{"n": 2, "d": 1, "coeffs": [[[[1,0],[0,0]],[[0,0]]], [[[1,0],[0,0]],[[0,0],[1,0]]]]}"#;
    std::fs::write(p.join("ragged.json"), ragged).unwrap();
    let out = pencilkit(&["eig", "--input", "ragged.json"], p);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let wrong_degree = r#"{"n": 1, "d": 2, "coeffs": [[[[1,0]]], [[[1,0]]]]}"#;
    std::fs::write(p.join("deg.json"), wrong_degree).unwrap();
    assert!(!pencilkit(&["linearize", "--form", "companion", "--input", "deg.json", "--output", "x.json"], p).status.success());

    let bad_sigma = pencilkit(&["linearize", "--form", "fiedler", "--sigma", "1,1", "--input", "deg.json", "--output", "x.json"], p);
    assert!(!bad_sigma.status.success());
}
