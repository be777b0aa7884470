use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qht_core::classifier::Classifier;
use qht_core::io::{ClassifierFile, MatrixFile, PureStateFile};
use qht_core::quantum::{DensityMatrix, Povm, PureState};
use qht_core::report;
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qht-cert"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr_record(o: &Output) -> Value {
    serde_json::from_str(String::from_utf8(o.stderr.clone()).unwrap().trim()).expect("JSON error record")
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string(value).unwrap()).unwrap();
    path
}

struct Fixture {
    dir: TempDir,
    fig3: PathBuf,
    balanced: PathBuf,
    zero: PathBuf,
    mixed: PathBuf,
}

fn fixture() -> Fixture {
    let dir = TempDir::new().unwrap();
    let fig3 = Classifier::bloch_projective(2.0 * 0.9f64.sqrt().acos(), FRAC_PI_2);
    let balanced = Classifier::from_povm(Povm::computational(2)).unwrap();
    let fig3 = write_json(dir.path(), "fig3.json", &ClassifierFile::from_classifier(&fig3));
    let balanced = write_json(dir.path(), "balanced.json", &ClassifierFile::from_classifier(&balanced));
    let zero = write_json(dir.path(), "zero.json", &PureStateFile::from_state(&PureState::basis(2, 0)));
    let mixed = write_json(
        dir.path(),
        "mixed.json",
        &MatrixFile::from_matrix(DensityMatrix::maximally_mixed(2).matrix()),
    );
    Fixture {
        dir,
        fig3,
        balanced,
        zero,
        mixed,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn bounds_row() {
    let o = run(&["bounds", "--pA", "0.9", "--pB", "0.1"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), report::BOUNDS_HEADER);
    let row = lines.next().unwrap();
    for needle in ["0.44721", "0.4000", "0.04721", "0.01132"] {
        assert!(row.contains(needle), "{row} lacks {needle}");
    }
}

#[test]
fn bounds_with_depolarization() {
    let o = run(&["bounds", "--pA", "0.9", "--pB", "0.1", "--p", "0.2"]);
    assert!(o.status.success());
    let row = stdout(&o).lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert_eq!(fields.len(), 10);
    assert!(fields[7].starts_with("0.67082"));
    assert!(fields[8].starts_with("0.5000"));
    assert!(fields[9].starts_with("0.2500"));
}

#[test]
fn invalid_input_exits_one_with_record() {
    let o = run(&["bounds", "--pA", "0.1", "--pB", "0.9"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_record(&o)["error"], "InvalidProbabilityOrder");

    let o = run(&["bounds", "--pA", "0.9"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_record(&o)["error"], "Usage");

    let o = run(&["certify", "--classifier", "/nonexistent.json", "--state", "/nonexistent.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_record(&o)["error"], "Io");
}

#[test]
fn help_exits_zero() {
    let o = run(&["--help"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("compare-depol"));
    let o = run(&["compare-pure", "--help"]);
    assert!(stdout(&o).contains("qht_minus_hoelder"));
}

#[test]
fn toy_example_passes() {
    let o = run(&["toy-example"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let beta = text.lines().find(|l| l.starts_with("beta,")).unwrap();
    assert!(beta.starts_with("beta,0.4401923"));
    assert!(beta.ends_with("PASS"));
    assert!(text.lines().skip(1).all(|l| l.ends_with("PASS")));
    assert!(text.contains("theta_max,0.9272952"));
}

#[test]
fn certify_writes_certificate() {
    let f = fixture();
    let out = f.dir.path().join("cert.json");
    let args = [
        "certify",
        "--classifier",
        s(&f.fig3),
        "--state",
        s(&f.zero),
        "--shots",
        "100000",
        "--epsilon",
        "0.001",
        "--seed",
        "42",
        "--output",
        s(&out),
    ];
    let o = run(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let first = std::fs::read_to_string(&out).unwrap();
    let cert: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(cert["abstained"], false);
    assert_eq!(cert["label"], 0);
    assert_eq!(cert["mode"], "protocol");
    assert_eq!(cert["input_hashes"]["state"].as_str().unwrap().len(), 64);
    let r = cert["radii"]["r_qht_pure"].as_f64().unwrap();
    assert!((r - 0.44).abs() < 0.01);

    // Same inputs and seed give identical bytes.
    assert!(run(&args).status.success());
    assert_eq!(first, std::fs::read_to_string(&out).unwrap());
}

#[test]
fn certify_matches_library() {
    let f = fixture();
    let o = run(&[
        "certify",
        "--classifier",
        s(&f.fig3),
        "--state",
        s(&f.zero),
        "--shots",
        "5000",
        "--seed",
        "7",
    ]);
    let cert: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let cl = qht_core::io::read_classifier(&f.fig3).unwrap();
    let lib = qht_core::certification::certify(&cl, &DensityMatrix::basis(2, 0), 5000, 0.001, 7).unwrap();
    assert_eq!(cert["p_a_lower"].as_f64().unwrap(), lib.p_a_lower);
    assert_eq!(cert["counts"], serde_json::to_value(&lib.counts).unwrap());
}

#[test]
fn certify_abstains_with_exit_two() {
    let f = fixture();
    let o = run(&[
        "certify",
        "--classifier",
        s(&f.balanced),
        "--state",
        s(&f.mixed),
        "--shots",
        "10000",
        "--epsilon",
        "0.01",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let cert: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["abstained"], true);
    assert!(cert["radii"].is_null());
}

#[test]
fn certify_smoothed() {
    let f = fixture();
    let o = run(&[
        "certify",
        "--classifier",
        s(&f.balanced),
        "--state",
        s(&f.zero),
        "--p",
        "0.2",
        "--shots",
        "1000000",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let cert: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cert["mode"], "smoothed");
    assert_eq!(cert["smoothing"]["p"], 0.2);
    let r = cert["radii"]["r_depol_qht"].as_f64().unwrap();
    assert!((r - 0.6708).abs() < 0.01);
}

#[test]
fn compare_pure_is_stable_and_matches_library() {
    let a = stdout(&run(&["compare-pure", "--grid", "20"]));
    let b = stdout(&run(&["compare-pure", "--grid", "20"]));
    assert_eq!(a, b);
    assert_eq!(a, report::pure_comparison_csv(20).unwrap());
    assert_eq!(a.lines().count(), 1 + 20 * 21 / 2);
}

#[test]
fn compare_depol_levels() {
    let f = fixture();
    let out = f.dir.path().join("depol.csv");
    let o = run(&["compare-depol", "--p", "0.1,0.5", "--resolution", "9", "-o", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text, report::depol_comparison_csv(&[0.1, 0.5], 9).unwrap());
    assert_eq!(text.lines().count(), 1 + 18);
    let default = stdout(&run(&["compare-depol", "--resolution", "4"]));
    assert_eq!(default.lines().count(), 1 + 19 * 4);
}

#[test]
fn oracle_subcommands() {
    let f = fixture();
    let o = run(&["oracle", "boundary", "--pA", "0.9", "--pB", "0.1", "--samples", "4"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["theta"].as_f64().unwrap() - 0.9273).abs() < 1e-3);

    let rho = write_json(
        f.dir.path(),
        "rho.json",
        &PureStateFile::from_state(&PureState::bloch(std::f64::consts::FRAC_PI_3, -FRAC_PI_2)),
    );
    let o = run(&[
        "oracle", "min-beta", "--sigma", s(&f.zero), "--rho", s(&rho), "--alpha0", "0.1", "--samples", "20000",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let best = v["best_value"].as_f64().unwrap();
    assert!((0.4401923 - 1e-8..0.4502).contains(&best));
    assert_eq!(v["samples_used"], 20000);

    let o = run(&[
        "oracle",
        "coverage",
        "--classifier",
        s(&f.fig3),
        "--state",
        s(&f.zero),
        "--trials",
        "2000",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["coverage"].as_f64().unwrap() >= 0.94);

    let o = run(&["oracle", "min-beta", "--sigma", s(&f.zero), "--rho", s(&rho), "--alpha0", "0.1", "--samples", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stderr_record(&o)["error"], "InvalidArgument");
}

#[test]
fn thread_cap_is_respected() {
    let f = fixture();
    let args = ["certify", "--classifier", s(&f.fig3), "--state", s(&f.zero), "--shots", "50000"];
    let capped = bin().env("QHT_CERT_THREADS", "1").args(args).output().unwrap();
    let free = bin().args(args).output().unwrap();
    assert!(capped.status.success());
    assert_eq!(capped.stdout, free.stdout);
    let bad = bin().env("QHT_CERT_THREADS", "zero").args(args).output().unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(stderr_record(&bad)["error"], "Usage");
}
