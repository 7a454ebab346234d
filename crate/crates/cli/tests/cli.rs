use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn qkmeans(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qkmeans"))
        .args(args)
        .current_dir(dir)
        .env_remove("QKMEANS_OUT_DIR")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn repo_file(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn synth_small(dir: &Path) -> PathBuf {
    let out = qkmeans(dir, &["synth", "--shots", "16", "--seed", "3", "--out", "iq.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    dir.join("iq.csv")
}

fn flagged_pairs(flags: &Path) -> Vec<String> {
    let mut pairs: Vec<String> = fs::read_to_string(flags)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    pairs.dedup();
    pairs
}

#[test]
fn synth_writes_expected_rows_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    let first = fs::read_to_string(synth_small(dir.path())).unwrap();
    // 4 pairs × 4 schedules × 2 qubits × 16 shots, plus the header
    assert_eq!(first.lines().count(), 512 + 1);
    assert!(dir.path().join("iq.csv.manifest.toml").exists());
    let again = fs::read_to_string(synth_small(dir.path())).unwrap();
    assert_eq!(first, again);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("results");
    fs::create_dir(&target).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_qkmeans"))
        .args(["synth", "--shots", "4"])
        .current_dir(dir.path())
        .env("QKMEANS_OUT_DIR", &target)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0);
    assert!(target.join("iq_shots.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();

    fs::write(d.join("bad.toml"), "device = \"x\"\nqubits = 3\n").unwrap();
    assert_eq!(code(&qkmeans(d, &["synth", "--model", "bad.toml"])), 1);
    assert_eq!(code(&qkmeans(d, &["synth", "--shots", "4", "--out", "bad.toml/iq.csv"])), 1);
    assert_eq!(code(&qkmeans(d, &["frobnicate"])), 1);
    assert_eq!(code(&qkmeans(d, &["--help"])), 0);

    fs::write(d.join("malformed.csv"), "qubit,schedule,shot,i,q\n0,0-1:00,0,abc,0.1\n").unwrap();
    assert_eq!(code(&qkmeans(d, &["benchmark", "--data", "malformed.csv"])), 2);

    let iq = fs::read_to_string(synth_small(d)).unwrap();
    let partial: String = iq.lines().filter(|l| !l.contains("0-1:11")).map(|l| format!("{l}\n")).collect();
    fs::write(d.join("partial.csv"), partial).unwrap();
    assert_eq!(code(&qkmeans(d, &["crosstalk", "--data", "partial.csv"])), 2);

    fs::write(
        d.join("scores.csv"),
        "pair,qubit,dataset,score,mean,half_width\n\
         5-6,Q5,single,0.9 ±0.01,0.9,0.01\n5-6,Q5,both,0.9 ±0.01,0.9,0.01\n\
         5-6,Q6,single,0.9 ±0.01,0.9,0.01\n5-6,Q6,both,0.9 ±0.01,0.9,0.01\n",
    )
    .unwrap();
    let fixture = repo_file("fixtures/reference_coefficients.csv");
    let args = ["crosstalk", "--coefficients", fixture.to_str().unwrap(), "--scores", "scores.csv"];
    assert_eq!(code(&qkmeans(d, &args)), 2);
}

#[test]
fn benchmark_smoke() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let start = Instant::now();
    let out = qkmeans(
        dir.path(),
        &["benchmark", "--data", "iq.csv", "--mode", "sampled", "--circuit-shots", "64", "--splits", "2", "--out", "s.csv"],
    );
    assert!(start.elapsed() < Duration::from_secs(60));
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pair,qubit,dataset,score,mean,half_width"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 16);
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f.len(), 6);
        assert!(f[1].starts_with('Q'));
        assert!(f[2] == "single" || f[2] == "both");
        assert!(f[3].contains(" ±"));
        let mean: f64 = f[4].parse().unwrap();
        assert!((0.5..=1.0).contains(&mean));
    }
}

#[test]
fn crosstalk_null_model_and_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let null = repo_file("configs/readout_model_null.toml");
    let out = qkmeans(d, &["synth", "--model", null.to_str().unwrap(), "--shots", "4096", "--seed", "2", "--out", "null.csv"]);
    assert_eq!(code(&out), 0);
    assert_eq!(code(&qkmeans(d, &["crosstalk", "--data", "null.csv", "--out", "null"])), 0);
    assert!(flagged_pairs(&d.join("null/flags.csv")).is_empty());
    for pair in ["0-1", "1-2", "2-3", "3-4"] {
        assert!(d.join(format!("null/correlation_{pair}.csv")).exists());
    }

    let fixture = repo_file("fixtures/reference_coefficients.csv");
    let out = qkmeans(d, &["crosstalk", "--coefficients", fixture.to_str().unwrap(), "--out", "fixture"]);
    assert_eq!(code(&out), 0);
    assert_eq!(flagged_pairs(&d.join("fixture/flags.csv")), ["1-2", "2-3"]);
}

#[test]
fn complexity_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(code(&qkmeans(d, &["complexity"])), 0);
    let files = fs::read_dir(d.join("complexity"))
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "csv"))
        .count();
    assert_eq!(files, 6);
    assert!(d.join("complexity/complexity.manifest.toml").exists());

    assert_eq!(code(&qkmeans(d, &["complexity", "--n-range", "50:50", "--f-range", "8:8", "--out", "one"])), 0);
    let text = fs::read_to_string(d.join("one/complexity_both_samples.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);

    assert_eq!(code(&qkmeans(d, &["complexity", "--n-range", "100:10", "--out", "empty"])), 1);
}
