//! End-to-end checks of the `ocdma` binary: verbs, exit codes, and
//! byte-reproducible outputs.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ocdma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ocdma"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("no signal")
}

const CONFIG: &str = "\
[code]
length = 64
weight = 2

[receiver]
kind = ccr
s = 2

[sweep]
users = 2, 6
methods = analytic, mc
trials = 50000
seed = 9

[channels]
plan = none
plan = 1/2
";

#[test]
fn gen_codes_then_validate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("codes.txt");
    let out = ocdma(&[
        "gen-codes",
        "--length",
        "64",
        "--weight",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("64 2 1 1\n"));
    assert_eq!(text.lines().count(), 32); // header + 31 codewords
    assert!(text.ends_with('\n') && !text.contains(" \n"));

    let out = ocdma(&["validate", "--codes", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).contains("ok: 31 codewords"));
}

#[test]
fn validate_reports_violations_with_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    fs::write(&path, "64 2 1 1\n0 32\n").unwrap();
    let out = ocdma(&["validate", "--codes", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("autocorrelation 2 > 1 at shift 32"),
        "{stdout}"
    );
}

#[test]
fn malformed_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let garbled = dir.path().join("garbled.txt");
    fs::write(&garbled, "64 2 1\n").unwrap();
    assert_eq!(
        code(&ocdma(&["validate", "--codes", garbled.to_str().unwrap()])),
        1
    );

    assert_eq!(
        code(&ocdma(&["validate", "--codes", "/nonexistent/path"])),
        1
    );

    // Bad config: zero coefficient, located by line.
    let config = dir.path().join("bad.ini");
    fs::write(&config, CONFIG.replace("plan = 1/2", "plan = 0/2")).unwrap();
    let out = ocdma(&[
        "ber",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 17"), "{stderr}");
    assert!(stderr.contains("0 < b/a <= 1"), "{stderr}");

    // Unknown flags are argument errors.
    assert_eq!(code(&ocdma(&["sweep", "--bogus"])), 1);
    // Help is not an error.
    assert_eq!(code(&ocdma(&["--help"])), 0);
}

#[test]
fn ber_writes_csv_and_prints_rows() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("demo.ini");
    fs::write(&config, CONFIG).unwrap();
    let out_dir = dir.path().join("out");
    let out = ocdma(&[
        "ber",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{out:?}");
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("8 rows (8 evaluated, 0 recorded errors)"),
        "{stdout}"
    );
    let csv = fs::read_to_string(out_dir.join("results.csv")).unwrap();
    assert!(csv.starts_with("f,w,n,receiver,s,s2,plan,alpha_model,network_users,method,pe,"));
    assert_eq!(csv.lines().count(), 9); // header + 8 rows
    assert!(!csv.contains('\r'));
    assert!(out_dir.join("results_provenance.txt").exists());
}

#[test]
fn sweep_outputs_are_reproducible_and_seed_sensitive() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("demo.ini");
    fs::write(&config, CONFIG).unwrap();
    let run = |out: &Path, seed: Option<&str>| {
        let out_str = out.to_str().unwrap().to_string();
        let mut args = vec![
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            &out_str,
        ];
        if let Some(seed) = seed {
            args.push("--seed");
            args.push(seed);
        }
        assert_eq!(code(&ocdma(&args)), 0);
    };
    let (a, b, c) = (
        dir.path().join("a"),
        dir.path().join("b"),
        dir.path().join("c"),
    );
    run(&a, None);
    run(&b, None);
    run(&c, Some("31337"));
    let read = |dir: &Path| fs::read(dir.join("results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    // Curve files exist and are identical across the twin runs.
    let manifest_a = fs::read(a.join("results_curves/manifest.txt")).unwrap();
    let manifest_b = fs::read(b.join("results_curves/manifest.txt")).unwrap();
    assert_eq!(manifest_a, manifest_b);
    assert!(a.join("results_curves/curve_000.dat").exists());
}

#[test]
fn out_dir_collision_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("demo.ini");
    fs::write(&config, CONFIG).unwrap();
    let blocker = dir.path().join("blocked");
    fs::write(&blocker, "file, not a directory").unwrap();
    let out = ocdma(&[
        "ber",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}
