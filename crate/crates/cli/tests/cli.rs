use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dejitter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dejitter"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = dejitter(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A 24x20 scene and its line-jitter corruption.
fn setup(dir: &Path, kind: &str) -> (PathBuf, PathBuf) {
    let original = dir.join("original.png");
    ok(&[
        "pattern",
        "--width",
        "24",
        "--height",
        "20",
        "--seed",
        "5",
        s(&original),
    ]);
    let corrupted = dir.join("corrupted");
    ok(&[
        "synthesize",
        "--kind",
        kind,
        "--seed",
        "7",
        s(&original),
        s(&corrupted),
    ]);
    (original, corrupted)
}

#[test]
fn synthesize_writes_manifest_with_fixed_keys() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = setup(dir.path(), "pixel");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let mut keys: Vec<&str> = manifest
        .as_object()
        .unwrap()
        .keys()
        .map(|k| k.as_str())
        .collect();
    keys.sort();
    assert_eq!(
        keys,
        [
            "channels",
            "height",
            "kind",
            "noise_sigma2",
            "rho",
            "rng",
            "seed",
            "sigma2",
            "width"
        ]
    );
    assert_eq!(manifest["kind"], "pixel");
    assert_eq!(manifest["sigma2"], 1.5);
    let truth = fs::read_to_string(out.join("truth.txt")).unwrap();
    assert!(truth.starts_with("24 20\n"));
    assert!(out.join("corrupted.png").exists());
}

#[test]
fn pipeline_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let root = dir.path().join(name);
        let (original, corrupted) = setup(&root, "line-pixel");
        let out = root.join("out");
        ok(&[
            "--threads",
            threads,
            "dejitter",
            "--kind",
            "line-pixel",
            "--alpha",
            "4",
            "--p",
            "0.5",
            "--order",
            "2",
            s(&corrupted.join("corrupted.png")),
            s(&out),
        ]);
        let report = ok(&[
            "evaluate",
            "--original",
            s(&original),
            "--reconstructed",
            s(&out.join("reconstructed.png")),
            "--truth",
            s(&corrupted.join("truth.txt")),
            "--estimate",
            s(&out.join("estimate.txt")),
        ]);
        (
            fs::read(out.join("estimate.txt")).unwrap(),
            fs::read(out.join("reconstructed.png")).unwrap(),
            report,
        )
    };
    let a = run("a", "1");
    let b = run("b", "3");
    assert_eq!(a, b);
}

#[test]
fn rho_zero_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let (_, corrupted) = setup(dir.path(), "line");
    let input = corrupted.join("corrupted.png");
    let out = dir.path().join("out");
    ok(&[
        "dejitter",
        "--kind",
        "line",
        "--alpha",
        "0.01",
        "--p",
        "0.5",
        "--rho",
        "0",
        s(&input),
        s(&out),
    ]);
    let report: Value = serde_json::from_str(&ok(&[
        "evaluate",
        "--original",
        s(&input),
        "--reconstructed",
        s(&out.join("reconstructed.png")),
    ]))
    .unwrap();
    assert_eq!(report["psnr"], "inf");
    assert_eq!(report["mse"], 0.0);
}

#[test]
fn estimate_equal_to_truth_scores_one() {
    let dir = tempfile::tempdir().unwrap();
    let (original, corrupted) = setup(dir.path(), "line");
    let truth = corrupted.join("truth.txt");
    let report: Value = serde_json::from_str(&ok(&[
        "evaluate",
        "--original",
        s(&original),
        "--reconstructed",
        s(&corrupted.join("corrupted.png")),
        "--truth",
        s(&truth),
        "--estimate",
        s(&truth),
    ]))
    .unwrap();
    assert_eq!(report["accuracy"], 1.0);
    assert_eq!(report["accuracy_modulo_shift"], 1.0);
}

#[test]
fn rho_auto_reads_the_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let (_, corrupted) = setup(dir.path(), "pixel");
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(corrupted.join("manifest.json")).unwrap())
            .unwrap();
    let out = dir.path().join("out");
    let stdout = ok(&[
        "dejitter",
        "--kind",
        "pixel",
        "--alpha",
        "4",
        "--p",
        "0.5",
        "--rounds",
        "1",
        s(&corrupted.join("corrupted.png")),
        s(&out),
    ]);
    let result: Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(result["rho"], manifest["rho"]);
    let trace = fs::read_to_string(out.join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("sweep,kind,energy"));
    assert_eq!(trace.lines().count(), 5);
    let saved: Value =
        serde_json::from_str(&fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    assert_eq!(saved, result);
}

fn assert_fails(args: &[&str], code: i32, needle: &str) {
    let out = dejitter(args);
    assert_eq!(out.status.code(), Some(code), "{args:?}");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains(needle), "{stderr}");
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let (_, corrupted) = setup(dir.path(), "pixel");
    let input = corrupted.join("corrupted.png");
    let out = dir.path().join("out");

    assert_fails(
        &[
            "dejitter",
            "--kind",
            "pixel",
            "--alpha",
            "4",
            "--p",
            "0.5",
            "--order",
            "2",
            s(&input),
            s(&out),
        ],
        2,
        "order 2",
    );
    let missing = dir.path().join("missing.png");
    let out_missing = dejitter(&["synthesize", "--kind", "line", s(&missing), s(&out)]);
    assert_eq!(out_missing.status.code(), Some(1));
    assert_eq!(
        String::from_utf8_lossy(&out_missing.stderr)
            .trim()
            .lines()
            .count(),
        1
    );

    // no manifest next to a copied input
    let lonely = dir.path().join("lonely.png");
    fs::copy(&input, &lonely).unwrap();
    assert_fails(
        &[
            "dejitter",
            "--kind",
            "line",
            "--alpha",
            "0.01",
            "--p",
            "0.5",
            s(&lonely),
            s(&out),
        ],
        2,
        "--rho auto",
    );
    assert_fails(
        &[
            "dejitter",
            "--kind",
            "line",
            "--alpha",
            "-1",
            "--p",
            "0.5",
            "--rho",
            "2",
            s(&lonely),
            s(&out),
        ],
        2,
        "alpha",
    );

    let small = dir.path().join("small.png");
    ok(&["pattern", "--width", "8", "--height", "8", s(&small)]);
    assert_fails(
        &[
            "evaluate",
            "--original",
            s(&small),
            "--reconstructed",
            s(&input),
        ],
        1,
        "error",
    );
}
