use std::fs;
use std::path::Path;
use std::process::Command;

use hdfe::cli::{run, EXIT_CRITERION, EXIT_OK, EXIT_USAGE};
use hdfe::codec::format::load;
use hdfe::fpe::EncodingConfig;
use hdfe::io::{load_samples, save_config};

fn hdfe(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hdfe").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_config(dir: &Path, n: usize, m: usize, alpha: f64, seed: u64) -> std::path::PathBuf {
    let path = dir.join("cfg.toml");
    save_config(&path, &EncodingConfig::new(n, m, alpha, 2.5, seed).unwrap()).unwrap();
    path
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

#[test]
fn encode_then_inspect_matches_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 2048, 1, 10.0, 77);
    let data = dir.path().join("d.csv");
    let (code, _, err) = hdfe(&[
        "gen", "--kind", "sine-mixture", "--seed", "4", "--out", p(&data), "--param", "n=300",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(dir.path().join("d.toml").exists());

    let enc = dir.path().join("f.hdfe");
    let (code, _, err) = hdfe(&[
        "encode", "--config", p(&cfg), "--samples", p(&data), "--mode", "oneshot", "--out", p(&enc),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");

    let (code, text, _) = hdfe(&["inspect", "--encoding", p(&enc)]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(field(&text, "N"), "2048");
    assert_eq!(field(&text, "m"), "1");
    assert_eq!(field(&text, "alpha").parse::<f64>().unwrap(), 10.0);
    assert_eq!(field(&text, "beta").parse::<f64>().unwrap(), 2.5);
    assert_eq!(field(&text, "seed"), "77");
    assert_eq!(field(&text, "refinement"), "\"oneshot\"");
    assert_eq!(field(&text, "weights"), "300");
}

#[test]
fn single_sample_decodes_to_its_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 8192, 1, 10.0, 1);
    let data = dir.path().join("one.csv");
    fs::write(&data, "x1,y\n0.3,0.62\n").unwrap();
    let enc = dir.path().join("one.hdfe");
    let (code, _, err) = hdfe(&[
        "encode", "--config", p(&cfg), "--samples", p(&data), "--out", p(&enc),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let (code, out, _) = hdfe(&["decode", "--encoding", p(&enc), "--at", "0.3", "--grid"]);
    assert_eq!(code, EXIT_OK);
    let y: f64 = out.trim().parse().unwrap();
    assert!((y - 0.62).abs() <= 0.01, "{y}");

    let (code, out, _) = hdfe(&["decode", "--encoding", p(&enc), "--at", "0.3"]);
    assert_eq!(code, EXIT_OK);
    let y: f64 = out.trim().parse().unwrap();
    assert!((y - 0.62).abs() <= 0.01, "{y}");
}

#[test]
fn rescaled_outputs_come_back_in_original_units() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 8192, 1, 10.0, 2);
    let raw = dir.path().join("raw.csv");
    let scaled = dir.path().join("scaled.csv");
    for (path, extra) in [(&raw, None), (&scaled, Some("--rescale"))] {
        let mut args = vec![
            "gen", "--kind", "kernel-mixture", "--seed", "5", "--out", p(path), "--param", "n=1",
            "--param", "d=1",
        ];
        args.extend(extra);
        let (code, _, err) = hdfe(&args);
        assert_eq!(code, EXIT_OK, "{err}");
    }
    let original = load_samples(&raw).unwrap();
    let x = original.input(0)[0];
    let y = original.output(0).unwrap();
    assert_eq!(load_samples(&scaled).unwrap().output(0), Some(0.5));

    let enc = dir.path().join("s.hdfe");
    let (code, _, err) = hdfe(&["encode", "--config", p(&cfg), "--samples", p(&scaled), "--out", p(&enc)]);
    assert_eq!(code, EXIT_OK, "{err}");
    let at = format!("{x}");
    let side = dir.path().join("scaled.toml");
    let (code, out, err) = hdfe(&[
        "decode", "--encoding", p(&enc), "--at", &at, "--grid", "--sidecar", p(&side),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let got: f64 = out.trim().parse().unwrap();
    assert!((got - y).abs() <= 0.01, "{got} vs {y}");
}

#[test]
fn implicit_query() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 4096, 2, 10.0, 3);
    let data = dir.path().join("c.csv");
    assert_eq!(
        hdfe(&["gen", "--kind", "circle", "--seed", "1", "--out", p(&data), "--param", "n=400"]).0,
        EXIT_OK
    );
    let enc = dir.path().join("c.hdfe");
    assert_eq!(
        hdfe(&["encode", "--config", p(&cfg), "--samples", p(&data), "--out", p(&enc)]).0,
        EXIT_OK
    );
    let (code, out, _) = hdfe(&["query", "--encoding", p(&enc), "--at", "1,0", "--at", "0,0"]);
    assert_eq!(code, EXIT_OK);
    let v: Vec<f64> = out.lines().map(|l| l.parse().unwrap()).collect();
    assert!(v[0] > 3.0 * v[1].abs(), "{v:?}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(hdfe(&[]).0, EXIT_USAGE);
    assert_eq!(hdfe(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(hdfe(&["inspect", "--encoding", "x", "--bogus"]).0, EXIT_USAGE);
    assert_eq!(hdfe(&["encode", "--config", "a", "--samples", "b", "--out", "c", "--mode", "fast"]).0, EXIT_USAGE);
    assert_eq!(hdfe(&["experiment", "--name", "nope", "--out", "/tmp"]).0, EXIT_USAGE);
    assert_eq!(hdfe(&["gen", "--kind", "circle", "--seed", "0", "--out", "/tmp/x.csv", "--param", "n"]).0, EXIT_USAGE);
    let (code, out, _) = hdfe(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("experiment"));
}

#[test]
fn missing_file_is_an_io_error() {
    let (code, _, err) = hdfe(&["inspect", "--encoding", "/nonexistent/f.hdfe"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("/nonexistent/f.hdfe"), "{err}");
}

#[test]
fn malformed_encoding_names_the_byte() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.hdfe");
    fs::write(&bad, b"HDFX\x01\x00").unwrap();
    let (code, _, err) = hdfe(&["inspect", "--encoding", p(&bad)]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("at byte 0"), "{err}");

    // Valid header, truncated body.
    let cfg = write_config(dir.path(), 64, 1, 10.0, 0);
    let data = dir.path().join("one.csv");
    fs::write(&data, "x1,y\n0.5,0.5\n").unwrap();
    let enc = dir.path().join("ok.hdfe");
    hdfe(&["encode", "--config", p(&cfg), "--samples", p(&data), "--out", p(&enc)]);
    let bytes = fs::read(&enc).unwrap();
    fs::write(&bad, &bytes[..100]).unwrap();
    let (code, _, err) = hdfe(&["decode", "--encoding", p(&bad), "--at", "0.5"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("at byte"), "{err}");
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 64, 1, 10.0, 0);
    let data = dir.path().join("bad.csv");
    fs::write(&data, "x1,y\n0.1,0.2\n0.3,abc\n").unwrap();
    let (code, _, err) = hdfe(&[
        "encode", "--config", p(&cfg), "--samples", p(&data), "--out", p(&dir.path().join("o")),
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 3"), "{err}");
}

#[test]
fn config_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), 64, 1, 10.0, 0);
    let data = dir.path().join("one.csv");
    fs::write(&data, "x1,y\n0.5,0.5\n").unwrap();
    let enc = dir.path().join("ok.hdfe");
    hdfe(&["encode", "--config", p(&cfg), "--samples", p(&data), "--out", p(&enc)]);
    let (c, e) = load(&enc).unwrap();
    assert_eq!(e.config_fingerprint, c.fingerprint());
    // Two inputs against an m=1 encoding.
    let (code, _, err) = hdfe(&["decode", "--encoding", p(&enc), "--at", "0.1,0.2"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(!err.is_empty());
}

#[test]
fn experiment_writes_reports_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, err) = hdfe(&[
        "experiment", "--name", "isometry", "--out", p(dir.path()), "--seeds", "0",
        "--set", "dim=256", "--set", "pairs=4", "--set", "samples=300", "--set", "grid=1001",
    ]);
    assert!(code == EXIT_OK || code == EXIT_CRITERION, "{err}");
    assert!(out.contains("isometry/linear-fit"), "{out}");
    assert!(dir.path().join("isometry/0/report.json").exists());
    assert!(dir.path().join("isometry/aggregate/report.json").exists());
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    let entry = &summary["experiments"]["isometry"];
    assert_eq!(entry["pass"].as_bool().unwrap(), code == EXIT_OK);

    let (code, _, _) = hdfe(&["experiment", "--name", "isometry", "--out", p(dir.path()), "--set", "colour=red"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn criterion_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // An impossible threshold.
    let (code, out, err) = hdfe(&[
        "experiment", "--name", "info-loss", "--out", p(dir.path()), "--seeds", "0",
        "--set", "dim=256", "--set", "functions=3", "--set", "samples=100", "--set", "queries=10",
        "--set", "min-spearman=1.5",
    ]);
    assert_eq!(code, EXIT_CRITERION, "{err}");
    assert!(out.contains("FAIL info-loss/spearman"), "{out}");
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hdfe");
    let st = Command::new(bin).arg("--version").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = Command::new(bin).arg("decode").output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin)
        .args(["inspect", "--encoding", "/nonexistent"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    let st = Command::new(bin)
        .env("HDFE_THREADS", "many")
        .args(["inspect", "--encoding", "/nonexistent"])
        .output()
        .unwrap();
    assert_eq!(st.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&st.stderr).contains("HDFE_THREADS"));
}
