use std::path::Path;
use std::process::{Command, Output};

fn maisac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maisac")).args(args).output().expect("binary runs")
}

fn data_lines(path: &Path) -> Vec<String> {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).map(String::from).collect()
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(maisac(&["run", "--scheme", "nope"]).status.code(), Some(2));
    assert_eq!(maisac(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(maisac(&["run", "--config", "/definitely/not/here.toml"]).status.code(), Some(2));
    assert_eq!(maisac(&["sweep", "--param", "bogus", "--values", "1"]).status.code(), Some(2));
}

#[test]
fn unreachable_thresholds_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("hard.toml");
    std::fs::write(&cfg, "gamma_th_db = [60.0, 60.0]\n").unwrap();
    let out = maisac(&["run", "--config", cfg.to_str().unwrap(), "--scheme", "fpa"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn run_prints_positions_and_writes_trace() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let out = maisac(&["run", "--scheme", "receive-ma", "--seed", "2", "--out", trace.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("violations 0"), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("rx")).count(), 4);
    assert_eq!(text.lines().filter(|l| l.starts_with("tx")).count(), 6);
    let lines = data_lines(&trace);
    assert_eq!(lines[0], "iteration,stage,objective,accepted,detail");
    assert!(lines.len() > 2);
}

#[test]
fn sweep_writes_one_row_per_value_scheme_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for (path, workers) in [(&a, "1"), (&b, "3")] {
        let out = maisac(&[
            "sweep", "--param", "power", "--values", "20,24", "--seeds", "2", "--workers", workers, "--out",
            path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let rows = data_lines(&a);
    assert_eq!(rows.len(), 1 + 2 * 4 * 2);
    assert!(rows[1..].iter().all(|r| r.split(',').nth(3) == Some("ok")));
    // Identical apart from the timestamp line.
    assert_eq!(rows, data_lines(&b));
    let summary = data_lines(&dir.path().join("a.summary.csv"));
    assert_eq!(summary.len(), 1 + 2 * 4);
}

#[test]
fn beampattern_and_gainmap_emit_tables() {
    let out = maisac(&["beampattern", "--scheme", "fpa", "--points", "31"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("fpa,")).count(), 31);

    let out = maisac(&["gainmap", "--scheme", "fpa", "--resolution", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 25);
    assert_eq!(text.lines().filter(|l| l.starts_with("# rx")).count(), 4);
}

#[test]
fn selftest_passes_on_defaults() {
    let out = maisac(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().filter(|l| l.starts_with("PASS")).count(), 4);
}
