use std::process::{Command, Output};

fn minesweep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minesweep")).args(args).output().expect("binary runs")
}

#[test]
fn bench_run_is_byte_stable_without_timing() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let path = dir.path().join(name);
        let out = minesweep(&[
            "bench", "run", "--preset", "beginner", "--versions", "3.0,4.5", "--games", "30", "--seed", "9",
            "--no-timing", "--out", path.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        std::fs::read_to_string(path).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("3.0,9,9,10,30,"));
    assert!(lines[2].starts_with("4.5,9,9,10,30,"));
}

#[test]
fn learned_versions_without_models_become_error_rows() {
    let out = minesweep(&["bench", "run", "--preset", "beginner", "--versions", "5.5", "--games", "5", "--no-timing"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("\n5.5,9,9,10,0,0,0,,,\n"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("skipped 5.5"));
}

#[test]
fn summary_groups_by_version() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let out = minesweep(&[
        "bench", "run", "--preset", "beginner", "--versions", "3.0", "--games", "10", "--no-timing", "--summary",
        summary.to_str().unwrap(), "--group-by", "version",
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(summary).unwrap();
    assert!(text.starts_with("version,all,games,wins,timeouts,win_ratio\n3.0,"));
}

#[test]
fn table4_lists_every_benchmarked_version() {
    let out = minesweep(&["bench", "table4", "--games", "5"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    for v in ["2.0", "2.5", "3.0", "3.5", "4.0", "4.5"] {
        assert!(text.lines().any(|l| l.starts_with(&format!("{v} "))), "{v} missing:\n{text}");
    }
    assert!(text.contains("skipped"));
}

#[test]
fn bad_arguments_fail() {
    assert!(!minesweep(&["bench", "run", "--versions", "9.9"]).status.success());
    assert!(!minesweep(&["bench", "run", "--preset", "huge"]).status.success());
}
