use std::path::Path;
use std::process::{Command, Output};

fn qbm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qbm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("spawn qbm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn convergence_writes_data_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("train.json");
    std::fs::write(&cfg, r#"{"global_max_iters": 3}"#).unwrap();
    let out = qbm(
        &["convergence", "--runs", "2", "--config", cfg.to_str().unwrap(), "--out-dir", "conv", "--created-at", "t0"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("P(1001)"));
    let conv = dir.path().join("conv");
    for f in ["curves.csv", "top5.csv", "summary.json", "curves.svg", "records/manifest.json"] {
        assert!(conv.join(f).is_file(), "{f}");
    }
    let rec = conv.join("records/record_000.json");
    let gen = qbm(&["generate", "--record", rec.to_str().unwrap(), "--shots", "25"], dir.path());
    assert!(gen.status.success());
    let text = stdout(&gen);
    assert!(text.starts_with("state,count\n"));
    let total: u64 = text
        .lines()
        .skip(1)
        .filter_map(|l| l.split_once(',').and_then(|(_, c)| c.parse::<u64>().ok()))
        .sum();
    assert_eq!(total, 25);
    assert!(text.lines().any(|l| l.starts_with("modal ")));
}

#[test]
fn image_dry_run_touches_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = qbm(&["image", "--dry-run", "--out-dir", "img"], dir.path());
    assert!(out.status.success());
    assert!(stdout(&out).contains("40 blocks per group"));
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn failures_exit_nonzero_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["convergence", "--target", "10x1"][..],
        &["noise", "--p1", "1.5"],
        &["generate", "--record", "missing.json"],
        &["convergence", "--config", "nope.json"],
    ] {
        let out = qbm(args, dir.path());
        assert!(!out.status.success(), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "), "{args:?}");
    }
}

#[test]
fn classical_baseline_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cd.json");
    std::fs::write(&cfg, r#"{"max_epochs": 5, "moment_samples": 100}"#).unwrap();
    let out = qbm(
        &["classical-baseline", "--runs", "2", "--config", cfg.to_str().unwrap(), "--out-dir", "cd"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("cd/kl.csv")).unwrap();
    assert_eq!(csv.lines().count(), 7);
}
