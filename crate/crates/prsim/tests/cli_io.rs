//! Binary-level contract: exit codes, file layout, and the no-partial-output
//! guarantee.

use std::path::Path;
use std::process::Command;

fn prsim() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prsim"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("sim.conf");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn run_writes_three_artifacts_with_expected_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "rounds = 25\nnew_per_round = 300\nhigh_quality_count = 30\n");
    let status = prsim()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let issues = std::fs::read_to_string(dir.path().join("issues.csv")).unwrap();
    assert_eq!(issues.lines().count(), 26, "header + 25 data rows");
    assert!(issues.starts_with(
        "issue,q1_avg,q2_avg,q3_avg,q4_avg,total_submissions,accepted,abandoned\n"
    ));
    let rejections = std::fs::read_to_string(dir.path().join("rejections.csv")).unwrap();
    assert!(rejections.starts_with("rejections_before_acceptance,count\n"));
    let manifest = std::fs::read_to_string(dir.path().join("manifest")).unwrap();
    assert!(manifest.contains("rounds = 25"));
    assert!(manifest.contains("seed = 42"));
}

#[test]
fn seed_flag_overrides_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "rounds = 5\nnew_per_round = 100\nhigh_quality_count = 10\nseed = 1\n");
    let status = prsim()
        .args(["run", "--config"])
        .arg(&config)
        .args(["--seed", "777", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let manifest = std::fs::read_to_string(dir.path().join("manifest")).unwrap();
    assert!(manifest.contains("seed = 777"));
}

#[test]
fn infeasible_config_exits_one_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    // H = n forces tail mass 1, which no calibration can reach.
    let config = write_config(dir.path(), "new_per_round = 1000\nhigh_quality_count = 1000\n");
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    let output = prsim()
        .args(["run", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("tail mass"));
    assert!(std::fs::read_dir(&out).unwrap().next().is_none(), "no partial artifacts");
}

#[test]
fn validation_error_names_the_key_and_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "capacity = 0\n");
    let output = prsim().args(["run", "--config"]).arg(&config).output().unwrap();
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("capacity"));
}

#[test]
fn missing_config_file_exits_two() {
    let output = prsim().args(["run", "--config", "/nonexistent/sim.conf"]).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn calibrate_prints_reference_tail_mass() {
    let output = prsim()
        .args(["calibrate", "--mean", "4", "--high-count", "100", "--n", "2000", "--theta1", "8"])
        .output()
        .unwrap();
    assert!(output.status.success());
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("tail_mass: 0.050000"), "got: {stdout}");
    assert!(stdout.contains("shape: 3.5615"), "got: {stdout}");
}

#[test]
fn calibrate_rejects_infeasible_target() {
    let output = prsim()
        .args(["calibrate", "--mean", "4", "--high-count", "1000", "--n", "1000", "--theta1", "8"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn sweep_emits_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "rounds = 25\n");
    let status = prsim()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--param", "n", "--values", "300,500,700", "--reps", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let sweep = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 7, "header + 3 values x 2 reps");
    assert!(sweep.starts_with(
        "n,replication,seed,q1_avg,q2_avg,q3_avg,q4_avg,mean_rejections,first_time_accept_rate\n"
    ));
    let summary = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4, "header + 3 aggregate rows");
    // Too few points for phase segmentation: labels fall back to n/a.
    assert!(summary.lines().nth(1).unwrap().ends_with("n/a,n/a,n/a,n/a"));
}

#[test]
fn sweep_rejects_unknown_parameter() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "rounds = 10\n");
    let output = prsim()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--param", "capacity", "--values", "1,2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn manifest_reproduces_its_run() {
    // Feeding the manifest back in as the config reproduces the run exactly.
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "rounds = 15\nnew_per_round = 250\nhigh_quality_count = 25\nseed = 9\n");
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    std::fs::create_dir_all(&out_a).unwrap();
    std::fs::create_dir_all(&out_b).unwrap();
    assert!(prsim().args(["run", "--config"]).arg(&config).arg("--out").arg(&out_a).status().unwrap().success());
    assert!(prsim()
        .args(["run", "--config"])
        .arg(out_a.join("manifest"))
        .arg("--out")
        .arg(&out_b)
        .status()
        .unwrap()
        .success());
    assert_eq!(
        std::fs::read(out_a.join("issues.csv")).unwrap(),
        std::fs::read(out_b.join("issues.csv")).unwrap()
    );
    assert_eq!(
        std::fs::read(out_a.join("manifest")).unwrap(),
        std::fs::read(out_b.join("manifest")).unwrap()
    );
}
