//! End-to-end checks of the binary: scenario runs, determinism of fixed-step
//! output, trajectory-file round-trips, and error reporting.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use liesys_cli::io;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liesys"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn run_scenario(config: &str, out_dir: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(fixture(config))
        .arg("--out-dir")
        .arg(out_dir)
        .args(extra)
        .output()
        .expect("binary runs")
}

#[test]
fn brockett_scenario_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("brockett.cfg", dir.path(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("status: PASS"), "{stdout}");
    assert!(stdout.contains("controllable (generated 3 of 3)"), "{stdout}");
    for file in ["brockett-direct.csv", "brockett-weinorman.csv", "brockett-wn-coords.csv", "brockett-report.txt"] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }
    // report echoes the tolerances in use
    let report = std::fs::read_to_string(dir.path().join("brockett-report.txt")).unwrap();
    assert!(report.contains("threshold.compare = 1e-6"), "{report}");
    assert!(report.contains("tol = 1e-10"), "{report}");
}

#[test]
fn fixed_step_runs_are_bit_identical() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let out1 = run_scenario("brockett.cfg", dir1.path(), &["--fixed-step", "0.01"]);
    let out2 = run_scenario("brockett.cfg", dir2.path(), &["--fixed-step", "0.01"]);
    assert!(out1.status.success() && out2.status.success());
    for file in ["brockett-direct.csv", "brockett-weinorman.csv", "brockett-wn-coords.csv"] {
        let a = std::fs::read(dir1.path().join(file)).unwrap();
        let b = std::fs::read(dir2.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn emitted_trajectories_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("brockett.cfg", dir.path(), &[]);
    assert!(out.status.success());
    for file in ["brockett-direct.csv", "brockett-wn-coords.csv"] {
        let path = dir.path().join(file);
        let original = std::fs::read_to_string(&path).unwrap();
        let table = io::read_table(&path).unwrap();
        assert_eq!(io::format_table(&table), original, "{file} does not round-trip");
    }
}

#[test]
fn unicycle_reduction_runs() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("unicycle-reduce.cfg", dir.path(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("reconstructed curve vs direct group solve"), "{stdout}");
    assert!(dir.path().join("uni-reduce.csv").exists());
}

#[test]
fn quantum_scenario_emits_wavefunction() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("quantum.cfg", dir.path(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    let table = io::read_table(&dir.path().join("lpq-wavefunction.csv")).unwrap();
    assert_eq!(table.header, vec!["p", "re", "im"]);
    assert_eq!(table.rows.len(), 1024);
    // norm convention: sum |phi|^2 dp = 1
    let dp = table.rows[1][0] - table.rows[0][0];
    let norm: f64 = table.rows.iter().map(|r| (r[1] * r[1] + r[2] * r[2]) * dp).sum();
    assert!((norm - 1.0).abs() < 1e-6, "norm {norm}");
}

#[test]
fn classical_potential_with_sampled_force() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_scenario("classical.cfg", dir.path(), &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "{stdout}");
    assert!(stdout.contains("constants-of-motion drift"), "{stdout}");
}

#[test]
fn threshold_violation_sets_exit_code_but_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = std::fs::read_to_string(fixture("brockett.cfg"))
        .unwrap()
        .replace(
            "[output]",
            "[thresholds]\ncompare = 1e-18\n\n[output]",
        );
    let cfg_path = dir.path().join("tight.cfg");
    std::fs::write(&cfg_path, cfg_text).unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg_path)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let report = std::fs::read_to_string(dir.path().join("brockett-report.txt")).unwrap();
    assert!(report.contains("status: FAIL"), "{report}");
}

#[test]
fn unknown_model_is_rejected_with_valid_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = std::fs::read_to_string(fixture("brockett.cfg"))
        .unwrap()
        .replace("model = brockett", "model = bicycle");
    let cfg_path = dir.path().join("bad.cfg");
    std::fs::write(&cfg_path, cfg_text).unwrap();
    let out = bin().arg("run").arg(&cfg_path).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("bicycle"), "{stderr}");
    assert!(stderr.contains("unicycle-x"), "{stderr}");
    assert!(stderr.contains("elastic-euler"), "{stderr}");
}

#[test]
fn list_models_prints_the_catalog() {
    let out = bin().arg("list-models").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("elastic-euler(-1)"), "{stdout}");
    assert!(stdout.contains("not a Lie system"), "{stdout}");
    assert!(stdout.contains("linear-potential-quantum"), "{stdout}");
}

#[test]
fn check_algebras_sweeps_cleanly_and_flags_violations() {
    let out = bin().arg("check-algebras").arg("--seed").arg("7").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("status: PASS"), "{stdout}");

    let out = bin()
        .arg("check-algebras")
        .arg("--file")
        .arg(fixture("broken.alg"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("VIOLATED"), "{stdout}");
}

#[test]
fn hopper_exact_weinorman_fails_gracefully() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = std::fs::read_to_string(fixture("brockett.cfg"))
        .unwrap()
        .replace("model = brockett", "model = hopper-exact")
        .replace("prefix = brockett", "prefix = hop");
    let cfg_path = dir.path().join("hop.cfg");
    std::fs::write(&cfg_path, cfg_text).unwrap();
    let out = bin()
        .arg("run")
        .arg(&cfg_path)
        .arg("--out-dir")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("not a Lie system"), "{stdout}");
    // the direct path still ran and was written
    assert!(dir.path().join("hop-direct.csv").exists());
}
