//! End-to-end checks of the `sweepcl` binary.

use std::path::Path;
use std::process::{Command, Output};

fn sweepcl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sweepcl"))
        .args(args)
        .current_dir(dir)
        .env_remove("SWEEPCL_OUTPUT")
        .output()
        .expect("binary runs")
}

#[test]
fn list_problems_prints_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(&["list-problems"], dir.path());
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    for name in ["balsara", "burgers-smooth", "shallow-water"] {
        assert!(stdout.contains(name), "missing {name}");
    }
    assert_eq!(stdout.lines().count(), 6);
}

#[test]
fn unknown_problem_fails_with_catalog_on_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(&["run", "--problem", "nope"], dir.path());
    assert!(!out.status.success());
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("unknown problem"));
    assert!(stderr.contains("burgers-slow-shock"), "catalog not listed: {stderr}");
}

#[test]
fn identical_runs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "run",
        "--problem",
        "burgers-smooth",
        "--scheme",
        "hires",
        "--cells",
        "40",
        "--tau-ratio",
        "4",
        "--t-end",
        "1",
        "--snapshot",
        "0.5,1.0",
        "--output-dir",
        "a",
    ];
    assert!(sweepcl(&args, dir.path()).status.success());
    let mut args_b = args;
    args_b[args.len() - 1] = "b";
    assert!(sweepcl(&args_b, dir.path()).status.success());
    for name in [
        "burgers-smooth_hires_t0.500.csv",
        "burgers-smooth_hires_t1.000.csv",
        "burgers-smooth_hires_diagnostics.csv",
    ] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
}

#[test]
fn convergence_rejects_non_doubling_cells() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(
        &["convergence", "--problem", "burgers-smooth", "--scheme", "first-order", "--cells", "40,100"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("factors of 2"));
}

#[test]
fn convergence_writes_report_schema() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(
        &[
            "convergence",
            "--problem",
            "burgers-smooth",
            "--scheme",
            "first-order",
            "--cells",
            "40,80",
            "--tau-ratio",
            "4",
            "--output-dir",
            ".",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("convergence_burgers-smooth_first-order.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "I,N,e_l1,eoc,tv_max_increase,extrema_excess,mass_residual"
    );
    assert_eq!(lines.count(), 2);
}

#[test]
fn tables_regenerate_both_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(&["tables", "--output-dir", "."], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let t1 = std::fs::read_to_string(dir.path().join("table1.csv")).unwrap();
    assert_eq!(t1.lines().count() - 1, 4, "table1 should have four resolutions");
    assert!(t1.lines().next().unwrap().contains("e_omega1"));
    let t2 = std::fs::read_to_string(dir.path().join("table2.csv")).unwrap();
    let header = t2.lines().next().unwrap();
    assert!(header.contains("e_hires") && header.contains("e_first_order"));
}

#[test]
fn config_file_provides_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("run.conf"),
        "problem = burgers-smooth\nscheme = first-order\ncells = 40\ntau-ratio = 4\nt-end = 1\noutput-dir = from_config\n",
    )
    .unwrap();
    // Flag overrides the config's output directory; everything else comes
    // from the file.
    let out = sweepcl(
        &["run", "--config", "run.conf", "--output-dir", "from_flag"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_flag").join("burgers-smooth_first-order_t1.000.csv").exists());
    assert!(!dir.path().join("from_config").exists());
}

#[test]
fn env_var_sets_default_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_sweepcl"))
        .args([
            "run",
            "--problem",
            "burgers-smooth",
            "--scheme",
            "first-order",
            "--cells",
            "40",
            "--tau-ratio",
            "4",
            "--t-end",
            "1",
        ])
        .current_dir(dir.path())
        .env("SWEEPCL_OUTPUT", dir.path().join("from_env"))
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("from_env").join("burgers-smooth_first-order_t1.000.csv").exists());
}

#[test]
fn courant_flag_rejected_off_advection() {
    let dir = tempfile::tempdir().unwrap();
    let out = sweepcl(
        &["run", "--problem", "burgers-smooth", "--courant", "4"],
        dir.path(),
    );
    assert!(!out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("advection"));
}
