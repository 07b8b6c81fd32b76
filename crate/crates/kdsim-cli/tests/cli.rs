//! End-to-end checks of the `kdsim` binary: exit codes, file outputs,
//! determinism, and the tolerance-scale escape hatch.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_kdsim")
}

fn repo_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/large_cavity.json")
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(bin());
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn params_reports_the_working_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "params",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("derived_params.json")).unwrap(),
    )
    .unwrap();
    let omega_a0 = doc["omega_a0"]["value"].as_f64().unwrap();
    assert!((omega_a0 - 3.3e5).abs() / 3.3e5 < 0.10, "omega_a0 = {omega_a0}");
    let omega_effm = doc["omega_effm"]["value"].as_f64().unwrap();
    let tau = 1e-7;
    assert!(
        (omega_effm * tau - 0.083).abs() / 0.083 < 0.05,
        "tau*omega_effm = {}",
        omega_effm * tau
    );
    assert!(doc["omega_c0"]["provenance"]
        .as_str()
        .unwrap()
        .contains("="));

    let table = std::fs::read_to_string(dir.path().join("params_table.txt")).unwrap();
    assert!(table.contains("tau*omega_effm"));
    assert!(table.contains("angular (rad/s)"));
    assert!(std::str::from_utf8(&out.stdout)
        .unwrap()
        .contains("tau*omega_effm"));
}

#[test]
fn missing_field_is_named_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo_config()).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("np_radius");
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(
        &[
            "params",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("np_radius"));
}

#[test]
fn unknown_key_is_named_with_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo_config()).unwrap()).unwrap();
    doc["cavity_waistt"] = serde_json::json!(1e-3);
    let cfg = dir.path().join("typo.json");
    std::fs::write(&cfg, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(
        &[
            "params",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cavity_waistt"));
}

#[test]
fn sweep_emits_plot_ready_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "sweep",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--jobs",
            "2",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_dt.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dt_s,theta_q_rad,G,P_closed,P_full,P_background,abs_err"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 8);
    // visibility decays from 1 toward ~0.58 at 5 ms
    assert!((rows[0][2] - 1.0).abs() < 1e-12);
    let g_last = rows.last().unwrap()[2];
    assert!(g_last > 0.5 && g_last < 0.65, "G(5ms) = {g_last}");
    // theta_q is linear in dt
    let th_12 = rows[3][1];
    let th_24 = rows[6][1];
    assert!((rows[3][0] - 1.2e-3).abs() < 1e-12);
    assert!((th_24 / th_12 - 4.0e-3 / 1.2e-3).abs() < 1e-9);
    // closed and full stay close in the long-fall regime
    for row in &rows[1..] {
        assert!(row[6] < 1e-6 * row[4].max(1e-6), "abs_err {}", row[6]);
    }
}

#[test]
fn sweep_with_oracle_adds_grid_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "sweep",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--with-oracle",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("sweep_dt.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dt_s,theta_q_rad,G,P_closed,P_full,P_background,abs_err,P_grid,abs_err_grid"
    );
    for line in lines {
        let cols: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols.len(), 9);
        // grid oracle agrees with the closed form within the long-time error
        assert!(cols[8] <= 2e-6 * cols[3].max(1e-6), "row {line}");
    }
}

#[test]
fn empty_sweep_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(repo_config()).unwrap()).unwrap();
    doc["sweep"]["dt_list"] = serde_json::json!([]);
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(
        &[
            "sweep",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt_list"));
}

#[test]
fn wavepacket_oracle_is_deterministic_and_scale_sensitive() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = run(
            &[
                "oracle",
                "wavepacket",
                "--config",
                repo_config().to_str().unwrap(),
                "--out",
                dir.path().to_str().unwrap(),
                "--seed",
                "7",
            ],
            &[],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir_a.path().join("wavepacket_report.json")).unwrap();
    let b = std::fs::read(dir_b.path().join("wavepacket_report.json")).unwrap();
    assert_eq!(a, b, "same seed must give byte-identical reports");

    // squeezing every tolerance to zero must trip the exit-code contract
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "oracle",
            "wavepacket",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--seed",
            "7",
        ],
        &[("KDSIM_TOLERANCE_SCALE", "1e-12")],
    );
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("failing identities"));

    // and a generous scale passes trivially
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "oracle",
            "wavepacket",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[("KDSIM_TOLERANCE_SCALE", "1e6")],
    );
    assert_eq!(code(&out), 0);
}

#[test]
fn quick_validate_passes_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "validate",
            "--config",
            repo_config().to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
            "--quick",
        ],
        &[],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: Vec<serde_json::Value> = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("validation_report.json")).unwrap(),
    )
    .unwrap();
    assert!(report.len() >= 12);
    for check in &report {
        assert_eq!(check["pass"], true, "{check}");
    }
    let summary = std::fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(summary.lines().all(|l| l.starts_with("PASS")));
}
