//! End-to-end runner and CLI behavior: the bundled scenario, grid-file
//! models, exit codes, determinism, and sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use adlab::models::{constant, Grid, GridHamiltonian};
use adlab::runner::{run_file, sweep_file};
use adlab::scenario::SweepParam;
use adlab::Error;

const PI: f64 = std::f64::consts::PI;

fn bundled_scenario() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/paper_sec3.json")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_adlab"))
}

/// σ_z tabulated on a uniform grid, written as a grid-file model.
fn write_constant_grid_file(dir: &Path, n_points: usize, t_total: f64) -> PathBuf {
    let grid = Grid::uniform(n_points).unwrap();
    let mut sz = adlab::linalg::ComplexMatrix::zeros(2);
    sz[(0, 0)] = num_complex::Complex64::new(0.5, 0.0);
    sz[(1, 1)] = num_complex::Complex64::new(-0.5, 0.0);
    let h = constant("sz/2", sz);
    let mats = grid.points().iter().map(|&s| h.eval(s, t_total)).collect();
    let gh = GridHamiltonian::new(grid, mats, None, t_total, "constant").unwrap();
    let path = dir.join("constant_grid.json");
    fs::write(&path, serde_json::to_string(&gh.to_json()).unwrap()).unwrap();
    path
}

#[test]
fn bundled_scenario_reproduces_the_headline_verdicts() {
    let tmp = tempfile::tempdir().unwrap();
    let report = run_file(&bundled_scenario(), Some(&tmp.path().join("out")), None).unwrap();
    assert_eq!(report.exit_code(), 0, "errors: {:?}", report.summary.errors);

    let traditional = report
        .summary
        .conditions
        .iter()
        .find(|r| r.condition == "traditional")
        .unwrap();
    assert_eq!(format!("{:?}", traditional.verdict), "Satisfied");
    let ye = report
        .summary
        .conditions
        .iter()
        .find(|r| r.condition == "ye" && !r.notes.starts_with("dual-form"))
        .unwrap();
    assert_eq!(format!("{:?}", ye.verdict), "Violated");

    let fmin = report.summary.scalars.min_fidelity.unwrap();
    let smin = report.summary.scalars.min_fidelity_s.unwrap();
    assert!(fmin <= 1e-6, "min fidelity {fmin:.3e}");
    assert!((smin - 0.5).abs() <= 0.01, "fidelity minimum at s = {smin}");

    // artifacts requested by the analyses all exist
    for name in [
        "summary.json",
        "spectral.csv",
        "propagator.json",
        "trace.csv",
        "perturbation_n1_k2.csv",
        "conditions.json",
        "dual_check.json",
        "t_dependence.json",
    ] {
        assert!(tmp.path().join("out").join(name).exists(), "{name} missing");
    }

    let dual_check: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("out/dual_check.json")).unwrap())
            .unwrap();
    assert!(dual_check["direct_within_budget"].as_bool().unwrap());
    assert!(dual_check["involution_within_budget"].as_bool().unwrap());
    assert!(dual_check["spectrum_negation_max_dev"].as_f64().unwrap() <= 1e-8);
}

#[test]
fn constant_grid_scenario_is_trivially_adiabatic() {
    let tmp = tempfile::tempdir().unwrap();
    let grid_file = write_constant_grid_file(tmp.path(), 257, 10.0);
    let scenario = serde_json::json!({
        "model": {"type": "grid_file", "path": grid_file.file_name().unwrap().to_str().unwrap()},
        "params": {"T": 10.0},
        "grid_points": 257,
        "initial_eigenstate": 1,
        "analyses": ["propagate", "amplitudes", "fidelity", "perturbation", "conditions"],
    });
    let sc_path = tmp.path().join("constant.json");
    fs::write(&sc_path, serde_json::to_string(&scenario).unwrap()).unwrap();

    let report = run_file(&sc_path, Some(&tmp.path().join("out")), None).unwrap();
    assert_eq!(report.exit_code(), 0, "errors: {:?}", report.summary.errors);
    assert!(report.summary.scalars.min_fidelity.unwrap() >= 1.0 - 1e-9);
    for rep in &report.summary.conditions {
        assert_eq!(format!("{:?}", rep.verdict), "Satisfied", "{}", rep.condition);
    }
    // the undefined Q/P ratio on a flat path is a note, not an error
    assert!(report.summary.notes.iter().any(|n| n.contains("pq ratio")));
}

#[test]
fn malformed_scenario_exits_one_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let sc_path = tmp.path().join("broken.json");
    fs::write(&sc_path, "{ not json").unwrap();
    let out_dir = tmp.path().join("out");
    let status = bin()
        .args(["run", sc_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1));
    assert!(!out_dir.exists(), "no partial outputs on parse failure");
}

#[test]
fn degenerate_grid_exits_two_with_named_error() {
    let tmp = tempfile::tempdir().unwrap();
    // identity matrices: fully degenerate spectrum
    let grid = Grid::uniform(65).unwrap();
    let mats = (0..65)
        .map(|_| adlab::linalg::ComplexMatrix::identity(2))
        .collect();
    let gh = GridHamiltonian::new(grid, mats, None, 5.0, "degenerate").unwrap();
    fs::write(
        tmp.path().join("degenerate.json"),
        serde_json::to_string(&gh.to_json()).unwrap(),
    )
    .unwrap();
    let scenario = serde_json::json!({
        "model": {"type": "grid_file", "path": "degenerate.json"},
        "params": {"T": 5.0},
        "grid_points": 65,
        "initial_eigenstate": 1,
        "analyses": ["conditions"],
    });
    let sc_path = tmp.path().join("scenario.json");
    fs::write(&sc_path, serde_json::to_string(&scenario).unwrap()).unwrap();

    let out_dir = tmp.path().join("out");
    let output = bin()
        .args(["run", sc_path.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--quiet"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let errors = summary["errors"].as_array().unwrap();
    assert!(errors.iter().any(|e| e.as_str().unwrap().contains("DegenerateSpectrum")));
}

#[test]
fn reruns_are_bit_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let out_a = tmp.path().join("a");
    let out_b = tmp.path().join("b");
    run_file(&bundled_scenario(), Some(&out_a), Some(4096)).unwrap();
    run_file(&bundled_scenario(), Some(&out_b), Some(4096)).unwrap();
    let mut names: Vec<String> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(out_a.join(&name)).unwrap();
        let b = fs::read(out_b.join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between reruns");
    }
}

#[test]
fn base_system_sweep_shows_margin_scaling() {
    // traditional margin = pi/T: the ladder 20pi, 200pi, 2000pi gives
    // margins in ratio 10 : 1 : 0.1
    let tmp = tempfile::tempdir().unwrap();
    let scenario = serde_json::json!({
        "model": {"type": "rotating_spin"},
        "params": {"omega0": 1.0, "T": 628.3185307179587},
        "grid_points": 16385,
        "initial_eigenstate": 1,
        "analyses": ["perturbation", "conditions"],
    });
    let sc_path = tmp.path().join("sweep_base.json");
    fs::write(&sc_path, serde_json::to_string(&scenario).unwrap()).unwrap();
    let values = [20.0 * PI, 200.0 * PI, 2000.0 * PI];
    let report = sweep_file(&sc_path, SweepParam::TotalTime, &values, Some(tmp.path())).unwrap();
    assert_eq!(report.exit_code(), 0);

    let margins: Vec<f64> = report
        .rows
        .iter()
        .map(|r| r.traditional_margin.unwrap())
        .collect();
    for (m, t) in margins.iter().zip(values.iter()) {
        let want = PI / t;
        assert!((m - want).abs() <= 0.01 * want, "margin {m} at T = {t}");
    }
    assert!((margins[0] / margins[1] - 10.0).abs() <= 0.1);
    assert!((margins[1] / margins[2] - 10.0).abs() <= 0.1);

    let csv = fs::read_to_string(report.out_dir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("value,traditional_margin,ye_margin,min_fidelity,maxQ_over_T,maxQ_a"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn sweep_runs_are_isolated_from_failures() {
    // one infeasible value (grid too coarse for the step control) must not
    // disturb its siblings
    let tmp = tempfile::tempdir().unwrap();
    let scenario = serde_json::json!({
        "model": {"type": "dual_of", "inner": {"type": "rotating_spin"}},
        "params": {"omega0": 1.0, "T": 628.3185307179587},
        "grid_points": 4096,
        "initial_eigenstate": 1,
        "analyses": ["conditions"],
    });
    let sc_path = tmp.path().join("sweep_mixed.json");
    fs::write(&sc_path, serde_json::to_string(&scenario).unwrap()).unwrap();
    // middle value forces ds > 0.1/(T·|H|) inside build_dual
    let report = sweep_file(
        &sc_path,
        SweepParam::GridPoints,
        &[4096.0, 64.0, 8192.0],
        Some(tmp.path()),
    )
    .unwrap();
    assert_eq!(report.rows[0].errors, 0);
    assert!(report.rows[1].errors > 0);
    assert_eq!(report.rows[2].errors, 0);
    assert!(report.rows[0].traditional_margin.is_some());
    assert!(report.rows[1].traditional_margin.is_none());
    assert!(report.rows[2].traditional_margin.is_some());
    assert_eq!(report.exit_code(), 2);

    let csv = fs::read_to_string(report.out_dir.join("sweep.csv")).unwrap();
    let bad_row = csv.lines().nth(2).unwrap();
    assert!(bad_row.contains("nan"));
}

#[test]
fn empty_sweep_values_exit_one() {
    let output = bin()
        .args([
            "sweep",
            bundled_scenario().to_str().unwrap(),
            "--param",
            "T",
            "--values",
            "",
        ])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn unknown_flags_exit_one() {
    let output = bin()
        .args(["run", "whatever.json", "--frobnicate"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn sweep_api_rejects_empty_values() {
    assert!(matches!(
        sweep_file(&bundled_scenario(), SweepParam::TotalTime, &[], None),
        Err(Error::Validation(_))
    ));
}
