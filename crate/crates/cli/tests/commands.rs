use std::path::Path;
use std::process::Command;

use cch_cli::checkpoint::{checkpoint_path, Checkpoint};
use cch_cli::commands::{self, FitOptions, OracleOptions};
use cch_cli::csv_io::{format_row, CsvTable};
use cch_cli::initial;
use cch_cli::ExperimentConfig;

const LINEAR_1D: &str = "
grid.dim = 1
grid.n = 16
grid.L = 6.283185307179586
model.a = 0
model.b = 1
model.gamma = 0
solver.scheme = etd1
solver.dt = 0.01
solver.t_end = 0.5
solver.record_every = 10
initial.kind = file
diagnostics.s =
";

fn write_config(dir: &Path, text: &str) -> ExperimentConfig {
    let path = dir.join("config.txt");
    std::fs::write(&path, text).unwrap();
    ExperimentConfig::load(&path).unwrap()
}

#[test]
fn linear_run_matches_analytic_decay() {
    let dir = tempfile::tempdir().unwrap();
    let tau = std::f64::consts::TAU;
    // sin x + 0.5 cos 3x; mode |ξ| decays at rate |ξ|⁴ + |ξ|²
    let samples: Vec<String> = (0..16)
        .map(|j| {
            let x = tau * j as f64 / 16.0;
            (x.sin() + 0.5 * (3.0 * x).cos()).to_string()
        })
        .collect();
    let data = dir.path().join("u0.txt");
    std::fs::write(&data, samples.join("\n")).unwrap();
    let cfg = write_config(dir.path(), &format!("{LINEAR_1D}initial.path = {}\n", data.display()));
    let out = commands::run(&cfg, dir.path()).unwrap();
    assert_eq!(out.summary.status, "ok");
    assert_eq!(out.summary.final_step, 50);

    let table = CsvTable::read(&out.csv).unwrap();
    assert_eq!(table.rows.len(), 6);
    let pi = std::f64::consts::PI;
    for (t, norm) in table.series("dk_0").unwrap() {
        let exact = (pi * ((-4.0 * t).exp() + 0.25 * (-180.0 * t).exp())).sqrt();
        assert!(((norm - exact) / exact).abs() < 1e-10, "t = {t}: {norm} vs {exact}");
    }
    let rows = table.diagnostics_rows(&cfg.diagnostics).unwrap();
    assert!(rows.windows(2).all(|w| w[1].t > w[0].t));
}

const BAND_2D: &str = "
grid.dim = 2
grid.n = 16
grid.L = 6.283185307179586
solver.scheme = etdrk2
solver.dt = 0.01
solver.t_end = 1
solver.record_every = 5
initial.kind = random_band
initial.seed = 11
initial.band_max = 5
initial.target_h1 = 0.5
output.checkpoint_every = 50
";

#[test]
fn runs_are_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = write_config(a.path(), BAND_2D);
    let ra = commands::run(&cfg, a.path()).unwrap();
    let rb = commands::run(&cfg, b.path()).unwrap();
    assert_eq!(std::fs::read(&ra.csv).unwrap(), std::fs::read(&rb.csv).unwrap());
    assert_eq!(ra.summary.seed, Some(11));
    assert_eq!(ra.checkpoints.len(), 2);

    let mut other = cfg.clone();
    other.set_seed(12).unwrap();
    let c = tempfile::tempdir().unwrap();
    let rc = commands::run(&other, c.path()).unwrap();
    assert_ne!(std::fs::read(&ra.csv).unwrap(), std::fs::read(&rc.csv).unwrap());
}

#[test]
fn resume_after_interruption_is_bit_exact() {
    let full = tempfile::tempdir().unwrap();
    let cfg = write_config(full.path(), BAND_2D);
    let reference = commands::run(&cfg, full.path()).unwrap();
    let reference_csv = std::fs::read(&reference.csv).unwrap();
    let reference_final = std::fs::read(reference.checkpoints.last().unwrap()).unwrap();

    // interrupted run: rows past the first checkpoint are partly written and
    // the final checkpoint is missing
    let cut = tempfile::tempdir().unwrap();
    let run = commands::run(&cfg, cut.path()).unwrap();
    let text = std::fs::read_to_string(&run.csv).unwrap();
    let partial: Vec<&str> = text.lines().take(16).collect();
    std::fs::write(&run.csv, partial.join("\n") + "\n").unwrap();
    std::fs::remove_file(checkpoint_path(cut.path(), "checkpoint", 100)).unwrap();

    let first = checkpoint_path(cut.path(), "checkpoint", 50);
    let resumed = commands::resume(&first, None).unwrap();
    assert_eq!(resumed.summary.final_step, 100);
    assert_eq!(std::fs::read(&resumed.csv).unwrap(), reference_csv);
    assert_eq!(std::fs::read(resumed.checkpoints.last().unwrap()).unwrap(), reference_final);
}

#[test]
fn checkpoint_records_rng_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), BAND_2D);
    let out = commands::run(&cfg, dir.path()).unwrap();
    let ck = Checkpoint::read(&out.checkpoints[0]).unwrap();
    assert_eq!(ck.step, 50);
    assert_eq!(ck.state.t, 0.5);
    let rng = ck.rng.unwrap();
    assert_eq!(rng.seed, 11);
    assert_eq!(Some(rng), initial::generate(&cfg).unwrap().rng);
    assert_eq!(ExperimentConfig::parse(&ck.config_text).unwrap(), cfg);
}

#[test]
fn blow_up_writes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    // guard below the initial amplitude trips on the first step
    let text = BAND_2D.to_string() + "solver.blowup_linf = 0.01\n";
    let cfg = write_config(dir.path(), &text);
    let err = commands::run(&cfg, dir.path()).unwrap_err();
    assert_eq!(err.category(), "blow-up");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "blow-up");
    assert_eq!(CsvTable::read(&dir.path().join("diagnostics.csv")).unwrap().rows.len(), 1);
}

#[test]
fn fit_recovers_synthetic_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synthetic.csv");
    let mut text = String::from("t,dk_0\n");
    for i in 1..=100 {
        let t = i as f64;
        text.push_str(&format_row(&[t, t.powf(-0.75)]));
        text.push('\n');
    }
    std::fs::write(&path, text).unwrap();
    let report = commands::fit(&path, &FitOptions { dim: 3, ..Default::default() }).unwrap();
    assert!((report.exponent - 0.75).abs() < 1e-10);
    assert_eq!(report.window, (1.0, 100.0));

    let with_sigma =
        commands::fit(&path, &FitOptions { p: Some(1.5), dim: 3, window: Some((2.0, 50.0)), ..Default::default() })
            .unwrap();
    assert!((with_sigma.sigma_theory.unwrap() - 0.25).abs() < 1e-15);
    assert!(!with_sigma.sigma_extension);
    assert_eq!(with_sigma.points_used, 49);
}

#[test]
fn oracle_reports_heat_scaling() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("oracle.csv");
    let report = commands::oracle(&OracleOptions::default(), Some(&csv)).unwrap();
    for (k, fit) in report.fits.iter().enumerate() {
        let sigma = fit.sigma_theory.unwrap();
        assert!((sigma - (0.75 + 0.5 * k as f64)).abs() < 1e-15);
        assert!(fit.sigma_extension);
        assert!(((fit.exponent - sigma) / sigma).abs() < 0.05);
    }
    assert_eq!(CsvTable::read(&csv).unwrap().columns, ["t", "dk_0", "dk_1", "dk_2"]);
}

#[test]
fn local_solve_converges_to_direct_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "grid.dim = 1\ngrid.n = 32\ninitial.kind = random_band\ninitial.seed = 3\npicard.tol = 1e-12\n",
    );
    let report = commands::local_solve(&cfg).unwrap();
    assert!(report.converged);
    assert!(report.contraction_factors.iter().all(|&f| f < 1.0));
    assert!(report.distance_to_direct <= 10.0 * report.tol);
}

fn cch() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cch"))
}

#[test]
fn binary_reports_errors_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.txt");
    std::fs::write(&path, "grid.n = 16\ngrid.bogus = 1\n").unwrap();
    let out = cch().args(["run", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let line: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(line["error"]["category"], "config");

    let missing = cch().args(["resume"]).arg(dir.path().join("none.cch")).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    let line: serde_json::Value = serde_json::from_slice(&missing.stderr).unwrap();
    assert_eq!(line["error"]["category"], "io");
}

#[test]
fn binary_fit_prints_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("synthetic.csv");
    let mut text = String::from("t,E0\n");
    for i in 1..=100 {
        let t = i as f64;
        text.push_str(&format!("{},{}\n", t, 3.0 * t.powf(-0.75)));
    }
    std::fs::write(&path, text).unwrap();
    let out = cch().arg("fit").arg(&path).args(["--column", "E0"]).output().unwrap();
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["exponent"].as_f64().unwrap() - 0.75).abs() < 1e-10);
}
