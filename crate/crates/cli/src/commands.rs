//! Subcommand implementations. Each returns a serializable report; the
//! binary prints it as JSON.

use std::path::{Path, PathBuf};

use cch_core::decay::sigma_is_extension;
use cch_core::integrators::{direct_trajectory, run_from, trajectory_distance};
use cch_core::{
    fit_power_law, linear_decay_oracle, picard_local_solve,
    theoretical_sigma, CchError, DecayFit, DiagnosticsRow, FitWindow,
    GaussianData, PicardOptions, PicardReport, Recorder, SaturationFloor, Scheme, SolverConfig,
    SpectralField, Stepper, StepperState, WindowPolicy,
};
use serde::Serialize;

use crate::checkpoint::{checkpoint_path, Checkpoint};
use crate::config::{ExperimentConfig, Horizon, InitialData};
use crate::csv_io::{format_row, truncate_after, CsvTable, CsvWriter};
use crate::error::{CliError, Result};
use crate::initial::{self, RngState, RNG_NAME};

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub column: String,
    pub exponent: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub window: (f64, f64),
    pub points_used: usize,
    pub sigma_theory: Option<f64>,
    /// True when `sigma_theory` uses the heat-scaling extension beyond the
    /// proven three-dimensional range.
    pub sigma_extension: bool,
}

impl FitReport {
    fn new(column: &str, fit: &DecayFit, sigma: Option<(f64, bool)>) -> Self {
        Self {
            column: column.to_string(),
            exponent: fit.exponent,
            intercept: fit.intercept,
            residual_rms: fit.residual_rms,
            window: fit.window,
            points_used: fit.points_used,
            sigma_theory: sigma.map(|s| s.0),
            sigma_extension: sigma.is_some_and(|s| s.1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct GridInfo {
    pub dim: usize,
    pub n: usize,
    pub box_length: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelInfo {
    pub a: f64,
    pub b: f64,
    pub beta: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub status: String,
    pub error: Option<String>,
    pub initial_kind: String,
    pub seed: Option<u64>,
    pub rng: Option<String>,
    pub rng_word_pos: Option<String>,
    pub scheme: String,
    pub dt: f64,
    pub t_end: f64,
    pub final_step: usize,
    pub final_t: f64,
    pub grid: GridInfo,
    pub model: ModelInfo,
    pub columns: Vec<String>,
    pub rows: usize,
    pub fits: Vec<FitReport>,
    pub fit_errors: Vec<String>,
    pub checkpoint: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: RunSummary,
    pub csv: PathBuf,
    pub json: PathBuf,
    pub checkpoints: Vec<PathBuf>,
}

/// Streams rows to the CSV and writes periodic checkpoints.
struct RunRecorder<'a> {
    cfg: &'a ExperimentConfig,
    config_text: &'a str,
    out_dir: &'a Path,
    rng: Option<RngState>,
    csv: CsvWriter,
    start_step: usize,
    last_step: usize,
    last_t: f64,
    checkpoints: Vec<PathBuf>,
    failure: Option<CliError>,
}

impl RunRecorder<'_> {
    fn checkpoint(&mut self, step: usize, state: &StepperState) -> Result<()> {
        self.csv.flush()?;
        let ck = Checkpoint {
            step: step as u64,
            dt: self.cfg.solver.dt,
            scheme: self.cfg.solver.scheme,
            params: self.cfg.model.clone(),
            rng: self.rng,
            state: state.clone(),
            config_text: self.config_text.to_string(),
        };
        let path = checkpoint_path(self.out_dir, &self.cfg.output.checkpoint, step);
        ck.write(&path)?;
        self.checkpoints.push(path);
        Ok(())
    }

    fn observe(&mut self, step: usize, state: &StepperState) -> Result<()> {
        let row = DiagnosticsRow::compute(state.t, &state.u_hat, &self.cfg.diagnostics)?;
        self.csv.write_row(&row)?;
        self.last_step = step;
        self.last_t = state.t;
        let every = self.cfg.output.checkpoint_every;
        if every > 0 && step > self.start_step && step % every == 0 {
            self.checkpoint(step, state)?;
        }
        Ok(())
    }
}

impl Recorder<f64> for RunRecorder<'_> {
    fn record(&mut self, step: usize, state: &StepperState) -> cch_core::Result<()> {
        // the core interface only carries core errors; keep the original
        self.observe(step, state).map_err(|e| match e {
            CliError::Core(e) => e,
            other => {
                let message = other.to_string();
                self.failure = Some(other);
                CchError::InvalidConfig(message)
            }
        })
    }
}

fn resolve(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

/// Runs the configured experiment from `t = 0`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunOutcome> {
    std::fs::create_dir_all(out_dir)?;
    let init = initial::generate(cfg)?;
    let solver = cfg.solver_config();
    let stepper = Stepper::new(*init.field.grid(), solver)?;
    let state = StepperState::from_real(&init.field);
    let csv = resolve(out_dir, &cfg.output.csv);
    let writer = CsvWriter::create(&csv, &cfg.diagnostics)?;
    execute(cfg, out_dir, &stepper, state, 0, writer, init.rng, &init.field.to_spectral())
}

/// Continues a run from a checkpoint. The CSV next to it is cut back to the
/// checkpoint time and extended, so the result matches an uninterrupted run.
pub fn resume(path: &Path, out_dir: Option<&Path>) -> Result<RunOutcome> {
    let ck = Checkpoint::read(path)?;
    let cfg = ExperimentConfig::parse(&ck.config_text)?;
    let grid = cfg.grid_spec()?;
    let ck_grid = ck.state.u_hat.grid();
    let consistent = ck_grid.dim() == grid.dim()
        && ck_grid.n() == grid.n()
        && ck_grid.box_length() == grid.box_length()
        && ck.dt == cfg.solver.dt
        && ck.scheme == cfg.solver.scheme
        && ck.params == cfg.model;
    if !consistent {
        return Err(CliError::Checkpoint("header disagrees with the embedded configuration".into()));
    }
    let out_dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => path.parent().map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    let csv = resolve(&out_dir, &cfg.output.csv);
    let kept = truncate_after(&csv, ck.state.t)?;
    log::info!("resuming at step {} (t = {}), {kept} rows kept", ck.step, ck.state.t);
    let writer = CsvWriter::append(&csv)?;
    let stepper = Stepper::new(grid, cfg.solver_config())?;
    // the initial field is only needed for the saturation floors of the fits
    let u0 = initial::generate(&cfg)?.field.to_spectral();
    execute(&cfg, &out_dir, &stepper, ck.state, ck.step as usize, writer, ck.rng, &u0)
}

#[allow(clippy::too_many_arguments)]
fn execute(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    stepper: &Stepper<f64>,
    state: StepperState,
    start_step: usize,
    csv: CsvWriter,
    rng: Option<RngState>,
    u0_hat: &SpectralField,
) -> Result<RunOutcome> {
    let config_text = cfg.to_text();
    let mut rec = RunRecorder {
        cfg,
        config_text: &config_text,
        out_dir,
        rng,
        csv,
        start_step,
        last_step: start_step,
        last_t: state.t,
        checkpoints: Vec::new(),
        failure: None,
    };
    if start_step == 0 {
        rec.observe(0, &state)?;
    }
    let result = run_from(stepper, state, start_step, &mut rec);
    if let Some(e) = rec.failure.take() {
        return Err(e);
    }
    rec.csv.flush()?;
    let csv_path = resolve(out_dir, &cfg.output.csv);
    let json_path = resolve(out_dir, &cfg.output.json);

    let (status, error, final_step, final_t) = match &result {
        Ok(traj) => {
            let step = start_step + traj.steps_taken;
            if rec.checkpoints.last() != Some(&checkpoint_path(out_dir, &cfg.output.checkpoint, step)) {
                rec.checkpoint(step, &traj.final_state)?;
            }
            ("ok".to_string(), None, step, traj.final_state.t)
        }
        Err(e) => (e.category().to_string(), Some(e.to_string()), rec.last_step, rec.last_t),
    };

    let table = CsvTable::read(&csv_path)?;
    let (fits, fit_errors) = fit_derivatives(cfg, &table, u0_hat);
    let summary = RunSummary {
        status,
        error,
        initial_kind: match cfg.initial {
            InitialData::Gaussian { .. } => "gaussian",
            InitialData::RandomBand { .. } => "random_band",
            InitialData::File { .. } => "file",
        }
        .to_string(),
        seed: cfg.seed(),
        rng: cfg.seed().map(|_| RNG_NAME.to_string()),
        rng_word_pos: rng.map(|r| r.word_pos.to_string()),
        scheme: cfg.solver.scheme.name().to_string(),
        dt: cfg.solver.dt,
        t_end: cfg.solver.t_end,
        final_step,
        final_t,
        grid: GridInfo { dim: cfg.grid.dim, n: cfg.grid.n, box_length: cfg.grid.box_length },
        model: ModelInfo {
            a: cfg.model.cubic_coeff,
            b: cfg.model.linear_pot_coeff,
            beta: cfg.model.drift.clone(),
            gamma: cfg.model.gamma,
        },
        columns: table.columns.clone(),
        rows: table.rows.len(),
        fits,
        fit_errors,
        checkpoint: rec.checkpoints.last().cloned(),
    };
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?)?;
    result?;
    Ok(RunOutcome { summary, csv: csv_path, json: json_path, checkpoints: rec.checkpoints })
}

/// Fit window from the config's fit section, floored by the slowest shell
/// of `u0_hat` for derivative order `k`.
pub fn window_for(cfg: &ExperimentConfig, series: &[(f64, f64)], u0_hat: &SpectralField, k: usize) -> FitWindow {
    let policy = WindowPolicy {
        t_min: cfg.fit.t_min,
        floor_factor: cfg.fit.floor_factor,
        horizon: match cfg.fit.horizon {
            Horizon::None => None,
            Horizon::Auto => Some(WindowPolicy::finite_size_horizon(cfg.grid.box_length)),
            Horizon::Fixed(h) => Some(h),
        },
    };
    let floor = SaturationFloor::for_derivative(u0_hat, k);
    policy.window(series, Some(&floor))
}

fn sigma_for(k: usize, p: Option<f64>, dim: usize, allow_extension: bool) -> Option<(f64, bool)> {
    let p = p?;
    theoretical_sigma(k, p, dim, allow_extension).ok().map(|s| (s, sigma_is_extension(p, dim)))
}

fn fit_derivatives(cfg: &ExperimentConfig, table: &CsvTable, u0_hat: &SpectralField) -> (Vec<FitReport>, Vec<String>) {
    let mut fits = Vec::new();
    let mut errors = Vec::new();
    for k in 0..=cfg.diagnostics.max_derivative {
        let column = format!("dk_{k}");
        let outcome = table.series(&column).and_then(|series| {
            let window = window_for(cfg, &series, u0_hat, k);
            Ok(fit_power_law(&series, window)?)
        });
        match outcome {
            Ok(fit) => {
                let sigma = sigma_for(k, cfg.fit.p, cfg.grid.dim, cfg.fit.allow_extension);
                fits.push(FitReport::new(&column, &fit, sigma));
            }
            Err(e) => errors.push(format!("{column}: {e}")),
        }
    }
    (fits, errors)
}

/// Options of the `fit` subcommand.
#[derive(Debug, Clone, Default)]
pub struct FitOptions {
    /// Column name; defaults to `dk_<level>`.
    pub column: Option<String>,
    pub level: usize,
    /// Explicit `(t_lo, t_hi)`; otherwise every row with `t >= 1`.
    pub window: Option<(f64, f64)>,
    pub p: Option<f64>,
    pub dim: usize,
    pub allow_extension: bool,
}

pub fn fit(csv: &Path, opts: &FitOptions) -> Result<FitReport> {
    let table = CsvTable::read(csv)?;
    let column = opts.column.clone().unwrap_or_else(|| format!("dk_{}", opts.level));
    let series = table.series(&column)?;
    let window = match opts.window {
        Some((lo, hi)) => FitWindow::new(lo, hi),
        None => WindowPolicy { horizon: None, ..WindowPolicy::default() }.window(&series, None),
    };
    let fit = fit_power_law(&series, window)?;
    let sigma = match opts.p {
        Some(p) => Some((
            theoretical_sigma(opts.level, p, opts.dim, opts.allow_extension)?,
            sigma_is_extension(p, opts.dim),
        )),
        None => None,
    };
    Ok(FitReport::new(&column, &fit, sigma))
}

/// Options of the `oracle` subcommand.
#[derive(Debug, Clone)]
pub struct OracleOptions {
    pub data: GaussianData,
    /// Derivative orders `0..=max_k`.
    pub max_k: usize,
    pub window: (f64, f64),
    pub points: usize,
    /// `L^p` class for the predicted exponent.
    pub p: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            data: GaussianData { amplitude: 1.0, width: 1.0, dim: 3 },
            max_k: 2,
            window: (1e2, 1e4),
            points: 41,
            p: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub csv: Option<PathBuf>,
    pub fits: Vec<FitReport>,
}

/// Evaluates the continuum oracle on log-spaced times, optionally writes
/// `t, dk_0, ..` to `csv`, and fits each curve.
pub fn oracle(opts: &OracleOptions, csv: Option<&Path>) -> Result<OracleReport> {
    let (lo, hi) = opts.window;
    if !(lo > 0.0 && hi > lo) || opts.points < 2 {
        return Err(CliError::Config("oracle window needs 0 < lo < hi and at least 2 points".into()));
    }
    let times: Vec<f64> = (0..opts.points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (opts.points - 1) as f64))
        .collect();
    let mut curves = Vec::new();
    for k in 0..=opts.max_k {
        let values = times
            .iter()
            .map(|&t| linear_decay_oracle(k, &opts.data, t))
            .collect::<cch_core::Result<Vec<_>>>()?;
        curves.push(values);
    }
    if let Some(path) = csv {
        let mut text = String::from("t");
        for k in 0..=opts.max_k {
            text.push_str(&format!(",dk_{k}"));
        }
        text.push('\n');
        for (i, &t) in times.iter().enumerate() {
            let mut row = vec![t];
            row.extend(curves.iter().map(|c| c[i]));
            text.push_str(&format_row(&row));
            text.push('\n');
        }
        std::fs::write(path, text)?;
    }
    let mut fits = Vec::new();
    for (k, values) in curves.iter().enumerate() {
        let series: Vec<_> = times.iter().copied().zip(values.iter().copied()).collect();
        let fit = fit_power_law(&series, FitWindow::new(lo, hi))?;
        let sigma = theoretical_sigma(k, opts.p, opts.data.dim, true)?;
        let ext = sigma_is_extension(opts.p, opts.data.dim);
        fits.push(FitReport::new(&format!("dk_{k}"), &fit, Some((sigma, ext))));
    }
    Ok(OracleReport { csv: csv.map(Path::to_path_buf), fits })
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSolveReport {
    pub iterates: usize,
    pub differences: Vec<f64>,
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
    pub h2_norm_u0: f64,
    /// Discrete `L²(0,T;H²)` distance between the fixed point and a direct
    /// IMEX1 run with the same step.
    pub distance_to_direct: f64,
}

impl LocalSolveReport {
    fn new(report: PicardReport, tol: f64, h2_norm_u0: f64, distance_to_direct: f64) -> Self {
        Self {
            iterates: report.iterates,
            differences: report.differences,
            contraction_factors: report.contraction_factors,
            converged: report.converged,
            tol,
            h2_norm_u0,
            distance_to_direct,
        }
    }
}

/// Picard solve on `[0, picard.horizon]` from the configured initial data.
pub fn local_solve(cfg: &ExperimentConfig) -> Result<LocalSolveReport> {
    let u0 = initial::generate(cfg)?.field;
    let p = &cfg.picard;
    let opts = PicardOptions { horizon: p.horizon, dt: p.dt, tol: p.tol, max_iter: p.max_iter, start: p.start };
    let solver = SolverConfig::new(Scheme::Imex1, p.dt, p.horizon, cfg.model.clone());
    let (_, fixed_point, report) = picard_local_solve(&u0, &opts, &solver)?;
    let direct = direct_trajectory(&u0, &solver)?;
    let distance = trajectory_distance(&fixed_point, &direct, p.dt)?;
    let h2 = u0
        .to_spectral()
        .weighted_norm_sq(|xi| {
            let k2: f64 = xi.iter().map(|k| k * k).sum();
            1.0 + k2 + k2 * k2
        })
        .sqrt();
    Ok(LocalSolveReport::new(report, p.tol, h2, distance))
}
