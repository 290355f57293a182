//! Fixed-step exponential and IMEX integrators for `u_t = -λ û + N(u)`,
//! plus the frozen-coefficient Picard iteration used for local existence.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{CchError, Result};
use crate::model::{frozen_nonlinear_term, linear_symbol_table, nonlinear_term_spectral, ModelParams};
use crate::scalar::Real;
use crate::spectral::{GridSpec, RealField, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// `û⁺ = (û + dt N̂) / (1 + dt λ)`.
    Imex1,
    /// `û⁺ = e^{-λ dt} û + dt φ₁(-λ dt) N̂`.
    Etd1,
    /// Cox-Matthews second order exponential Runge-Kutta.
    Etdrk2,
}

impl Scheme {
    /// Numeric id used in checkpoint headers.
    pub fn id(self) -> u32 {
        match self {
            Scheme::Imex1 => 1,
            Scheme::Etd1 => 2,
            Scheme::Etdrk2 => 3,
        }
    }

    pub fn from_id(id: u32) -> Option<Self> {
        match id {
            1 => Some(Scheme::Imex1),
            2 => Some(Scheme::Etd1),
            3 => Some(Scheme::Etdrk2),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Imex1 => "IMEX1",
            Scheme::Etd1 => "ETD1",
            Scheme::Etdrk2 => "ETDRK2",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = CchError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "IMEX1" => Ok(Scheme::Imex1),
            "ETD1" => Ok(Scheme::Etd1),
            "ETDRK2" => Ok(Scheme::Etdrk2),
            other => Err(CchError::InvalidConfig(format!("unknown scheme {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig<T> {
    pub scheme: Scheme,
    pub dt: T,
    pub t_end: T,
    pub record_every: usize,
    pub blowup_linf: T,
    pub params: ModelParams<T>,
}

impl<T: Real> SolverConfig<T> {
    pub const DEFAULT_BLOWUP_LINF: f64 = 1.0e6;

    pub fn new(scheme: Scheme, dt: T, t_end: T, params: ModelParams<T>) -> Self {
        Self {
            scheme,
            dt,
            t_end,
            record_every: 1,
            blowup_linf: T::lit(Self::DEFAULT_BLOWUP_LINF),
            params,
        }
    }

    pub fn with_record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self, grid: &GridSpec<T>) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(CchError::InvalidConfig(format!("dt must be positive, got {}", self.dt)));
        }
        // t_end = 0 is allowed and records only the initial state.
        if self.t_end < T::zero() || (self.t_end > T::zero() && self.t_end < self.dt) {
            return Err(CchError::InvalidConfig(format!(
                "t_end must be 0 or at least dt, got {}",
                self.t_end
            )));
        }
        if self.record_every == 0 {
            return Err(CchError::InvalidConfig("record_every must be positive".into()));
        }
        if !(self.blowup_linf > T::zero()) {
            return Err(CchError::InvalidConfig("blow-up guard must be positive".into()));
        }
        self.params.validate(grid.dim())
    }

    /// Number of steps to reach `t_end`.
    pub fn total_steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Solution snapshot at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperState<T> {
    pub t: T,
    pub u_hat: SpectralField<T>,
}

impl<T: Real> StepperState<T> {
    pub fn new(t: T, u_hat: SpectralField<T>) -> Self {
        Self { t, u_hat }
    }

    pub fn from_real(u: &RealField<T>) -> Self {
        Self { t: T::zero(), u_hat: u.to_spectral() }
    }
}

const TAYLOR_SWITCH: f64 = 1.0e-4;
const TAYLOR_TERMS: usize = 8;

/// `φ₁(z) = (e^z - 1)/z`, series for `|z| < 1e-4`.
pub fn phi1<T: Real>(z: T) -> T {
    if z.abs() < T::lit(TAYLOR_SWITCH) {
        taylor_phi(z, 1)
    } else {
        z.exp_m1() / z
    }
}

/// `φ₂(z) = (e^z - 1 - z)/z²`, series for `|z| < 1e-4`.
pub fn phi2<T: Real>(z: T) -> T {
    if z.abs() < T::lit(TAYLOR_SWITCH) {
        taylor_phi(z, 2)
    } else {
        (z.exp_m1() - z) / (z * z)
    }
}

// sum_k z^k / (k + order)!
fn taylor_phi<T: Real>(z: T, order: usize) -> T {
    let mut factorial = (1..=order).fold(T::one(), |acc, i| acc * T::from_count(i));
    let mut power = T::one();
    let mut sum = T::zero();
    for k in 0..TAYLOR_TERMS {
        sum += power / factorial;
        power *= z;
        factorial *= T::from_count(k + order + 1);
    }
    sum
}

/// Per-mode coefficients of the chosen scheme for a fixed `dt`.
#[derive(Debug, Clone)]
pub struct Stepper<T> {
    grid: GridSpec<T>,
    cfg: SolverConfig<T>,
    /// `e^{-λ dt}` (ETD) or `1/(1 + λ dt)` (IMEX).
    propagator: Vec<T>,
    /// `dt φ₁(-λ dt)` (ETD) or `dt/(1 + λ dt)` (IMEX).
    forcing: Vec<T>,
    /// `dt φ₂(-λ dt)` (ETDRK2 only).
    correction: Vec<T>,
}

impl<T: Real> Stepper<T> {
    pub fn new(grid: GridSpec<T>, cfg: SolverConfig<T>) -> Result<Self> {
        cfg.validate(&grid)?;
        let lambda = linear_symbol_table(&grid);
        let dt = cfg.dt;
        let (propagator, forcing, correction) = match cfg.scheme {
            Scheme::Imex1 => (
                lambda.iter().map(|&l| T::one() / (T::one() + dt * l)).collect(),
                lambda.iter().map(|&l| dt / (T::one() + dt * l)).collect(),
                Vec::new(),
            ),
            Scheme::Etd1 | Scheme::Etdrk2 => {
                let correction = if cfg.scheme == Scheme::Etdrk2 {
                    lambda.iter().map(|&l| dt * phi2(-l * dt)).collect()
                } else {
                    Vec::new()
                };
                (
                    lambda.iter().map(|&l| (-l * dt).exp()).collect(),
                    lambda.iter().map(|&l| dt * phi1(-l * dt)).collect(),
                    correction,
                )
            }
        };
        Ok(Self { grid, cfg, propagator, forcing, correction })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.cfg
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    /// One step with `N` from the model.
    pub fn step(&self, state: &StepperState<T>) -> Result<StepperState<T>> {
        let params = &self.cfg.params;
        self.step_with(state, |u, _| nonlinear_term_spectral(u, params))
    }

    /// One step with a caller-supplied explicit term `N(û, t)`.
    pub fn step_with<F>(&self, state: &StepperState<T>, mut explicit: F) -> Result<StepperState<T>>
    where
        F: FnMut(&SpectralField<T>, T) -> Result<SpectralField<T>>,
    {
        let t_next = state.t + self.cfg.dt;
        self.step_to(state, t_next, &mut explicit)
    }

    /// Advances to `t_next` (which must equal `state.t + dt` up to the
    /// caller's bookkeeping).
    pub(crate) fn step_to<F>(
        &self,
        state: &StepperState<T>,
        t_next: T,
        explicit: &mut F,
    ) -> Result<StepperState<T>>
    where
        F: FnMut(&SpectralField<T>, T) -> Result<SpectralField<T>>,
    {
        if !state.u_hat.grid().same_as(&self.grid) {
            return Err(CchError::GridMismatch);
        }
        let base = explicit(&state.u_hat, state.t)?;
        let mut next = self.linear_update(&state.u_hat, &base);
        if self.cfg.scheme == Scheme::Etdrk2 {
            let predicted = SpectralField::from_raw(self.grid, next.clone());
            let at_predictor = explicit(&predicted, t_next)?;
            for (((v, c), a), b) in
                next.iter_mut().zip(&self.correction).zip(at_predictor.coeffs()).zip(base.coeffs())
            {
                *v += (a - b).scale(*c);
            }
        }
        let u_hat = SpectralField::new(self.grid, next).map_err(|_| CchError::BlowUp {
            t: t_next.to_f64_lossy(),
            reason: "non-finite coefficient".into(),
        })?;
        let out = StepperState { t: t_next, u_hat };
        self.guard(&out)?;
        Ok(out)
    }

    fn linear_update(&self, u_hat: &SpectralField<T>, n_hat: &SpectralField<T>) -> Vec<Complex<T>> {
        u_hat
            .coeffs()
            .iter()
            .zip(n_hat.coeffs())
            .zip(self.propagator.iter().zip(&self.forcing))
            .map(|((u, n), (&p, &f))| u.scale(p) + n.scale(f))
            .collect()
    }

    fn guard(&self, state: &StepperState<T>) -> Result<()> {
        let u = state.u_hat.to_real().map_err(|e| CchError::BlowUp {
            t: state.t.to_f64_lossy(),
            reason: e.to_string(),
        })?;
        let linf = u.max_abs();
        if !(linf <= self.cfg.blowup_linf) {
            return Err(CchError::BlowUp {
                t: state.t.to_f64_lossy(),
                reason: format!("|u|_inf = {linf} exceeds guard {}", self.cfg.blowup_linf),
            });
        }
        Ok(())
    }
}

/// One step of the configured scheme.
pub fn step<T: Real>(state: &StepperState<T>, cfg: &SolverConfig<T>) -> Result<StepperState<T>> {
    Stepper::new(*state.u_hat.grid(), cfg.clone())?.step(state)
}

/// Receives the state at every recorded step.
pub trait Recorder<T> {
    fn record(&mut self, step: usize, state: &StepperState<T>) -> Result<()>;
}

impl<T, F> Recorder<T> for F
where
    F: FnMut(usize, &StepperState<T>) -> Result<()>,
{
    fn record(&mut self, step: usize, state: &StepperState<T>) -> Result<()> {
        self(step, state)
    }
}

/// Keeps every recorded state.
#[derive(Debug, Clone, Default)]
pub struct StateHistory<T> {
    pub steps: Vec<usize>,
    pub states: Vec<StepperState<T>>,
}

impl<T: Real> Recorder<T> for StateHistory<T> {
    fn record(&mut self, step: usize, state: &StepperState<T>) -> Result<()> {
        self.steps.push(step);
        self.states.push(state.clone());
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub final_state: StepperState<T>,
    pub steps_taken: usize,
    pub records: usize,
    pub scheme: Scheme,
    pub dt: T,
}

/// Runs from `t = 0` to `t_end`, recording step 0 and every
/// `record_every`-th step. On blow-up the error is returned and whatever the
/// recorder captured so far is the partial trajectory.
pub fn run_simulation<T: Real, R: Recorder<T>>(
    u0: &RealField<T>,
    cfg: &SolverConfig<T>,
    recorder: &mut R,
) -> Result<Trajectory<T>> {
    let stepper = Stepper::new(*u0.grid(), cfg.clone())?;
    let state = StepperState::from_real(u0);
    recorder.record(0, &state)?;
    run_from(&stepper, state, 0, recorder)
}

/// Continues from `state` taken at step index `start_step`; the start state
/// itself is not recorded again. Times are `step * dt` so resumed runs are
/// bit-identical to uninterrupted ones.
pub fn run_from<T: Real, R: Recorder<T>>(
    stepper: &Stepper<T>,
    mut state: StepperState<T>,
    start_step: usize,
    recorder: &mut R,
) -> Result<Trajectory<T>> {
    let cfg = stepper.config();
    let total = cfg.total_steps();
    let params = &cfg.params;
    let mut records = 0;
    for k in start_step + 1..=total {
        let t_next = cfg.dt * T::from_count(k);
        state = stepper.step_to(&state, t_next, &mut |u, _| nonlinear_term_spectral(u, params))?;
        if k % cfg.record_every == 0 {
            recorder.record(k, &state)?;
            records += 1;
        }
    }
    Ok(Trajectory {
        final_state: state,
        steps_taken: total.saturating_sub(start_step),
        records: records + usize::from(start_step == 0),
        scheme: cfg.scheme,
        dt: cfg.dt,
    })
}

/// Outcome of the frozen-coefficient fixed-point iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub iterates: usize,
    /// Discrete `L²(0,T;H²)` norms of successive differences.
    pub differences: Vec<f64>,
    /// Ratios of successive differences.
    pub contraction_factors: Vec<f64>,
    pub converged: bool,
}

/// How the first coefficient trajectory is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PicardStart {
    /// Solution of the linearized problem (frozen coefficients zero).
    #[default]
    Linear,
    /// `ũ(t) = u₀` for all `t`.
    Constant,
    /// `ũ ≡ 0`.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOptions<T> {
    pub horizon: T,
    pub dt: T,
    pub tol: f64,
    pub max_iter: usize,
    pub start: PicardStart,
}

/// Time-discrete trajectory `u(t_0), ..., u(t_M)` on the common grid.
pub type DiscreteTrajectory<T> = Vec<SpectralField<T>>;

/// Discrete `L²(0,T;H²)` norm: `sqrt(dt * sum_{j >= 1} ||u_j||²_{H²})` with
/// `||f||²_{H²} = sum_{l=0}^{2} ||∇^l f||²`.
pub fn l2_h2_norm<T: Real>(traj: &[SpectralField<T>], dt: T) -> f64 {
    let mut sum = 0.0;
    for u in traj.iter().skip(1) {
        sum += u.weighted_norm_sq(|xi| {
            let k2 = xi.iter().fold(T::zero(), |a, &k| a + k * k);
            T::one() + k2 + k2 * k2
        })
        .to_f64_lossy();
    }
    (dt.to_f64_lossy() * sum).sqrt()
}

fn trajectory_difference<T: Real>(
    a: &[SpectralField<T>],
    b: &[SpectralField<T>],
) -> Result<Vec<SpectralField<T>>> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

/// Solves the linear problem with frozen coefficient trajectory `frozen`
/// using IMEX1 with step `dt`.
pub fn frozen_solve<T: Real>(
    u0: &SpectralField<T>,
    frozen: &[SpectralField<T>],
    cfg: &SolverConfig<T>,
) -> Result<DiscreteTrajectory<T>> {
    let imex = SolverConfig { scheme: Scheme::Imex1, ..cfg.clone() };
    let stepper = Stepper::new(*u0.grid(), imex)?;
    let mut out = Vec::with_capacity(frozen.len());
    let mut state = StepperState::new(T::zero(), u0.clone());
    out.push(u0.clone());
    for j in 1..frozen.len() {
        let coeff = &frozen[j - 1];
        let t_next = cfg.dt * T::from_count(j);
        state = stepper.step_to(&state, t_next, &mut |u, _| {
            frozen_nonlinear_term(coeff, u, &cfg.params)
        })?;
        out.push(state.u_hat.clone());
    }
    Ok(out)
}

/// Picard iteration of the frozen-coefficient map `F: ũ ↦ u` on `[0, T]`.
///
/// Stops when the discrete `L²(0,T;H²)` norm of successive iterates drops
/// below `tol`. Returns the state at `T`, the full fixed-point trajectory
/// and the report. Fails with `NonContraction` when `max_iter` is reached
/// and the last observed factor is at least one; with fewer than two
/// iterates no factor exists and the unconverged result is returned.
pub fn picard_local_solve<T: Real>(
    u0: &RealField<T>,
    opts: &PicardOptions<T>,
    cfg: &SolverConfig<T>,
) -> Result<(StepperState<T>, DiscreteTrajectory<T>, PicardReport)> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(CchError::InvalidConfig("Picard needs tol > 0 and max_iter >= 1".into()));
    }
    let local_cfg = SolverConfig { dt: opts.dt, t_end: opts.horizon, ..cfg.clone() };
    local_cfg.validate(u0.grid())?;
    let steps = local_cfg.total_steps();
    let u0_hat = u0.to_spectral();
    let grid = *u0.grid();

    let mut current: DiscreteTrajectory<T> = match opts.start {
        PicardStart::Zero => vec![SpectralField::zeros(grid); steps + 1],
        PicardStart::Constant => vec![u0_hat.clone(); steps + 1],
        PicardStart::Linear => {
            let zeros = vec![SpectralField::zeros(grid); steps + 1];
            frozen_solve(&u0_hat, &zeros, &local_cfg)?
        }
    };

    let mut report = PicardReport {
        iterates: 0,
        differences: Vec::new(),
        contraction_factors: Vec::new(),
        converged: false,
    };
    while report.iterates < opts.max_iter {
        let next = frozen_solve(&u0_hat, &current, &local_cfg)?;
        report.iterates += 1;
        let diff = l2_h2_norm(&trajectory_difference(&next, &current)?, opts.dt);
        if let Some(&prev) = report.differences.last() {
            let factor = if prev > 0.0 { diff / prev } else { 0.0 };
            report.contraction_factors.push(factor);
        }
        report.differences.push(diff);
        current = next;
        if diff < opts.tol {
            report.converged = true;
            break;
        }
    }

    if !report.converged {
        if let Some(&factor) = report.contraction_factors.last() {
            if factor >= 1.0 {
                return Err(CchError::NonContraction { iterates: report.iterates, factor });
            }
        }
    }
    let final_state = StepperState::new(
        opts.dt * T::from_count(steps),
        current.last().cloned().unwrap_or(u0_hat),
    );
    Ok((final_state, current, report))
}

/// Trajectory of a direct run at every step, for comparison with Picard.
pub fn direct_trajectory<T: Real>(
    u0: &RealField<T>,
    cfg: &SolverConfig<T>,
) -> Result<DiscreteTrajectory<T>> {
    let mut history = StateHistory::default();
    let cfg = cfg.clone().with_record_every(1);
    run_simulation(u0, &cfg, &mut history)?;
    Ok(history.states.into_iter().map(|s| s.u_hat).collect())
}

/// `l2_h2_norm` of the difference of two trajectories.
pub fn trajectory_distance<T: Real>(
    a: &[SpectralField<T>],
    b: &[SpectralField<T>],
    dt: T,
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(CchError::InvalidConfig(format!(
            "trajectories have {} and {} time levels",
            a.len(),
            b.len()
        )));
    }
    Ok(l2_h2_norm(&trajectory_difference(a, b)?, dt))
}
