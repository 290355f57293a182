//! Diagnostics rows, power-law fits, the heat-scaling exponents and the
//! continuum linear-semigroup oracle.

use crate::error::{CchError, Result};
use crate::functionals::{
    dissipation_spectral, energy_spectral, homogeneous_norm_spectral, lp_norm, LpExponent,
};
use crate::integrators::{Recorder, StepperState};
use crate::quadrature;
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Which observables a diagnostics row carries.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsSpec {
    /// `N`: rows carry `E_0..E_N` and `D_0..D_N`.
    pub max_level: usize,
    /// Orders `s` of the negative norms `||Λ^{-s} u||`.
    pub neg_orders: Vec<f64>,
    /// `K`: rows carry `||∇^k u||` for `k = 0..K`.
    pub max_derivative: usize,
    pub lp_exponents: Vec<LpExponent>,
}

impl Default for DiagnosticsSpec {
    fn default() -> Self {
        Self { max_level: 1, neg_orders: vec![0.5], max_derivative: 2, lp_exponents: vec![] }
    }
}

impl DiagnosticsSpec {
    /// Column names in CSV order.
    pub fn column_names(&self) -> Vec<String> {
        let mut cols = vec!["t".to_string()];
        cols.extend((0..=self.max_level).map(|n| format!("E{n}")));
        cols.extend((0..=self.max_level).map(|n| format!("D{n}")));
        cols.extend(self.neg_orders.iter().map(|s| format!("neg_s_{s}")));
        cols.extend((0..=self.max_derivative).map(|k| format!("dk_{k}")));
        cols.extend(self.lp_exponents.iter().map(|p| match p {
            LpExponent::Finite(p) => format!("lp_{p}"),
            LpExponent::Infinity => "lp_inf".to_string(),
        }));
        cols.push("mean".into());
        cols.push("linf".into());
        cols
    }

    pub fn column_count(&self) -> usize {
        1 + 2 * (self.max_level + 1)
            + self.neg_orders.len()
            + self.max_derivative
            + 1
            + self.lp_exponents.len()
            + 2
    }

    /// Resolves a column name to a selector.
    pub fn column(&self, name: &str) -> Option<Column> {
        let names = self.column_names();
        let pos = names.iter().position(|c| c == name)?;
        self.column_at(pos)
    }

    fn column_at(&self, pos: usize) -> Option<Column> {
        let levels = self.max_level + 1;
        let mut offset = 1;
        if pos == 0 {
            return None;
        }
        let checks: [(usize, fn(usize) -> Column); 5] = [
            (levels, Column::Energy),
            (levels, Column::Dissipation),
            (self.neg_orders.len(), Column::NegNorm),
            (self.max_derivative + 1, Column::Derivative),
            (self.lp_exponents.len(), Column::Lp),
        ];
        for (count, make) in checks {
            if pos < offset + count {
                return Some(make(pos - offset));
            }
            offset += count;
        }
        match pos - offset {
            0 => Some(Column::Mean),
            1 => Some(Column::Linf),
            _ => None,
        }
    }
}

/// Observables at one recorded time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
    pub neg_norms: Vec<f64>,
    pub derivative_norms: Vec<f64>,
    pub lp_norms: Vec<f64>,
    pub mean: f64,
    pub linf: f64,
}

impl DiagnosticsRow {
    pub fn compute<T: Real>(t: f64, u_hat: &SpectralField<T>, spec: &DiagnosticsSpec) -> Result<Self> {
        let u = u_hat.to_real()?;
        let f = |v: T| v.to_f64_lossy();
        Ok(Self {
            t,
            energy: (0..=spec.max_level).map(|n| f(energy_spectral(u_hat, n))).collect(),
            dissipation: (0..=spec.max_level).map(|n| f(dissipation_spectral(u_hat, n))).collect(),
            neg_norms: spec
                .neg_orders
                .iter()
                .map(|&s| homogeneous_norm_spectral(u_hat, T::lit(-s)).map(f))
                .collect::<Result<_>>()?,
            derivative_norms: (0..=spec.max_derivative)
                .map(|k| homogeneous_norm_spectral(u_hat, T::from_count(k)).map(f))
                .collect::<Result<_>>()?,
            lp_norms: spec.lp_exponents.iter().map(|&p| f(lp_norm(&u, p))).collect(),
            mean: f(u_hat.mean()),
            linf: f(u.max_abs()),
        })
    }

    /// Values in CSV column order.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![self.t];
        v.extend(&self.energy);
        v.extend(&self.dissipation);
        v.extend(&self.neg_norms);
        v.extend(&self.derivative_norms);
        v.extend(&self.lp_norms);
        v.push(self.mean);
        v.push(self.linf);
        v
    }

    /// Inverse of [`values`](Self::values).
    pub fn from_values(spec: &DiagnosticsSpec, values: &[f64]) -> Result<Self> {
        if values.len() != spec.column_count() {
            return Err(CchError::InvalidConfig(format!(
                "row has {} values, schema has {} columns",
                values.len(),
                spec.column_count()
            )));
        }
        let mut it = values.iter().copied();
        let mut take = |n: usize| it.by_ref().take(n).collect::<Vec<f64>>();
        let t = take(1)[0];
        let energy = take(spec.max_level + 1);
        let dissipation = take(spec.max_level + 1);
        let neg_norms = take(spec.neg_orders.len());
        let derivative_norms = take(spec.max_derivative + 1);
        let lp_norms = take(spec.lp_exponents.len());
        let tail = take(2);
        Ok(Self {
            t,
            energy,
            dissipation,
            neg_norms,
            derivative_norms,
            lp_norms,
            mean: tail[0],
            linf: tail[1],
        })
    }

    pub fn get(&self, column: Column) -> Option<f64> {
        match column {
            Column::Energy(n) => self.energy.get(n).copied(),
            Column::Dissipation(n) => self.dissipation.get(n).copied(),
            Column::NegNorm(i) => self.neg_norms.get(i).copied(),
            Column::Derivative(k) => self.derivative_norms.get(k).copied(),
            Column::Lp(i) => self.lp_norms.get(i).copied(),
            Column::Mean => Some(self.mean),
            Column::Linf => Some(self.linf),
        }
    }
}

/// Selects one observable of a diagnostics row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Column {
    Energy(usize),
    Dissipation(usize),
    /// Index into `neg_orders`.
    NegNorm(usize),
    /// Derivative order `k`.
    Derivative(usize),
    /// Index into `lp_exponents`.
    Lp(usize),
    Mean,
    Linf,
}

/// Recorder that turns states into diagnostics rows and optionally forwards
/// each row to a sink as it is produced.
pub struct DiagnosticsRecorder<'a> {
    spec: DiagnosticsSpec,
    rows: Vec<DiagnosticsRow>,
    sink: Option<Box<dyn FnMut(usize, &DiagnosticsRow) -> Result<()> + 'a>>,
}

impl<'a> DiagnosticsRecorder<'a> {
    pub fn new(spec: DiagnosticsSpec) -> Self {
        Self { spec, rows: Vec::new(), sink: None }
    }

    pub fn with_sink(mut self, sink: impl FnMut(usize, &DiagnosticsRow) -> Result<()> + 'a) -> Self {
        self.sink = Some(Box::new(sink));
        self
    }

    pub fn spec(&self) -> &DiagnosticsSpec {
        &self.spec
    }

    pub fn rows(&self) -> &[DiagnosticsRow] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<DiagnosticsRow> {
        self.rows
    }
}

impl<T: Real> Recorder<T> for DiagnosticsRecorder<'_> {
    fn record(&mut self, step: usize, state: &StepperState<T>) -> Result<()> {
        let row = DiagnosticsRow::compute(state.t.to_f64_lossy(), &state.u_hat, &self.spec)?;
        if let Some(sink) = self.sink.as_mut() {
            sink(step, &row)?;
        }
        self.rows.push(row);
        Ok(())
    }
}

/// `σ_k = (d/2)(1/p - 1/2) + k/2`.
///
/// For `d = 3` and `p ∈ [3/2, 2]` this is the proven rate; outside that
/// range, or for `d ≠ 3`, it is the heat-scaling extension and requires
/// `allow_extension`.
pub fn theoretical_sigma(k: usize, p: f64, dim: usize, allow_extension: bool) -> Result<f64> {
    if !(1.0..=2.0).contains(&p) || !(1..=3).contains(&dim) {
        return Err(CchError::OutOfRange(format!("p = {p}, dim = {dim}")));
    }
    if sigma_is_extension(p, dim) {
        if !allow_extension {
            return Err(CchError::OutOfRange(format!(
                "p = {p} in dimension {dim} (proven range is dim 3, p in [3/2, 2])"
            )));
        }
        log::warn!("decay exponent for p = {p}, dim = {dim} uses the heat-scaling extension");
    }
    Ok(dim as f64 / 2.0 * (1.0 / p - 0.5) + k as f64 / 2.0)
}

/// True when `(p, dim)` lies outside the proven range.
pub fn sigma_is_extension(p: f64, dim: usize) -> bool {
    dim != 3 || !(1.5..=2.0).contains(&p)
}

/// Closed interval of times used by a fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl FitWindow {
    pub fn new(t_lo: f64, t_hi: f64) -> Self {
        Self { t_lo, t_hi }
    }

    pub fn all() -> Self {
        Self { t_lo: f64::MIN_POSITIVE, t_hi: f64::INFINITY }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t_lo && t <= self.t_hi
    }
}

/// Least-squares line through `(log t, log v)`; `exponent = -slope`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub exponent: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Smallest and largest time actually used.
    pub window: (f64, f64),
    pub points_used: usize,
}

pub const MIN_FIT_POINTS: usize = 5;

pub fn fit_power_law(series: &[(f64, f64)], window: FitWindow) -> Result<DecayFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(t, v) in series {
        if !(t > 0.0) || !window.contains(t) {
            continue;
        }
        if !(v > 0.0) {
            return Err(CchError::NonPositiveValue { t, value: v });
        }
        xs.push(t.ln());
        ys.push(v.ln());
        lo = lo.min(t);
        hi = hi.max(t);
    }
    if xs.len() < MIN_FIT_POINTS || !(hi > lo) {
        return Err(CchError::InsufficientData { found: xs.len(), needed: MIN_FIT_POINTS });
    }
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - x_mean) * (y - y_mean);
        sxx += (x - x_mean) * (x - x_mean);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(DecayFit {
        exponent: -slope,
        intercept,
        residual_rms: (ss / n).sqrt(),
        window: (lo, hi),
        points_used: xs.len(),
    })
}

/// `(t, value)` pairs of one column.
pub fn column_series(rows: &[DiagnosticsRow], column: Column) -> Vec<(f64, f64)> {
    rows.iter().filter_map(|r| r.get(column).map(|v| (r.t, v))).collect()
}

pub fn fit_rows(rows: &[DiagnosticsRow], column: Column, window: FitWindow) -> Result<DecayFit> {
    fit_power_law(&column_series(rows, column), window)
}

/// Contribution of the slowest-decaying shell `|ξ| = 2π/L`:
/// `amplitude * e^{-λ_min t}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaturationFloor {
    pub lambda_min: f64,
    pub amplitude: f64,
}

impl SaturationFloor {
    /// Floor of `||∇^k u||` for the initial coefficients `u0`.
    pub fn for_derivative<T: Real>(u0: &SpectralField<T>, k: usize) -> Self {
        let grid = *u0.grid();
        let k_min = grid.min_wavenumber().to_f64_lossy();
        let k2_min = k_min * k_min;
        let xi2 = grid.xi_squared();
        let mut shell = 0.0;
        for (c, k2) in u0.coeffs().iter().zip(xi2) {
            let k2 = k2.to_f64_lossy();
            if (k2 - k2_min).abs() <= 1e-9 * k2_min {
                shell += k2.powi(k as i32) * c.norm_sqr().to_f64_lossy();
            }
        }
        let amplitude = (shell * u0.parseval_scale().to_f64_lossy()).sqrt();
        Self { lambda_min: k2_min * k2_min + k2_min, amplitude }
    }

    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (-self.lambda_min * t).exp()
    }
}

/// Default fit window: drop `t < t_min`, stop at `horizon`, and end the
/// window at the first row whose value is within `floor_factor` of the
/// saturation floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPolicy {
    pub t_min: f64,
    pub floor_factor: f64,
    pub horizon: Option<f64>,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self { t_min: 1.0, floor_factor: 10.0, horizon: None }
    }
}

impl WindowPolicy {
    /// Finite-size horizon `(L/8)²` of the torus proxy.
    pub fn finite_size_horizon(box_length: f64) -> f64 {
        (box_length / 8.0).powi(2)
    }

    pub fn window(&self, series: &[(f64, f64)], floor: Option<&SaturationFloor>) -> FitWindow {
        let t_hi_cap = self.horizon.unwrap_or(f64::INFINITY);
        let mut t_hi = self.t_min;
        for &(t, v) in series {
            if t < self.t_min {
                continue;
            }
            if t > t_hi_cap {
                break;
            }
            if let Some(fl) = floor {
                if v <= self.floor_factor * fl.at(t) {
                    break;
                }
            }
            t_hi = t;
        }
        FitWindow::new(self.t_min, t_hi)
    }
}

/// Isotropic Gaussian `A exp(-|x|²/(2w²))` on `R^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianData {
    pub amplitude: f64,
    pub width: f64,
    pub dim: usize,
}

impl GaussianData {
    /// `|û₀(ρ)|² = A² (2π w²)^d e^{-w² ρ²}`.
    pub fn spectrum_sq(&self, rho: f64) -> f64 {
        let w2 = self.width * self.width;
        let d = self.dim as f64;
        self.amplitude * self.amplitude
            * (std::f64::consts::TAU * w2).powf(d)
            * (-w2 * rho * rho).exp()
    }

    /// `||∇^k u₀||` in closed form.
    pub fn derivative_norm(&self, k: usize) -> f64 {
        let d = self.dim as f64;
        let w = self.width;
        let radial = gamma_half_integer(2 * k + self.dim) / (2.0 * w.powf(2.0 * k as f64 + d));
        (sphere_area(self.dim) / std::f64::consts::TAU.powf(d)
            * self.amplitude
            * self.amplitude
            * (std::f64::consts::TAU * w * w).powf(d)
            * radial)
            .sqrt()
    }
}

/// Surface area of the unit sphere in `R^d`, `d ∈ {1, 2, 3}`.
fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => std::f64::consts::TAU,
        _ => 4.0 * std::f64::consts::PI,
    }
}

/// `Γ(m/2)` for a positive integer `m`.
pub(crate) fn gamma_half_integer(m: usize) -> f64 {
    assert!(m > 0, "Gamma is singular at 0");
    if m % 2 == 0 {
        (1..m / 2).fold(1.0, |acc, i| acc * i as f64)
    } else {
        let mut v = std::f64::consts::PI.sqrt();
        let mut x = 0.5;
        while x < m as f64 / 2.0 - 0.25 {
            v *= x;
            x += 1.0;
        }
        v
    }
}

pub const ORACLE_REL_TOL: f64 = 1e-8;

/// `||∇^k e^{-t(Δ² - Δ)} u₀||` on `R^d` for Gaussian `u₀`, via the radial
/// integral `S_d (2π)^{-d} ∫ ρ^{2k+d-1} e^{-2t(ρ⁴+ρ²)} |û₀(ρ)|² dρ`.
pub fn linear_decay_oracle(k: usize, data: &GaussianData, t: f64) -> Result<f64> {
    if !(t >= 0.0) || !(data.width > 0.0) || !(1..=3).contains(&data.dim) {
        return Err(CchError::OutOfRange(format!(
            "t = {t}, width = {}, dim = {}",
            data.width, data.dim
        )));
    }
    if data.amplitude == 0.0 {
        return Ok(0.0);
    }
    let power = (2 * k + data.dim - 1) as i32;
    let w2 = data.width * data.width;
    let integrand = |rho: f64| {
        let r2 = rho * rho;
        rho.powi(power) * (-2.0 * t * (r2 * r2 + r2) - w2 * r2).exp()
    };
    // Beyond this radius the exponent is below -750 even ignoring ρ⁴.
    let rho_max = (750.0 / (w2 + 2.0 * t)).sqrt();
    let peak = 1.0 / (w2 + 2.0 * t).sqrt();
    let mut breaks = vec![0.0];
    let mut b = peak / 64.0;
    while b < rho_max {
        breaks.push(b);
        b *= 2.0;
    }
    breaks.push(rho_max);
    let integral = quadrature::integrate(integrand, &breaks, ORACLE_REL_TOL * 1e-2, 0.0, 20_000)?;
    let prefactor = sphere_area(data.dim) / std::f64::consts::TAU.powf(data.dim as f64)
        * data.spectrum_sq(0.0);
    Ok((prefactor * integral).sqrt())
}
