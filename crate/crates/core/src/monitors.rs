//! Run-time monitors for the small-data energy ladder and the negative
//! Sobolev norm bound.

use crate::error::Result;
use crate::functionals::{dissipation_spectral, energy_spectral, homogeneous_norm_sq_spectral};
use crate::integrators::{Recorder, StepperState};
use crate::model::{nonlinear_term_spectral, ModelParams};
use crate::scalar::Real;
use crate::spectral::SpectralField;

/// Tracks `E_N(t)` and the left Riemann sum of `D_N` over recorded times.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderMonitor {
    pub level: usize,
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub dissipation: Vec<f64>,
}

impl LadderMonitor {
    pub fn new(level: usize) -> Self {
        Self { level, times: Vec::new(), energy: Vec::new(), dissipation: Vec::new() }
    }

    pub fn observe<T: Real>(&mut self, t: f64, u_hat: &SpectralField<T>) {
        self.times.push(t);
        self.energy.push(energy_spectral(u_hat, self.level).to_f64_lossy());
        self.dissipation.push(dissipation_spectral(u_hat, self.level).to_f64_lossy());
    }

    pub fn initial_energy(&self) -> f64 {
        self.energy.first().copied().unwrap_or(0.0)
    }

    /// `E_N(t_j) + sum_{i<j} D_N(t_i)(t_{i+1} - t_i)` at every recorded time.
    pub fn ladder(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.times.len());
        for j in 0..self.times.len() {
            if j > 0 {
                acc += self.dissipation[j - 1] * (self.times[j] - self.times[j - 1]);
            }
            out.push(self.energy[j] + acc);
        }
        out
    }

    /// Largest ladder value divided by `E_N(0)`.
    pub fn max_ladder_ratio(&self) -> f64 {
        let e0 = self.initial_energy();
        self.ladder().into_iter().fold(0.0, |m, v| m.max(v / e0))
    }

    /// Largest one-record increase of `E_N`, relative to `E_N(0)`.
    /// Non-positive for a non-increasing energy.
    pub fn max_relative_increase(&self) -> f64 {
        let e0 = self.initial_energy();
        self.energy.windows(2).fold(f64::NEG_INFINITY, |m, w| m.max((w[1] - w[0]) / e0))
    }
}

impl<T: Real> Recorder<T> for LadderMonitor {
    fn record(&mut self, _step: usize, state: &StepperState<T>) -> Result<()> {
        self.observe(state.t.to_f64_lossy(), &state.u_hat);
        Ok(())
    }
}

/// Measures the integrated form of the negative-norm evolution inequality
///
/// ```text
/// E_{-s}(t) <= E_{-s}(0) + C ∫_0^t ||∇u||²_{H¹} sqrt(E_{-s}) dτ
/// ```
///
/// with `E_{-s} = ||Λ^{-s} u||²` and the effective constant `C` taken as the
/// largest observed ratio `2|<Λ^{-s} N(u), Λ^{-s} u>| / (||∇u||²_{H¹} sqrt(E_{-s}))`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeNormMonitor<T> {
    pub s: f64,
    params: ModelParams<T>,
    pub times: Vec<f64>,
    /// `E_{-s}` at each record.
    pub neg_energy: Vec<f64>,
    /// `||∇u||²_{H¹} sqrt(E_{-s})` at each record.
    pub weight: Vec<f64>,
    /// `2 |<Λ^{-s} N(u), Λ^{-s} u>|` at each record.
    pub forcing: Vec<f64>,
}

impl<T: Real> NegativeNormMonitor<T> {
    pub fn new(s: f64, params: ModelParams<T>) -> Self {
        Self {
            s,
            params,
            times: Vec::new(),
            neg_energy: Vec::new(),
            weight: Vec::new(),
            forcing: Vec::new(),
        }
    }

    pub fn observe(&mut self, t: f64, u_hat: &SpectralField<T>) -> Result<()> {
        let s = T::lit(self.s);
        let e_neg = homogeneous_norm_sq_spectral(u_hat, -s)?.to_f64_lossy();
        let grad_h1 = (homogeneous_norm_sq_spectral(u_hat, T::one())?
            + homogeneous_norm_sq_spectral(u_hat, T::lit(2.0))?)
        .to_f64_lossy();
        let n_hat = nonlinear_term_spectral(u_hat, &self.params)?;
        let mut inner = T::zero();
        for (f, (n, u)) in n_hat.coeffs().iter().zip(u_hat.coeffs()).enumerate().skip(1) {
            let xi = u_hat.grid().xi(f);
            let k2 = xi.iter().fold(T::zero(), |a, &k| a + k * k);
            inner += k2.powf(-s) * (n.re * u.re + n.im * u.im);
        }
        let inner = (inner * u_hat.parseval_scale()).to_f64_lossy();
        self.times.push(t);
        self.neg_energy.push(e_neg);
        self.weight.push(grad_h1 * e_neg.sqrt());
        self.forcing.push(2.0 * inner.abs());
        Ok(())
    }

    /// Largest observed ratio `forcing / weight`.
    pub fn effective_constant(&self) -> f64 {
        self.forcing
            .iter()
            .zip(&self.weight)
            .filter(|(_, &w)| w > 0.0)
            .fold(0.0, |m, (f, w)| m.max(f / w))
    }

    /// Right side of the integrated inequality at every record, using the
    /// left Riemann sum of the weight.
    pub fn bound(&self) -> Vec<f64> {
        let c = self.effective_constant();
        let mut acc = 0.0;
        let e0 = self.neg_energy.first().copied().unwrap_or(0.0);
        let mut out = Vec::with_capacity(self.times.len());
        for j in 0..self.times.len() {
            if j > 0 {
                acc += self.weight[j - 1] * (self.times[j] - self.times[j - 1]);
            }
            out.push(e0 + c * acc);
        }
        out
    }

    /// `sup_t ||Λ^{-s} u(t)||`.
    pub fn sup_norm(&self) -> f64 {
        self.neg_energy.iter().fold(0.0, |m, &e| m.max(e.sqrt()))
    }

    /// Largest `||Λ^{-s} u(t_j)|| / sqrt(bound(t_j))`.
    pub fn worst_bound_ratio(&self) -> f64 {
        self.neg_energy
            .iter()
            .zip(self.bound())
            .filter(|(_, b)| *b > 0.0)
            .fold(0.0, |m, (e, b)| m.max((e / b).sqrt()))
    }
}

impl<T: Real> Recorder<T> for NegativeNormMonitor<T> {
    fn record(&mut self, _step: usize, state: &StepperState<T>) -> Result<()> {
        self.observe(state.t.to_f64_lossy(), &state.u_hat)
    }
}

/// Feeds one state to several recorders.
pub struct Tee<'a, T>(pub Vec<&'a mut dyn Recorder<T>>);

impl<T> Recorder<T> for Tee<'_, T> {
    fn record(&mut self, step: usize, state: &StepperState<T>) -> Result<()> {
        for r in self.0.iter_mut() {
            r.record(step, state)?;
        }
        Ok(())
    }
}
