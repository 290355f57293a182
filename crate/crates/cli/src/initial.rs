//! Seeded initial data.

use cch_core::functionals::energy_spectral;
use cch_core::{GridSpec, RealField, SpectralField};
use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, InitialData};
use crate::error::{CliError, Result};

/// Name recorded in outputs for the initial-data generator.
pub const RNG_NAME: &str = "ChaCha8 (rand_chacha 0.3), seed_from_u64";

/// Generator position after the initial data was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngState {
    pub seed: u64,
    pub word_pos: u128,
}

#[derive(Debug, Clone)]
pub struct InitialField {
    pub field: RealField,
    pub rng: Option<RngState>,
}

/// Builds `u₀` for the configuration. The mean is removed whenever a
/// negative-order diagnostic is requested.
pub fn generate(cfg: &ExperimentConfig) -> Result<InitialField> {
    let grid = cfg.grid_spec()?;
    let force_mean_zero = cfg.needs_mean_zero();
    let (field, rng) = match &cfg.initial {
        InitialData::Gaussian { amplitude, width, center, mean_zero } => {
            let u = gaussian(grid, *amplitude, *width, center.as_deref())?;
            (if *mean_zero || force_mean_zero { u.mean_removed() } else { u }, None)
        }
        InitialData::RandomBand { seed, slope, band_min, band_max, target_h1 } => {
            let band = Band { min: *band_min, max: *band_max };
            let (u, rng) = random_band(grid, *seed, *slope, band, *target_h1)?;
            (u, Some(rng))
        }
        InitialData::File { path } => {
            let text = std::fs::read_to_string(path)?;
            let u = from_text(grid, &text)?;
            (if force_mean_zero { u.mean_removed() } else { u }, None)
        }
    };
    Ok(InitialField { field, rng })
}

/// `A exp(-|x - c|²/(2w²))`; `c` defaults to the box center.
pub fn gaussian(grid: GridSpec, amplitude: f64, width: f64, center: Option<&[f64]>) -> Result<RealField> {
    let half = grid.box_length() / 2.0;
    let c: Vec<f64> = match center {
        Some(c) => c.to_vec(),
        None => vec![half; grid.dim()],
    };
    if amplitude == 0.0 {
        return Ok(RealField::zeros(grid));
    }
    let two_w2 = 2.0 * width * width;
    Ok(RealField::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(&c).map(|(xi, ci)| (xi - ci) * (xi - ci)).sum();
        amplitude * (-r2 / two_w2).exp()
    })?)
}

/// Closed shell `min <= |m| <= max` of integer mode vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub min: f64,
    pub max: f64,
}

/// Random phases on the band with amplitudes `|m|^{-slope}`, rescaled so
/// that `sqrt(E₁) = target`. Mirror pairs are drawn once, in flat index
/// order of the first member, so the field is real and reproducible.
pub fn random_band(
    grid: GridSpec,
    seed: u64,
    slope: f64,
    band: Band,
    target: f64,
) -> Result<(RealField, RngState)> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(CliError::UnreachableTarget(format!("sqrt(E1) = {target} must be positive and finite")));
    }
    if band.max >= (grid.n() / 2) as f64 {
        return Err(CliError::Config(format!("band radius {} reaches the Nyquist modes", band.max)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex::new(0.0, 0.0); grid.len()];
    let n = grid.n();
    let dim = grid.dim();
    for i in 0..grid.len() {
        let m = grid.modes(i);
        let radius = (m.iter().map(|&mj| (mj * mj) as f64).sum::<f64>()).sqrt();
        if radius == 0.0 || radius < band.min || radius > band.max {
            continue;
        }
        let idx = grid.axis_indices(i);
        let mirror_idx: Vec<usize> = idx[..dim].iter().map(|&j| (n - j) % n).collect();
        let mirror = grid.flat_index(&mirror_idx);
        if mirror < i {
            continue;
        }
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        let c = Complex::from_polar(radius.powf(-slope), phase);
        coeffs[i] = c;
        coeffs[mirror] = c.conj();
    }
    let state = RngState { seed, word_pos: rng.get_word_pos() };
    let u_hat = SpectralField::new(grid, coeffs)?;
    let e1 = energy_spectral(&u_hat, 1);
    if !(e1 > 0.0) {
        return Err(CliError::UnreachableTarget(format!(
            "band [{}, {}] holds no modes on this grid",
            band.min, band.max
        )));
    }
    let scaled = u_hat.scaled(target / e1.sqrt());
    Ok((scaled.to_real()?, state))
}

/// Whitespace-separated samples in row-major order.
pub fn from_text(grid: GridSpec, text: &str) -> Result<RealField> {
    let samples = text
        .split_whitespace()
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Config(format!("bad sample {s}"))))
        .collect::<Result<Vec<_>>>()?;
    if samples.len() != grid.len() {
        return Err(CliError::Config(format!(
            "initial data file has {} samples, grid needs {}",
            samples.len(),
            grid.len()
        )));
    }
    Ok(RealField::new(grid, samples)?)
}
