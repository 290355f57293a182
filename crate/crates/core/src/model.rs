//! Right-hand side of the convective Cahn-Hilliard equation
//!
//! ```text
//! u_t + Δ²u = Δφ(u) + γ β·∇ψ(u),   φ(u) = a u³ + b u,   ψ(u) = u²/2
//! ```
//!
//! in the stabilized split `u_t = -λ(ξ) û + N(u)` with the stiff symbol
//! `λ = |ξ|⁴ + |ξ|²` and the remainder
//! `N(u) = Δ(a u³ + (b - 1) u) + γ u (β·∇u)`.
//! With `a = 1, b = -1` the potential is the double well `u³ - u`; `b = +1`
//! selects the stable surrogate whose linearization is `e^{-tλ}`.

use crate::error::{CchError, Result};
use crate::scalar::Real;
use crate::spectral::{dealiased_power_spectral, dealiased_product_spectral, RealField, SpectralField};

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams<T> {
    /// `a` in `φ(u) = a u³ + b u`.
    pub cubic_coeff: T,
    /// `b` in `φ(u) = a u³ + b u`.
    pub linear_pot_coeff: T,
    /// Drift direction `β`, one entry per axis.
    pub drift: Vec<T>,
    /// Convection strength `γ`.
    pub gamma: T,
}

impl<T: Real> ModelParams<T> {
    /// Double-well model with unit drift in every direction.
    pub fn double_well(dim: usize) -> Self {
        Self {
            cubic_coeff: T::one(),
            linear_pot_coeff: -T::one(),
            drift: vec![T::one(); dim],
            gamma: T::one(),
        }
    }

    /// `b = +1`: the linearization is the semigroup generated by `-(Δ² - Δ)`.
    pub fn stable_surrogate(dim: usize) -> Self {
        Self { linear_pot_coeff: T::one(), ..Self::double_well(dim) }
    }

    /// `N ≡ 0` when `b = 1`; otherwise only `Δ((b - 1) u)` survives.
    pub fn linear_only(dim: usize, linear_pot_coeff: T) -> Self {
        Self {
            cubic_coeff: T::zero(),
            linear_pot_coeff,
            drift: vec![T::one(); dim],
            gamma: T::zero(),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.drift.len() != dim {
            return Err(CchError::InvalidConfig(format!(
                "drift has {} components for a {dim}-dimensional grid",
                self.drift.len()
            )));
        }
        let finite = [self.cubic_coeff, self.linear_pot_coeff, self.gamma]
            .iter()
            .chain(&self.drift)
            .all(|v| v.is_finite());
        if !finite {
            return Err(CchError::InvalidConfig("model parameters must be finite".into()));
        }
        Ok(())
    }

    /// `φ(u) = a u³ + b u`.
    pub fn potential_derivative(&self, u: T) -> T {
        self.cubic_coeff * u * u * u + self.linear_pot_coeff * u
    }

    /// `ψ(u) = u²/2`.
    pub fn flux(u: T) -> T {
        u * u / T::lit(2.0)
    }
}

/// Stiff symbol `λ(ξ) = |ξ|⁴ + |ξ|²`.
pub fn linear_symbol<T: Real>(xi: &[T]) -> T {
    let k2 = xi.iter().fold(T::zero(), |acc, &k| acc + k * k);
    symbol_from_squared(k2)
}

pub(crate) fn symbol_from_squared<T: Real>(k2: T) -> T {
    k2 * k2 + k2
}

/// `λ` at every storage index of the grid.
pub fn linear_symbol_table<T: Real>(grid: &crate::spectral::GridSpec<T>) -> Vec<T> {
    grid.xi_squared().into_iter().map(symbol_from_squared).collect()
}

/// `N(u)` from spectral input.
///
/// The cubic is dealiased at degree 3 and the convection, written as
/// `γ β·∇(u²/2)`, at degree 2; both parts are derivatives so the zero mode
/// of the result is exactly zero.
pub fn nonlinear_term_spectral<T: Real>(
    u: &SpectralField<T>,
    params: &ModelParams<T>,
) -> Result<SpectralField<T>> {
    let grid = *u.grid();
    params.validate(grid.dim())?;
    let xi2 = grid.xi_squared();
    let shift = params.linear_pot_coeff - T::one();

    let mut out = u.scaled(shift);
    if params.cubic_coeff != T::zero() {
        let cube = dealiased_power_spectral(u, 3)?;
        for (o, c) in out.coeffs_mut().iter_mut().zip(cube.coeffs()) {
            *o += c.scale(params.cubic_coeff);
        }
    }
    for (o, &k2) in out.coeffs_mut().iter_mut().zip(&xi2) {
        *o = o.scale(-k2);
    }

    if params.gamma != T::zero() {
        let square = dealiased_power_spectral(u, 2)?;
        let half_gamma = params.gamma / T::lit(2.0);
        let conv = square.directional_derivative(&params.drift);
        for (o, c) in out.coeffs_mut().iter_mut().zip(conv.coeffs()) {
            *o += c.scale(half_gamma);
        }
    }
    Ok(out)
}

pub fn nonlinear_term<T: Real>(u: &RealField<T>, params: &ModelParams<T>) -> Result<SpectralField<T>> {
    nonlinear_term_spectral(&u.to_spectral(), params)
}

/// `-λ û + N(u)`.
pub fn full_rhs_spectral<T: Real>(
    u: &SpectralField<T>,
    params: &ModelParams<T>,
) -> Result<SpectralField<T>> {
    let mut out = nonlinear_term_spectral(u, params)?;
    let lambda = linear_symbol_table(u.grid());
    for ((o, c), l) in out.coeffs_mut().iter_mut().zip(u.coeffs()).zip(lambda) {
        *o -= c.scale(l);
    }
    Ok(out)
}

pub fn full_rhs<T: Real>(u: &RealField<T>, params: &ModelParams<T>) -> Result<SpectralField<T>> {
    full_rhs_spectral(&u.to_spectral(), params)
}

/// The same right side evaluated without the split:
/// `-Δ²u + Δφ(u) + γ u (β·∇u)`, with the convection taken as a dealiased
/// product of `u` and `β·∇u` rather than in divergence form.
pub fn full_rhs_unsplit<T: Real>(
    u: &RealField<T>,
    params: &ModelParams<T>,
) -> Result<SpectralField<T>> {
    let grid = *u.grid();
    params.validate(grid.dim())?;
    let u_hat = u.to_spectral();
    let cube = dealiased_product_spectral(&[&u_hat, &u_hat, &u_hat], 3)?;
    let grad = u_hat.directional_derivative(&params.drift);
    let conv = dealiased_product_spectral(&[&u_hat, &grad], 2)?;
    let xi2 = grid.xi_squared();

    let mut out = SpectralField::zeros(grid);
    for (f, o) in out.coeffs_mut().iter_mut().enumerate() {
        let k2 = xi2[f];
        let phi = cube.coeffs()[f].scale(params.cubic_coeff)
            + u_hat.coeffs()[f].scale(params.linear_pot_coeff);
        *o = u_hat.coeffs()[f].scale(-k2 * k2) + phi.scale(-k2) + conv.coeffs()[f].scale(params.gamma);
    }
    Ok(out)
}

/// Frozen-coefficient right side of the local-existence iteration:
/// `Δ[(a ũ² + b - 1) u] + γ ũ (β·∇u)` for a given coefficient field `ũ`.
pub fn frozen_nonlinear_term<T: Real>(
    frozen: &SpectralField<T>,
    u: &SpectralField<T>,
    params: &ModelParams<T>,
) -> Result<SpectralField<T>> {
    let grid = *u.grid();
    params.validate(grid.dim())?;
    if !frozen.grid().same_as(&grid) {
        return Err(CchError::GridMismatch);
    }
    let xi2 = grid.xi_squared();
    let mut out = u.scaled(params.linear_pot_coeff - T::one());
    if params.cubic_coeff != T::zero() {
        let cubic = dealiased_product_spectral(&[frozen, frozen, u], 3)?;
        for (o, c) in out.coeffs_mut().iter_mut().zip(cubic.coeffs()) {
            *o += c.scale(params.cubic_coeff);
        }
    }
    for (o, &k2) in out.coeffs_mut().iter_mut().zip(&xi2) {
        *o = o.scale(-k2);
    }
    if params.gamma != T::zero() {
        let grad = u.directional_derivative(&params.drift);
        let conv = dealiased_product_spectral(&[frozen, &grad], 2)?;
        for (o, c) in out.coeffs_mut().iter_mut().zip(conv.coeffs()) {
            *o += c.scale(params.gamma);
        }
    }
    Ok(out)
}
