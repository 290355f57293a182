//! Sobolev-type norms, the energy ladder, and executable forms of the
//! interpolation inequalities.
//!
//! Every derivative norm uses the homogeneous convention
//! `||∇^l f|| = ||Λ^l f|| = || |ξ|^l f̂ ||`, for integer and fractional `l`.

use crate::error::{CchError, Result};
use crate::scalar::Real;
use crate::spectral::{RealField, SpectralField};

fn squared_norm<T: Real>(xi: &[T]) -> T {
    xi.iter().fold(T::zero(), |acc, &k| acc + k * k)
}

/// `||Λ^r u||²` from coefficients. For `r < 0` the zero mode is excluded
/// and the field must be mean-zero.
pub fn homogeneous_norm_sq_spectral<T: Real>(u: &SpectralField<T>, r: T) -> Result<T> {
    if r < T::zero() {
        u.require_mean_zero()?;
    }
    if r == T::zero() {
        return Ok(u.weighted_norm_sq(|_| T::one()));
    }
    // |ξ|^{2r}: zero at ξ = 0 for r > 0, skipped (non-finite) for r < 0
    Ok(u.weighted_norm_sq(|xi| squared_norm(xi).powf(r)))
}

pub fn homogeneous_norm_spectral<T: Real>(u: &SpectralField<T>, r: T) -> Result<T> {
    homogeneous_norm_sq_spectral(u, r).map(|v| v.sqrt())
}

/// `||u||_{Ḣ^r}`.
pub fn homogeneous_norm<T: Real>(u: &RealField<T>, r: T) -> Result<T> {
    homogeneous_norm_spectral(&u.to_spectral(), r)
}

/// `E_N = sum_{l=0}^{N} ||∇^l u||²`.
pub fn energy_spectral<T: Real>(u: &SpectralField<T>, level: usize) -> T {
    let grid = *u.grid();
    let xi2 = grid.xi_squared();
    let scale = u.parseval_scale();
    let mut total = T::zero();
    for (c, &k2) in u.coeffs().iter().zip(&xi2) {
        let mut w = T::zero();
        let mut p = T::one();
        for _ in 0..=level {
            w += p;
            p *= k2;
        }
        total += w * c.norm_sqr();
    }
    total * scale
}

/// `D_N = sum_{l=0}^{N} (||∇^{l+1} u||² + ||∇^{l+2} u||²)`.
pub fn dissipation_spectral<T: Real>(u: &SpectralField<T>, level: usize) -> T {
    let grid = *u.grid();
    let xi2 = grid.xi_squared();
    let scale = u.parseval_scale();
    let mut total = T::zero();
    for (c, &k2) in u.coeffs().iter().zip(&xi2) {
        let mut w = T::zero();
        let mut p = k2;
        for _ in 0..=level {
            w += p + p * k2;
            p *= k2;
        }
        total += w * c.norm_sqr();
    }
    total * scale
}

pub fn energy_en<T: Real>(u: &RealField<T>, level: usize) -> T {
    energy_spectral(&u.to_spectral(), level)
}

pub fn dissipation_dn<T: Real>(u: &RealField<T>, level: usize) -> T {
    dissipation_spectral(&u.to_spectral(), level)
}

/// Exponent of an `L^p` norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            Ok(LpExponent::Infinity)
        } else if p >= 1.0 {
            Ok(LpExponent::Finite(p))
        } else {
            Err(CchError::OutOfRange(format!("L^p exponent {p}")))
        }
    }

    /// `1/p`, zero for `p = ∞`.
    pub fn reciprocal(self) -> f64 {
        match self {
            LpExponent::Finite(p) => 1.0 / p,
            LpExponent::Infinity => 0.0,
        }
    }

    pub fn value(self) -> f64 {
        match self {
            LpExponent::Finite(p) => p,
            LpExponent::Infinity => f64::INFINITY,
        }
    }
}

/// Rectangle-rule `((L/n)^dim sum |u_i|^p)^{1/p}`; `max |u_i|` for `p = ∞`.
/// Exact only up to quadrature error, which is spectrally small for smooth
/// band-limited fields.
pub fn lp_norm<T: Real>(u: &RealField<T>, p: LpExponent) -> T {
    match p {
        LpExponent::Infinity => u.max_abs(),
        LpExponent::Finite(p) => {
            let pt = T::lit(p);
            let sum = u.samples().iter().fold(T::zero(), |acc, &v| acc + v.abs().powf(pt));
            (sum * u.grid().cell_volume()).powf(T::one() / pt)
        }
    }
}

/// `||Λ^α f||_{L^p}`.
pub fn derivative_lp_norm<T: Real>(f: &SpectralField<T>, alpha: T, p: LpExponent) -> Result<T> {
    let g = f.fractional_power(alpha)?.to_real()?;
    Ok(lp_norm(&g, p))
}

/// Exponents of a Gagliardo-Nirenberg instance
/// `||∇^α f||_{L^p} ≲ ||∇^m f||_{L^q}^{1-θ} ||∇^l f||_{L^r}^θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnExponents {
    pub alpha: f64,
    pub p: LpExponent,
    pub m: f64,
    pub q: LpExponent,
    pub l: f64,
    pub r: LpExponent,
}

impl GnExponents {
    /// Solves the scaling constraint
    /// `α/d - 1/p = (m/d - 1/q)(1 - θ) + (l/d - 1/r) θ` for `θ ∈ [0, 1]`,
    /// requiring `θ ∈ (0, 1)` when `p = ∞`.
    pub fn theta(&self, dim: usize) -> Result<f64> {
        let d = dim as f64;
        if self.m < 0.0 || self.alpha < 0.0 || self.m > self.l || self.alpha > self.l {
            return Err(CchError::ConstraintUnsatisfiable(format!(
                "need 0 <= m, alpha <= l (m = {}, alpha = {}, l = {})",
                self.m, self.alpha, self.l
            )));
        }
        let lhs = self.alpha / d - self.p.reciprocal();
        let low = self.m / d - self.q.reciprocal();
        let high = self.l / d - self.r.reciprocal();
        let denom = high - low;
        let theta = if denom.abs() < 1e-14 {
            if (lhs - low).abs() > 1e-12 {
                return Err(CchError::ConstraintUnsatisfiable(
                    "scaling exponents of both factors coincide but differ from the left side".into(),
                ));
            }
            0.5
        } else {
            (lhs - low) / denom
        };
        let open = self.p == LpExponent::Infinity;
        let ok = if open {
            theta > 0.0 && theta < 1.0
        } else {
            (-1e-12..=1.0 + 1e-12).contains(&theta)
        };
        if !ok {
            return Err(CchError::ConstraintUnsatisfiable(format!(
                "theta = {theta} is outside {}",
                if open { "(0, 1)" } else { "[0, 1]" }
            )));
        }
        Ok(theta.clamp(0.0, 1.0))
    }
}

/// `||∇^α f||_{L^p} / (||∇^m f||_{L^q}^{1-θ} ||∇^l f||_{L^r}^θ)` with `θ`
/// solved from the scaling constraint in the grid's dimension.
pub fn gn_ratio<T: Real>(f: &RealField<T>, exps: &GnExponents) -> Result<f64> {
    let theta = exps.theta(f.grid().dim())?;
    let f_hat = f.to_spectral();
    let lhs = derivative_lp_norm(&f_hat, T::lit(exps.alpha), exps.p)?.to_f64_lossy();
    let low = derivative_lp_norm(&f_hat, T::lit(exps.m), exps.q)?.to_f64_lossy();
    let high = derivative_lp_norm(&f_hat, T::lit(exps.l), exps.r)?.to_f64_lossy();
    if !(low > 0.0) || !(high > 0.0) {
        return Err(CchError::ConstraintUnsatisfiable("right side vanishes".into()));
    }
    Ok(lhs / (low.powf(1.0 - theta) * high.powf(theta)))
}

/// `||f||_{Ḣ^{-s}} / ||f||_{L^p}` with `1/2 + s/d = 1/p`.
pub fn hls_ratio<T: Real>(f: &RealField<T>, s: f64, p: f64) -> Result<f64> {
    let d = f.grid().dim() as f64;
    if !(0.0..d / 2.0).contains(&s) || !(p > 1.0 && p <= 2.0) {
        return Err(CchError::ConstraintUnsatisfiable(format!(
            "need 0 <= s < d/2 and 1 < p <= 2 (s = {s}, p = {p})"
        )));
    }
    if (0.5 + s / d - 1.0 / p).abs() > 1e-12 {
        return Err(CchError::ConstraintUnsatisfiable(format!(
            "1/2 + s/d = {} but 1/p = {}",
            0.5 + s / d,
            1.0 / p
        )));
    }
    let f_hat = f.to_spectral();
    f_hat.require_mean_zero()?;
    let neg = homogeneous_norm_spectral(&f_hat, T::lit(-s))?.to_f64_lossy();
    let lp = lp_norm(f, LpExponent::Finite(p)).to_f64_lossy();
    if !(lp > 0.0) {
        return Err(CchError::ConstraintUnsatisfiable("zero field".into()));
    }
    Ok(neg / lp)
}

/// Both sides of `||∇^l f|| <= ||∇^{l+k} f||^{1-θ} ||f||_{Ḣ^{-s}}^θ`,
/// `θ = k/(l+k+s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl InterpolationSides {
    pub fn gap(&self) -> f64 {
        self.rhs - self.lhs
    }
}

pub fn interpolation_sides<T: Real>(f: &RealField<T>, l: f64, k: f64, s: f64) -> Result<InterpolationSides> {
    if l < 0.0 || k < 0.0 || s < 0.0 || k + s <= 0.0 {
        return Err(CchError::ConstraintUnsatisfiable(format!(
            "need l, k, s >= 0 and k + s > 0 (l = {l}, k = {k}, s = {s})"
        )));
    }
    let f_hat = f.to_spectral();
    f_hat.require_mean_zero()?;
    let theta = k / (l + k + s);
    let lhs = homogeneous_norm_spectral(&f_hat, T::lit(l))?.to_f64_lossy();
    let top = homogeneous_norm_spectral(&f_hat, T::lit(l + k))?.to_f64_lossy();
    let neg = homogeneous_norm_spectral(&f_hat, T::lit(-s))?.to_f64_lossy();
    Ok(InterpolationSides { lhs, rhs: top.powf(1.0 - theta) * neg.powf(theta) })
}

/// `RHS - LHS` of the interpolation inequality; non-negative up to rounding.
pub fn interpolation_gap<T: Real>(f: &RealField<T>, l: f64, k: f64, s: f64) -> Result<f64> {
    interpolation_sides(f, l, k, s).map(|sides| sides.gap())
}

/// Snapshot of the functionals of one field.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    /// `(N, E_N)`.
    pub energy: Vec<(usize, f64)>,
    /// `(N, D_N)`.
    pub dissipation: Vec<(usize, f64)>,
    /// `(s, ||Λ^{-s} u||)`.
    pub neg_norms: Vec<(f64, f64)>,
    /// `(p, ||u||_{L^p})`.
    pub lp_norms: Vec<(f64, f64)>,
    pub linf: f64,
    pub mean: f64,
}

pub fn energy_report<T: Real>(
    t: f64,
    u_hat: &SpectralField<T>,
    max_level: usize,
    s_list: &[f64],
    p_list: &[LpExponent],
) -> Result<EnergyReport> {
    let u = u_hat.to_real()?;
    let energy = (0..=max_level).map(|n| (n, energy_spectral(u_hat, n).to_f64_lossy())).collect();
    let dissipation =
        (0..=max_level).map(|n| (n, dissipation_spectral(u_hat, n).to_f64_lossy())).collect();
    let neg_norms = s_list
        .iter()
        .map(|&s| homogeneous_norm_spectral(u_hat, T::lit(-s)).map(|v| (s, v.to_f64_lossy())))
        .collect::<Result<_>>()?;
    let lp_norms = p_list.iter().map(|&p| (p.value(), lp_norm(&u, p).to_f64_lossy())).collect();
    Ok(EnergyReport {
        t,
        energy,
        dissipation,
        neg_norms,
        lp_norms,
        linf: u.max_abs().to_f64_lossy(),
        mean: u_hat.mean().to_f64_lossy(),
    })
}
