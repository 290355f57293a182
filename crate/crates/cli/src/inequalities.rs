//! Seeded checks of the interpolation, Gagliardo-Nirenberg and
//! Hardy-Littlewood-Sobolev inequalities.

use cch_core::functionals::{gn_ratio, hls_ratio, interpolation_sides};
use cch_core::{GnExponents, GridSpec, LpExponent, RealField};
use serde::Serialize;

use crate::error::Result;
use crate::initial::{random_band, Band};

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub base_seed: u64,
    pub fields: usize,
    /// Points per axis of the interpolation ensemble (3D).
    pub n: usize,
    /// Coarse resolution of the ratio studies; the fine one doubles it.
    pub ratio_n: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { base_seed: 0, fields: 100, n: 16, ratio_n: 16 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InterpolationCheck {
    pub l: f64,
    pub k: f64,
    pub s: f64,
    pub fields: usize,
    /// Smallest `gap / RHS` over the ensemble.
    pub min_relative_gap: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioCheck {
    pub name: String,
    pub ratio_coarse: f64,
    pub ratio_fine: f64,
    pub ratio_scaled: f64,
    pub scale_error: f64,
    pub resolution_change: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    pub base_seed: u64,
    pub interpolation: Vec<InterpolationCheck>,
    pub ratios: Vec<RatioCheck>,
    pub all_passed: bool,
}

impl InequalityReport {
    pub fn failures(&self) -> usize {
        self.interpolation.iter().filter(|c| !c.passed).count()
            + self.ratios.iter().filter(|c| !c.passed).count()
    }
}

const GAP_TOL: f64 = 1e-10;
const SCALE_TOL: f64 = 1e-12;
const RESOLUTION_TOL: f64 = 0.1;

pub const INTERPOLATION_TRIPLES: [(f64, f64, f64); 3] = [(0.0, 1.0, 0.5), (1.0, 1.0, 0.5), (0.0, 2.0, 0.5)];

pub fn check_all(opts: &SuiteOptions) -> Result<InequalityReport> {
    let grid = GridSpec::new(3, opts.n, std::f64::consts::TAU)?;
    let band = Band { min: 1.0, max: (opts.n / 2 - 1) as f64 };
    let fields = (0..opts.fields as u64)
        .map(|i| random_band(grid, opts.base_seed.wrapping_add(i), 1.0, band, 1.0).map(|(u, _)| u))
        .collect::<Result<Vec<_>>>()?;

    let mut interpolation = Vec::new();
    for (l, k, s) in INTERPOLATION_TRIPLES {
        let mut min_rel = f64::INFINITY;
        for f in &fields {
            let sides = interpolation_sides(f, l, k, s)?;
            min_rel = min_rel.min(sides.gap() / sides.rhs);
        }
        interpolation.push(InterpolationCheck {
            l,
            k,
            s,
            fields: fields.len(),
            min_relative_gap: min_rel,
            passed: min_rel >= -GAP_TOL,
        });
    }

    let coarse = GridSpec::new(3, opts.ratio_n, 16.0)?;
    let fine = GridSpec::new(3, 2 * opts.ratio_n, 16.0)?;
    let fin = |p| LpExponent::Finite(p);
    let l3 = GnExponents { alpha: 0.0, p: fin(3.0), m: 0.0, q: fin(2.0), l: 1.0, r: fin(2.0) };
    let linf = GnExponents { alpha: 0.0, p: LpExponent::Infinity, m: 1.0, q: fin(2.0), l: 2.0, r: fin(2.0) };
    let ratios = vec![
        ratio_check("gn_l3", coarse, fine, gaussian, |f| Ok(gn_ratio(f, &l3)?))?,
        ratio_check("gn_linf", coarse, fine, gaussian, |f| Ok(gn_ratio(f, &linf)?))?,
        ratio_check("hls_s0.5_p1.5", coarse, fine, dipole, |f| Ok(hls_ratio(f, 0.5, 1.5)?))?,
    ];

    let all_passed = interpolation.iter().all(|c| c.passed) && ratios.iter().all(|c| c.passed);
    Ok(InequalityReport { base_seed: opts.base_seed, interpolation, ratios, all_passed })
}

fn ratio_check(
    name: &str,
    coarse: GridSpec,
    fine: GridSpec,
    make: fn(GridSpec) -> Result<RealField>,
    ratio: impl Fn(&RealField) -> Result<f64>,
) -> Result<RatioCheck> {
    let f = make(coarse)?;
    let r_coarse = ratio(&f)?;
    let r_scaled = ratio(&f.scaled(17.0))?;
    let r_fine = ratio(&make(fine)?)?;
    let scale_error = ((r_scaled - r_coarse) / r_coarse).abs();
    let resolution_change = ((r_fine - r_coarse) / r_fine).abs();
    let finite = r_coarse.is_finite() && r_fine.is_finite() && r_coarse > 0.0;
    Ok(RatioCheck {
        name: name.to_string(),
        ratio_coarse: r_coarse,
        ratio_fine: r_fine,
        ratio_scaled: r_scaled,
        scale_error,
        resolution_change,
        passed: finite && scale_error <= SCALE_TOL && resolution_change <= RESOLUTION_TOL,
    })
}

fn centered_r2(grid: &GridSpec, x: &[f64]) -> f64 {
    let c = grid.box_length() / 2.0;
    x.iter().map(|xi| (xi - c) * (xi - c)).sum()
}

/// Unit Gaussian of width 1.5 at the box center.
fn gaussian(grid: GridSpec) -> Result<RealField> {
    Ok(RealField::from_fn(grid, |x| (-centered_r2(&grid, x) / 4.5).exp())?)
}

/// `(x₁ - c) exp(-|x - c|²/2)`, mean-zero by symmetry.
fn dipole(grid: GridSpec) -> Result<RealField> {
    let c = grid.box_length() / 2.0;
    let f = RealField::from_fn(grid, |x| (x[0] - c) * (-centered_r2(&grid, x) / 2.0).exp())?;
    // the sample at x₁ = 0 has no mirror partner, so symmetry is not exact
    Ok(f.mean_removed())
}
