//! Alias-free pointwise products by zero padding.
//!
//! A product of `d` band-limited factors is evaluated on a grid with
//! `M >= (d + 1) n / 2` points per axis, which is exactly enough for no
//! product mode to fold back into `|m| < n/2`. The Nyquist plane is not part
//! of the band: it is dropped from the inputs and left empty in the output.

use num_complex::Complex;

use super::fft;
use super::grid::{axis_indices, enforce_hermitian, mode_number, GridSpec, RealField, SpectralField};
use crate::error::{CchError, Result};
use crate::scalar::Real;

/// Points per axis of the padded grid for products of `degree` factors.
pub fn padded_len(n: usize, degree: usize) -> usize {
    ((degree + 1) * n).div_ceil(2)
}

/// Where each storage index of the `n` grid lands on the padded grid.
fn index_map(n: usize, padded: usize) -> Vec<Option<usize>> {
    (0..n)
        .map(|i| {
            let m = mode_number(i, n);
            if m == -(n as i64) / 2 {
                None
            } else {
                Some(m.rem_euclid(padded as i64) as usize)
            }
        })
        .collect()
}

fn for_each_band_mode<T: Real>(
    grid: &GridSpec<T>,
    map: &[Option<usize>],
    padded: usize,
    mut f: impl FnMut(usize, usize),
) {
    let dim = grid.dim();
    'modes: for src in 0..grid.len() {
        let idx = axis_indices(src, grid.n(), dim);
        let mut dst = 0usize;
        for &i in &idx[..dim] {
            match map[i] {
                Some(j) => dst = dst * padded + j,
                None => continue 'modes,
            }
        }
        f(src, dst);
    }
}

/// Samples of a band-limited field on the padded grid, scaled by `n^dim`.
fn pad_to_physical<T: Real>(u: &SpectralField<T>, padded: usize) -> Vec<T> {
    let grid = u.grid();
    let map = index_map(grid.n(), padded);
    let total = padded.pow(grid.dim() as u32);
    let mut data = vec![Complex::new(T::zero(), T::zero()); total];
    let coeffs = u.coeffs();
    for_each_band_mode(grid, &map, padded, |src, dst| data[dst] = coeffs[src]);
    fft::transform(&mut data, padded, grid.dim(), true);
    data.into_iter().map(|c| c.re).collect()
}

/// Forward transform of padded-grid samples truncated back to the band.
/// `scale` multiplies every retained coefficient.
fn truncate_from_physical<T: Real>(
    grid: &GridSpec<T>,
    samples: Vec<T>,
    padded: usize,
    scale: T,
) -> SpectralField<T> {
    let mut data: Vec<Complex<T>> = samples.into_iter().map(|v| Complex::new(v, T::zero())).collect();
    fft::transform(&mut data, padded, grid.dim(), false);
    let map = index_map(grid.n(), padded);
    let mut coeffs = vec![Complex::new(T::zero(), T::zero()); grid.len()];
    for_each_band_mode(grid, &map, padded, |src, dst| coeffs[src] = data[dst].scale(scale));
    enforce_hermitian(grid, &mut coeffs);
    SpectralField::from_raw(*grid, coeffs)
}

fn check_degree<T: Real>(grid: &GridSpec<T>, factors: usize, degree: usize) -> Result<()> {
    if degree == 0 || factors > degree || degree > grid.pad_degree() {
        return Err(CchError::DegreeTooHigh { degree: degree.max(factors), max: grid.pad_degree() });
    }
    Ok(())
}

/// Alias-free product of spectral factors, padded for `degree`.
pub fn dealiased_product_spectral<T: Real>(
    factors: &[&SpectralField<T>],
    degree: usize,
) -> Result<SpectralField<T>> {
    let first = factors
        .first()
        .ok_or_else(|| CchError::InvalidConfig("product of zero factors".into()))?;
    let grid = *first.grid();
    if factors.iter().any(|f| !f.grid().same_as(&grid)) {
        return Err(CchError::GridMismatch);
    }
    check_degree(&grid, factors.len(), degree)?;

    let padded = padded_len(grid.n(), degree);
    let mut product = pad_to_physical(factors[0], padded);
    for f in &factors[1..] {
        let samples = pad_to_physical(f, padded);
        for (p, s) in product.iter_mut().zip(samples) {
            *p *= s;
        }
    }
    Ok(truncate_from_physical(&grid, product, padded, product_scale(&grid, padded, factors.len())))
}

/// Alias-free `u^power`, transforming `u` to the padded grid once.
pub fn dealiased_power_spectral<T: Real>(
    u: &SpectralField<T>,
    power: usize,
) -> Result<SpectralField<T>> {
    let grid = *u.grid();
    check_degree(&grid, power, power)?;
    let padded = padded_len(grid.n(), power);
    let samples = pad_to_physical(u, padded);
    let product = samples.into_iter().map(|v| v.powi(power as i32)).collect();
    Ok(truncate_from_physical(&grid, product, padded, product_scale(&grid, padded, power)))
}

// Each padded factor carries n^dim; the padded forward transform carries
// M^dim and the result must carry n^dim once.
fn product_scale<T: Real>(grid: &GridSpec<T>, padded: usize, factors: usize) -> T {
    let n_total = T::from_count(grid.len());
    let m_total = T::from_count(padded).powi(grid.dim() as i32);
    T::one() / (n_total.powi(factors as i32 - 1) * m_total)
}

/// Alias-free pointwise product of real fields.
pub fn dealias_product<T: Real>(factors: &[&RealField<T>], degree: usize) -> Result<RealField<T>> {
    let spectra: Vec<SpectralField<T>> = factors.iter().map(|f| f.to_spectral()).collect();
    let refs: Vec<&SpectralField<T>> = spectra.iter().collect();
    dealiased_product_spectral(&refs, degree)?.to_real()
}
