//! Periodic grids and the two representations of a field on them.
//!
//! Transform convention: the forward transform is unnormalized,
//! `c_m = sum_j u_j exp(-i xi_m . x_j)`, and the inverse carries `1/n^dim`.
//! Continuous quantities on the box (L^2 norms, means) are recovered with
//! the cell volume `(L/n)^dim`.

use num_complex::Complex;

use super::fft;
use crate::error::{CchError, Result};
use crate::scalar::Real;

/// Discretization of the periodic box `[0, L)^dim` with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec<T> {
    dim: usize,
    n: usize,
    box_length: T,
    pad_degree: usize,
}

impl<T: Real> GridSpec<T> {
    pub const DEFAULT_PAD_DEGREE: usize = 3;

    pub fn new(dim: usize, n: usize, box_length: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(CchError::InvalidGrid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n < 8 || n % 2 != 0 {
            return Err(CchError::InvalidGrid(format!("n must be even and >= 8, got {n}")));
        }
        if !(box_length > T::zero()) || !box_length.is_finite() {
            return Err(CchError::InvalidGrid(format!(
                "box length must be positive, got {box_length}"
            )));
        }
        Ok(Self { dim, n, box_length, pad_degree: Self::DEFAULT_PAD_DEGREE })
    }

    pub fn with_pad_degree(mut self, pad_degree: usize) -> Result<Self> {
        if pad_degree < 1 {
            return Err(CchError::InvalidGrid("pad degree must be at least 1".into()));
        }
        self.pad_degree = pad_degree;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_length(&self) -> T {
        self.box_length
    }

    pub fn pad_degree(&self) -> usize {
        self.pad_degree
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> T {
        self.box_length / T::from_count(self.n)
    }

    pub fn cell_volume(&self) -> T {
        self.spacing().powi(self.dim as i32)
    }

    pub fn volume(&self) -> T {
        self.box_length.powi(self.dim as i32)
    }

    /// Signed mode number of storage index `i` along one axis, in `[-n/2, n/2)`.
    pub fn mode_number(&self, i: usize) -> i64 {
        mode_number(i, self.n)
    }

    /// Wavenumber `2 pi m / L`.
    pub fn wavenumber(&self, m: i64) -> T {
        T::TAU() * T::lit(m as f64) / self.box_length
    }

    /// Per-axis storage indices of a flat row-major index (last axis fastest).
    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        axis_indices(flat, self.n, self.dim)
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Signed mode numbers of a flat index.
    pub fn modes(&self, flat: usize) -> [i64; 3] {
        let idx = self.axis_indices(flat);
        let mut m = [0i64; 3];
        for a in 0..self.dim {
            m[a] = self.mode_number(idx[a]);
        }
        m
    }

    /// Wavenumber vector of a flat index; unused trailing slots are zero.
    pub fn xi(&self, flat: usize) -> [T; 3] {
        let m = self.modes(flat);
        let mut xi = [T::zero(); 3];
        for a in 0..self.dim {
            xi[a] = self.wavenumber(m[a]);
        }
        xi
    }

    /// True when any axis sits on the unpaired mode `-n/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.axis_indices(flat);
        idx[..self.dim].iter().any(|&i| i == self.n / 2)
    }

    /// `|xi|^2` for every storage index.
    pub fn xi_squared(&self) -> Vec<T> {
        (0..self.len())
            .map(|f| {
                let xi = self.xi(f);
                xi[..self.dim].iter().fold(T::zero(), |acc, &k| acc + k * k)
            })
            .collect()
    }

    /// Physical coordinates of a flat index, `x_j = j L / n`.
    pub fn coordinates(&self, flat: usize) -> [T; 3] {
        let idx = self.axis_indices(flat);
        let h = self.spacing();
        let mut x = [T::zero(); 3];
        for a in 0..self.dim {
            x[a] = T::from_count(idx[a]) * h;
        }
        x
    }

    /// Smallest nonzero `|xi|`.
    pub fn min_wavenumber(&self) -> T {
        self.wavenumber(1)
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.dim == other.dim && self.n == other.n && self.box_length == other.box_length
    }
}

pub(crate) fn mode_number(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub(crate) fn axis_indices(flat: usize, n: usize, dim: usize) -> [usize; 3] {
    let mut idx = [0usize; 3];
    let mut rest = flat;
    for a in (0..dim).rev() {
        idx[a] = rest % n;
        rest /= n;
    }
    idx
}

/// Sampled values of a real field on a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField<T> {
    grid: GridSpec<T>,
    samples: Vec<T>,
}

impl<T: Real> RealField<T> {
    pub fn new(grid: GridSpec<T>, samples: Vec<T>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(CchError::InvalidGrid(format!(
                "expected {} samples, got {}",
                grid.len(),
                samples.len()
            )));
        }
        if let Some(index) = samples.iter().position(|v| !v.is_finite()) {
            return Err(CchError::NonFinite { index });
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { grid, samples: vec![T::zero(); grid.len()] }
    }

    pub fn constant(grid: GridSpec<T>, value: T) -> Self {
        Self { grid, samples: vec![value; grid.len()] }
    }

    /// Samples `f(x)` at every grid point; `x` has `dim` entries.
    pub fn from_fn(grid: GridSpec<T>, f: impl Fn(&[T]) -> T) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| {
                let x = grid.coordinates(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<T> {
        self.samples
    }

    pub fn mean(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, &v| acc + v) / T::from_count(self.samples.len())
    }

    pub fn max_abs(&self) -> T {
        self.samples.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { grid: self.grid, samples: self.samples.iter().map(|&v| c * v).collect() }
    }

    /// Copy with the grid mean removed.
    pub fn mean_removed(&self) -> Self {
        let mean = self.mean();
        Self { grid: self.grid, samples: self.samples.iter().map(|&v| v - mean).collect() }
    }

    pub fn to_spectral(&self) -> SpectralField<T> {
        let mut coeffs: Vec<Complex<T>> =
            self.samples.iter().map(|&v| Complex::new(v, T::zero())).collect();
        fft::transform(&mut coeffs, self.grid.n(), self.grid.dim(), false);
        // exact symmetry keeps later real-symbol arithmetic exactly Hermitian
        enforce_hermitian(&self.grid, &mut coeffs);
        SpectralField { grid: self.grid, coeffs }
    }
}

/// Fourier coefficients of a real field (unnormalized forward convention).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField<T> {
    grid: GridSpec<T>,
    coeffs: Vec<Complex<T>>,
}

impl<T: Real> SpectralField<T> {
    pub fn new(grid: GridSpec<T>, coeffs: Vec<Complex<T>>) -> Result<Self> {
        if coeffs.len() != grid.len() {
            return Err(CchError::InvalidGrid(format!(
                "expected {} coefficients, got {}",
                grid.len(),
                coeffs.len()
            )));
        }
        if let Some(index) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(CchError::NonFinite { index });
        }
        Ok(Self { grid, coeffs })
    }

    pub fn zeros(grid: GridSpec<T>) -> Self {
        Self { grid, coeffs: vec![Complex::new(T::zero(), T::zero()); grid.len()] }
    }

    pub(crate) fn from_raw(grid: GridSpec<T>, coeffs: Vec<Complex<T>>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.len());
        Self { grid, coeffs }
    }

    pub fn grid(&self) -> &GridSpec<T> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex<T>] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex<T>> {
        self.coeffs
    }

    /// Coefficient at signed mode numbers `m` (one per axis).
    pub fn coeff_at(&self, m: &[i64]) -> Complex<T> {
        let n = self.grid.n() as i64;
        let idx: Vec<usize> = m.iter().map(|&mi| mi.rem_euclid(n) as usize).collect();
        self.coeffs[self.grid.flat_index(&idx)]
    }

    pub fn zero_mode(&self) -> Complex<T> {
        self.coeffs[0]
    }

    /// Grid mean of the represented real field.
    pub fn mean(&self) -> T {
        self.coeffs[0].re / T::from_count(self.grid.len())
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// `sqrt(sum |c_m|^2)`, the raw coefficient l2 norm.
    pub fn coeff_norm(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()).sqrt()
    }

    /// `sum_m w(xi_m) |c_m|^2` scaled so that `w = 1` gives the squared L^2
    /// norm on the box. Modes where `w` is not finite are skipped.
    pub fn weighted_norm_sq(&self, weight: impl Fn(&[T]) -> T) -> T {
        let dim = self.grid.dim();
        let mut sum = T::zero();
        for (f, c) in self.coeffs.iter().enumerate() {
            let xi = self.grid.xi(f);
            let w = weight(&xi[..dim]);
            if w.is_finite() {
                sum += w * c.norm_sqr();
            }
        }
        sum * self.parseval_scale()
    }

    /// Factor turning `sum |c|^2` into a squared L^2 norm on the box.
    pub fn parseval_scale(&self) -> T {
        let n_total = T::from_count(self.grid.len());
        self.grid.volume() / (n_total * n_total)
    }

    pub fn l2_norm(&self) -> T {
        (self.coeffs.iter().fold(T::zero(), |acc, c| acc + c.norm_sqr()) * self.parseval_scale())
            .sqrt()
    }

    /// Inverse transform. Fails if the imaginary residue exceeds `1e-8`
    /// relative to the largest output magnitude.
    pub fn to_real(&self) -> Result<RealField<T>> {
        let mut data = self.coeffs.clone();
        fft::transform(&mut data, self.grid.n(), self.grid.dim(), true);
        let inv = T::one() / T::from_count(self.grid.len());
        let mut max_re = T::zero();
        let mut max_im = T::zero();
        for c in &data {
            max_re = max_re.max(c.re.abs());
            max_im = max_im.max(c.im.abs());
        }
        let scale = max_re.max(max_im);
        if scale > T::zero() && max_im > T::structural_tol(1e-8) * scale {
            return Err(CchError::SymmetryViolation {
                residue: (max_im / scale).to_f64_lossy(),
            });
        }
        let samples: Vec<T> = data.into_iter().map(|c| c.re * inv).collect();
        RealField::new(self.grid, samples)
    }

    /// Multiplies every coefficient by a real symbol of the wavenumber.
    ///
    /// If the symbol is not finite at `xi = 0` (negative powers), the input
    /// must be mean-zero and the zero mode is mapped to zero.
    pub fn apply_symbol(&self, symbol: impl Fn(&[T]) -> T) -> Result<Self> {
        let dim = self.grid.dim();
        let mut out = self.coeffs.clone();
        for (f, c) in out.iter_mut().enumerate() {
            let xi = self.grid.xi(f);
            let s = symbol(&xi[..dim]);
            if f == 0 && !s.is_finite() {
                self.require_mean_zero()?;
                *c = Complex::new(T::zero(), T::zero());
            } else {
                *c = c.scale(s);
            }
        }
        Ok(Self { grid: self.grid, coeffs: out })
    }

    /// `Lambda^s`, the multiplier `|xi|^s`.
    pub fn fractional_power(&self, s: T) -> Result<Self> {
        if s == T::zero() {
            return Ok(self.clone());
        }
        self.apply_symbol(|xi| norm(xi).powf(s))
    }

    pub fn laplacian(&self) -> Self {
        let xi2 = self.grid.xi_squared();
        let coeffs = self.coeffs.iter().zip(xi2).map(|(c, k2)| c.scale(-k2)).collect();
        Self { grid: self.grid, coeffs }
    }

    /// Multiplies by `i * symbol(xi)`; the Nyquist planes are zeroed since an
    /// odd symbol has no real-valued representation there.
    pub fn apply_odd_symbol(&self, symbol: impl Fn(&[T]) -> T) -> Self {
        let dim = self.grid.dim();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(f, c)| {
                if self.grid.is_nyquist(f) {
                    Complex::new(T::zero(), T::zero())
                } else {
                    let xi = self.grid.xi(f);
                    let s = symbol(&xi[..dim]);
                    Complex::new(-c.im * s, c.re * s)
                }
            })
            .collect();
        Self { grid: self.grid, coeffs }
    }

    /// Partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> Self {
        self.apply_odd_symbol(|xi| xi[axis])
    }

    /// `beta . grad`.
    pub fn directional_derivative(&self, beta: &[T]) -> Self {
        self.apply_odd_symbol(|xi| xi.iter().zip(beta).fold(T::zero(), |acc, (&k, &b)| acc + k * b))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|z| z.scale(c)).collect() }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &Self,
        op: impl Fn(Complex<T>, Complex<T>) -> Complex<T>,
    ) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(CchError::GridMismatch);
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { grid: self.grid, coeffs })
    }

    /// Largest deviation from `c(-m) = conj(c(m))`, relative to the largest
    /// coefficient magnitude.
    pub fn hermitian_residue(&self) -> T {
        let n = self.grid.n();
        let dim = self.grid.dim();
        let mut worst = T::zero();
        let mut scale = T::zero();
        for f in 0..self.coeffs.len() {
            let idx = self.grid.axis_indices(f);
            let mut mirror = [0usize; 3];
            for a in 0..dim {
                mirror[a] = (n - idx[a]) % n;
            }
            let g = self.grid.flat_index(&mirror[..dim]);
            let d = self.coeffs[f] - self.coeffs[g].conj();
            worst = worst.max(d.norm());
            scale = scale.max(self.coeffs[f].norm());
        }
        if scale > T::zero() {
            worst / scale
        } else {
            T::zero()
        }
    }

    pub(crate) fn require_mean_zero(&self) -> Result<()> {
        let total = self.coeff_norm();
        let c0 = self.coeffs[0].norm();
        if total > T::zero() && c0 > T::structural_tol(1e-12) * total {
            return Err(CchError::NonZeroMeanForNegativePower {
                relative_mean: (c0 / total).to_f64_lossy(),
            });
        }
        Ok(())
    }
}

pub(crate) fn norm<T: Real>(xi: &[T]) -> T {
    xi.iter().fold(T::zero(), |acc, &k| acc + k * k).sqrt()
}

/// Forward transform of a real field.
pub fn to_spectral<T: Real>(f: &RealField<T>) -> SpectralField<T> {
    f.to_spectral()
}

/// Inverse transform with the Hermitian-residue check.
pub fn from_spectral<T: Real>(f: &SpectralField<T>) -> Result<RealField<T>> {
    f.to_real()
}

/// Applies a real Fourier multiplier.
pub fn apply_symbol<T: Real>(
    f: &SpectralField<T>,
    symbol: impl Fn(&[T]) -> T,
) -> Result<SpectralField<T>> {
    f.apply_symbol(symbol)
}

/// Replaces each coefficient pair `(c_m, c_{-m})` by its Hermitian average.
pub(crate) fn enforce_hermitian<T: Real>(grid: &GridSpec<T>, coeffs: &mut [Complex<T>]) {
    let n = grid.n();
    let dim = grid.dim();
    let half = T::lit(0.5);
    for f in 0..coeffs.len() {
        let idx = axis_indices(f, n, dim);
        let mut mirror = [0usize; 3];
        for a in 0..dim {
            mirror[a] = (n - idx[a]) % n;
        }
        let g = grid.flat_index(&mirror[..dim]);
        if g < f {
            continue;
        }
        let avg = (coeffs[f] + coeffs[g].conj()).scale(half);
        coeffs[f] = avg;
        coeffs[g] = avg.conj();
    }
}
