#![allow(dead_code)]

use std::collections::HashMap;

use cch_core::spectral::{GridSpec, RealField, SpectralField};
use num_complex::Complex;

/// splitmix64; test-only source of reproducible noise.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [-1, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    }
}

pub fn grid(dim: usize, n: usize, l: f64) -> GridSpec<f64> {
    GridSpec::new(dim, n, l).unwrap()
}

/// Random real field.
pub fn random_field(grid: GridSpec<f64>, seed: u64) -> RealField<f64> {
    let mut rng = TestRng::new(seed);
    let samples = (0..grid.len()).map(|_| rng.uniform()).collect();
    RealField::new(grid, samples).unwrap()
}

/// Random field with every mode `|m_j| > band` removed.
pub fn random_band_limited(grid: GridSpec<f64>, band: i64, seed: u64) -> RealField<f64> {
    let f = random_field(grid, seed).to_spectral();
    let mut coeffs = f.coeffs().to_vec();
    for (i, c) in coeffs.iter_mut().enumerate() {
        let m = grid.modes(i);
        if m[..grid.dim()].iter().any(|&mj| mj.abs() > band) {
            *c = Complex::new(0.0, 0.0);
        }
    }
    SpectralField::new(grid, coeffs).unwrap().to_real().unwrap()
}

pub fn random_mean_zero(grid: GridSpec<f64>, band: i64, seed: u64) -> RealField<f64> {
    let f = random_band_limited(grid, band, seed).to_spectral();
    let mut coeffs = f.coeffs().to_vec();
    coeffs[0] = Complex::new(0.0, 0.0);
    SpectralField::new(grid, coeffs).unwrap().to_real().unwrap()
}

type Mode = [i64; 3];

fn in_band(m: &Mode, n: usize) -> bool {
    m.iter().all(|&mj| mj.abs() < n as i64 / 2)
}

fn sparse(f: &SpectralField<f64>) -> Vec<(Mode, Complex<f64>)> {
    let grid = f.grid();
    (0..grid.len())
        .map(|i| (grid.modes(i), f.coeffs()[i]))
        .filter(|(m, _)| in_band(m, grid.n()))
        .collect()
}

/// Dense convolution of the band parts of `factors`, truncated to the band:
/// the coefficients (unnormalized forward convention) of the exact product
/// projected onto `|m_j| < n/2`.
pub fn dense_product(factors: &[&SpectralField<f64>]) -> SpectralField<f64> {
    let grid = *factors[0].grid();
    let total = grid.len() as f64;
    let mut acc: HashMap<Mode, Complex<f64>> = sparse(factors[0]).into_iter().collect();
    for f in &factors[1..] {
        let rhs = sparse(f);
        let mut next: HashMap<Mode, Complex<f64>> = HashMap::new();
        for (ma, ca) in &acc {
            for (mb, cb) in &rhs {
                let m = [ma[0] + mb[0], ma[1] + mb[1], ma[2] + mb[2]];
                *next.entry(m).or_default() += ca * cb / total;
            }
        }
        acc = next;
    }
    let mut coeffs = vec![Complex::new(0.0, 0.0); grid.len()];
    for (m, c) in acc {
        if in_band(&m, grid.n()) {
            let idx: Vec<usize> =
                m[..grid.dim()].iter().map(|&mj| mj.rem_euclid(grid.n() as i64) as usize).collect();
            coeffs[grid.flat_index(&idx)] = c;
        }
    }
    SpectralField::new(grid, coeffs).unwrap()
}

pub fn max_coeff_diff(a: &SpectralField<f64>, b: &SpectralField<f64>) -> f64 {
    a.coeffs().iter().zip(b.coeffs()).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn max_coeff(a: &SpectralField<f64>) -> f64 {
    a.coeffs().iter().fold(0.0, |m, x| m.max(x.norm()))
}

pub fn max_sample_diff(a: &RealField<f64>, b: &RealField<f64>) -> f64 {
    a.samples().iter().zip(b.samples()).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Composite Simpson rule with `2 * half_intervals` panels.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, half_intervals: usize) -> f64 {
    let n = 2 * half_intervals;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
