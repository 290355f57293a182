mod common;

use std::f64::consts::TAU;

use cch_core::spectral::{
    dealias_product, dealiased_product_spectral, from_spectral, padded_len, to_spectral, GridSpec,
    RealField, SpectralField,
};
use cch_core::CchError;
use common::*;
use num_complex::Complex;
use proptest::prelude::*;

#[test]
fn grid_validation() {
    assert!(GridSpec::new(4, 16, 1.0).is_err());
    assert!(GridSpec::new(1, 6, 1.0).is_err());
    assert!(GridSpec::new(1, 9, 1.0).is_err());
    assert!(GridSpec::new(1, 16, 0.0).is_err());
    assert!(GridSpec::new(1, 16, -2.0).is_err());
    let g = GridSpec::new(3, 10, 2.0).unwrap();
    assert_eq!(g.len(), 1000);
    assert_eq!(g.mode_number(0), 0);
    assert_eq!(g.mode_number(4), 4);
    assert_eq!(g.mode_number(5), -5);
    assert_eq!(g.mode_number(9), -1);
}

#[test]
fn zero_field_has_zero_spectrum() {
    let g = grid(2, 16, 3.0);
    let f = RealField::zeros(g).to_spectral();
    assert!(f.coeffs().iter().all(|c| c.norm() == 0.0));
    let back = SpectralField::zeros(g).to_real().unwrap();
    assert!(back.samples().iter().all(|&v| v == 0.0));
}

#[test]
fn single_sine_mode() {
    let n = 32;
    let l = 5.0;
    let g = grid(1, n, l);
    let f = RealField::from_fn(g, |x| (TAU * x[0] / l).sin()).unwrap();
    let hat = to_spectral(&f);
    for (i, c) in hat.coeffs().iter().enumerate() {
        let m = g.mode_number(i);
        if m.abs() == 1 {
            assert!((c.norm() - n as f64 / 2.0).abs() < 1e-12);
        } else {
            assert!(c.norm() < 1e-12, "mode {m}: {c}");
        }
    }
    let back = from_spectral(&hat).unwrap();
    assert!(max_sample_diff(&back, &f) <= 1e-12);
}

#[test]
fn roundtrip_and_parseval_random() {
    for (dim, n) in [(1, 64), (2, 16), (3, 8)] {
        let g = grid(dim, n, 7.0);
        let f = random_field(g, 11 + dim as u64);
        let hat = f.to_spectral();
        let back = hat.to_real().unwrap();
        let scale = f.max_abs();
        assert!(max_sample_diff(&back, &f) <= 1e-12 * scale);

        let physical: f64 = f.samples().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let spectral = hat.l2_norm().powi(2);
        assert!(((physical - spectral) / physical).abs() < 1e-12);
        assert!(hat.hermitian_residue() < 1e-12);
        // zero mode carries the mean times n^dim
        assert!((hat.zero_mode().re - f.mean() * g.len() as f64).abs() < 1e-10);
    }
}

#[test]
fn asymmetric_spectrum_is_rejected() {
    let g = grid(1, 16, 1.0);
    let mut coeffs = vec![Complex::new(0.0, 0.0); 16];
    coeffs[1] = Complex::new(1.0, 0.0);
    let f = SpectralField::new(g, coeffs).unwrap();
    assert!(matches!(f.to_real(), Err(CchError::SymmetryViolation { .. })));
}

#[test]
fn laplacian_power_on_sine() {
    let l = 3.0;
    let k = TAU / l;
    let g = grid(1, 16, l);
    let f = RealField::from_fn(g, |x| (k * x[0]).sin()).unwrap();
    let lam2 = f.to_spectral().fractional_power(2.0).unwrap().to_real().unwrap();
    assert!(max_sample_diff(&lam2, &f.scaled(k * k)) < 1e-12);
    let lam_half = f.to_spectral().fractional_power(-0.5).unwrap().to_real().unwrap();
    assert!(max_sample_diff(&lam_half, &f.scaled(k.powf(-0.5))) < 1e-12);
}

#[test]
fn bilaplacian_inverted_by_negative_power() {
    let g = grid(2, 16, 2.5);
    let f = random_mean_zero(g, 7, 3);
    let hat = f.to_spectral();
    let bilap = hat.laplacian().laplacian();
    let back = bilap.fractional_power(-4.0).unwrap().to_real().unwrap();
    assert!(max_sample_diff(&back, &f) <= 1e-10 * f.max_abs());
}

#[test]
fn negative_power_requires_mean_zero() {
    let g = grid(1, 16, 1.0);
    let f = RealField::from_fn(g, |x| 1.0 + (TAU * x[0]).cos()).unwrap();
    let err = f.to_spectral().fractional_power(-0.5).unwrap_err();
    assert!(matches!(err, CchError::NonZeroMeanForNegativePower { .. }));
    // positive powers are fine and annihilate the mean
    let d = f.to_spectral().fractional_power(1.0).unwrap();
    assert_eq!(d.zero_mode(), Complex::new(0.0, 0.0));
}

#[test]
fn derivative_of_sine() {
    let l = 4.0;
    let k = 3.0 * TAU / l;
    let g = grid(2, 16, l);
    let f = RealField::from_fn(g, |x| (k * x[1]).sin()).unwrap();
    let dy = f.to_spectral().derivative(1).to_real().unwrap();
    let exact = RealField::from_fn(g, |x| k * (k * x[1]).cos()).unwrap();
    assert!(max_sample_diff(&dy, &exact) < 1e-12);
    let dx = f.to_spectral().derivative(0).to_real().unwrap();
    assert!(dx.max_abs() < 1e-12);
}

#[test]
fn product_with_one_is_identity() {
    let g = grid(1, 32, 6.0);
    let u = random_band_limited(g, 10, 9);
    let one = RealField::constant(g, 1.0);
    let p = dealias_product(&[&u, &one], 2).unwrap();
    assert!(max_sample_diff(&p, &u) < 1e-14);
}

#[test]
fn product_of_two_modes() {
    let n = 32;
    let l = TAU;
    let g = grid(1, n, l);
    let (k1, k2) = (3.0, 5.0);
    let a = RealField::from_fn(g, |x| (k1 * x[0]).cos()).unwrap();
    let b = RealField::from_fn(g, |x| (k2 * x[0]).cos()).unwrap();
    let p = dealias_product(&[&a, &b], 2).unwrap().to_spectral();
    // cos a cos b = (cos(a+b) + cos(a-b))/2
    for i in 0..n {
        let m = g.mode_number(i).abs();
        let expected = if m == 8 || m == 2 { n as f64 / 4.0 } else { 0.0 };
        assert!((p.coeffs()[i].norm() - expected).abs() < 1e-12, "mode {m}");
    }
}

#[test]
fn products_match_dense_convolution() {
    for (dim, n) in [(1, 16), (2, 16), (3, 8)] {
        let g = grid(dim, n, 3.7);
        let u = random_field(g, 40 + dim as u64).to_spectral();
        let v = random_field(g, 50 + dim as u64).to_spectral();
        let w = random_field(g, 60 + dim as u64).to_spectral();

        let quad = dealiased_product_spectral(&[&u, &v], 2).unwrap();
        let quad_oracle = dense_product(&[&u, &v]);
        let scale = max_coeff(&quad_oracle);
        assert!(max_coeff_diff(&quad, &quad_oracle) <= 1e-12 * scale, "quadratic dim {dim}");

        let cubic = dealiased_product_spectral(&[&u, &v, &w], 3).unwrap();
        let cubic_oracle = dense_product(&[&u, &v, &w]);
        let scale = max_coeff(&cubic_oracle);
        assert!(max_coeff_diff(&cubic, &cubic_oracle) <= 1e-12 * scale, "cubic dim {dim}");
        assert!(cubic.hermitian_residue() < 1e-14);
    }
}

#[test]
fn degree_above_padding_is_rejected() {
    let g = grid(1, 16, 1.0);
    let u = random_field(g, 1);
    assert!(matches!(
        dealias_product(&[&u, &u, &u, &u], 4),
        Err(CchError::DegreeTooHigh { degree: 4, max: 3 })
    ));
    assert!(matches!(dealias_product(&[&u, &u, &u], 2), Err(CchError::DegreeTooHigh { .. })));
    let g4 = g.with_pad_degree(4).unwrap();
    let u4 = RealField::new(g4, u.samples().to_vec()).unwrap();
    assert!(dealias_product(&[&u4, &u4, &u4, &u4], 4).is_ok());
}

#[test]
fn padding_sizes() {
    assert_eq!(padded_len(16, 3), 32);
    assert_eq!(padded_len(16, 2), 24);
    assert_eq!(padded_len(10, 2), 15);
}

#[test]
fn single_precision_roundtrip() {
    let g = GridSpec::<f32>::new(2, 16, 1.0).unwrap();
    let f = cch_core::spectral::RealField::from_fn(g, |x| (6.283_185 * x[0]).sin() * x[1]).unwrap();
    let back = f.to_spectral().to_real().unwrap();
    let err = f.samples().iter().zip(back.samples()).fold(0f32, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-5);
}

#[test]
fn transforms_are_deterministic_across_sizes() {
    // large enough to take the parallel path
    let g = grid(3, 32, 1.0);
    let f = random_field(g, 77);
    let a = f.to_spectral();
    let b = f.to_spectral();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn symbols_compose(seed in any::<u64>(), s1 in -2.0f64..3.0, s2 in -2.0f64..3.0) {
        let g = grid(2, 16, 2.0);
        let f = random_mean_zero(g, 7, seed).to_spectral();
        let two_step = f.fractional_power(s1).unwrap().fractional_power(s2).unwrap();
        let one_step = f.fractional_power(s1 + s2).unwrap();
        let scale = max_coeff(&one_step).max(max_coeff(&two_step));
        prop_assert!(max_coeff_diff(&two_step, &one_step) <= 1e-12 * scale);
    }

    #[test]
    fn symbols_are_linear(seed in any::<u64>(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let g = grid(1, 32, 5.0);
        let u = random_field(g, seed).to_spectral();
        let v = random_field(g, seed ^ 0xABCD).to_spectral();
        let symbol = |xi: &[f64]| 1.0 + xi[0] * xi[0] - 0.3 * xi[0].powi(4);
        let combo = u.scaled(a).add(&v.scaled(b)).unwrap().apply_symbol(symbol).unwrap();
        let separate = u.apply_symbol(symbol).unwrap().scaled(a)
            .add(&v.apply_symbol(symbol).unwrap().scaled(b)).unwrap();
        let scale = max_coeff(&combo);
        prop_assert!(max_coeff_diff(&combo, &separate) <= 1e-12 * scale);
    }

    #[test]
    fn parseval_and_roundtrip(seed in any::<u64>()) {
        let g = grid(2, 16, 1.3);
        let f = random_field(g, seed);
        let hat = f.to_spectral();
        let physical: f64 = f.samples().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        prop_assert!(((hat.l2_norm().powi(2) - physical) / physical).abs() < 1e-12);
        let back = hat.to_real().unwrap();
        prop_assert!(max_sample_diff(&back, &f) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn products_stay_real(seed in any::<u64>()) {
        let g = grid(2, 16, 1.0);
        let u = random_field(g, seed).to_spectral();
        let p = dealiased_product_spectral(&[&u, &u, &u], 3).unwrap();
        prop_assert!(p.hermitian_residue() <= 1e-10);
    }
}
