mod common;

use std::f64::consts::{PI, TAU};

use cch_core::model::{
    frozen_nonlinear_term, full_rhs, full_rhs_unsplit, linear_symbol, nonlinear_term,
    nonlinear_term_spectral,
};
use cch_core::{ModelParams, RealField, SpectralField};
use common::*;

fn dense_nonlinear(u: &SpectralField, params: &ModelParams) -> SpectralField {
    let grid = *u.grid();
    let cube = dense_product(&[u, u, u]);
    let grad = u.directional_derivative(&params.drift);
    let conv = dense_product(&[u, &grad]);
    let mut coeffs = vec![Default::default(); grid.len()];
    for (i, c) in coeffs.iter_mut().enumerate() {
        let xi = grid.xi(i);
        let k2: f64 = xi.iter().map(|k| k * k).sum();
        let phi = cube.coeffs()[i] * params.cubic_coeff
            + u.coeffs()[i] * (params.linear_pot_coeff - 1.0);
        *c = phi * (-k2) + conv.coeffs()[i] * params.gamma;
    }
    SpectralField::new(grid, coeffs).unwrap()
}

#[test]
fn symbol_values() {
    assert_eq!(linear_symbol(&[0.0, 0.0]), 0.0);
    assert_eq!(linear_symbol(&[1.0]), 2.0);
    assert_eq!(linear_symbol(&[0.0, 2.0, 0.0]), 20.0);
    let s = 0.5f64.sqrt();
    assert!((linear_symbol(&[s, s]) - 2.0).abs() < 1e-15);
}

#[test]
fn zero_field_gives_zero() {
    let g = grid(2, 16, 5.0);
    let params = ModelParams::double_well(2);
    let n = nonlinear_term(&RealField::zeros(g), &params).unwrap();
    assert!(n.coeffs().iter().all(|c| c.norm() == 0.0));
    let r = full_rhs(&RealField::zeros(g), &params).unwrap();
    assert!(r.coeffs().iter().all(|c| c.norm() == 0.0));
}

#[test]
fn constant_field_is_stationary() {
    let g = grid(3, 8, 2.0);
    let params = ModelParams::double_well(3);
    let r = full_rhs(&RealField::constant(g, 0.7), &params).unwrap();
    assert!(max_coeff(&r) < 1e-12);
}

#[test]
fn single_sine_bookkeeping() {
    // u = ε sin(kx): u³ = ε³ (3 sin kx - sin 3kx)/4 and u u_x = (ε² k/2) sin 2kx
    let l = 2.0 * PI;
    let g = grid(1, 32, l);
    let (a, b, gamma) = (1.0, -1.0, 1.0);
    let params = ModelParams::double_well(1);
    for &eps in &[1e-3, 0.1, 0.8] {
        let k = 2.0;
        let u = RealField::from_fn(g, |x| eps * (k * x[0]).sin()).unwrap();
        let n = nonlinear_term(&u, &params).unwrap().to_real().unwrap();
        let exact = RealField::from_fn(g, |x| {
            let x = x[0];
            let linear = -(b - 1.0) * k * k * eps - 0.75 * a * k * k * eps.powi(3);
            linear * (k * x).sin()
                + 0.5 * gamma * eps * eps * k * (2.0 * k * x).sin()
                + 2.25 * a * k * k * eps.powi(3) * (3.0 * k * x).sin()
        })
        .unwrap();
        assert!(max_sample_diff(&n, &exact) < 1e-12, "eps = {eps}");
    }
}

#[test]
fn small_sine_modes_linear_and_quadratic_only() {
    let l = 3.0;
    let g = grid(1, 32, l);
    let eps = 1e-4;
    let m = 2;
    let k = TAU * m as f64 / l;
    let params = ModelParams::double_well(1);
    let u = RealField::from_fn(g, |x| eps * (k * x[0]).sin()).unwrap();
    let n = nonlinear_term(&u, &params).unwrap();
    let u_hat = u.to_spectral();
    for i in 0..g.n() {
        let mode = g.mode_number(i).abs();
        let c = n.coeffs()[i];
        match mode {
            2 => {
                let expected = u_hat.coeffs()[i] * (2.0 * k * k);
                assert!((c - expected).norm() < 1e-7 * expected.norm());
            }
            4 => assert!(c.norm() > 0.0 && c.norm() < 1e-6),
            // cubic, O(ε³)
            6 => assert!(c.norm() < 1e-9),
            _ => assert!(c.norm() < 1e-10, "mode {mode}"),
        }
    }
}

#[test]
fn matches_dense_convolution() {
    let cases = [(1, 16, vec![1.0]), (2, 16, vec![1.0, -0.5]), (3, 8, vec![0.3, 1.0, 2.0])];
    for (dim, n, drift) in cases {
        let g = grid(dim, n, 4.0);
        let params = ModelParams { cubic_coeff: 1.3, linear_pot_coeff: -0.7, drift, gamma: 0.9 };
        let u = random_field(g, 100 + dim as u64).to_spectral();
        let fast = nonlinear_term_spectral(&u, &params).unwrap();
        let dense = dense_nonlinear(&u, &params);
        let scale = max_coeff(&dense);
        assert!(max_coeff_diff(&fast, &dense) <= 1e-12 * scale, "dim {dim}");
    }
}

#[test]
fn nonlinear_zero_mode_vanishes() {
    for dim in 1..=3 {
        let g = grid(dim, 8, 1.5);
        let u = random_field(g, dim as u64).scaled(3.0);
        let n = nonlinear_term(&u, &ModelParams::double_well(dim)).unwrap();
        assert_eq!(n.zero_mode().norm(), 0.0);
    }
}

#[test]
fn spinodal_growth_rates() {
    // L = 4π: mode m has |ξ| = m/2
    let l = 4.0 * PI;
    let g = grid(1, 16, l);
    let params = ModelParams::linear_only(1, -1.0);
    for m in 1..=4 {
        let k = m as f64 / 2.0;
        let u = RealField::from_fn(g, |x| (k * x[0]).cos()).unwrap();
        let rhs = full_rhs(&u, &params).unwrap().to_real().unwrap();
        let rate = k * k - k.powi(4);
        assert!(max_sample_diff(&rhs, &u.scaled(rate)) < 1e-12);
        match m {
            1 => assert!(rate > 0.0),
            2 => assert_eq!(rate, 0.0),
            _ => assert!(rate < 0.0),
        }
    }
}

#[test]
fn split_equals_unsplit() {
    for (dim, n) in [(1, 32), (2, 16), (3, 8)] {
        let g = grid(dim, n, TAU);
        let params = ModelParams::double_well(dim);
        let u = random_band_limited(g, n as i64 / 4, 7 * dim as u64).scaled(0.5);
        let split = full_rhs(&u, &params).unwrap();
        let unsplit = full_rhs_unsplit(&u, &params).unwrap();
        let scale = max_coeff(&unsplit);
        assert!(max_coeff_diff(&split, &unsplit) <= 1e-10 * scale, "dim {dim}");
        let (sr, ur) = (split.to_real().unwrap(), unsplit.to_real().unwrap());
        assert!(max_sample_diff(&sr, &ur) <= 1e-10 * ur.max_abs());
    }
}

#[test]
fn frozen_term_at_fixed_point_equals_nonlinear_term() {
    let g = grid(2, 16, 5.0);
    let params = ModelParams::double_well(2);
    let u = random_field(g, 3).to_spectral();
    let frozen = frozen_nonlinear_term(&u, &u, &params).unwrap();
    let direct = nonlinear_term_spectral(&u, &params).unwrap();
    assert!(max_coeff_diff(&frozen, &direct) <= 1e-12 * max_coeff(&direct));
}

#[test]
fn drift_length_is_checked() {
    let g = grid(2, 8, 1.0);
    let u = RealField::zeros(g);
    assert!(nonlinear_term(&u, &ModelParams::double_well(3)).is_err());
}
