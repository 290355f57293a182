//! Pseudo-spectral simulation and verification toolkit for the convective
//! Cahn-Hilliard equation on periodic boxes.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which is what the
//! diagnostics, fits and file formats use.

pub mod decay;
pub mod error;
pub mod functionals;
pub mod integrators;
pub mod model;
pub mod monitors;
pub mod quadrature;
pub mod scalar;
pub mod spectral;

pub use decay::{
    fit_power_law, linear_decay_oracle, theoretical_sigma, Column, DecayFit, DiagnosticsRecorder,
    DiagnosticsRow, DiagnosticsSpec, FitWindow, GaussianData, SaturationFloor, WindowPolicy,
};
pub use error::{CchError, Result};
pub use functionals::{EnergyReport, GnExponents, LpExponent};
pub use integrators::{
    phi1, phi2, picard_local_solve, run_simulation, step, PicardOptions, PicardReport, PicardStart,
    Recorder, Scheme, Stepper,
};
pub use scalar::Real;
pub use spectral::{dealias_product, from_spectral, to_spectral};

pub type GridSpec = spectral::GridSpec<f64>;
pub type RealField = spectral::RealField<f64>;
pub type SpectralField = spectral::SpectralField<f64>;
pub type ModelParams = model::ModelParams<f64>;
pub type SolverConfig = integrators::SolverConfig<f64>;
pub type StepperState = integrators::StepperState<f64>;
pub type Trajectory = integrators::Trajectory<f64>;

pub type GridSpec32 = spectral::GridSpec<f32>;
pub type RealField32 = spectral::RealField<f32>;
pub type SpectralField32 = spectral::SpectralField<f32>;
pub type ModelParams32 = model::ModelParams<f32>;
pub type SolverConfig32 = integrators::SolverConfig<f32>;
