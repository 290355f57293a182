//! Periodic grids, Fourier transforms, multipliers and dealiased products.

mod dealias;
mod fft;
mod grid;

pub use dealias::{dealias_product, dealiased_power_spectral, dealiased_product_spectral, padded_len};
pub use grid::{apply_symbol, from_spectral, to_spectral, GridSpec, RealField, SpectralField};
