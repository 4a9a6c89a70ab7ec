//! Sparse linear antenna arrays for integrated sensing and communication.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`] builds element layouts (compact, uniform sparse, modular,
//!   nested, co-prime, minimum-redundancy) in units of half a wavelength.
//! * [`coarray`] derives difference and sum co-arrays and their hole structure.
//! * [`patterns`] evaluates far-field beam patterns, near-field focusing maps
//!   and hollowed DFT codebooks.
//! * [`estimation`] simulates array snapshots and runs the MUSIC family,
//!   polar-domain OMP and zero-forcing MUSIC.
//! * [`isacsim`] drives multi-user uplink Monte Carlo experiments.

pub mod coarray;
pub mod error;
pub mod estimation;
pub mod geometry;
pub mod isacsim;
pub mod patterns;
pub mod seed;
pub mod wave;

pub use error::{Error, Result};
pub use geometry::{ApertureConvention, Architecture, ElementLayout};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Wavelength in meters for a carrier frequency in Hz.
pub fn wavelength(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

pub type C64 = num_complex::Complex64;

/// Largest entry modulus, for test comparisons of complex arrays.
#[cfg(test)]
pub(crate) fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}
