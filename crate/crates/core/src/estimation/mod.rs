//! Direction (and range) estimation.
//!
//! The narrowband model is `X = A S + N` with far-field steering
//! `exp(jπ p sin θ)` or exact spherical-wavefront near-field steering. The
//! MUSIC variants share one subspace engine ([`subspace`]) that evaluates the
//! normalised pseudo-spectrum
//!
//! ```text
//! P(a) = ‖Πa‖² / (‖Πa‖² - ‖Esᴴ Πa‖²)
//! ```
//!
//! where `Π` removes any zero-forced user directions (identity otherwise)
//! and `Es` spans the signal subspace.

mod coarray_music;
mod covariance;
mod metrics;
mod music;
mod near;
mod omp;
mod report;
mod snapshots;
mod steering;
pub mod subspace;
mod zf;

pub use coarray_music::{coarray_music, virtual_correlation};
pub use covariance::{sample_covariance, spatial_smoothing, Covariance};
pub use metrics::nrmse;
pub use music::music_far;
pub use near::{two_stage_near, NearFieldOptions};
pub use omp::polar_omp;
pub use report::{EstimateReport, Spectrum};
pub use snapshots::{simulate_snapshots, Source, SourceScene, SnapshotSet};
pub use steering::{steer_far, steer_far_sin, steer_near};
pub use subspace::SinGrid;
pub use zf::{orthonormal_basis, zf_music, zf_projector, TargetRange};
