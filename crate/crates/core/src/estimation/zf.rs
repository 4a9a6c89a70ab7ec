use nalgebra::DMatrix;

use super::covariance::sample_covariance;
use super::music::scan_far;
use super::near::{near_search, scan_focused, NearFieldOptions};
use super::report::EstimateReport;
use super::snapshots::SnapshotSet;
use super::steering::{steer_far_sin, steer_near_sin};
use super::subspace::{SinGrid, Subspaces};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Singular values below this fraction of the largest mark a rank-deficient
/// user-channel matrix.
const RANK_TOL: f64 = 1e-10;
/// Visible steering energy below this fraction means the target direction
/// was zero-forced together with the users.
const BLIND_TOL: f64 = 1e-6;

/// Orthonormal basis of the column space of `h` (`M × K`).
pub fn orthonormal_basis(h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let (m, k) = h.shape();
    if k == 0 {
        return Ok(DMatrix::zeros(m, 0));
    }
    if k > m {
        return Err(Error::RankDeficient("more user channels than antennas"));
    }
    let svd = h.clone().svd(true, false);
    let s = &svd.singular_values;
    let max = s.iter().cloned().fold(0.0, f64::max);
    if !(max > 0.0) || s.iter().any(|&v| v < RANK_TOL * max) {
        return Err(Error::RankDeficient("user channels are not full column rank"));
    }
    Ok(svd.u.expect("requested").columns(0, k).into_owned())
}

/// `I - Q Qᴴ` with `Q` an orthonormal basis of the user channels.
pub fn zf_projector(h: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let q = orthonormal_basis(h)?;
    Ok(DMatrix::identity(h.nrows(), h.nrows()) - &q * q.adjoint())
}

/// What the target search assumes about range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetRange<'a> {
    /// Plane-wave steering; angle only.
    Far,
    /// Angle-only scan with near-field steering focused at a known range.
    Focused(f64),
    /// Two-stage angle then range search over the given grid.
    Search(&'a [f64], NearFieldOptions),
}

/// MUSIC after zero-forcing known user channels: every snapshot is
/// projected onto the orthogonal complement of the user subspace, and the
/// spectrum uses the projected steering vectors.
pub fn zf_music(
    snap: &SnapshotSet,
    user_channels: &DMatrix<C64>,
    targets: usize,
    grid: &SinGrid,
    range: TargetRange<'_>,
) -> Result<EstimateReport> {
    let m = snap.layout.len();
    if user_channels.nrows() != m {
        return Err(invalid("user channel rows must match the element count"));
    }
    let users = user_channels.ncols();
    if users + targets >= m {
        return Err(Error::TooManySources { requested: users + targets, available: m - 1 });
    }
    let q = orthonormal_basis(user_channels)?;
    if targets == 0 {
        return Ok(EstimateReport::empty());
    }
    let projected = if users == 0 { snap.data.clone() } else { &snap.data - &q * (q.adjoint() * &snap.data) };
    let before = snap.data.norm_squared();
    if projected.norm_squared() <= 1e-12 * before {
        return Err(Error::EstimationFailure("no energy left after zero-forcing the users".into()));
    }
    let proj_snap = SnapshotSet::new(projected, snap.layout.clone(), snap.wavelength)?;
    let r = sample_covariance(&proj_snap);
    let sub = Subspaces { signal: r.eigen().leading(targets), blocked: q };

    let report = match range {
        TargetRange::Far => scan_far(&sub, snap.layout.positions(), targets, grid)?,
        TargetRange::Focused(r) => scan_focused(&sub, &snap.layout, snap.wavelength, targets, grid, r)?,
        TargetRange::Search(ranges, opts) => {
            near_search(&sub, &snap.layout, snap.wavelength, targets, grid, ranges, opts)?
        }
    };
    let x_m = snap.layout.positions_m(snap.wavelength);
    for (i, &a) in report.angles.iter().enumerate() {
        let steer = match report.ranges.get(i) {
            Some(&r) => steer_near_sin(&x_m, snap.wavelength, r, a.sin()),
            None => steer_far_sin(snap.layout.positions(), a.sin()),
        };
        if sub.visible_fraction(&steer) < BLIND_TOL {
            return Err(Error::EstimationFailure("target direction is blocked by the user projector".into()));
        }
    }
    Ok(report)
}
