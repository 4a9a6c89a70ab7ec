use super::covariance::Covariance;
use super::report::{EstimateReport, Spectrum};
use super::subspace::{strongest_peaks, SinGrid, Subspaces};
use crate::error::{invalid, Error, Result};
use crate::geometry::ElementLayout;

/// Classic far-field MUSIC. Returns the `k` strongest peaks of the
/// pseudo-spectrum `M / (aᴴ En Enᴴ a)` with parabolic refinement.
pub fn music_far(r: &Covariance, layout: &ElementLayout, k: usize, grid: &SinGrid) -> Result<EstimateReport> {
    check_order(r, layout.len(), k)?;
    if k == 0 {
        return Ok(EstimateReport::empty());
    }
    let sub = Subspaces::from_covariance(r, k, None);
    scan_far(&sub, layout.positions(), k, grid)
}

pub(crate) fn check_order(r: &Covariance, m: usize, k: usize) -> Result<()> {
    if r.dim() != m {
        return Err(invalid(format!("covariance is {}x{0} but the layout has {m} elements", r.dim())));
    }
    if k >= m {
        return Err(Error::TooManySources { requested: k, available: m.saturating_sub(1) });
    }
    Ok(())
}

pub(crate) fn scan_far(sub: &Subspaces, positions: &[f64], k: usize, grid: &SinGrid) -> Result<EstimateReport> {
    let values = sub.far_spectrum(positions, grid);
    let peaks = strongest_peaks(grid, &values, k)?;
    let report = EstimateReport::from_angles(peaks.iter().map(|p| p.0.asin()).collect());
    Ok(report.with_spectrum(Spectrum { grid: grid.values(), values }))
}
