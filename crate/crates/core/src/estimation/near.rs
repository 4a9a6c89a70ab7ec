use super::covariance::sample_covariance;
use super::music::check_order;
use super::report::{EstimateReport, Spectrum};
use super::snapshots::SnapshotSet;
use super::steering::steer_near_sin;
use super::subspace::{local_maxima, parabolic_offset, strongest_peaks, SinGrid, Subspaces};
use crate::error::{invalid, Error, Result};
use crate::geometry::ElementLayout;

/// Range spectra whose max/min ratio stays below this are called flat.
const FLAT_RATIO: f64 = 1.01;

/// Tuning for [`two_stage_near`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearFieldOptions {
    /// Stage-1 far-field peaks examined per requested source. Grating lobes
    /// produce several equally strong far-field peaks, so more than one is
    /// needed for sparse layouts.
    pub candidates_per_source: usize,
    /// Half-width (in sin θ) of the joint angle/range search around each
    /// candidate. `Some(0.0)` gives the plain two-stage procedure; `None`
    /// picks `D / r_min`, the worst-case far-field bias of a near-field
    /// source across an aperture of length `D`.
    pub angle_window: Option<f64>,
}

impl Default for NearFieldOptions {
    fn default() -> Self {
        Self { candidates_per_source: 4, angle_window: None }
    }
}

impl NearFieldOptions {
    /// Angle from the far-field spectrum, then range at that angle only.
    pub fn plain() -> Self {
        Self { candidates_per_source: 1, angle_window: Some(0.0) }
    }
}

/// Two-stage near-field MUSIC: far-field angle search, then a range sweep
/// with near-field steering against the same noise subspace.
pub fn two_stage_near(
    snap: &SnapshotSet,
    k: usize,
    angle_grid: &SinGrid,
    range_grid: &[f64],
    options: NearFieldOptions,
) -> Result<EstimateReport> {
    let r = sample_covariance(snap);
    check_order(&r, snap.layout.len(), k)?;
    if k == 0 {
        return Ok(EstimateReport::empty());
    }
    let sub = Subspaces::from_covariance(&r, k, None);
    near_search(&sub, &snap.layout, snap.wavelength, k, angle_grid, range_grid, options)
}

pub(crate) fn validate_ranges(range_grid: &[f64]) -> Result<()> {
    if range_grid.is_empty() {
        return Err(invalid("range grid is empty"));
    }
    if range_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(invalid("range grid values must be positive and finite"));
    }
    if range_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("range grid must be strictly increasing"));
    }
    Ok(())
}

struct Candidate {
    u: f64,
    range_idx: usize,
    score: f64,
    degenerate: bool,
}

pub(crate) fn near_search(
    sub: &Subspaces,
    layout: &ElementLayout,
    wavelength: f64,
    k: usize,
    angle_grid: &SinGrid,
    range_grid: &[f64],
    options: NearFieldOptions,
) -> Result<EstimateReport> {
    validate_ranges(range_grid)?;
    let x = layout.positions_m(wavelength);
    let value = |u: f64, r: f64| sub.value(&steer_near_sin(&x, wavelength, r, u));

    let far = sub.far_spectrum(layout.positions(), angle_grid);
    let wanted = k * options.candidates_per_source.max(1);
    let peaks = local_maxima(&far);
    if peaks.len() < k {
        return Err(Error::EstimationFailure(format!("found {} spectral peaks, need {k}", peaks.len())));
    }
    let seeds = &peaks[..wanted.min(peaks.len())];

    let half = options.angle_window.unwrap_or_else(|| {
        let aperture = x.last().copied().unwrap_or(0.0);
        (aperture / range_grid[0]).clamp(8.0 * angle_grid.step(), 0.25)
    });

    let mut found: Vec<Candidate> = seeds
        .iter()
        .map(|&i| {
            let u0 = angle_grid.value(i) + parabolic_offset(&far, i) * angle_grid.step();
            let angles = if half > 0.0 {
                angle_grid.window(u0 - half, u0 + half).map(|w| w.values()).unwrap_or_else(|_| vec![u0])
            } else {
                vec![u0]
            };
            let mut best = Candidate { u: u0, range_idx: 0, score: f64::NEG_INFINITY, degenerate: false };
            let mut profile = Vec::new();
            for &u in &angles {
                let row: Vec<f64> = range_grid.iter().map(|&r| value(u, r)).collect();
                let (j, &v) = row.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("non-empty");
                if v > best.score {
                    best = Candidate { u, range_idx: j, score: v, degenerate: false };
                    profile = row;
                }
            }
            if angles.len() > 2 {
                let r = range_grid[best.range_idx];
                let step = angle_grid.step();
                let trio = [value(best.u - step, r), best.score, value(best.u + step, r)];
                if trio[1] >= trio[0] && trio[1] >= trio[2] {
                    best.u = (best.u + parabolic_offset(&trio, 1) * step).clamp(-1.0, 1.0);
                }
            }
            let (lo, hi) = profile.iter().fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
            best.degenerate = best.range_idx == 0 || best.range_idx + 1 == range_grid.len() || hi < FLAT_RATIO * lo;
            best
        })
        .collect();

    found.sort_by(|a, b| b.score.total_cmp(&a.score));
    let min_sep = 2.0 * angle_grid.step();
    let mut chosen: Vec<Candidate> = Vec::with_capacity(k);
    for c in found {
        if chosen.len() == k {
            break;
        }
        if chosen.iter().all(|p| (p.u - c.u).abs() > min_sep || p.range_idx != c.range_idx) {
            chosen.push(c);
        }
    }
    if chosen.len() < k {
        return Err(Error::EstimationFailure(format!(
            "near-field search found {} distinct sources, need {k}",
            chosen.len()
        )));
    }
    let degenerate = chosen.iter().any(|c| c.degenerate);
    let mut report =
        EstimateReport::from_polar(chosen.iter().map(|c| (c.u.asin(), range_grid[c.range_idx])).collect());
    report.far_field_degenerate = degenerate;
    Ok(report.with_spectrum(Spectrum { grid: angle_grid.values(), values: far }))
}

/// Angle-only scan with near-field steering focused at a known range.
pub(crate) fn scan_focused(
    sub: &Subspaces,
    layout: &ElementLayout,
    wavelength: f64,
    k: usize,
    grid: &SinGrid,
    range: f64,
) -> Result<EstimateReport> {
    validate_ranges(&[range])?;
    let x = layout.positions_m(wavelength);
    let values: Vec<f64> =
        (0..grid.len()).map(|i| sub.value(&steer_near_sin(&x, wavelength, range, grid.value(i)))).collect();
    let peaks = strongest_peaks(grid, &values, k)?;
    let mut report = EstimateReport::from_polar(peaks.iter().map(|p| (p.0.asin(), range)).collect());
    report.spectrum = Some(Spectrum { grid: grid.values(), values });
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{simulate_snapshots, Source, SourceScene};
    use crate::geometry::*;
    use crate::seed;
    use crate::wave::geomspace_through;

    fn lambda() -> f64 {
        crate::wavelength(28e9)
    }

    #[test]
    fn usa_range_and_angle() {
        let l = make_usa(128, 4.1).unwrap();
        let scene = SourceScene::uncorrelated(vec![Source::near(0.0, 200.0, 1.0)]);
        let ranges = geomspace_through(100.0, 200.0, 1000.0, 20, 20);
        let grid = SinGrid::for_span(l.span());
        let trials = 20;
        let hits = (0..trials)
            .filter(|&t| {
                let snap = simulate_snapshots(&l, lambda(), &scene, 200, 0.1, seed::derive(3, &[t])).unwrap();
                let est = two_stage_near(&snap, 1, &grid, &ranges, NearFieldOptions::default()).unwrap();
                (est.ranges[0] - 200.0).abs() <= 20.0 && est.angles[0].abs() <= 0.01 && !est.far_field_degenerate
            })
            .count();
        assert!(hits * 10 >= trials as usize * 9, "{hits}/{trials}");
    }

    #[test]
    fn far_source_is_flagged() {
        // compact keeps the angle unambiguous; 10 km is far beyond its Rayleigh distance
        let l = make_compact(128).unwrap();
        let scene = SourceScene::uncorrelated(vec![Source::near(0.3, 10_000.0, 1.0)]);
        let ranges = geomspace_through(5_000.0, 10_000.0, 50_000.0, 10, 10);
        let grid = SinGrid::for_span(l.span());
        let snap = simulate_snapshots(&l, lambda(), &scene, 200, 0.1, 1).unwrap();
        let est = two_stage_near(&snap, 1, &grid, &ranges, NearFieldOptions::plain()).unwrap();
        assert!(est.far_field_degenerate);
        assert!((est.angles[0] - 0.3).abs() < 0.01);
    }

    #[test]
    fn empty_and_bad_inputs() {
        let l = make_compact(8).unwrap();
        let snap = simulate_snapshots(&l, lambda(), &SourceScene::uncorrelated(vec![]), 4, 1.0, 1).unwrap();
        let grid = SinGrid::new(-1.0, 1.0, 0.01).unwrap();
        assert!(two_stage_near(&snap, 0, &grid, &[1.0], NearFieldOptions::default()).unwrap().is_empty());
        assert!(two_stage_near(&snap, 8, &grid, &[1.0], NearFieldOptions::default()).is_err());
        assert!(two_stage_near(&snap, 1, &grid, &[2.0, 1.0], NearFieldOptions::default()).is_err());
    }
}
