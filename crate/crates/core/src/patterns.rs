//! Beam patterns, near-field focusing maps and hollowed DFT codebooks.
//!
//! All gains are normalised array gains in `[0, 1]` with equal-amplitude,
//! phase-only element weights.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::coarray::GRID_TOL;
use crate::error::{invalid, Error, Result};
use crate::geometry::ElementLayout;
use crate::wave::{far_phase, path_excess, unit_phasor};
use crate::C64;

/// Gain threshold below which a sample counts as an exact null.
pub const NULL_THRESHOLD: f64 = 1e-6;

/// Far-field array gain sampled over `Δθ = sin θ - sin θ0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternCurve {
    pub delta_theta: Vec<f64>,
    pub gain: Vec<f64>,
}

impl PatternCurve {
    /// CSV with header `delta_theta,gain` (or `gain_db` when `db`).
    pub fn to_csv(&self, db: bool) -> String {
        let mut out = String::from(if db { "delta_theta,gain_db\n" } else { "delta_theta,gain\n" });
        for (d, g) in self.delta_theta.iter().zip(&self.gain) {
            let _ = writeln!(out, "{d},{}", if db { to_db(*g) } else { *g });
        }
        out
    }
}

/// Amplitude gain in dB (`20 log10`), floored at -300 dB.
pub fn to_db(gain: f64) -> f64 {
    20.0 * gain.max(1e-15).log10()
}

/// Normalised far-field gain of a layout at one spatial-frequency offset.
pub fn farfield_gain(positions: &[f64], delta_theta: f64) -> f64 {
    let sum: C64 = positions.iter().map(|&p| unit_phasor(far_phase(p, delta_theta))).sum();
    sum.norm() / positions.len() as f64
}

pub fn farfield_pattern(layout: &ElementLayout, grid: &[f64]) -> Result<PatternCurve> {
    if grid.is_empty() {
        return Err(Error::Empty("pattern grid"));
    }
    if let Some(bad) = grid.iter().find(|d| !(d.abs() <= 2.0)) {
        return Err(invalid(format!("spatial-frequency offset {bad} outside [-2, 2]")));
    }
    let mut delta_theta = grid.to_vec();
    delta_theta.sort_by(f64::total_cmp);
    let gain = delta_theta.iter().map(|&d| farfield_gain(layout.positions(), d)).collect();
    Ok(PatternCurve { delta_theta, gain })
}

/// Dirichlet kernel `|sin(πMΔ/2) / (M sin(πΔ/2))|` of an `M`-element
/// compact array, with the removable singularities evaluated as 1.
pub fn closed_form_compact_pattern(m: usize, delta_theta: f64) -> f64 {
    let m = m as f64;
    let den = (PI * delta_theta / 2.0).sin();
    if den.abs() < 1e-300 {
        return 1.0;
    }
    let num = (PI * m * delta_theta / 2.0).sin();
    let g = (num / (m * den)).abs();
    if g.is_finite() {
        g
    } else {
        1.0
    }
}

/// Offset of the first null to the right of the main-lobe peak.
///
/// A sample below [`NULL_THRESHOLD`] is a null; otherwise the first local
/// minimum marks the main-lobe edge. Non-uniform layouts such as a 6-element
/// nested array bottom out well above zero (about 0.37) there.
pub fn angular_resolution(curve: &PatternCurve) -> Result<f64> {
    let start = curve.delta_theta.partition_point(|&d| d <= 0.0);
    let g = &curve.gain;
    for i in start..g.len() {
        if g[i] < NULL_THRESHOLD {
            return Ok(curve.delta_theta[i]);
        }
        let left_ok = i > 0 && g[i] <= g[i - 1];
        let right_ok = i + 1 < g.len() && g[i] <= g[i + 1];
        if left_ok && right_ok {
            return Ok(curve.delta_theta[i]);
        }
    }
    Err(Error::EstimationFailure("no null found right of the main lobe".into()))
}

/// Offsets `±2k/η` inside `[-bound, bound]` where a uniform sparse array's
/// gain returns to 1. Empty for `η <= 1`.
pub fn grating_lobe_positions(eta: f64, bound: f64) -> Vec<f64> {
    if !(eta > 1.0) {
        return Vec::new();
    }
    let step = 2.0 / eta;
    let count = (bound / step + 1e-9).floor() as i64;
    let mut out: Vec<f64> =
        (1..=count).flat_map(|k| [-(k as f64) * step, k as f64 * step]).collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sidelobe {
    pub level: f64,
    pub location: f64,
}

impl Sidelobe {
    /// Peak-to-sidelobe level ratio; the main-lobe peak is 1.
    pub fn psllr(&self) -> f64 {
        1.0 / self.level
    }
}

/// Highest gain outside `|Δθ| <= mainlobe_exclusion`.
pub fn peak_sidelobe(curve: &PatternCurve, mainlobe_exclusion: f64) -> Result<Sidelobe> {
    curve
        .delta_theta
        .iter()
        .zip(&curve.gain)
        .filter(|(d, _)| d.abs() > mainlobe_exclusion)
        .fold(None, |best: Option<Sidelobe>, (&d, &g)| match best {
            Some(b) if b.level >= g => Some(b),
            _ => Some(Sidelobe { level: g, location: d }),
        })
        .ok_or(Error::Empty("no samples outside the main-lobe exclusion"))
}

/// A point in polar coordinates about the array origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    /// Meters.
    pub range: f64,
    /// Radians from broadside.
    pub angle: f64,
}

/// Near-field gain over a (range, angle) grid, stored range-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FocusGrid {
    pub ranges: Vec<f64>,
    pub angles: Vec<f64>,
    pub gain: Vec<f64>,
    pub focus: PolarPoint,
}

impl FocusGrid {
    pub fn at(&self, range_idx: usize, angle_idx: usize) -> f64 {
        self.gain[range_idx * self.angles.len() + angle_idx]
    }

    /// Cell indices of the largest gain (first one on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, g) in self.gain.iter().enumerate() {
            if *g > self.gain[best] {
                best = i;
            }
        }
        (best / self.angles.len(), best % self.angles.len())
    }

    /// Cell holding the focus, when the focus lies on the grid.
    pub fn focus_cell(&self) -> Option<(usize, usize)> {
        let r = self.ranges.iter().position(|&r| (r - self.focus.range).abs() <= 1e-9 * r)?;
        let a = self.angles.iter().position(|&a| (a - self.focus.angle).abs() <= 1e-12)?;
        Some((r, a))
    }

    /// CSV with header `range_m,angle_rad,gain` (or `gain_db`).
    pub fn to_csv(&self, db: bool) -> String {
        let mut out =
            String::from(if db { "range_m,angle_rad,gain_db\n" } else { "range_m,angle_rad,gain\n" });
        for (i, r) in self.ranges.iter().enumerate() {
            for (j, a) in self.angles.iter().enumerate() {
                let g = self.at(i, j);
                let _ = writeln!(out, "{r},{a},{}", if db { to_db(g) } else { g });
            }
        }
        out
    }
}

/// Exact spherical-wavefront focusing pattern of a beam matched to `focus`.
pub fn nearfield_focus_pattern(
    layout: &ElementLayout,
    wavelength: f64,
    focus: PolarPoint,
    ranges: &[f64],
    angles: &[f64],
) -> Result<FocusGrid> {
    if ranges.is_empty() || angles.is_empty() {
        return Err(Error::Empty("focus grid"));
    }
    if let Some(r) = ranges.iter().chain([&focus.range]).find(|r| !(**r > 0.0)) {
        return Err(invalid(format!("range {r} must be positive")));
    }
    let k = 2.0 * PI / wavelength;
    let x = layout.positions_m(wavelength);
    let m = x.len() as f64;
    let sf = focus.angle.sin();
    let focus_excess: Vec<f64> = x.iter().map(|&xm| path_excess(xm, focus.range, sf)).collect();
    let sines: Vec<f64> = angles.iter().map(|a| a.sin()).collect();
    let gain = ranges
        .par_iter()
        .flat_map_iter(|&r| {
            let x = &x;
            let focus_excess = &focus_excess;
            sines.iter().map(move |&s| {
                let sum: C64 = x
                    .iter()
                    .zip(focus_excess)
                    .map(|(&xm, &fe)| unit_phasor(k * (path_excess(xm, r, s) - fe)))
                    .sum();
                sum.norm() / m
            })
        })
        .collect();
    Ok(FocusGrid { ranges: ranges.to_vec(), angles: angles.to_vec(), gain, focus })
}

/// Range interval around the focus at the focus angle where the gain stays
/// at or above `1/√2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthInterval {
    /// Lower edge; 0 when the gain never drops below the grid's first range.
    pub lower: f64,
    /// Upper edge; `f64::INFINITY` when the gain never drops within the grid.
    pub upper: f64,
}

impl DepthInterval {
    pub fn is_bounded_above(&self) -> bool {
        self.upper.is_finite()
    }
}

pub fn depth_3db(grid: &FocusGrid) -> Result<DepthInterval> {
    let a = grid
        .angles
        .iter()
        .position(|&a| (a - grid.focus.angle).abs() <= 1e-12)
        .ok_or_else(|| invalid("focus angle is not on the angle grid"))?;
    let n = grid.ranges.len();
    let center = (0..n)
        .min_by(|&i, &j| {
            (grid.ranges[i] - grid.focus.range)
                .abs()
                .total_cmp(&(grid.ranges[j] - grid.focus.range).abs())
        })
        .expect("grids are non-empty");
    let g = |i: usize| grid.at(i, a);
    // linear interpolation of the crossing between samples i (inside) and j (outside)
    let cross = |i: usize, j: usize| {
        let (gi, gj) = (g(i), g(j));
        let t = (gi - FRAC_1_SQRT_2) / (gi - gj);
        grid.ranges[i] + t * (grid.ranges[j] - grid.ranges[i])
    };
    let mut hi = center;
    while hi + 1 < n && g(hi + 1) >= FRAC_1_SQRT_2 {
        hi += 1;
    }
    let upper = if hi + 1 < n { cross(hi, hi + 1) } else { f64::INFINITY };
    let mut lo = center;
    while lo > 0 && g(lo - 1) >= FRAC_1_SQRT_2 {
        lo -= 1;
    }
    let lower = if lo > 0 { cross(lo, lo - 1) } else { 0.0 };
    Ok(DepthInterval { lower, upper })
}

/// Unit-norm beamforming codewords with their intended `Δθ` targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    pub codewords: Vec<Vec<C64>>,
    pub steering_targets: Vec<f64>,
}

/// DFT codebook of the compact array spanning `0..=A` (A = largest position),
/// restricted to the layout's elements and renormalised. One codeword per
/// DFT bin.
pub fn dft_hollow_codebook(layout: &ElementLayout) -> Result<Codebook> {
    let p = layout.integer_positions(GRID_TOL)?;
    let bins = (p[p.len() - 1] + 1) as usize;
    let norm = (p.len() as f64).sqrt();
    let mut codewords = Vec::with_capacity(bins);
    let mut steering_targets = Vec::with_capacity(bins);
    for b in 0..bins {
        let mut target = 2.0 * b as f64 / bins as f64;
        if target >= 1.0 {
            target -= 2.0;
        }
        // exact DFT phases: 2π b p / bins
        codewords.push(
            p.iter()
                .map(|&pm| {
                    let idx = (b as i64 * pm).rem_euclid(bins as i64) as f64;
                    unit_phasor(2.0 * PI * idx / bins as f64) / norm
                })
                .collect(),
        );
        steering_targets.push(target);
    }
    Ok(Codebook { codewords, steering_targets })
}

/// Normalised gain `|wᴴ a(Δθ)| / √M` of one codeword.
pub fn codeword_gain(codeword: &[C64], positions: &[f64], delta_theta: f64) -> f64 {
    let sum: C64 = codeword
        .iter()
        .zip(positions)
        .map(|(w, &p)| w.conj() * unit_phasor(far_phase(p, delta_theta)))
        .sum();
    sum.norm() / (positions.len() as f64).sqrt()
}

/// Worst-case (over the grid) best-codeword gain.
pub fn codebook_coverage(cb: &Codebook, layout: &ElementLayout, grid: &[f64]) -> Result<f64> {
    if cb.codewords.is_empty() {
        return Err(Error::Empty("codebook"));
    }
    if grid.is_empty() {
        return Err(Error::Empty("coverage grid"));
    }
    if cb.codewords.iter().any(|w| w.len() != layout.len()) {
        return Err(invalid("codeword length does not match the layout"));
    }
    Ok(grid
        .iter()
        .map(|&d| {
            cb.codewords
                .iter()
                .map(|w| codeword_gain(w, layout.positions(), d))
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use crate::wave::linspace;

    #[test]
    fn boresight_gain_is_one() {
        for l in [make_mra(6).unwrap(), make_usa(8, 4.1).unwrap(), make_coprime(4, 3).unwrap()] {
            assert!((farfield_gain(l.positions(), 0.0) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dirichlet_values() {
        assert_eq!(closed_form_compact_pattern(16, 0.0), 1.0);
        assert!(closed_form_compact_pattern(16, 0.125) < 1e-15);
        assert!(closed_form_compact_pattern(2, 1.0) < 1e-15);
        assert!((closed_form_compact_pattern(16, 2.0) - 1.0).abs() < 1e-12);
        let ca = make_compact(16).unwrap();
        assert!(farfield_gain(ca.positions(), 0.125) < 1e-14);
    }

    #[test]
    fn usa_grating_lobe_at_half() {
        let usa = make_usa(16, 4.0).unwrap();
        assert!((farfield_gain(usa.positions(), 0.5) - 1.0).abs() < 1e-12);
        assert_eq!(grating_lobe_positions(4.0, 2.0), vec![-2.0, -1.5, -1.0, -0.5, 0.5, 1.0, 1.5, 2.0]);
        assert!(grating_lobe_positions(1.0, 2.0).is_empty());
        assert_eq!(grating_lobe_positions(2.0, 2.0), vec![-2.0, -1.0, 1.0, 2.0]);
        for d in grating_lobe_positions(4.0, 2.0) {
            assert!((farfield_gain(usa.positions(), d) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn resolutions() {
        let grid = linspace(-1.0, 1.0, 20001);
        let cases = [
            (make_compact(16).unwrap(), 0.125),
            (make_usa(16, 4.0).unwrap(), 0.03125),
            (make_moa(4, 4, 8.0).unwrap(), 0.0625),
        ];
        for (l, want) in cases {
            let c = farfield_pattern(&l, &grid).unwrap();
            let got = angular_resolution(&c).unwrap();
            assert!((got - want).abs() <= 1e-4 + 1e-12, "{} {got}", l.architecture());
        }
        let flat = PatternCurve { delta_theta: vec![0.0, 0.1, 0.2], gain: vec![1.0, 0.9, 0.8] };
        assert!(angular_resolution(&flat).is_err());
    }

    #[test]
    fn compact_first_sidelobe() {
        // oracle: golden-section refine the Dirichlet kernel between its first two nulls
        let f = |d: f64| closed_form_compact_pattern(16, d);
        let (mut a, mut b) = (0.125, 0.25);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) > f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let oracle_at = (a + b) / 2.0;
        let oracle = f(oracle_at);
        // 0.2172 is the large-M limit 2/(3π); M = 16 sits slightly above it
        assert!((oracle - 0.2172).abs() < 5e-3, "{oracle}");
        let curve = farfield_pattern(&make_compact(16).unwrap(), &linspace(-1.0, 1.0, 40001)).unwrap();
        let sl = peak_sidelobe(&curve, 0.125).unwrap();
        assert!((sl.level - oracle).abs() < 1e-5);
        assert!((sl.location.abs() - oracle_at).abs() < 1e-4);
        assert!((sl.location.abs() - 0.187).abs() < 1e-2);
        assert!((sl.psllr() - 1.0 / oracle).abs() < 1e-3);

        let usa = farfield_pattern(&make_usa(16, 4.0).unwrap(), &linspace(-1.0, 1.0, 4001)).unwrap();
        let sl = peak_sidelobe(&usa, 0.03125).unwrap();
        assert!((sl.level - 1.0).abs() < 1e-9);
        assert!((sl.location.abs() - 0.5).abs() < 1e-12 || (sl.location.abs() - 1.0).abs() < 1e-12);

        assert!(peak_sidelobe(&curve, 5.0).is_err());
    }

    #[test]
    fn mra_sidelobes_below_one() {
        let curve = farfield_pattern(&make_mra(6).unwrap(), &linspace(-1.0, 1.0, 20001)).unwrap();
        let null = angular_resolution(&curve).unwrap();
        assert!(peak_sidelobe(&curve, null).unwrap().level < 1.0);
    }

    #[test]
    fn pattern_grid_validation() {
        let l = make_compact(4).unwrap();
        assert!(farfield_pattern(&l, &[]).is_err());
        assert!(farfield_pattern(&l, &[2.5]).is_err());
    }

    #[test]
    fn focus_peaks_at_focus() {
        let lambda = crate::wavelength(28e9);
        let l = make_usa(16, 4.0).unwrap();
        let focus = PolarPoint { range: 5.0, angle: 0.2 };
        let grid = nearfield_focus_pattern(&l, lambda, focus, &[2.0, 5.0, 9.0], &[0.0, 0.2, 0.4]).unwrap();
        let cell = grid.focus_cell().unwrap();
        assert_eq!(cell, (1, 1));
        assert!((grid.at(1, 1) - 1.0).abs() < 1e-12);
        assert_eq!(grid.argmax(), cell);
        assert!(nearfield_focus_pattern(&l, lambda, focus, &[-1.0], &[0.0]).is_err());
        assert!(nearfield_focus_pattern(&l, lambda, focus, &[], &[0.0]).is_err());
    }

    #[test]
    fn compact_vs_sparse_far_range_gain() {
        let lambda = crate::wavelength(28e9);
        let focus = PolarPoint { range: 200.0, angle: 0.0 };
        let ca = make_compact(128).unwrap();
        let usa = make_usa(128, 4.1).unwrap();
        let g_ca = nearfield_focus_pattern(&ca, lambda, focus, &[1e4], &[0.0]).unwrap().gain[0];
        let g_usa = nearfield_focus_pattern(&usa, lambda, focus, &[1e4], &[0.0]).unwrap().gain[0];
        assert!(g_ca > 0.9, "{g_ca}");
        assert!(g_usa < 0.5, "{g_usa}");
    }

    #[test]
    fn depth_edges() {
        let lambda = crate::wavelength(28e9);
        let focus = PolarPoint { range: 200.0, angle: 0.0 };
        let ranges = crate::wave::geomspace_through(10.0, 200.0, 1e4, 60, 120);
        let ca = nearfield_focus_pattern(&make_compact(128).unwrap(), lambda, focus, &ranges, &[0.0]).unwrap();
        let d = depth_3db(&ca).unwrap();
        assert!(!d.is_bounded_above());
        assert!(d.lower < 200.0);
        let usa = nearfield_focus_pattern(&make_usa(128, 4.1).unwrap(), lambda, focus, &ranges, &[0.0]).unwrap();
        let d = depth_3db(&usa).unwrap();
        assert!(d.is_bounded_above());
        assert!(d.lower < 200.0 && d.upper > 200.0);
        let off = FocusGrid { focus: PolarPoint { range: 200.0, angle: 0.1 }, ..usa };
        assert!(depth_3db(&off).is_err());
    }

    #[test]
    fn compact_codebook_is_orthogonal_dft() {
        let cb = dft_hollow_codebook(&make_compact(8).unwrap()).unwrap();
        assert_eq!(cb.codewords.len(), 8);
        for (i, a) in cb.codewords.iter().enumerate() {
            let n: f64 = a.iter().map(|z| z.norm_sqr()).sum();
            assert!((n - 1.0).abs() < 1e-12);
            for b in &cb.codewords[i + 1..] {
                let ip: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                assert!(ip.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hollow_codebooks() {
        let cb = dft_hollow_codebook(&make_usa(4, 2.0).unwrap()).unwrap();
        assert_eq!(cb.codewords.len(), 7);
        assert!(cb.codewords.iter().all(|w| w.len() == 4));
        let ip: C64 = cb.codewords[0].iter().zip(&cb.codewords[1]).map(|(x, y)| x.conj() * y).sum();
        assert!(ip.norm() > 1e-3);
        let cb = dft_hollow_codebook(&make_nested(3, 3).unwrap()).unwrap();
        assert_eq!((cb.codewords.len(), cb.codewords[0].len()), (12, 6));
        assert!(dft_hollow_codebook(&make_usa(4, 4.1).unwrap()).is_err());
    }

    #[test]
    fn coverage() {
        let ca = make_compact(8).unwrap();
        let cb = dft_hollow_codebook(&ca).unwrap();
        let worst = codebook_coverage(&cb, &ca, &linspace(-1.0, 1.0, 4001)).unwrap();
        assert!(worst >= 2.0 / PI - 0.05, "{worst}");
        // one codeword steered at its own target
        let single = Codebook { codewords: vec![cb.codewords[3].clone()], steering_targets: vec![cb.steering_targets[3]] };
        let g = codebook_coverage(&single, &ca, &[single.steering_targets[0]]).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        assert!(codebook_coverage(&single, &ca, &[]).is_err());

        let usa = make_usa(8, 4.0).unwrap();
        let cb = dft_hollow_codebook(&usa).unwrap();
        let w = &cb.codewords[1];
        let target = cb.steering_targets[1];
        let unit = [-1.0, -0.5, 0.0, 0.5]
            .iter()
            .map(|k| target + k)
            .filter(|&d| codeword_gain(w, usa.positions(), d) > 1.0 - 1e-9)
            .count();
        assert_eq!(unit, 4, "grating lobes give several unit-gain directions");
        let worst = codebook_coverage(&cb, &usa, &linspace(-1.0, 1.0, 2001)).unwrap();
        assert!(worst > 0.5 && worst <= 1.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn gain_even_and_bounded(gaps in proptest::collection::vec(0.5f64..6.0, 1..20), d in -2.0f64..2.0) {
                let mut p = vec![0.0];
                for g in &gaps {
                    p.push(p.last().unwrap() + g);
                }
                let a = farfield_gain(&p, d);
                let b = farfield_gain(&p, -d);
                prop_assert!((a - b).abs() < 1e-12);
                prop_assert!(a <= 1.0 + 1e-9);
            }
        }
    }
}
