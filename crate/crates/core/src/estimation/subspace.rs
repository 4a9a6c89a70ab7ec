//! Subspace pseudo-spectrum engine shared by the MUSIC variants.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::FftPlanner;

use super::covariance::Covariance;
use crate::coarray::GRID_TOL;
use crate::error::{invalid, Error, Result};
use crate::wave::unit_phasor;
use crate::C64;

/// Directions whose projected steering energy falls below this fraction of
/// `‖a‖²` are treated as blind (spectrum 0).
pub const BLIND_FRACTION: f64 = 1e-9;

/// Uniform grid over `u = sin θ` with step `2/n`, anchored on multiples of
/// the step so that integer layouts can be evaluated with an `n`-point FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SinGrid {
    per_two: usize,
    start: i64,
    count: usize,
}

impl SinGrid {
    /// Samples in `[lo, hi]` with a step close to `step` (rounded to `2/n`).
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(lo < hi) || lo < -1.0 || hi > 1.0 {
            return Err(invalid(format!("bad sin grid [{lo}, {hi}] step {step}")));
        }
        let per_two = (2.0 / step).round().max(2.0) as usize;
        let half = per_two as f64 / 2.0;
        let start = (lo * half - 1e-9).ceil() as i64;
        let end = (hi * half + 1e-9).floor() as i64;
        if end <= start {
            return Err(invalid("sin grid has fewer than two samples"));
        }
        Ok(Self { per_two, start, count: (end - start + 1) as usize })
    }

    /// Full `[-1, 1]` grid fine enough for an array spanning `span` d0: at
    /// most 1e-3 and at least four samples per null-to-null half width.
    pub fn for_span(span: f64) -> Self {
        let step = (1e-3f64).min(0.5 / (span + 1.0));
        Self::new(-1.0, 1.0, step).expect("valid default grid")
    }

    pub fn step(&self) -> f64 {
        2.0 / self.per_two as f64
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn value(&self, i: usize) -> f64 {
        2.0 * (self.start + i as i64) as f64 / self.per_two as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Same step, restricted to `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo.max(-1.0), hi.min(1.0), self.step())
    }
}

/// Signal subspace plus (optionally) zero-forced directions.
#[derive(Debug, Clone)]
pub struct Subspaces {
    /// Orthonormal signal eigenvectors, one per column.
    pub signal: DMatrix<C64>,
    /// Orthonormal basis of directions removed before estimation.
    pub blocked: DMatrix<C64>,
}

impl Subspaces {
    pub fn from_covariance(r: &Covariance, k: usize, blocked: Option<DMatrix<C64>>) -> Self {
        let eig = r.eigen();
        let m = r.dim();
        Self {
            signal: eig.leading(k),
            blocked: blocked.unwrap_or_else(|| DMatrix::zeros(m, 0)),
        }
    }

    /// Normalised pseudo-spectrum of one steering vector.
    pub fn value(&self, a: &DVector<C64>) -> f64 {
        let total = a.norm_squared();
        let blocked: f64 = self.blocked.column_iter().map(|q| q.dotc(a).norm_sqr()).sum();
        let signal: f64 = self.signal.column_iter().map(|e| e.dotc(a).norm_sqr()).sum();
        normalised(total, blocked, signal)
    }

    /// Fraction of a steering vector's energy that survives the zero-forcing
    /// projection.
    pub fn visible_fraction(&self, a: &DVector<C64>) -> f64 {
        let total = a.norm_squared();
        let blocked: f64 = self.blocked.column_iter().map(|q| q.dotc(a).norm_sqr()).sum();
        (total - blocked) / total
    }

    /// Pseudo-spectrum over a far-field sin grid.
    pub fn far_spectrum(&self, positions: &[f64], grid: &SinGrid) -> Vec<f64> {
        let total = positions.len() as f64;
        let blocked = inner_power(&self.blocked, positions, grid);
        let signal = inner_power(&self.signal, positions, grid);
        blocked.iter().zip(&signal).map(|(&b, &s)| normalised(total, b, s)).collect()
    }
}

fn normalised(total: f64, blocked: f64, signal: f64) -> f64 {
    let visible = total - blocked;
    if visible <= BLIND_FRACTION * total {
        return 0.0;
    }
    let noise = (visible - signal).max(visible * 1e-15);
    visible / noise
}

/// `Σ_cols |vᴴ a(u_i)|²` for every grid sample.
fn inner_power(vectors: &DMatrix<C64>, positions: &[f64], grid: &SinGrid) -> Vec<f64> {
    if vectors.ncols() == 0 {
        return vec![0.0; grid.len()];
    }
    if positions.iter().all(|p| (p - p.round()).abs() <= GRID_TOL) {
        inner_power_fft(vectors, positions, grid)
    } else {
        inner_power_direct(vectors, positions, grid)
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// For integer positions `Σ_m v̄_m e^{jπ p_m u}` at `u = 2j/n` is an inverse
/// DFT of the sequence with `v̄_m` placed at index `p_m mod n`.
fn inner_power_fft(vectors: &DMatrix<C64>, positions: &[f64], grid: &SinGrid) -> Vec<f64> {
    let n = grid.per_two;
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    let idx: Vec<usize> =
        positions.iter().map(|p| (p.round() as i64).rem_euclid(n as i64) as usize).collect();
    let mut acc = vec![0.0; grid.len()];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    for v in vectors.column_iter() {
        buf.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        for (&j, z) in idx.iter().zip(v.iter()) {
            buf[j] += z.conj();
        }
        fft.process(&mut buf);
        for (i, a) in acc.iter_mut().enumerate() {
            let j = (grid.start + i as i64).rem_euclid(n as i64) as usize;
            *a += buf[j].norm_sqr();
        }
    }
    acc
}

fn inner_power_direct(vectors: &DMatrix<C64>, positions: &[f64], grid: &SinGrid) -> Vec<f64> {
    const RESEED: usize = 512;
    let step = grid.step();
    let rot: Vec<C64> = positions.iter().map(|&p| unit_phasor(PI * p * step)).collect();
    let conj: Vec<Vec<C64>> =
        vectors.column_iter().map(|v| v.iter().map(|z| z.conj()).collect()).collect();
    let mut phasor = vec![C64::new(0.0, 0.0); positions.len()];
    let mut acc = vec![0.0; grid.len()];
    for (i, a) in acc.iter_mut().enumerate() {
        if i % RESEED == 0 {
            let u = grid.value(i);
            for (z, &p) in phasor.iter_mut().zip(positions) {
                *z = unit_phasor(PI * p * u);
            }
        } else {
            for (z, r) in phasor.iter_mut().zip(&rot) {
                *z *= r;
            }
        }
        *a = conj
            .iter()
            .map(|v| v.iter().zip(&phasor).map(|(x, y)| x * y).sum::<C64>().norm_sqr())
            .sum();
    }
    acc
}

/// Indices of interior local maxima (`> left`, `>= right`), strongest first.
pub fn local_maxima(values: &[f64]) -> Vec<usize> {
    let mut peaks: Vec<usize> = (1..values.len().saturating_sub(1))
        .filter(|&i| values[i] > values[i - 1] && values[i] >= values[i + 1])
        .collect();
    peaks.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    peaks
}

/// Sub-sample offset in `[-0.5, 0.5]` of a peak from a parabola through the
/// log-spectrum at `i-1, i, i+1`.
pub fn parabolic_offset(values: &[f64], i: usize) -> f64 {
    let y = |j: usize| 10.0 * values[j].max(1e-300).log10();
    let (l, c, r) = (y(i - 1), y(i), y(i + 1));
    let den = l - 2.0 * c + r;
    if den.abs() < 1e-12 {
        return 0.0;
    }
    (0.5 * (l - r) / den).clamp(-0.5, 0.5)
}

/// The `k` strongest refined peaks of a sin-grid spectrum as `(u, value)`.
pub fn strongest_peaks(grid: &SinGrid, spectrum: &[f64], k: usize) -> Result<Vec<(f64, f64)>> {
    let peaks = local_maxima(spectrum);
    if peaks.len() < k {
        return Err(Error::EstimationFailure(format!(
            "found {} spectral peaks, need {k}",
            peaks.len()
        )));
    }
    Ok(peaks[..k]
        .iter()
        .map(|&i| {
            let u = grid.value(i) + parabolic_offset(spectrum, i) * grid.step();
            (u.clamp(-1.0, 1.0), spectrum[i])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::steer_far_sin;

    #[test]
    fn grid_anchoring() {
        let g = SinGrid::new(-1.0, 1.0, 1e-3).unwrap();
        assert_eq!(g.len(), 2001);
        assert_eq!(g.value(0), -1.0);
        assert_eq!(g.value(2000), 1.0);
        assert!((g.value(1300) - 0.3).abs() < 1e-12);
        let w = g.window(0.25, 0.3).unwrap();
        assert_eq!(w.len(), 51);
        assert!((w.value(0) - 0.25).abs() < 1e-12);
        assert!(SinGrid::new(0.5, 0.2, 0.01).is_err());
        assert!(SinGrid::for_span(4159.0).step() <= 0.5 / 4160.0 * 1.001);
    }

    #[test]
    fn fft_and_direct_paths_agree() {
        let positions = [0.0, 1.0, 2.0, 5.0, 9.0, 23.0, 40.0];
        let mut v = DMatrix::<C64>::zeros(positions.len(), 2);
        for i in 0..positions.len() {
            v[(i, 0)] = C64::new(0.3 * i as f64, -0.2);
            v[(i, 1)] = C64::new(1.0, (i as f64).sin());
        }
        let grid = SinGrid::new(-0.9, 0.95, 0.004).unwrap();
        let a = inner_power_fft(&v, &positions, &grid);
        let b = inner_power_direct(&v, &positions, &grid);
        for (i, (x, y)) in a.iter().zip(&b).enumerate() {
            let u = grid.value(i);
            let steer = steer_far_sin(&positions, u);
            let brute: f64 = v.column_iter().map(|c| c.dotc(&steer).norm_sqr()).sum();
            assert!((x - brute).abs() < 1e-9 * (1.0 + brute));
            assert!((y - brute).abs() < 1e-9 * (1.0 + brute));
        }
    }

    #[test]
    fn parabola_recovers_vertex() {
        // 10 log10 of a Gaussian bump is an exact parabola in the sample index
        let vals: Vec<f64> = (0..5).map(|i| 10f64.powf(-(i as f64 - 2.3).powi(2) / 10.0)).collect();
        assert!((parabolic_offset(&vals, 2) - 0.3).abs() < 1e-9);
        assert_eq!(local_maxima(&[0.0, 1.0, 0.5, 3.0, 0.1]), vec![3, 1]);
    }
}
