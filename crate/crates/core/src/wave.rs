//! Phase models shared by the pattern and estimation code.

use std::f64::consts::PI;

use crate::C64;

/// Far-field element phase `π p u` for a position `p` in units of d0 and a
/// spatial frequency `u = sin θ`.
#[inline]
pub fn far_phase(position: f64, u: f64) -> f64 {
    PI * position * u
}

/// Excess path `r_m - r` from a source at range `r` and angle with sine
/// `sin_theta` to an element at `x` meters, relative to the origin element.
///
/// Computed in the cancellation-free form
/// `(x² - 2 r x sinθ) / (r_m + r)`.
#[inline]
pub fn path_excess(x: f64, range: f64, sin_theta: f64) -> f64 {
    let num = x * x - 2.0 * range * x * sin_theta;
    let rm = (range * range + num).sqrt();
    num / (rm + range)
}

#[inline]
pub fn unit_phasor(phase: f64) -> C64 {
    let (s, c) = phase.sin_cos();
    C64::new(c, s)
}

/// Evenly spaced samples from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + step * i as f64 }).collect()
        }
    }
}

/// Geometric samples `center · q^k` for `k = -below..=above`, with `q` chosen
/// so the ends land on `lo` and `hi`. The center value is reproduced exactly.
pub fn geomspace_through(lo: f64, center: f64, hi: f64, below: usize, above: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(below + above + 1);
    for k in (1..=below).rev() {
        out.push(center * (lo / center).powf(k as f64 / below as f64));
    }
    out.push(center);
    for k in 1..=above {
        out.push(center * (hi / center).powf(k as f64 / above as f64));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_excess_matches_direct_distance() {
        let (x, r, s) = (0.7_f64, 12.0_f64, 0.3_f64);
        let direct = (r * r + x * x - 2.0 * r * x * s).sqrt() - r;
        assert!((path_excess(x, r, s) - direct).abs() < 1e-13);
        assert_eq!(path_excess(0.0, r, s), 0.0);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(-1.0, 1.0, 5), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = geomspace_through(100.0, 200.0, 800.0, 2, 4);
        assert_eq!(g.len(), 7);
        assert_eq!(g[2], 200.0);
        assert!((g[0] - 100.0).abs() < 1e-9 && (g[6] - 800.0).abs() < 1e-9);
    }
}
