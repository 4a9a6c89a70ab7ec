use nalgebra::DMatrix;

use super::covariance::Covariance;
use super::music::scan_far;
use super::report::EstimateReport;
use super::subspace::{SinGrid, Subspaces};
use crate::coarray::{difference_coarray, GRID_TOL};
use crate::error::{invalid, Error, Result};
use crate::geometry::ElementLayout;
use crate::C64;

/// Lag-averaged correlation `v[l]`, `l = 0..=L`, over the hole-free
/// segment of the difference co-array.
pub fn virtual_correlation(r: &Covariance, layout: &ElementLayout) -> Result<Vec<C64>> {
    let pos = layout.integer_positions(GRID_TOL)?;
    if r.dim() != pos.len() {
        return Err(invalid("covariance size does not match the layout"));
    }
    let extent = difference_coarray(layout)?.max_contiguous() as usize;
    let mut sums = vec![C64::new(0.0, 0.0); extent + 1];
    let mut counts = vec![0usize; extent + 1];
    for (i, &pi) in pos.iter().enumerate() {
        for (j, &pj) in pos.iter().enumerate() {
            let lag = pi - pj;
            if lag >= 0 && (lag as usize) <= extent {
                sums[lag as usize] += r.matrix[(i, j)];
                counts[lag as usize] += 1;
            }
        }
    }
    Ok(sums.into_iter().zip(counts).map(|(s, c)| s / c as f64).collect())
}

/// MUSIC on the `(L+1)`-element virtual compact array obtained by Toeplitz
/// augmentation of the lag-averaged correlation sequence.
pub fn coarray_music(r: &Covariance, layout: &ElementLayout, k: usize, grid: &SinGrid) -> Result<EstimateReport> {
    let v = virtual_correlation(r, layout)?;
    let extent = v.len() - 1;
    if k > extent {
        return Err(Error::TooManySources { requested: k, available: extent });
    }
    if k == 0 {
        return Ok(EstimateReport::empty());
    }
    let n = extent + 1;
    let toeplitz = DMatrix::from_fn(n, n, |a, b| if a >= b { v[a - b] } else { v[b - a].conj() });
    let sub = Subspaces::from_covariance(&Covariance::new(toeplitz)?, k, None);
    let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
    scan_far(&sub, &positions, k, grid)
}
