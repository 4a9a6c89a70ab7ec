use nalgebra::DVector;

use super::covariance::sample_covariance;
use super::report::EstimateReport;
use super::snapshots::SnapshotSet;
use super::steering::{steer_far_sin, steer_near_sin};
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Simultaneous OMP over a polar (angle × range ring) dictionary. The
/// measurement is the `K`-dimensional dominant part of the sample
/// covariance, `Y = E_K Λ_K^{1/2}`. An infinite ring selects far-field atoms.
///
/// `residual_energy[i]` is `‖Y - P Y‖²_F` after pick `i + 1`.
pub fn polar_omp(snap: &SnapshotSet, k: usize, angle_grid: &[f64], range_rings: &[f64]) -> Result<EstimateReport> {
    if k == 0 {
        return Err(invalid("OMP needs at least one source"));
    }
    let atoms_n = angle_grid.len() * range_rings.len();
    if atoms_n < k {
        return Err(Error::TooManySources { requested: k, available: atoms_n });
    }
    if range_rings.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("range rings must be positive"));
    }
    let m = snap.layout.len();
    if k > m {
        return Err(Error::TooManySources { requested: k, available: m });
    }
    let x_m = snap.layout.positions_m(snap.wavelength);
    let mut atoms = Vec::with_capacity(atoms_n);
    let mut coords = Vec::with_capacity(atoms_n);
    for &r in range_rings {
        for &theta in angle_grid {
            let a = if r.is_infinite() {
                steer_far_sin(snap.layout.positions(), theta.sin())
            } else {
                steer_near_sin(&x_m, snap.wavelength, r, theta.sin())
            };
            atoms.push(a);
            coords.push((theta, r));
        }
    }

    let eig = sample_covariance(snap).eigen();
    let mut y = eig.leading(k);
    for (j, mut col) in y.column_iter_mut().enumerate() {
        col *= C64::new(eig.values[j].max(0.0).sqrt(), 0.0);
    }

    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(k);
    let mut residual = y.clone();
    let mut picks = Vec::with_capacity(k);
    let mut energies = Vec::with_capacity(k);
    for _ in 0..k {
        let (best, _) = atoms
            .iter()
            .enumerate()
            .filter(|(i, _)| !picks.contains(i))
            .map(|(i, a)| (i, (a.adjoint() * &residual).norm_squared()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dictionary larger than K");
        picks.push(best);
        // two Gram-Schmidt passes keep the basis orthonormal to rounding
        let mut q = atoms[best].clone();
        for _ in 0..2 {
            for b in &basis {
                let c = b.dotc(&q);
                q -= b * c;
            }
        }
        let norm = q.norm();
        if norm > 1e-12 * atoms[best].norm() {
            q /= C64::new(norm, 0.0);
            let coef = q.adjoint() * &residual;
            residual -= &q * coef;
            basis.push(q);
        }
        energies.push(residual.norm_squared());
    }
    let mut report = EstimateReport::from_polar(picks.iter().map(|&i| coords[i]).collect());
    report.residual_energy = energies;
    Ok(report)
}
