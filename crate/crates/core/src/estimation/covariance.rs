use nalgebra::{DMatrix, SymmetricEigen};

use super::snapshots::SnapshotSet;
use crate::error::{invalid, Error, Result};
use crate::C64;

/// Hermitian array covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    pub matrix: DMatrix<C64>,
}

/// Eigen-decomposition sorted by descending eigenvalue.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigen {
    /// The `k` leading eigenvectors.
    pub fn leading(&self, k: usize) -> DMatrix<C64> {
        self.vectors.columns(0, k).into_owned()
    }
}

impl Covariance {
    pub fn new(matrix: DMatrix<C64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(invalid("covariance must be square and non-empty"));
        }
        Ok(Self { matrix: hermitian_part(matrix) })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn eigen(&self) -> Eigen {
        let dec = SymmetricEigen::new(self.matrix.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| dec.eigenvalues[b].total_cmp(&dec.eigenvalues[a]));
        let values = order.iter().map(|&i| dec.eigenvalues[i]).collect();
        let vectors = DMatrix::from_columns(
            &order.iter().map(|&i| dec.eigenvectors.column(i)).collect::<Vec<_>>(),
        );
        Eigen { values, vectors }
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diagonal().iter().map(|z| z.re).sum()
    }
}

fn hermitian_part(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj) * C64::new(0.5, 0.0)
}

/// `R = X Xᴴ / T`, Hermitian-symmetrised.
pub fn sample_covariance(snap: &SnapshotSet) -> Covariance {
    let t = snap.snapshots() as f64;
    let r = &snap.data * snap.data.adjoint() / C64::new(t, 0.0);
    Covariance { matrix: hermitian_part(r) }
}

/// Forward spatial smoothing over the `M - L + 1` sliding sub-arrays of
/// length `L`. Only defined for uniformly spaced layouts.
pub fn spatial_smoothing(snap: &SnapshotSet, subarray_len: usize) -> Result<Covariance> {
    let m = snap.layout.len();
    if !snap.layout.is_uniform(1e-9) {
        return Err(Error::NonUniformLayout);
    }
    if subarray_len == 0 || subarray_len > m {
        return Err(invalid(format!("sub-array length {subarray_len} must be in 1..={m}")));
    }
    let full = sample_covariance(snap).matrix;
    let count = m - subarray_len + 1;
    let mut acc = DMatrix::<C64>::zeros(subarray_len, subarray_len);
    for i in 0..count {
        acc += full.view((i, i), (subarray_len, subarray_len));
    }
    Ok(Covariance { matrix: acc / C64::new(count as f64, 0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{simulate_snapshots, Source, SourceScene};
    use crate::geometry::*;

    #[test]
    fn ones_snapshot() {
        let l = make_compact(3).unwrap();
        let data = DMatrix::from_element(3, 1, C64::new(1.0, 0.0));
        let snap = SnapshotSet::new(data, l, 1.0).unwrap();
        let r = sample_covariance(&snap);
        assert_eq!(r.matrix, DMatrix::from_element(3, 3, C64::new(1.0, 0.0)));
    }

    #[test]
    fn noise_only_tends_to_identity() {
        let l = make_compact(4).unwrap();
        let t = 100_000;
        let snap = simulate_snapshots(&l, 1.0, &SourceScene::uncorrelated(vec![]), t, 2.0, 3).unwrap();
        let r = sample_covariance(&snap);
        let target = DMatrix::<C64>::identity(4, 4) * C64::new(2.0, 0.0);
        let dev = crate::max_abs((r.matrix - target).iter());
        assert!(dev < 5.0 / (t as f64).sqrt(), "{dev}");
    }

    #[test]
    fn smoothing_full_length_is_identity_op() {
        let l = make_compact(6).unwrap();
        let scene = SourceScene::coherent(vec![Source::far(0.1, 1.0), Source::far(-0.4, 1.0)]);
        let snap = simulate_snapshots(&l, 1.0, &scene, 30, 0.1, 8).unwrap();
        assert_eq!(spatial_smoothing(&snap, 6).unwrap(), sample_covariance(&snap));
        assert!(spatial_smoothing(&snap, 7).is_err());
        let na = simulate_snapshots(&make_nested(3, 3).unwrap(), 1.0, &scene, 30, 0.1, 8).unwrap();
        assert_eq!(spatial_smoothing(&na, 4), Err(Error::NonUniformLayout));
    }

    #[test]
    fn smoothing_restores_rank() {
        let l = make_compact(16).unwrap();
        let scene = SourceScene::coherent(vec![Source::far(0.2f64.asin(), 100.0), Source::far(0.45f64.asin(), 100.0)]);
        let snap = simulate_snapshots(&l, 1.0, &scene, 1000, 1.0, 4).unwrap();
        let plain = sample_covariance(&snap).eigen();
        let smooth = spatial_smoothing(&snap, 8).unwrap().eigen();
        assert!(plain.values[1] < 3.0, "plain covariance is effectively rank one");
        assert!(smooth.values[1] > 10.0 * smooth.values[2], "{:?}", &smooth.values[..3]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn covariance_hermitian_psd(seed in any::<u64>(), t in 1usize..20, angle in -1.2f64..1.2) {
                let l = make_coprime(3, 4).unwrap();
                let scene = SourceScene::uncorrelated(vec![Source::far(angle, 1.5)]);
                let snap = simulate_snapshots(&l, 1.0, &scene, t, 0.2, seed).unwrap();
                let r = sample_covariance(&snap);
                prop_assert!(crate::max_abs((&r.matrix - r.matrix.adjoint()).iter()) < 1e-12);
                prop_assert!(r.eigen().values.iter().all(|&v| v > -1e-9));
                prop_assert!(r.trace() >= 0.0);
            }
        }
    }
}
