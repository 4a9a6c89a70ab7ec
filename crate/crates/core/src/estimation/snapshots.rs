use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::steering::{steer_far_sin, steer_near_sin};
use crate::error::{invalid, Result};
use crate::geometry::ElementLayout;
use crate::seed;
use crate::C64;

/// One emitter. `range: None` selects the far-field (plane-wave) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Source {
    pub angle: f64,
    pub range: Option<f64>,
    pub power: f64,
}

impl Source {
    pub fn far(angle: f64, power: f64) -> Self {
        Self { angle, range: None, power }
    }

    pub fn near(angle: f64, range: f64, power: f64) -> Self {
        Self { angle, range: Some(range), power }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceScene {
    pub sources: Vec<Source>,
    /// All sources share one waveform when set.
    pub coherent: bool,
}

impl SourceScene {
    pub fn uncorrelated(sources: Vec<Source>) -> Self {
        Self { sources, coherent: false }
    }

    pub fn coherent(sources: Vec<Source>) -> Self {
        Self { sources, coherent: true }
    }

    fn validate(&self) -> Result<()> {
        for s in &self.sources {
            if !(s.power > 0.0) {
                return Err(invalid(format!("source power {} must be positive", s.power)));
            }
            if !(s.angle.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(invalid(format!("source angle {} outside (-π/2, π/2)", s.angle)));
            }
            if let Some(r) = s.range {
                if !(r > 0.0) {
                    return Err(invalid(format!("source range {r} must be positive")));
                }
            }
        }
        Ok(())
    }
}

/// Array observations, one column per snapshot.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub data: DMatrix<C64>,
    pub layout: ElementLayout,
    pub wavelength: f64,
}

impl SnapshotSet {
    pub fn new(data: DMatrix<C64>, layout: ElementLayout, wavelength: f64) -> Result<Self> {
        if data.nrows() != layout.len() {
            return Err(invalid("snapshot rows must match the element count"));
        }
        if data.ncols() == 0 {
            return Err(invalid("need at least one snapshot"));
        }
        Ok(Self { data, layout, wavelength })
    }

    pub fn snapshots(&self) -> usize {
        self.data.ncols()
    }
}

/// Circularly-symmetric complex Gaussian sample with the given variance.
pub(crate) fn complex_gaussian<R: Rng>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}

/// Steering vector of a source: near field when it has a range.
pub(crate) fn source_steering(layout: &ElementLayout, wavelength: f64, s: &Source) -> DVector<C64> {
    match s.range {
        Some(r) => steer_near_sin(&layout.positions_m(wavelength), wavelength, r, s.angle.sin()),
        None => steer_far_sin(layout.positions(), s.angle.sin()),
    }
}

/// Draws `X = A S + N`; fully determined by `rng_seed`.
pub fn simulate_snapshots(
    layout: &ElementLayout,
    wavelength: f64,
    scene: &SourceScene,
    snapshots: usize,
    noise_power: f64,
    rng_seed: u64,
) -> Result<SnapshotSet> {
    if snapshots == 0 {
        return Err(invalid("need at least one snapshot"));
    }
    if !(noise_power >= 0.0) {
        return Err(invalid("noise power must be non-negative"));
    }
    scene.validate()?;
    let mut rng = seed::rng(rng_seed);
    let m = layout.len();
    let k = scene.sources.len();
    let columns: Vec<_> = scene.sources.iter().map(|s| source_steering(layout, wavelength, s)).collect();
    let mut waveforms = DMatrix::<C64>::zeros(k, snapshots);
    if scene.coherent {
        let shared: Vec<C64> = (0..snapshots).map(|_| complex_gaussian(&mut rng, 1.0)).collect();
        for (i, s) in scene.sources.iter().enumerate() {
            let amp = s.power.sqrt();
            for t in 0..snapshots {
                waveforms[(i, t)] = shared[t] * amp;
            }
        }
    } else {
        for (i, s) in scene.sources.iter().enumerate() {
            for t in 0..snapshots {
                waveforms[(i, t)] = complex_gaussian(&mut rng, s.power);
            }
        }
    }
    let mut data = if k == 0 { DMatrix::zeros(m, snapshots) } else { DMatrix::from_columns(&columns) * waveforms };
    if noise_power > 0.0 {
        for t in 0..snapshots {
            for i in 0..m {
                data[(i, t)] += complex_gaussian(&mut rng, noise_power);
            }
        }
    }
    SnapshotSet::new(data, layout.clone(), wavelength)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimation::{sample_covariance, steer_far};
    use crate::geometry::*;

    #[test]
    fn noiseless_single_snapshot_is_rank_one() {
        let l = make_nested(3, 3).unwrap();
        let scene = SourceScene::uncorrelated(vec![Source::far(0.3, 2.0)]);
        let snap = simulate_snapshots(&l, 1.0, &scene, 1, 0.0, 5).unwrap();
        let a = steer_far(&l, 0.3);
        let x = snap.data.column(0);
        let ratio = x[0] / a[0];
        for i in 0..l.len() {
            assert!((x[i] - ratio * a[i]).norm() < 1e-12);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let l = make_compact(8).unwrap();
        let scene = SourceScene::uncorrelated(vec![Source::far(0.1, 1.0), Source::near(-0.2, 3.0, 0.5)]);
        let a = simulate_snapshots(&l, 0.01, &scene, 50, 0.3, 99).unwrap();
        let b = simulate_snapshots(&l, 0.01, &scene, 50, 0.3, 99).unwrap();
        let c = simulate_snapshots(&l, 0.01, &scene, 50, 0.3, 100).unwrap();
        assert_eq!(a.data, b.data);
        assert_ne!(a.data, c.data);
    }

    #[test]
    fn coherent_sources_give_rank_one_covariance() {
        let l = make_compact(16).unwrap();
        let scene = SourceScene::coherent(vec![Source::far(0.1, 1.0), Source::far(0.5, 1.0)]);
        let snap = simulate_snapshots(&l, 1.0, &scene, 200, 0.0, 1).unwrap();
        let eig = sample_covariance(&snap).eigen();
        assert!(eig.values[1] < 1e-9 * eig.values[0]);
        let scene = SourceScene::uncorrelated(scene.sources);
        let snap = simulate_snapshots(&l, 1.0, &scene, 200, 0.0, 1).unwrap();
        let eig = sample_covariance(&snap).eigen();
        assert!(eig.values[1] > 0.1 * eig.values[0]);
    }

    #[test]
    fn rejects_bad_scenes() {
        let l = make_compact(4).unwrap();
        let bad = SourceScene::uncorrelated(vec![Source::far(2.0, 1.0)]);
        assert!(simulate_snapshots(&l, 1.0, &bad, 1, 0.0, 0).is_err());
        let bad = SourceScene::uncorrelated(vec![Source::far(0.0, 0.0)]);
        assert!(simulate_snapshots(&l, 1.0, &bad, 1, 0.0, 0).is_err());
        let ok = SourceScene::uncorrelated(vec![]);
        assert!(simulate_snapshots(&l, 1.0, &ok, 0, 0.0, 0).is_err());
    }
}
