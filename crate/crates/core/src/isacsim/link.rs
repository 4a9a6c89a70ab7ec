use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use super::config::{ChannelModel, CombinerKind, UserDisk};
use crate::error::{invalid, Error, Result};
use crate::estimation::{steer_far, steer_near};
use crate::geometry::ElementLayout;
use crate::patterns::PolarPoint;
use crate::seed;
use crate::C64;

/// Time-frequency resource block of every user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    pub group: Vec<usize>,
    pub count: usize,
}

impl GroupAssignment {
    /// Everyone shares one block.
    pub fn single(users: usize) -> Self {
        Self { group: vec![0; users], count: 1.min(users) }
    }
}

/// Area-uniform drop of `k` users in the disk, as (range, angle) about the
/// array origin. Angles are measured from broadside (the array lies along x).
pub fn drop_users(rng_seed: u64, disk: &UserDisk, k: usize) -> Result<Vec<PolarPoint>> {
    if !(disk.radius >= 0.0) {
        return Err(invalid("disk radius must be non-negative"));
    }
    let (cx, cy) = (disk.center_range * disk.center_angle.sin(), disk.center_range * disk.center_angle.cos());
    if cy - disk.radius <= 0.0 {
        return Err(invalid("user disk crosses the array line"));
    }
    let mut rng = seed::rng(rng_seed);
    Ok((0..k)
        .map(|_| {
            let rho = disk.radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            let (x, y) = (cx + rho * phi.cos(), cy + rho * phi.sin());
            PolarPoint { range: x.hypot(y), angle: x.atan2(y) }
        })
        .collect())
}

/// Free-space amplitude `λ / (4π r)`.
pub fn free_space_gain(wavelength: f64, range: f64) -> f64 {
    wavelength / (4.0 * PI * range)
}

/// `M × K` channel matrix; column `k` is `g_k` times the far- or near-field
/// steering vector of user `k`.
pub fn user_channels(
    layout: &ElementLayout,
    wavelength: f64,
    users: &[PolarPoint],
    model: ChannelModel,
) -> Result<DMatrix<C64>> {
    let mut h = DMatrix::zeros(layout.len(), users.len());
    for (k, u) in users.iter().enumerate() {
        let steer = match model {
            ChannelModel::FarField => steer_far(layout, u.angle),
            ChannelModel::NearField => steer_near(layout, wavelength, u.range, u.angle)?,
        };
        h.set_column(k, &(steer * C64::new(free_space_gain(wavelength, u.range), 0.0)));
    }
    Ok(h)
}

/// MRC (`W = H`) or ZF (`W = H (HᴴH)⁻¹`).
pub fn combiner(h: &DMatrix<C64>, kind: CombinerKind) -> Result<DMatrix<C64>> {
    match kind {
        CombinerKind::Mrc => Ok(h.clone()),
        CombinerKind::Zf => {
            if h.ncols() > h.nrows() {
                return Err(Error::RankDeficient("more users than antennas"));
            }
            let gram = h.adjoint() * h;
            let chol = gram.cholesky().ok_or(Error::RankDeficient("user channels are not full column rank"))?;
            let w = h * chol.inverse();
            // Cholesky succeeds on nearly singular Gram matrices; check the result
            let check = w.adjoint() * h - DMatrix::<C64>::identity(h.ncols(), h.ncols());
            if check.iter().any(|z| !(z.norm() < 1e-6)) {
                return Err(Error::RankDeficient("user channels are numerically rank deficient"));
            }
            Ok(w)
        }
    }
}

/// Per-user SINR. Only users in the same group interfere.
pub fn sinr_per_user(
    w: &DMatrix<C64>,
    h: &DMatrix<C64>,
    tx_power: f64,
    noise_power: f64,
    groups: &GroupAssignment,
) -> Vec<f64> {
    let cross = w.adjoint() * h;
    (0..h.ncols())
        .map(|k| {
            let signal = tx_power * cross[(k, k)].norm_sqr();
            let interference: f64 = (0..h.ncols())
                .filter(|&j| j != k && groups.group[j] == groups.group[k])
                .map(|j| tx_power * cross[(k, j)].norm_sqr())
                .sum();
            let noise = noise_power * w.column(k).norm_squared();
            signal / (interference + noise)
        })
        .collect()
}

/// `Σ_k log2(1 + SINR_k) / G`, equal time sharing across the groups.
pub fn sum_rate(sinrs: &[f64], groups: &GroupAssignment) -> f64 {
    sinrs.iter().map(|s| (1.0 + s).log2()).sum::<f64>() / groups.count.max(1) as f64
}

/// Normalised channel correlation `|h_jᴴ h_k| / (‖h_j‖ ‖h_k‖)`.
pub fn correlation_matrix(h: &DMatrix<C64>) -> DMatrix<f64> {
    let norms: Vec<f64> = h.column_iter().map(|c| c.norm()).collect();
    let gram = h.adjoint() * h;
    DMatrix::from_fn(h.ncols(), h.ncols(), |i, j| gram[(i, j)].norm() / (norms[i] * norms[j]))
}

/// Greedy colouring of the conflict graph (edge when the correlation
/// exceeds `tau`), visiting users by descending degree.
pub fn group_users(h: &DMatrix<C64>, tau: f64) -> GroupAssignment {
    let k = h.ncols();
    if k == 0 {
        return GroupAssignment { group: vec![], count: 0 };
    }
    let corr = correlation_matrix(h);
    let conflict = |i: usize, j: usize| i != j && corr[(i, j)] > tau;
    let degree: Vec<usize> = (0..k).map(|i| (0..k).filter(|&j| conflict(i, j)).count()).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| degree[b].cmp(&degree[a]).then(a.cmp(&b)));
    let mut group = vec![usize::MAX; k];
    let mut count = 0;
    for &u in &order {
        let mut c = 0;
        while (0..k).any(|v| group[v] == c && conflict(u, v)) {
            c += 1;
        }
        group[u] = c;
        count = count.max(c + 1);
    }
    GroupAssignment { group, count }
}

/// Thresholds tried by [`rate_optimized_groups`].
pub const THRESHOLD_LADDER: [f64; 9] = [0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

/// Greedy colouring at every threshold of [`THRESHOLD_LADDER`], keeping the
/// assignment with the highest sum rate predicted from `h` itself (the
/// channels the base station believes in). Ties keep the lower threshold.
pub fn rate_optimized_groups(
    h: &DMatrix<C64>,
    kind: CombinerKind,
    tx_power: f64,
    noise_power: f64,
) -> Result<GroupAssignment> {
    let w = combiner(h, kind)?;
    let mut best: Option<(f64, GroupAssignment)> = None;
    for &tau in &THRESHOLD_LADDER {
        let g = group_users(h, tau);
        if best.as_ref().is_some_and(|(_, b)| *b == g) {
            continue;
        }
        let rate = sum_rate(&sinr_per_user(&w, h, tx_power, noise_power, &g), &g);
        if best.as_ref().is_none_or(|(r, _)| rate > *r) {
            best = Some((rate, g));
        }
    }
    Ok(best.expect("ladder is non-empty").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;

    fn lambda() -> f64 {
        crate::wavelength(28e9)
    }

    #[test]
    fn drops() {
        let disk = UserDisk { center_range: 200.0, center_angle: 0.3, radius: 0.0 };
        let pts = drop_users(1, &disk, 5).unwrap();
        assert!(pts.iter().all(|p| (p.range - 200.0).abs() < 1e-9 && (p.angle - 0.3).abs() < 1e-12));
        let disk = UserDisk { radius: 20.0, ..disk };
        assert_eq!(drop_users(4, &disk, 10).unwrap(), drop_users(4, &disk, 10).unwrap());
        assert!(drop_users(4, &UserDisk { radius: 250.0, ..disk }, 1).is_err());

        let n = 100_000;
        let (cx, cy) = (200.0 * 0.3f64.sin(), 200.0 * 0.3f64.cos());
        let msd = drop_users(9, &disk, n)
            .unwrap()
            .iter()
            .map(|p| (p.range * p.angle.sin() - cx).powi(2) + (p.range * p.angle.cos() - cy).powi(2))
            .sum::<f64>()
            / n as f64;
        assert!((msd / 200.0 - 1.0).abs() < 0.01, "{msd}");
    }

    #[test]
    fn channel_examples() {
        let l = make_usa(128, 4.1).unwrap();
        let users = [PolarPoint { range: 175.0, angle: 0.0 }, PolarPoint { range: 225.0, angle: 0.0 }];
        let far = user_channels(&l, lambda(), &users, ChannelModel::FarField).unwrap();
        let g = free_space_gain(lambda(), 175.0);
        assert!((far.column(0).norm() - g * 128f64.sqrt()).abs() < 1e-12 * g);
        let near = user_channels(&l, lambda(), &users, ChannelModel::NearField).unwrap();
        assert!(correlation_matrix(&near)[(0, 1)] < 0.9);
        assert!(correlation_matrix(&far)[(0, 1)] > 1.0 - 1e-12);
        let twins = user_channels(&l, lambda(), &[users[0], users[0]], ChannelModel::NearField).unwrap();
        assert_eq!(twins.column(0), twins.column(1));
    }

    #[test]
    fn range_separated_users_conditioning() {
        // same direction, different ranges: only near-field curvature separates them
        let users: Vec<PolarPoint> = [150.0, 200.0, 250.0].iter().map(|&r| PolarPoint { range: r, angle: 0.0 }).collect();
        let cond = |l: ElementLayout| {
            let h = user_channels(&l, lambda(), &users, ChannelModel::NearField).unwrap();
            let s = h.singular_values();
            s.max() / s.min()
        };
        let (ca, usa, na) = (
            cond(make_compact(128).unwrap()),
            cond(make_usa(128, 4.1).unwrap()),
            cond(make_nested(64, 64).unwrap()),
        );
        assert!(ca > usa && usa > na, "{ca} {usa} {na}");
    }

    #[test]
    fn combiners() {
        let l = make_nested(4, 4).unwrap();
        let users: Vec<PolarPoint> = [-0.6, -0.1, 0.3, 0.8]
            .iter()
            .map(|&a| PolarPoint { range: 50.0, angle: a })
            .collect();
        let h = user_channels(&l, lambda(), &users, ChannelModel::NearField).unwrap();
        let w = combiner(&h, CombinerKind::Zf).unwrap();
        let eye = DMatrix::<C64>::identity(4, 4);
        assert!(crate::max_abs((w.adjoint() * &h - eye).iter()) < 1e-10);
        let one = GroupAssignment::single(4);
        let snr = sinr_per_user(&w, &h, 1.0, 1e-12, &one);
        let cross = w.adjoint() * &h;
        for k in 0..4 {
            let interf: f64 = (0..4).filter(|&j| j != k).map(|j| cross[(k, j)].norm_sqr()).sum();
            assert!(interf < 1e-12 * cross[(k, k)].norm_sqr());
            let want = 1.0 / (1e-12 * w.column(k).norm_squared());
            assert!((snr[k] / want - 1.0).abs() < 1e-6);
        }
        let mut bad = h.clone();
        let c = bad.column(0).into_owned();
        bad.set_column(2, &c);
        assert!(combiner(&bad, CombinerKind::Zf).is_err());

        // single user MRC: SNR = P‖h‖²/σ²
        let h1 = h.columns(0, 1).into_owned();
        let s = sinr_per_user(&h1, &h1, 2.0, 0.5, &GroupAssignment::single(1))[0];
        assert!((s - 2.0 * h1.norm_squared() / 0.5).abs() < 1e-9 * s);
        // orthogonal columns: MRC and ZF agree up to scaling
        let hc = user_channels(&make_compact(8).unwrap(), 1.0, &[PolarPoint { range: 1e9, angle: 0.0 }, PolarPoint { range: 1e9, angle: 0.25f64.asin() }], ChannelModel::FarField).unwrap();
        let wz = combiner(&hc, CombinerKind::Zf).unwrap();
        for k in 0..2 {
            let ratio = wz[(0, k)] / hc[(0, k)];
            assert!(crate::max_abs((wz.column(k) - hc.column(k) * ratio).iter()) < 1e-9 * wz.column(k).norm());
        }
    }

    #[test]
    fn rates_and_groups() {
        let g1 = GroupAssignment::single(4);
        assert!((sum_rate(&[1.0; 4], &g1) - 4.0).abs() < 1e-12);
        let g2 = GroupAssignment { group: vec![0, 1, 0, 1], count: 2 };
        assert!((sum_rate(&[1.0; 4], &g2) - 2.0).abs() < 1e-12);

        // users in different groups never interfere
        let h = DMatrix::from_fn(3, 2, |i, j| C64::new(1.0 + i as f64, j as f64));
        let s = sinr_per_user(&h, &h, 1.0, 1.0, &GroupAssignment { group: vec![0, 1], count: 2 });
        assert!((s[0] - h.column(0).norm_squared()).abs() < 1e-12);

        let l = make_usa(16, 4.0).unwrap();
        let users: Vec<PolarPoint> =
            [0.1, 0.6, -0.5].iter().map(|&u: &f64| PolarPoint { range: 1e6, angle: u.asin() }).collect();
        let h = user_channels(&l, 1.0, &users, ChannelModel::FarField).unwrap();
        assert_eq!(group_users(&h, 1.0).count, 1);
        let all = group_users(&h, 0.0);
        assert_eq!(all.count, 3);
        // 0.1 and 0.6 sit on each other's grating lobes
        let g = group_users(&h, 0.5);
        assert_ne!(g.group[0], g.group[1]);
        assert!(correlation_matrix(&h)[(0, 1)] > 0.999);
    }

    #[test]
    fn optimised_grouping_never_loses() {
        let disk = UserDisk { center_range: 200.0, center_angle: 0.0, radius: 5.0 };
        let users = drop_users(3, &disk, 20).unwrap();
        let h = user_channels(&make_compact(64).unwrap(), lambda(), &users, ChannelModel::NearField).unwrap();
        let noise = free_space_gain(lambda(), 200.0).powi(2);
        let best = rate_optimized_groups(&h, CombinerKind::Mrc, 1.0, noise).unwrap();
        let rate = |g: &GroupAssignment| sum_rate(&sinr_per_user(&h, &h, 1.0, noise, g), g);
        for tau in THRESHOLD_LADDER {
            assert!(rate(&best) >= rate(&group_users(&h, tau)));
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]
            #[test]
            fn proper_colouring(seed in any::<u64>(), tau in 0.0f64..1.0, radius in 0.0f64..40.0) {
                let disk = UserDisk { center_range: 60.0, center_angle: 0.2, radius };
                let users = drop_users(seed, &disk, 12).unwrap();
                let h = user_channels(&make_nested(4, 4).unwrap(), lambda(), &users, ChannelModel::NearField).unwrap();
                let g = group_users(&h, tau);
                let corr = correlation_matrix(&h);
                prop_assert!(g.count >= 1 && g.count <= 12);
                for i in 0..12 {
                    prop_assert!(g.group[i] < g.count);
                    for j in 0..12 {
                        if i != j && g.group[i] == g.group[j] {
                            prop_assert!(corr[(i, j)] <= tau);
                        }
                    }
                }
            }

            #[test]
            fn rate_falls_with_noise(seed in any::<u64>(), n1 in 1e-3f64..1.0, extra in 1.0f64..10.0) {
                let disk = UserDisk { center_range: 60.0, center_angle: 0.0, radius: 10.0 };
                let users = drop_users(seed, &disk, 6).unwrap();
                let h = user_channels(&make_compact(16).unwrap(), lambda(), &users, ChannelModel::NearField).unwrap();
                let g = group_users(&h, 0.5);
                let scale = h.norm_squared();
                let r1 = sum_rate(&sinr_per_user(&h, &h, 1.0, n1 * scale, &g), &g);
                let r2 = sum_rate(&sinr_per_user(&h, &h, 1.0, n1 * extra * scale, &g), &g);
                prop_assert!(r2 <= r1);
            }
        }
    }
}
