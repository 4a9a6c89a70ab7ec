//! Difference and sum co-arrays.
//!
//! Lags are stored one-sided (non-negative); the difference co-array is
//! symmetric about zero so the negative half is implied.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Result;
use crate::geometry::ElementLayout;

pub const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoarrayKind {
    Difference,
    Sum,
}

/// Lags of a co-array with their multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct LagProfile {
    kind: CoarrayKind,
    lags: Vec<u64>,
    weights: Vec<u64>,
    source_m: usize,
}

impl LagProfile {
    pub fn kind(&self) -> CoarrayKind {
        self.kind
    }

    pub fn lags(&self) -> &[u64] {
        &self.lags
    }

    /// Number of ordered element pairs realising each lag.
    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn source_m(&self) -> usize {
        self.source_m
    }

    pub fn weight(&self, lag: u64) -> u64 {
        self.lags.binary_search(&lag).map_or(0, |i| self.weights[i])
    }

    pub fn max_lag(&self) -> u64 {
        *self.lags.last().expect("profiles are never empty")
    }

    /// Largest `L` with every lag `0..=L` present.
    pub fn max_contiguous(&self) -> u64 {
        let run = self.lags.iter().enumerate().take_while(|&(i, &l)| l == i as u64).count();
        run as u64 - 1
    }

    /// Lags missing strictly between 0 and the largest lag.
    pub fn holes(&self) -> Vec<u64> {
        let mut out = Vec::new();
        let mut expect = 0u64;
        for &l in &self.lags {
            out.extend(expect..l);
            expect = l + 1;
        }
        out.retain(|&h| h > 0);
        out
    }

    /// CSV with header `lag,weight`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lag,weight\n");
        for (l, w) in self.lags.iter().zip(&self.weights) {
            let _ = writeln!(out, "{l},{w}");
        }
        out
    }
}

fn profile(kind: CoarrayKind, m: usize, counts: BTreeMap<u64, u64>) -> LagProfile {
    let (lags, weights) = counts.into_iter().unzip();
    LagProfile { kind, lags, weights, source_m: m }
}

pub fn difference_coarray(layout: &ElementLayout) -> Result<LagProfile> {
    let p = layout.integer_positions(GRID_TOL)?;
    let mut counts = BTreeMap::new();
    for (i, &a) in p.iter().enumerate() {
        *counts.entry(0).or_insert(0) += 1;
        for &b in &p[i + 1..] {
            *counts.entry(a.abs_diff(b)).or_insert(0) += 1;
        }
    }
    Ok(profile(CoarrayKind::Difference, p.len(), counts))
}

pub fn sum_coarray(layout: &ElementLayout) -> Result<LagProfile> {
    let p = layout.integer_positions(GRID_TOL)?;
    let mut counts = BTreeMap::new();
    for &a in &p {
        for &b in &p {
            *counts.entry((a + b) as u64).or_insert(0) += 1;
        }
    }
    Ok(profile(CoarrayKind::Sum, p.len(), counts))
}

pub fn max_contiguous(profile: &LagProfile) -> u64 {
    profile.max_contiguous()
}

pub fn holes(profile: &LagProfile) -> Vec<u64> {
    profile.holes()
}

/// One-sided extent of the hole-free difference co-array segment: the number
/// of sources co-array MUSIC can resolve.
pub fn sensing_dof(layout: &ElementLayout) -> Result<u64> {
    Ok(difference_coarray(layout)?.max_contiguous())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::*;
    use std::collections::BTreeSet;

    fn brute_differences(p: &[f64]) -> BTreeSet<u64> {
        let mut s = BTreeSet::new();
        for a in p {
            for b in p {
                s.insert((a - b).abs() as u64);
            }
        }
        s
    }

    #[test]
    fn compact_is_hole_free() {
        let prof = difference_coarray(&make_compact(6).unwrap()).unwrap();
        assert_eq!(prof.lags(), &[0, 1, 2, 3, 4, 5]);
        assert!(prof.holes().is_empty());
        assert_eq!(prof.max_contiguous(), 5);
    }

    #[test]
    fn mra6_profile() {
        let prof = difference_coarray(&make_mra(6).unwrap()).unwrap();
        assert_eq!(prof.lags(), (0..=13).collect::<Vec<_>>().as_slice());
        // {0,1,6,9,11,13}: lag 2 from (9,11),(11,13); lag 5 from (1,6),(6,11)
        assert_eq!(prof.weight(0), 6);
        assert_eq!(prof.weight(2), 2);
        assert_eq!(prof.weight(5), 2);
        assert_eq!(prof.weight(13), 1);
        assert_eq!(max_contiguous(&prof), 13);
        assert!(holes(&prof).is_empty());
    }

    #[test]
    fn coprime_hole_at_seven() {
        let prof = difference_coarray(&make_coprime(4, 3).unwrap()).unwrap();
        assert_eq!(prof.holes(), vec![7]);
        assert_eq!(prof.max_contiguous(), 6);
        assert_eq!(prof.lags().iter().copied().collect::<BTreeSet<_>>(), brute_differences(&[0.0, 3.0, 4.0, 6.0, 8.0, 9.0]));
    }

    #[test]
    fn nested_closed_form() {
        assert_eq!(difference_coarray(&make_nested(3, 3).unwrap()).unwrap().max_contiguous(), 11);
        for inner in 1..=10 {
            for outer in 1..=10 {
                let l = make_nested(inner, outer).unwrap();
                let prof = difference_coarray(&l).unwrap();
                assert_eq!(prof.max_contiguous() as usize, outer * (inner + 1) - 1);
            }
        }
    }

    #[test]
    fn sum_coarrays() {
        let l = make_compact(3).unwrap();
        assert_eq!(sum_coarray(&l).unwrap().lags(), &[0, 1, 2, 3, 4]);
        let l = ElementLayout::new(vec![0.0, 1.0, 3.0], Architecture::Custom).unwrap();
        let s = sum_coarray(&l).unwrap();
        assert_eq!(s.lags(), &[0, 1, 2, 3, 4, 6]);
        assert_eq!(s.holes(), vec![5]);
        assert_eq!(s.weights().iter().sum::<u64>(), 9);
        let l = make_usa(3, 2.0).unwrap();
        assert_eq!(sum_coarray(&l).unwrap().lags(), &[0, 2, 4, 6, 8]);
    }

    #[test]
    fn dof_examples() {
        assert_eq!(sensing_dof(&make_nested(8, 8).unwrap()).unwrap(), 71);
        assert_eq!(sensing_dof(&make_compact(16).unwrap()).unwrap(), 15);
        assert_eq!(sensing_dof(&make_mra(6).unwrap()).unwrap(), 13);
        assert_eq!(sensing_dof(&make_compact(6).unwrap()).unwrap(), 5);
        for m in (2..=20).step_by(2) {
            let dof = sensing_dof(&make_nested(m / 2, m / 2).unwrap()).unwrap();
            assert!(dof as usize >= m * m / 4);
        }
    }

    #[test]
    fn off_grid_rejected() {
        assert!(difference_coarray(&make_usa(32, 4.1).unwrap()).is_err());
        assert!(sum_coarray(&make_usa(32, 4.1).unwrap()).is_err());
    }

    #[test]
    fn csv_header() {
        let csv = difference_coarray(&make_compact(3).unwrap()).unwrap().to_csv();
        assert_eq!(csv, "lag,weight\n0,3\n1,2\n2,1\n");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn pair_counts_and_symmetry(gaps in proptest::collection::vec(1u32..12, 1..14)) {
                let mut p = vec![0.0];
                for g in &gaps {
                    p.push(p.last().unwrap() + *g as f64);
                }
                let m = p.len() as u64;
                let l = ElementLayout::new(p.clone(), Architecture::Custom).unwrap();
                let prof = difference_coarray(&l).unwrap();
                prop_assert_eq!(prof.weight(0), m);
                let total: u64 = prof.weights()[1..].iter().sum::<u64>() * 2 + prof.weight(0);
                prop_assert_eq!(total, m * m);
                prop_assert!(prof.lags().windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(prof.lags().iter().copied().collect::<BTreeSet<_>>(), brute_differences(&p));
            }
        }
    }
}
