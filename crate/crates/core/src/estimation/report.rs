use std::fmt::Write as _;

/// Sampled pseudo-spectrum kept for diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Spectrum {
    /// Grid values (sin θ for angle scans, metres for range scans).
    pub grid: Vec<f64>,
    /// Linear pseudo-spectrum.
    pub values: Vec<f64>,
}

impl Spectrum {
    pub fn to_csv(&self, grid_name: &str) -> String {
        let mut out = format!("{grid_name},pseudo_spectrum\n");
        for (g, v) in self.grid.iter().zip(&self.values) {
            let _ = writeln!(out, "{g},{v}");
        }
        out
    }
}

/// Estimator output. Angles are sorted ascending; `ranges` (when present)
/// follow the same order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EstimateReport {
    pub angles: Vec<f64>,
    pub ranges: Vec<f64>,
    pub spectrum: Option<Spectrum>,
    /// Residual energy after each greedy pick (OMP only).
    pub residual_energy: Vec<f64>,
    /// Set when a range search peaked on the grid boundary or was flat, i.e.
    /// the source looks like it sits in the far field.
    pub far_field_degenerate: bool,
}

impl EstimateReport {
    pub fn empty() -> Self {
        Self::default()
    }

    pub(crate) fn from_angles(mut angles: Vec<f64>) -> Self {
        angles.sort_by(f64::total_cmp);
        Self { angles, ..Self::default() }
    }

    pub(crate) fn from_polar(mut pairs: Vec<(f64, f64)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        Self {
            angles: pairs.iter().map(|p| p.0).collect(),
            ranges: pairs.iter().map(|p| p.1).collect(),
            ..Self::default()
        }
    }

    pub fn with_spectrum(mut self, spectrum: Spectrum) -> Self {
        self.spectrum = Some(spectrum);
        self
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polar_pairs_sorted_together() {
        let r = EstimateReport::from_polar(vec![(0.4, 10.0), (-0.2, 30.0), (0.1, 20.0)]);
        assert_eq!(r.angles, vec![-0.2, 0.1, 0.4]);
        assert_eq!(r.ranges, vec![30.0, 20.0, 10.0]);
        let s = Spectrum { grid: vec![0.0, 0.5], values: vec![1.0, 2.5] };
        assert_eq!(s.to_csv("sin_theta"), "sin_theta,pseudo_spectrum\n0,1\n0.5,2.5\n");
    }
}
