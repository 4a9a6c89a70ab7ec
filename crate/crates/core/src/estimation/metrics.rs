use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `sqrt(mean (θ̂ - θ)²) / π`: RMSE normalised by the π-wide scan range.
pub fn nrmse(estimates: &[f64], truth: f64) -> Result<f64> {
    if estimates.is_empty() {
        return Err(Error::Empty("nrmse needs at least one trial"));
    }
    let mse = estimates.iter().map(|e| (e - truth).powi(2)).sum::<f64>() / estimates.len() as f64;
    Ok(mse.sqrt() / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(nrmse(&[0.3, 0.3], 0.3).unwrap(), 0.0);
        assert!((nrmse(&[PI + 0.2], 0.2).unwrap() - 1.0).abs() < 1e-15);
        let v = nrmse(&[0.51, 0.49], 0.5).unwrap();
        assert!((v - 0.01 / PI).abs() < 1e-12);
        assert!((v - 0.00318).abs() < 1e-5);
        assert!(nrmse(&[], 0.0).is_err());
    }
}
