use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{invalid, Result};
use crate::geometry::ElementLayout;
use crate::wave::{far_phase, path_excess, unit_phasor};
use crate::C64;

/// Far-field steering vector `[a]_m = exp(jπ p_m sin θ)`.
pub fn steer_far(layout: &ElementLayout, angle: f64) -> DVector<C64> {
    steer_far_sin(layout.positions(), angle.sin())
}

/// Far-field steering vector parameterised directly by `u = sin θ`.
pub fn steer_far_sin(positions: &[f64], u: f64) -> DVector<C64> {
    DVector::from_iterator(positions.len(), positions.iter().map(|&p| unit_phasor(far_phase(p, u))))
}

/// Near-field steering vector `[a]_m = exp(-j 2π/λ (r_m - r))`, phase
/// referenced to the origin element.
pub fn steer_near(
    layout: &ElementLayout,
    wavelength: f64,
    range: f64,
    angle: f64,
) -> Result<DVector<C64>> {
    if !(range > 0.0) {
        return Err(invalid(format!("range {range} must be positive")));
    }
    Ok(steer_near_sin(&layout.positions_m(wavelength), wavelength, range, angle.sin()))
}

pub(crate) fn steer_near_sin(x_m: &[f64], wavelength: f64, range: f64, u: f64) -> DVector<C64> {
    let k = 2.0 * PI / wavelength;
    DVector::from_iterator(x_m.len(), x_m.iter().map(|&x| unit_phasor(-k * path_excess(x, range, u))))
}
