//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Every entry point takes an architecture description such as
//! `usa m=16 eta=4` and returns plain numbers or text, so the page needs no
//! glue beyond what `wasm-bindgen` generates.

use sparse_mimo::coarray::{difference_coarray, sensing_dof};
use sparse_mimo::geometry::ElementLayout;
use sparse_mimo::patterns::{angular_resolution, farfield_pattern, nearfield_focus_pattern, PolarPoint};
use sparse_mimo::wave::{geomspace_through, linspace};
use sparse_mimo::{wavelength, Architecture};
use wasm_bindgen::prelude::*;

fn layout(desc: &str) -> Result<ElementLayout, JsError> {
    let arch: Architecture = desc.trim().parse()?;
    Ok(arch.build()?)
}

/// Element positions in units of λ/2.
#[wasm_bindgen]
pub fn positions(desc: &str) -> Result<Vec<f64>, JsError> {
    Ok(layout(desc)?.positions().to_vec())
}

/// Far-field gain sampled at `points` values of Δθ spanning [-1, 1].
#[wasm_bindgen]
pub fn pattern(desc: &str, points: usize) -> Result<Vec<f64>, JsError> {
    let grid = linspace(-1.0, 1.0, points.max(2));
    Ok(farfield_pattern(&layout(desc)?, &grid)?.gain)
}

/// Null-to-null half width of the main lobe, on a 20001-point grid.
#[wasm_bindgen]
pub fn resolution(desc: &str) -> Result<f64, JsError> {
    let curve = farfield_pattern(&layout(desc)?, &linspace(-1.0, 1.0, 20001))?;
    Ok(angular_resolution(&curve)?)
}

/// Focusing gain at broadside along range, for a beam focused at
/// `focus_m`. Returns `[range, gain]` pairs flattened.
#[wasm_bindgen]
pub fn focus_depth(desc: &str, carrier_hz: f64, focus_m: f64, points: usize) -> Result<Vec<f64>, JsError> {
    let half = (points / 2).max(1);
    let ranges = geomspace_through(focus_m / 10.0, focus_m, focus_m * 100.0, half, half);
    let focus = PolarPoint { range: focus_m, angle: 0.0 };
    let grid = nearfield_focus_pattern(&layout(desc)?, wavelength(carrier_hz), focus, &ranges, &[0.0])?;
    Ok(grid.ranges.iter().zip(&grid.gain).flat_map(|(r, g)| [*r, *g]).collect())
}

/// Text report of the difference co-array.
#[wasm_bindgen]
pub fn coarray(desc: &str) -> Result<String, JsError> {
    let l = layout(desc)?;
    let p = difference_coarray(&l)?;
    let holes = p.holes();
    let holes = if holes.is_empty() {
        "none".to_string()
    } else {
        holes.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
    };
    Ok(format!(
        "elements: {}\nmax lag: {}\ncontiguous to: {}\nholes: {holes}\nsensing DoF: {}\nweights: {:?}",
        l.len(),
        p.max_lag(),
        p.max_contiguous(),
        sensing_dof(&l)?,
        p.weights()
    ))
}
