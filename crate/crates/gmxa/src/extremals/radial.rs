use crate::error::{ensure, Result};
use crate::gridops::GridFunction;

/// Outer radius factor c in 1_{1 ≤ |x| ≤ cN}.
pub const RADIAL_FACTOR: f64 = 2.0;

/// f(x) = |x|^{-1}·1_{1 ≤ |x| ≤ cN} on the centered grid [−half, half]² with spacing h.
pub fn radial_log_example(n_param: usize, half: f64, h: f64) -> Result<GridFunction> {
    radial_log_example_with(n_param, half, h, RADIAL_FACTOR)
}

pub fn radial_log_example_with(n_param: usize, half: f64, h: f64, c: f64) -> Result<GridFunction> {
    ensure!(n_param >= 1, Domain, "N must be positive");
    ensure!(c >= 1.0, Domain, "radius factor must be at least 1");
    let outer = c * n_param as f64;
    ensure!(half >= outer.max(2.0 * n_param as f64), Domain, "grid half-width {half} does not contain B(2N) and the annulus of radius {outer}");
    GridFunction::centered(2, half, h, |x| {
        let r = x[0].hypot(x[1]);
        if (1.0..=outer).contains(&r) {
            1.0 / r
        } else {
            0.0
        }
    })
}

/// Closed form ‖f‖₂² = 2π·log(cN).
pub fn radial_log_norm2(n_param: usize, c: f64) -> f64 {
    2.0 * std::f64::consts::PI * (c * n_param as f64).ln()
}
