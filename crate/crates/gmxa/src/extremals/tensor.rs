use crate::error::{ensure, Result};
use crate::gridops::GridFunction;

/// Largest total sample count accepted by [`tensor_extend`].
pub const TENSOR_MAX_SAMPLES: usize = 1 << 28;

/// f(x) = f2(x₁, x₂)·1_{[−½, ½]^{n−2}}(x₃, …, x_n) on the product of f2's
/// lattice with nodes of [−½, ½] at the same spacing.
pub fn tensor_extend(f2: &GridFunction, n: usize) -> Result<GridFunction> {
    ensure!(f2.n() == 2, Shape, "base function must be planar");
    ensure!(n >= 3, Domain, "target dimension must be at least 3, got {n}");
    let h = f2.h;
    // Transverse nodes −½ + (j + ½)h so that the cell sum of the unit factor is exactly 1 when 1/h is an integer.
    let m = (1.0 / h).round() as usize;
    ensure!(m >= 1 && ((m as f64) * h - 1.0).abs() < 1e-9, Domain, "spacing must divide 1, got {h}");
    let total = m.checked_pow((n - 2) as u32).and_then(|t| t.checked_mul(f2.len()));
    ensure!(total.is_some_and(|t| t <= TENSOR_MAX_SAMPLES), Domain, "tensor extension exceeds {TENSOR_MAX_SAMPLES} samples");
    let inner = m.pow((n - 2) as u32);
    let mut values = Vec::with_capacity(f2.len() * inner);
    for &v in &f2.values {
        values.extend(std::iter::repeat_n(v, inner));
    }
    let mut shape = f2.shape.clone();
    shape.extend(std::iter::repeat_n(m, n - 2));
    let mut origin = f2.origin.clone();
    origin.extend(std::iter::repeat_n(-0.5 + 0.5 * h, n - 2));
    GridFunction::new(shape, origin, h, values)
}
