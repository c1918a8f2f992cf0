//! ‖M_{Σ,S} f‖₂/‖f‖₂ for the radial example f = |x|^{-1} 1_{1≤|x|≤cN} with
//! Σ a (1/N)-net of lines and dyadic scales in [1, N]; the quotient grows
//! like log N.
//!
//! ```bash
//! cargo run --release --example maxavg_log_law
//! ```

use gmxa::cli::{fit_scaling, maxavg_quotient, FitModel};
use gmxa::extremals::RADIAL_FACTOR;

fn main() -> gmxa::Result<()> {
    let mut pts = Vec::new();
    for big_n in [8usize, 16, 32] {
        let half = (RADIAL_FACTOR * big_n as f64).max(2.0 * big_n as f64);
        let h = (2.0 * half / 2047.0).max(0.25);
        let (q, dirs) = maxavg_quotient(big_n, h, 120, 3, RADIAL_FACTOR, 2, 1)?;
        println!("N = {big_n:>3}: {dirs} directions, quotient {q:.4}");
        pts.push((big_n as f64, q));
    }
    let fit = fit_scaling(&pts, FitModel::Log)?;
    println!("quotient ≈ {:.3}·log N + {:.3}, R² {:.4}", fit.slope, fit.intercept, fit.r2);
    Ok(())
}
