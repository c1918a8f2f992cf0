//! Weak-(2,2) quotient of the Nikodym maximal function N_δ on the indicator of
//! a Perron–Kakeya set in the plane, against the sqrt(log 1/δ) model.
//!
//! ```bash
//! cargo run --release --example nikodym_weak
//! ```

use gmxa::cli::{fit_scaling, nikodym_weak_quotient, FitModel};

fn main() -> gmxa::Result<()> {
    let mut pts = Vec::new();
    for k in 3..=5 {
        let delta = 2f64.powi(-k);
        let (q, area, dirs) = nikodym_weak_quotient(delta, delta / 4.0, 1.0, 2, 1)?;
        println!("δ = 2^-{k}: set area {area:.4}, {dirs} directions, weak quotient {q:.4}");
        pts.push((1.0 / delta, q));
    }
    let fit = fit_scaling(&pts, FitModel::SqrtLog)?;
    println!("quotient² ≈ {:.4}·log(1/δ) + {:.4}, R² {:.4}", fit.slope, fit.intercept, fit.r2);
    Ok(())
}
