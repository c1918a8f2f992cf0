//! Greedy δ-nets in Gr(d,n) and the log-cardinality slope against log(1/δ).
//!
//! ```bash
//! cargo run --release --example net_scaling
//! ```

use std::time::Instant;

use gmxa::cli::fit_scaling;
use gmxa::cli::FitModel;
use gmxa::grassmann::greedy_net_with_budget;

fn main() -> gmxa::Result<()> {
    let budget: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(200);
    for (d, n) in [(1, 2), (1, 3), (2, 3)] {
        let mut pts = Vec::new();
        for k in 3..=6 {
            let delta = 2f64.powi(-k);
            let t = Instant::now();
            let net = greedy_net_with_budget(d, n, delta, 7, budget)?;
            println!("Gr({d},{n}) δ=2^-{k}: {} elements in {:.2?}", net.len(), t.elapsed());
            pts.push((1.0 / delta, net.len() as f64));
        }
        let fit = fit_scaling(&pts, FitModel::Power)?;
        println!("Gr({d},{n}) slope {:.3} (dimension {}), R² {:.4}", fit.slope, d * (n - d), fit.r2);
    }
    Ok(())
}
