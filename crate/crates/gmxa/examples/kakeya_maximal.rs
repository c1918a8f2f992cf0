//! The Kakeya maximal function K_δ as a function on a net of directions:
//! the unit disc gives ≈ 1 everywhere, a single tube only near its direction.
//!
//! ```bash
//! cargo run --release --example kakeya_maximal
//! ```

use gmxa::grassmann::greedy_net;
use gmxa::gridops::{kakeya_maximal, GridFunction};

fn main() -> gmxa::Result<()> {
    let delta = 0.1;
    let h = delta / 4.0;
    let disc = GridFunction::centered(2, 2.0, h, |x| if x[0] * x[0] + x[1] * x[1] <= 1.0 { 1.0 } else { 0.0 })?;
    let tube = GridFunction::centered(2, 2.0, h, |x| if x[0].abs() <= 1.0 && x[1].abs() < delta { 1.0 } else { 0.0 })?;
    let net = greedy_net(1, 2, delta / 2.0, 3, None)?;
    let centers: Vec<Vec<f64>> = (0..81).map(|i| vec![-1.0 + 0.25 * (i / 9) as f64, -1.0 + 0.25 * (i % 9) as f64]).collect();
    let kd = kakeya_maximal(&disc, delta, &net, &centers, 2)?;
    let kt = kakeya_maximal(&tube, delta, &net, &centers, 2)?;
    let range = |v: &[f64]| v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    println!("{} directions", net.len());
    println!("disc: K_δ in [{:.3}, {:.3}]", range(&kd).0, range(&kd).1);
    for (s, v) in net.elements.iter().zip(&kt).step_by(net.len() / 8) {
        let u = s.column(0);
        println!("tube: direction ({:+.3}, {:+.3}) K_δ = {v:.3}", u[0], u[1]);
    }
    Ok(())
}
