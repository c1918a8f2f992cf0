//! Planar almost-orthogonality: ‖A_{V,S} f‖₂ against C‖A_{U,S} f‖₂ +
//! max_j ‖A_{V_j,S} f‖₂ for V split into the gaps of U.
//!
//! ```bash
//! cargo run --release --example ao2d
//! ```

use gmxa::fourierops::ao2d_experiment;
use gmxa::gridops::GridFunction;
use gmxa::rng::seeded;
use rand::Rng;

fn main() -> gmxa::Result<()> {
    let mut rng = seeded(2);
    let f = GridFunction::new(vec![128, 128], vec![0.0, 0.0], 1.0, (0..128 * 128).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let u: Vec<f64> = (0..=4).map(|k| std::f64::consts::PI * k as f64 / 4.0).collect();
    let v: Vec<Vec<f64>> = u.windows(2).map(|w| (0..8).map(|i| w[0] + (w[1] - w[0]) * (i as f64 + 0.5) / 8.0).collect()).collect();
    let scales = [0.5, 1.0, 2.0, 4.0];
    let r = ao2d_experiment(&f, &u, &v, &scales, 1.0)?;
    println!("lhs {:.4}, ‖A_U f‖ {:.4}, max gap {:.4}, critical C {:.4}", r.lhs, r.u_norm, r.max_gap, r.critical_constant);
    for g in &r.gaps {
        println!("  gap {}: {} directions, ‖A_Vj f‖ {:.4}, cone-restricted {:.4}", g.gap, g.directions, g.norm, g.restricted);
    }
    Ok(())
}
