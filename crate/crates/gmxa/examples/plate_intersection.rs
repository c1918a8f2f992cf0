//! Monte-Carlo intersection volumes of δ-plates against the principal-angle
//! bound δ^{n−m} Π max(δ, θ_j)^{-1}, the exact rhombus case, and the MC CSV.
//!
//! ```bash
//! cargo run --example plate_intersection
//! ```

use gmxa::grassmann::Subspace;
use gmxa::plates::{append_mc_csv, intersection_volume_bound, mc_intersection_volume, McRecord, Plate};
use gmxa::rng::{gaussian, seeded};

fn main() -> gmxa::Result<()> {
    let delta = 0.05;
    for theta in [0.2, 0.6, std::f64::consts::FRAC_PI_2] {
        let p = Plate::unit(Subspace::line(&[1.0, 0.0])?, vec![0.0, 0.0], delta / 2.0)?;
        let q = Plate::unit(Subspace::line(&[theta.cos(), theta.sin()])?, vec![0.0, 0.0], delta / 2.0)?;
        let est = mc_intersection_volume(&p, &q, 200_000, 1)?;
        println!("rhombus θ={theta:.3}: MC {:.6} ± {:.6}, exact δ²/sin θ = {:.6}", est.estimate, est.stderr, delta * delta / theta.sin());
    }
    let out = std::path::Path::new("target/examples-out");
    std::fs::create_dir_all(out).map_err(|e| gmxa::Error::io(out, e))?;
    let path = out.join("mc_gr24.csv");
    let _ = std::fs::remove_file(&path);
    let mut rng = seeded(3);
    let mut records = Vec::new();
    for pair_id in 0..20 {
        let p = Plate::unit(Subspace::random(4, 2, &mut rng), vec![0.0; 4], delta)?;
        let c = (0..4).map(|_| 0.02 * gaussian(&mut rng)).collect();
        let q = Plate::unit(Subspace::random(4, 2, &mut rng), c, delta)?;
        let bound = intersection_volume_bound(&p, &q)?;
        let est = mc_intersection_volume(&p, &q, 50_000, pair_id as u64)?;
        records.push(McRecord { pair_id, bound, mc: est.estimate, stderr: est.stderr, ratio: est.estimate / bound });
    }
    append_mc_csv(&path, &records)?;
    let worst = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    println!("Gr(2,4) δ={delta}: largest MC/bound over 20 pairs {worst:.3}; rows in {}", path.display());
    Ok(())
}
