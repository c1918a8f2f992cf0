//! ‖T_Q(a)‖₂ against (log #V)^{1/2}·mass^{1/2} for codimension-1 Carleson
//! sequences in R³: the Kakeya-extension sequence and random lattice sequences.
//!
//! ```bash
//! cargo run --release --example carleson_embedding
//! ```

use gmxa::carleson::{adversarial_sequence, build_lattice, embedding_audit, random_cap_directions, random_lattice_sequence};
use gmxa::gridops::GridFunction;
use std::time::Instant;

fn main() -> gmxa::Result<()> {
    println!("adversarial (Kakeya extension, n = 3)");
    for depth in 2..=6u32 {
        let t = Instant::now();
        let delta = 0.5f64.powi(depth as i32);
        let h = 0.25 * delta * (std::f64::consts::PI / 16.0).tan();
        let seq = adversarial_sequence(depth, h, 1)?;
        let r = embedding_audit(&seq)?;
        println!(
            "  #V={:>3} mass={:.4} ‖T‖={:.4} ‖T‖/mass^½={:.4} quotient={:.4} ({:.1}s)",
            r.directions,
            r.mass,
            r.norm,
            r.baseline,
            r.quotient,
            t.elapsed().as_secs_f64()
        );
    }
    println!("random lattice sequences (n = 3, 400 plates)");
    let grid = GridFunction::zeros(vec![64, 64, 64], vec![0.5 / 64.0; 3], 1.0 / 64.0)?;
    for count in [4usize, 8, 16, 32, 64] {
        let t = Instant::now();
        let mut qs = Vec::new();
        for seed in 0..5u64 {
            let dirs = random_cap_directions(3, count, std::f64::consts::PI / 16.0, seed)?;
            let lat = build_lattice(dirs, 0.25, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, 2, 3)?;
            let seq = random_lattice_sequence(&lat, 400, &grid, seed)?;
            qs.push(embedding_audit(&seq)?);
        }
        let q: Vec<f64> = qs.iter().map(|r| r.quotient).collect();
        let b: Vec<f64> = qs.iter().map(|r| r.baseline).collect();
        println!("  #V={count:>3} quotients {q:.3?} baseline {b:.3?} ({:.1}s)", t.elapsed().as_secs_f64());
    }
    Ok(())
}
