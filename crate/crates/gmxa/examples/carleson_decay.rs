//! Random lattice sequences of sheared plates in R³: subordination audit and
//! the k-level shadow decay against the exponential bound.
//!
//! ```bash
//! cargo run --release --example carleson_decay
//! ```

use gmxa::carleson::{build_lattice, decay_audit, random_cap_directions, random_lattice_sequence, subordination_audit};
use gmxa::gridops::GridFunction;

fn main() -> gmxa::Result<()> {
    let grid = GridFunction::zeros(vec![64, 64, 64], vec![0.5 / 64.0; 3], 1.0 / 64.0)?;
    let dirs = random_cap_directions(3, 4, std::f64::consts::PI / 16.0, 7)?;
    let lat = build_lattice(dirs, 0.25, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, 3, 3)?;
    let seq = random_lattice_sequence(&lat, 1500, &grid, 7)?;
    println!("{} plates, mass {:.4}", seq.len(), seq.mass());
    let sub = subordination_audit(&seq, &grid, 10, 1)?;
    println!("subordination: worst mass/shadow {:.3} ({})", sub.worst_ratio, sub.coverage);
    for mu in [0.01, 0.02, 0.05] {
        let r = decay_audit(&seq, 0, 1..=12, mu, 1.0, &grid)?;
        println!("μ = {mu}: max B_R = {:.3}, slope {:?}", r.max_b, r.slope);
        for row in r.rows.iter().filter(|r| r.plates > 0) {
            println!("  k={:>2} plates={:>4} shadow={:.5} bound={:.5}", row.k, row.plates, row.shadow, row.bound);
        }
    }
    Ok(())
}
