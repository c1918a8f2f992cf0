//! Sheared plates P(I, K, v) in R³: order, hat enlargement and the slice
//! profile of Q̂ over I_R̂ against its average over 3K.
//!
//! ```bash
//! cargo run --example sheared_slicing
//! ```

use gmxa::carleson::{random_cap_directions, slicing_check};
use gmxa::plates::{precedes, ShearedPlate, MAX_TILT};

fn main() -> gmxa::Result<()> {
    let v = random_cap_directions(3, 8, MAX_TILT, 2)?;
    let r = ShearedPlate::new(vec![0.5, 0.5], 1.0, (0.0, 0.05), v[0].clone())?;
    let mut worst = 0.0f64;
    let mut checked = 0;
    for (i, w) in v.iter().enumerate().skip(1) {
        for (j, c) in [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]].iter().enumerate() {
            let k0 = 0.01 * (i + j) as f64 - 0.04;
            let q = ShearedPlate::new(c.to_vec(), 0.5, (k0, k0 + 0.025), w.clone())?;
            if !precedes(&q, &r) {
                continue;
            }
            if let Ok(chk) = slicing_check(&q, &r, (0.0, 0.05), 48) {
                println!("v{i} cube {j}: max slice {:.4}, mean over 3K {:.4}, ratio {:.2}", chk.max_slice, chk.mean_slice, chk.ratio);
                worst = worst.max(chk.ratio);
                checked += 1;
            }
        }
    }
    println!("{checked} admissible pairs, worst ratio {worst:.2}");
    Ok(())
}
