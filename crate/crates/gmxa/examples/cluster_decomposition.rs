//! Greedy extraction of δ-clusters from Σ ⊂ Gr(1,3), certification of each
//! cluster, and the overlap audit of Σ_0 on an independent candidate pool.
//!
//! ```bash
//! cargo run --release --example cluster_decomposition
//! ```

use gmxa::grassmann::{cluster_decompose, near_orthogonal_subset, CandidatePolicy, DirectionSet, Subspace, CONE_NARROW};
use gmxa::rng::seeded;
use rand::Rng;

fn report(name: &str, set: &DirectionSet, delta: f64) -> gmxa::Result<()> {
    let policy = CandidatePolicy { seed: 1, ..Default::default() };
    let dec = cluster_decompose(set, delta, &policy)?;
    let fresh = CandidatePolicy { seed: 99, ..policy };
    let overlap = dec.max_overlap(&fresh.pool(&dec.sigma0, delta), delta, CONE_NARROW);
    println!("{name}: N = {}, threshold {}, {} steps, |Σ_0| = {}, fresh-pool overlap {overlap}", set.len(), dec.threshold, dec.steps, dec.sigma0.len());
    for (cl, xi) in &dec.clusters {
        let near = near_orthogonal_subset(cl, xi, delta)?;
        let worst = near.distances.iter().cloned().fold(0.0, f64::max);
        println!("  cluster of {} around ξ = ({:+.3}, {:+.3}, {:+.3}): max d(a_σ, σ) = {worst:.4} < δ/3 = {:.4}", cl.len(), xi[0], xi[1], xi[2], delta / 3.0);
    }
    Ok(())
}

fn main() -> gmxa::Result<()> {
    let delta = 0.1;
    report("random", &DirectionSet::random(3, 1, 64, 7), delta)?;
    // 48 lines nearly inside the plane e3⊥ plus 16 random ones.
    let mut rng = seeded(3);
    let mut elements: Vec<Subspace> = (0..48)
        .map(|_| {
            let a: f64 = rng.random_range(0.0..std::f64::consts::PI);
            Subspace::line(&[a.cos(), a.sin(), rng.random_range(-0.002..0.002)]).unwrap()
        })
        .collect();
    elements.extend(DirectionSet::random(3, 1, 16, 8).elements);
    report("planar", &DirectionSet::from_elements(elements)?, delta)
}
