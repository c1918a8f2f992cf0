//! Sampled escapes of meeting τ-plates from the dilate T_δ^{+τ}(σ) at
//! factors 1, 3 and 5. Factor 3 leaks on pairs with θ close to δ.
//!
//! ```bash
//! cargo run --example covering_dilate
//! ```

use gmxa::grassmann::Subspace;
use gmxa::plates::{covering_dilate_with, Plate, DILATE_FACTOR};
use gmxa::rng::seeded;

fn main() -> gmxa::Result<()> {
    let mut rng = seeded(5);
    let delta: f64 = 0.05;
    let e1 = Subspace::line(&[1.0, 0.0])?;
    let at_delta = Subspace::line(&[delta.cos(), delta.sin()])?;
    for (d, n, fixed) in [(1, 2, false), (1, 3, false), (2, 4, false), (1, 2, true)] {
        let mut esc = [0; 3];
        for _ in 0..50 {
            let (sigma, tau) = if fixed {
                (e1.clone(), at_delta.clone())
            } else {
                (Subspace::random(n, d, &mut rng), Subspace::random(n, d, &mut rng))
            };
            let p = Plate::unit(sigma, vec![0.0; n], delta)?;
            // Center q so that it contains a random point of p.
            let x = p.sample(&mut rng);
            let y = Plate::unit(tau.clone(), vec![0.0; n], delta)?.sample(&mut rng);
            let q = Plate::unit(tau.clone(), x.iter().zip(&y).map(|(a, b)| a - b).collect(), delta)?;
            for (e, f) in esc.iter_mut().zip([1.0, DILATE_FACTOR, 5.0]) {
                *e += covering_dilate_with(&p, &tau, f)?.escapes(&q, 2000, &mut rng);
            }
        }
        let label = if fixed { " θ = δ" } else { "" };
        println!("Gr({d},{n}){label}: escapes of 100000 samples, factor 1: {}, factor 3: {}, factor 5: {}", esc[0], esc[1], esc[2]);
    }
    Ok(())
}
