//! Sector overlap Σ_τ ‖O_{τ,δ} f‖₂² against δ^{−d(n−d−1)}‖f‖₂² over δ-nets.
//!
//! ```bash
//! cargo run --release --example sector_audit
//! ```

use gmxa::fourierops::sector_overlap_audit;
use gmxa::grassmann::greedy_net;
use gmxa::gridops::GridFunction;
use gmxa::rng::seeded;
use rand::Rng;

fn main() -> gmxa::Result<()> {
    for (n, m, h) in [(2usize, 128usize, 0.0625), (3, 48, 0.125)] {
        let mut rng = seeded(n as u64);
        let shape = vec![m; n];
        let len = m.pow(n as u32);
        let f = GridFunction::new(shape, vec![0.0; n], h, (0..len).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        for delta in [0.2, 0.1, 0.05] {
            let net = greedy_net(1, n, delta, 1, None)?;
            match sector_overlap_audit(&f, &net, delta) {
                Ok(a) => println!("Gr(1,{n}) δ={delta}: {} sectors, ratio {:.4}", a.net_size, a.ratio),
                Err(e) => println!("Gr(1,{n}) δ={delta}: {e}"),
            }
        }
    }
    Ok(())
}
