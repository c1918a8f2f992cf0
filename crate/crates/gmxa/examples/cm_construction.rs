use gmxa::extremals::cm_construction;
use std::time::Instant;

fn main() {
    for m in [8.0, 16.0, 32.0] {
        let t = Instant::now();
        let cm = cm_construction(2, 3, m, 11).unwrap();
        let vals = cm.sample_maximal(200, 5);
        let cmin = vals.iter().cloned().fold(f64::INFINITY, f64::min) * m;
        let q = cm.quotient(&vals, 2.0);
        let mut rng = gmxa::rng::seeded(3);
        let x = cm.sample_u(&mut rng);
        let slab = cm.slab_check(&x, 20000, 9).unwrap();
        println!(
            "M={m}: |Σ_M|={}, min M·value={cmin:.4}, quotient={q:.4}, slab {:.3} ± {:.3} (bound {:.4}) in {:.2?}",
            cm.net.len(),
            slab.measure,
            slab.stderr,
            slab.bound,
            t.elapsed()
        );
    }
}
