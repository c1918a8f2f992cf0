use gmxa::extremals::{perron_kakeya, perron_triangle_area};
use std::f64::consts::FRAC_PI_4;

fn main() {
    for k in 2..=8u32 {
        let delta = 2f64.powi(-(k as i32));
        let fam = perron_kakeya(delta, (FRAC_PI_4, 3.0 * FRAC_PI_4)).unwrap();
        let tri = perron_triangle_area(k, fam.alpha, 4000);
        let star = fam.star_minus_area(delta / 8.0);
        let gaps: Vec<f64> = fam.angles().windows(2).map(|w| (w[1] - w[0]) / delta).collect();
        let (gmin, gmax) = gaps.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &g| (a.min(g), b.max(g)));
        println!(
            "δ=2^-{k}: {} tubes, α={:.2}, height {:.2}, |K|={:.4}, |K|·log(1/δ)={:.3}, triangles {:.4}, |K*|={:.3}, gaps/δ in [{gmin:.2}, {gmax:.2}]",
            fam.len(),
            fam.alpha,
            fam.height,
            fam.union_area,
            fam.union_area * (1.0 / delta).ln(),
            tri,
            star
        );
    }
}
