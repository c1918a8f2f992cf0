//! Fourier-side averages: the low/high split A = A^{>δ} + A^{<δ}, the cone
//! localization of the low part, and the switching defect against d(σ,τ)/δ.
//!
//! ```bash
//! cargo run --release --example fourier_identities
//! ```

use gmxa::fourierops::{cone_cutoff, fourier_average, low_high_split, switch_defect};
use gmxa::grassmann::Subspace;
use gmxa::gridops::GridFunction;
use gmxa::rng::seeded;
use rand::Rng;

fn rel(a: &GridFunction, b: &GridFunction, f: &GridFunction) -> f64 {
    let d: f64 = a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum();
    d.sqrt() / f.values.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn main() -> gmxa::Result<()> {
    let mut rng = seeded(4);
    let f = GridFunction::new(vec![128, 128], vec![0.0, 0.0], 1.0, (0..128 * 128).map(|_| rng.random_range(-1.0..1.0)).collect())?;
    let t = std::f64::consts::FRAC_PI_4 + 0.002;
    let sigma = Subspace::line(&[t.cos(), t.sin()])?;
    let (s, delta) = (0.078, 0.97);
    let a = fourier_average(&f, &sigma, s)?;
    let (hi, lo) = low_high_split(&f, &sigma, s, delta)?;
    let sum = GridFunction { values: hi.values.iter().zip(&lo.values).map(|(x, y)| x + y).collect(), ..hi.clone() };
    println!("‖A − (A^>δ + A^<δ)‖/‖f‖ = {:.2e}", rel(&a, &sum, &f));
    let g = cone_cutoff(&f, &sigma, delta, 0.25)?;
    let (_, lo_g) = low_high_split(&g, &sigma, s, delta)?;
    println!("low part sees only the cone: ‖A^<δ f − A^<δ Γf‖/‖f‖ = {:.2e} (‖A^<δ f‖/‖f‖ = {:.2e})", rel(&lo, &lo_g, &f), lo.lp_norm(2.0) / f.lp_norm(2.0));

    let bump = GridFunction::from_fn(vec![128, 128], vec![0.0, 0.0], 1.0, |x| (-((x[0] - 64.0).powi(2) + (x[1] - 64.0).powi(2)) / 400.0).exp())?;
    let e1 = Subspace::line(&[1.0, 0.0])?;
    let delta: f64 = 0.1;
    for frac in [0.125f64, 0.25, 0.5, 1.0] {
        let tau = Subspace::line(&[(delta * frac).asin().cos(), delta * frac])?;
        let sd = switch_defect(&bump, &e1, &tau, 0.02, delta)?;
        println!("d(σ,τ)/δ = {frac:.3}: defect/majorant = {:.4e}, per unit ratio {:.4e}", sd.value, sd.value / frac);
    }
    Ok(())
}
