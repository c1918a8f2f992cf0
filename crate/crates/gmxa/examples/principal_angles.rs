//! Principal angles, canonical bases and the projection metric on Gr(d,n).
//!
//! ```bash
//! cargo run --example principal_angles
//! ```

use gmxa::grassmann::{metric_distance, principal_angles, Subspace, ZERO_ANGLE_TOL};
use gmxa::rng::seeded;

fn main() -> gmxa::Result<()> {
    let mut rng = seeded(1);
    for (d, n) in [(1, 2), (2, 4), (3, 6)] {
        let a = Subspace::random(n, d, &mut rng);
        let b = Subspace::random(n, d, &mut rng);
        let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL)?;
        let angles: Vec<String> = pd.angles.iter().map(|t| format!("{t:.4}")).collect();
        println!(
            "Gr({d},{n}): angles [{}], m = {}, dim span = {}, d(σ,τ) = {:.4} = sin θ_d = {:.4}",
            angles.join(", "),
            pd.m,
            pd.basis_z.ncols(),
            metric_distance(&a, &b)?,
            pd.largest().sin()
        );
    }
    // Two planes in R⁴ sharing the line e1.
    let a = Subspace::coordinate(4, &[0, 1])?;
    let b = Subspace::from_columns(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]])?;
    let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL)?;
    println!("shared line: angles {:?}, m = {}", pd.angles, pd.m);
    Ok(())
}
