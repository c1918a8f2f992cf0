use nalgebra::DMatrix;

use super::Plate;
use crate::error::{ensure, Result};
use crate::grassmann::{principal_angles, PrincipalDecomposition, Subspace, ZERO_ANGLE_TOL};
use crate::rng::Rng;

/// Dilation factor of T_δ^{+τ}(σ). A meeting τ-plate can reach
/// δ + 2 sin θ_j + 2δ cos θ_j along z_j, so near θ_j ≈ δ it can leave the
/// 3-box; factor 5 always suffices.
pub const DILATE_FACTOR: f64 = 3.0;

/// The box T_δ^{+τ}(σ) anchored at the base plate's center:
/// |x·s_j| < c, |x·z_j| < c·max(δ, θ_j), |x·w| < c·δ on span{σ,τ}⊥.
#[derive(Clone, Debug)]
pub struct CoveringDilate {
    pub base: Plate,
    pub angles: PrincipalDecomposition,
    /// Columns s_1..s_d, z_{m+1}..z_d, w_1..w_{n−2d+m}.
    pub axes: DMatrix<f64>,
    /// Half-widths along `axes`, at unit scale.
    pub half_widths: Vec<f64>,
    pub factor: f64,
}

impl CoveringDilate {
    pub fn contains(&self, x: &[f64]) -> bool {
        let n = self.axes.nrows();
        let s = self.base.s;
        (0..n).all(|k| {
            let c: f64 = (0..n).map(|i| (x[i] - self.base.center[i]) * self.axes[(i, k)]).sum();
            c.abs() < self.factor * self.half_widths[k] * s
        })
    }

    /// Samples `count` points of `q` and returns how many fall outside.
    pub fn escapes(&self, q: &Plate, count: usize, rng: &mut Rng) -> usize {
        (0..count).filter(|_| !self.contains(&q.sample(rng))).count()
    }
}

pub fn covering_dilate(p: &Plate, tau: &Subspace) -> Result<CoveringDilate> {
    covering_dilate_with(p, tau, DILATE_FACTOR)
}

pub fn covering_dilate_with(p: &Plate, tau: &Subspace, factor: f64) -> Result<CoveringDilate> {
    ensure!(tau.n() == p.n() && tau.d() == p.d(), Shape, "τ must lie in Gr({},{})", p.d(), p.n());
    ensure!(factor > 0.0, Domain, "dilation factor must be positive");
    let pd = principal_angles(&p.sigma, tau, ZERO_ANGLE_TOL)?;
    let (n, d, m) = (p.n(), p.d(), pd.m);
    let delta = p.delta;
    let mut axes = DMatrix::zeros(n, n);
    let zc = pd.basis_z.ncols();
    for k in 0..zc {
        axes.set_column(k, &pd.basis_z.column(k));
    }
    if zc < n {
        let w = Subspace::from_orthonormal(pd.basis_z.clone())?.complement();
        for k in 0..n - zc {
            axes.set_column(zc + k, &w.basis().column(k));
        }
    }
    let mut half = vec![1.0; d];
    half.extend(pd.angles[m..].iter().map(|&t| delta.max(t)));
    half.extend(std::iter::repeat_n(delta, n - zc));
    Ok(CoveringDilate { base: p.clone(), angles: pd, axes, half_widths: half, factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn equal_orientation_gives_the_three_dilate() {
        let mut rng = seeded(1);
        let s = Subspace::random(4, 2, &mut rng);
        let p = Plate::unit(s.clone(), vec![0.0; 4], 0.1).unwrap();
        let c = covering_dilate(&p, &s).unwrap();
        assert_eq!(c.half_widths, vec![1.0, 1.0, 0.1, 0.1]);
        assert_eq!(c.factor, 3.0);
    }

    #[test]
    fn angle_equal_to_delta_gives_width_three_delta() {
        let delta = 0.1;
        let p = Plate::unit(Subspace::line(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0], delta).unwrap();
        let tau = Subspace::line(&[delta.cos(), delta.sin()]).unwrap();
        let c = covering_dilate(&p, &tau).unwrap();
        assert!((c.factor * c.half_widths[1] - 3.0 * delta).abs() < 1e-12);
    }

    /// A plate along τ through a random point of p.
    fn meeting_plate(p: &Plate, tau: &Subspace, rng: &mut Rng) -> Plate {
        let x = p.sample(rng);
        let y = Plate::new(tau.clone(), vec![0.0; p.n()], p.s, p.delta).unwrap().sample(rng);
        let c = x.iter().zip(&y).map(|(a, b)| a - b).collect();
        Plate::new(tau.clone(), c, p.s, p.delta).unwrap()
    }

    #[test]
    fn perpendicular_lines_never_escape() {
        let mut rng = seeded(4);
        let p = Plate::unit(Subspace::line(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0], 0.05).unwrap();
        let tau = Subspace::line(&[0.0, 1.0]).unwrap();
        let q = meeting_plate(&p, &tau, &mut rng);
        assert_eq!(covering_dilate(&p, &tau).unwrap().escapes(&q, 10_000, &mut rng), 0);
    }

    #[test]
    fn random_meeting_pairs_stay_in_the_five_dilate() {
        // Along z_j a point of q is within δ + 2 sin θ_j + 2δ cos θ_j ≤ 5 max(δ, θ_j).
        let mut rng = seeded(6);
        for (d, n) in [(1, 2), (1, 3), (2, 3), (2, 4)] {
            for _ in 0..10 {
                let p = Plate::unit(Subspace::random(n, d, &mut rng), vec![0.0; n], 0.05).unwrap();
                let tau = Subspace::random(n, d, &mut rng);
                let q = meeting_plate(&p, &tau, &mut rng);
                assert_eq!(covering_dilate_with(&p, &tau, 5.0).unwrap().escapes(&q, 2000, &mut rng), 0, "({d},{n})");
            }
        }
    }

    #[test]
    fn factor_three_misses_when_the_angle_is_near_delta() {
        let delta: f64 = 0.05;
        let p = Plate::unit(Subspace::line(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0], delta).unwrap();
        let (c, s) = (delta.cos(), delta.sin());
        let tau = Subspace::line(&[c, s]).unwrap();
        // q passes through (0, −0.99δ) ∈ p with that point at one corner of q.
        let corner = [0.99 * (c - delta * s), 0.99 * (s + delta * c)];
        let q = Plate::unit(tau.clone(), vec![-corner[0], -0.99 * delta - corner[1]], delta).unwrap();
        assert!(p.contains(&[0.0, -0.99 * delta]).unwrap() && q.contains(&[0.0, -0.99 * delta]).unwrap());
        let far = [-2.0 * corner[0], -0.99 * delta - 2.0 * corner[1]];
        assert!(q.contains(&far).unwrap());
        assert!(!covering_dilate(&p, &tau).unwrap().contains(&far));
        assert!(covering_dilate_with(&p, &tau, 5.0).unwrap().contains(&far));
    }

    #[test]
    fn a_smaller_factor_can_fail() {
        let mut rng = seeded(8);
        let p = Plate::unit(Subspace::line(&[1.0, 0.0]).unwrap(), vec![0.0, 0.0], 0.05).unwrap();
        let tau = Subspace::line(&[0.0, 1.0]).unwrap();
        let q = Plate::unit(tau.clone(), vec![0.9, 0.0], 0.05).unwrap();
        assert!(covering_dilate_with(&p, &tau, 0.5).unwrap().escapes(&q, 1000, &mut rng) > 0);
    }
}
