use nalgebra::DMatrix;

use super::Subspace;
use crate::error::{ensure, Result};

/// Zero-angle tolerance for the intersection dimension.
pub const ZERO_ANGLE_TOL: f64 = 1e-9;

/// Canonical angles and bases of a pair σ, τ ∈ Gr(d,n).
#[derive(Clone, Debug)]
pub struct PrincipalDecomposition {
    /// θ_1 ≤ … ≤ θ_d in [0, π/2].
    pub angles: Vec<f64>,
    /// s_1..s_d, orthonormal basis of σ (n×d).
    pub basis_s: DMatrix<f64>,
    /// t_1..t_d, orthonormal basis of τ (n×d).
    pub basis_t: DMatrix<f64>,
    /// s_1..s_d, z_{m+1}..z_d: orthonormal basis of span{σ,τ} (n×(2d−m)).
    pub basis_z: DMatrix<f64>,
    /// dim σ∩τ at the requested tolerance.
    pub m: usize,
}

impl PrincipalDecomposition {
    pub fn largest(&self) -> f64 {
        *self.angles.last().unwrap()
    }

    /// z_j for j > m (0-based j), the unit vector with t_j = cos θ_j s_j + sin θ_j z_j.
    pub fn z(&self, j: usize) -> Option<Vec<f64>> {
        (j >= self.m).then(|| {
            let k = self.basis_s.ncols() + (j - self.m);
            self.basis_z.column(k).iter().copied().collect()
        })
    }
}

/// Principal angles from the SVD of the cross-Gram matrix σᵀτ.
///
/// Cosines are the singular values; sines are recomputed from the residuals
/// t_j − cos θ_j s_j so that small angles keep full relative accuracy.
pub fn principal_angles(a: &Subspace, b: &Subspace, tol: f64) -> Result<PrincipalDecomposition> {
    ensure!(a.n() == b.n(), Shape, "ambient dimensions differ: {} vs {}", a.n(), b.n());
    ensure!(a.d() == b.d(), Shape, "subspace dimensions differ: {} vs {}", a.d(), b.d());
    ensure!(tol > 0.0, Domain, "tolerance must be positive");
    let (n, d) = (a.n(), a.d());
    let cross = a.basis().transpose() * b.basis();
    let svd = cross.svd(true, true);
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut basis_s = DMatrix::zeros(n, d);
    let mut basis_t = DMatrix::zeros(n, d);
    for (k, &i) in order.iter().enumerate() {
        basis_s.set_column(k, &(a.basis() * u.column(i)));
        basis_t.set_column(k, &(b.basis() * vt.row(i).transpose()));
    }
    let mut angles = Vec::with_capacity(d);
    let mut zs = Vec::new();
    let mut m = 0;
    for k in 0..d {
        let s = basis_s.column(k);
        let t = basis_t.column(k);
        let c = s.dot(&t);
        let w = t - s * c;
        let sn = w.norm();
        let theta = sn.atan2(c.abs());
        if theta <= tol {
            m += 1;
        }
        angles.push(theta);
        zs.push(if sn > 0.0 { w / sn } else { w });
    }
    // Sort ascending; ties keep SVD order.
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]));
    let angles_sorted: Vec<f64> = idx.iter().map(|&i| angles[i]).collect();
    let bs = DMatrix::from_fn(n, d, |r, c| basis_s[(r, idx[c])]);
    let bt = DMatrix::from_fn(n, d, |r, c| {
        // Orient t_j so that cos θ_j ≥ 0.
        let sign = if basis_s.column(idx[c]).dot(&basis_t.column(idx[c])) < 0.0 { -1.0 } else { 1.0 };
        sign * basis_t[(r, idx[c])]
    });
    let mut basis_z = DMatrix::zeros(n, 2 * d - m);
    for c in 0..d {
        basis_z.set_column(c, &bs.column(c));
    }
    for (k, &i) in idx.iter().enumerate().skip(m) {
        let sign = if basis_s.column(i).dot(&basis_t.column(i)) < 0.0 { -1.0 } else { 1.0 };
        basis_z.set_column(d + k - m, &(&zs[i] * sign));
    }
    Ok(PrincipalDecomposition { angles: angles_sorted, basis_s: bs, basis_t: bt, basis_z, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::metric_distance;
    use crate::rng::seeded;
    use std::f64::consts::FRAC_PI_2;

    /// Iterative arg-min over discretized unit circles of σ, τ ∈ Gr(2,4):
    /// θ_1 minimizes the angle over all unit pairs, θ_2 is the angle between
    /// the orthogonal complements of the minimizers inside σ and τ.
    fn brute_force_angles(a: &Subspace, b: &Subspace, mesh: f64) -> [f64; 2] {
        let m = a.basis().transpose() * b.basis();
        let k = (2.0 * std::f64::consts::PI / mesh).ceil() as usize;
        // Half circles suffice: s and −s give the same angle.
        let half = k / 2;
        let trig: Vec<(f64, f64)> = (0..half).map(|i| (std::f64::consts::PI * i as f64 / half as f64).sin_cos()).collect();
        let mut best = (-1.0, 0, 0);
        for (i, &(sa, ca)) in trig.iter().enumerate() {
            let r0 = ca * m[(0, 0)] + sa * m[(1, 0)];
            let r1 = ca * m[(0, 1)] + sa * m[(1, 1)];
            for (j, &(sb, cb)) in trig.iter().enumerate() {
                let c = (r0 * cb + r1 * sb).abs();
                if c > best.0 {
                    best = (c, i, j);
                }
            }
        }
        let (sa, ca) = trig[best.1];
        let (sb, cb) = trig[best.2];
        // Rotated by π/2 within each plane.
        let c2 = ((-sa) * (-sb) * m[(0, 0)] + (-sa) * cb * m[(0, 1)] + ca * (-sb) * m[(1, 0)] + ca * cb * m[(1, 1)]).abs();
        [best.0.min(1.0).acos(), c2.min(1.0).acos()]
    }

    #[test]
    fn equal_subspaces_have_zero_angles() {
        let mut rng = seeded(2);
        let s = Subspace::random(4, 2, &mut rng);
        let pd = principal_angles(&s, &s, ZERO_ANGLE_TOL).unwrap();
        assert!(pd.angles.iter().all(|&t| t < 1e-12));
        assert_eq!(pd.m, 2);
        assert_eq!(pd.basis_z.ncols(), 2);
    }

    #[test]
    fn orthogonal_lines_in_r3() {
        let a = Subspace::coordinate(3, &[0]).unwrap();
        let b = Subspace::coordinate(3, &[1]).unwrap();
        let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL).unwrap();
        assert!((pd.angles[0] - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(pd.m, 0);
        assert_eq!(pd.basis_z.ncols(), 2);
    }

    #[test]
    fn svd_angles_match_brute_force_minimization() {
        let mut rng = seeded(11);
        for _ in 0..5 {
            let a = Subspace::random(4, 2, &mut rng);
            let b = Subspace::random(4, 2, &mut rng);
            let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL).unwrap();
            let bf = brute_force_angles(&a, &b, 1e-3);
            for j in 0..2 {
                assert!((pd.angles[j] - bf[j]).abs() < 2e-3, "{:?} vs {bf:?}", pd.angles);
            }
        }
    }

    #[test]
    fn decomposition_invariants() {
        let mut rng = seeded(5);
        for (d, n) in [(1, 2), (2, 3), (2, 4), (2, 5), (3, 5)] {
            for _ in 0..20 {
                let a = Subspace::random(n, d, &mut rng);
                let b = Subspace::random(n, d, &mut rng);
                let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL).unwrap();
                assert!(pd.angles.windows(2).all(|w| w[0] <= w[1]));
                assert!(pd.angles.iter().all(|&t| (0.0..=FRAC_PI_2 + 1e-15).contains(&t)));
                // Cosines are the singular values of σᵀτ.
                let mut sv: Vec<f64> = (a.basis().transpose() * b.basis()).singular_values().iter().copied().collect();
                sv.sort_by(|x, y| y.total_cmp(x));
                for (t, s) in pd.angles.iter().zip(&sv) {
                    assert!((t.cos() - s).abs() < 1e-10);
                }
                // basis_z is orthonormal and contains both subspaces.
                let z = &pd.basis_z;
                assert_eq!(z.ncols(), 2 * d - pd.m);
                assert!((z.transpose() * z - DMatrix::<f64>::identity(z.ncols(), z.ncols())).amax() < 1e-10);
                let zeta = Subspace::from_orthonormal(z.clone()).unwrap();
                for j in 0..d {
                    let bj = b.column(j);
                    let res = bj.iter().zip(zeta.project(&bj)).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                    assert!(res < 1e-10, "({d},{n}) {res}");
                    // t_j = cos θ_j s_j + sin θ_j z_j.
                    let zj = pd.z(j).unwrap_or_else(|| vec![0.0; n]);
                    let (sn, cs) = pd.angles[j].sin_cos();
                    for i in 0..n {
                        assert!((pd.basis_t[(i, j)] - cs * pd.basis_s[(i, j)] - sn * zj[i]).abs() < 1e-10);
                    }
                }
                let dist = metric_distance(&a, &b).unwrap();
                assert!((pd.largest().sin() - dist).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn intersection_dimension_counts_shared_directions() {
        let a = Subspace::coordinate(4, &[0, 1]).unwrap();
        let b = Subspace::from_columns(&[vec![1.0, 0.0, 0.0, 0.0], vec![0.0, 1.0, 1.0, 0.0]]).unwrap();
        let pd = principal_angles(&a, &b, ZERO_ANGLE_TOL).unwrap();
        assert_eq!(pd.m, 1);
        assert!((pd.angles[1] - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(pd.z(0).is_none() && pd.z(1).is_some());
    }
}
