use nalgebra::{DMatrix, DVector};

use crate::error::{ensure, Result};
use crate::rng::{gaussian, Rng};

/// A point of Gr(d,n), stored as an n×d matrix with orthonormal columns.
///
/// Bases are not unique; compare subspaces through [`metric_distance`],
/// never through their bases.
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

/// Columns whose residual norm falls below this fraction of the input norm
/// are treated as linearly dependent.
const RANK_TOL: f64 = 1e-10;

impl Subspace {
    /// Orthonormalizes the columns of `m` (two passes of modified Gram-Schmidt).
    pub fn from_basis(m: DMatrix<f64>) -> Result<Self> {
        let (n, d) = m.shape();
        ensure!(d >= 1 && d <= n, Shape, "basis must be n×d with 1 ≤ d ≤ n, got {n}×{d}");
        let basis = orthonormalize(&m)?;
        ensure!(basis.ncols() == d, Domain, "basis columns are linearly dependent");
        Ok(Subspace { basis })
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        ensure!(!cols.is_empty(), Shape, "no columns");
        let n = cols[0].len();
        ensure!(cols.iter().all(|c| c.len() == n), Shape, "ragged columns");
        Self::from_basis(DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]))
    }

    /// Accepts a basis that is already orthonormal to 1e-12 without touching its bits.
    pub fn from_orthonormal(m: DMatrix<f64>) -> Result<Self> {
        let (n, d) = m.shape();
        ensure!(d >= 1 && d <= n, Shape, "basis must be n×d with 1 ≤ d ≤ n, got {n}×{d}");
        let gram = m.transpose() * &m;
        let err = (gram - DMatrix::<f64>::identity(d, d)).amax();
        ensure!(err <= 1e-12, Domain, "basis not orthonormal (deviation {err:e})");
        Ok(Subspace { basis: m })
    }

    /// span{e_i : i ∈ idx}.
    pub fn coordinate(n: usize, idx: &[usize]) -> Result<Self> {
        ensure!(idx.iter().all(|&i| i < n), Shape, "coordinate index out of range");
        let m = DMatrix::from_fn(n, idx.len(), |i, j| if i == idx[j] { 1.0 } else { 0.0 });
        Self::from_basis(m)
    }

    /// The line spanned by `v`.
    pub fn line(v: &[f64]) -> Result<Self> {
        Self::from_columns(&[v.to_vec()])
    }

    /// Haar-random element: orthonormalized Gaussian n×d matrix.
    pub fn random(n: usize, d: usize, rng: &mut Rng) -> Self {
        loop {
            let m = DMatrix::from_fn(n, d, |_, _| gaussian(rng));
            if let Ok(s) = Self::from_basis(m) {
                return s;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.basis.nrows()
    }

    pub fn d(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.basis.column(j).iter().copied().collect()
    }

    /// Π_σ x.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let (n, d) = self.basis.shape();
        let mut out = vec![0.0; n];
        for j in 0..d {
            let col = self.basis.column(j);
            let c: f64 = col.iter().zip(x).map(|(a, b)| a * b).sum();
            for i in 0..n {
                out[i] += c * col[i];
            }
        }
        out
    }

    /// Coordinates of Π_σ x in the stored basis.
    pub fn coords(&self, x: &[f64]) -> Vec<f64> {
        (0..self.d())
            .map(|j| self.basis.column(j).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// |Π_σ x|.
    pub fn project_norm(&self, x: &[f64]) -> f64 {
        self.coords(x).iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// |Π_{σ⊥} x|.
    pub fn perp_norm(&self, x: &[f64]) -> f64 {
        let total: f64 = x.iter().map(|v| v * v).sum();
        let par: f64 = self.coords(x).iter().map(|c| c * c).sum();
        (total - par).max(0.0).sqrt()
    }

    /// Point of σ with the given basis coordinates.
    pub fn embed(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (j, cj) in c.iter().enumerate() {
            for (i, o) in out.iter_mut().enumerate() {
                *o += cj * self.basis[(i, j)];
            }
        }
        out
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    /// σ⊥ ∈ Gr(n−d, n). Panics if d = n.
    pub fn complement(&self) -> Subspace {
        let (n, d) = self.basis.shape();
        assert!(d < n, "complement of the full space");
        let mut cols = self.basis.clone().resize_horizontally(d + n, 0.0);
        for i in 0..n {
            cols[(i, d + i)] = 1.0;
        }
        let q = orthonormalize_partial(&cols, n);
        Subspace { basis: q.columns(d, n - d).into_owned() }
    }

    /// R·σ for an orthogonal n×n matrix R.
    pub fn rotate(&self, r: &DMatrix<f64>) -> Subspace {
        Subspace { basis: r * &self.basis }
    }

    /// Column-major basis entries.
    pub fn to_column_major(&self) -> Vec<f64> {
        self.basis.as_slice().to_vec()
    }
}

/// Modified Gram-Schmidt (two passes), dropping dependent columns.
pub(crate) fn orthonormalize(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(orthonormalize_partial(m, m.ncols()))
}

/// Orthonormalizes columns left to right and stops after `keep` independent ones.
fn orthonormalize_partial(m: &DMatrix<f64>, keep: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(keep);
    for j in 0..m.ncols() {
        if out.len() == keep {
            break;
        }
        let mut v = m.column(j).into_owned();
        let norm0 = v.norm();
        if norm0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &out {
                let c = q.dot(&v);
                v.axpy(-c, q, 1.0);
            }
        }
        let r = v.norm();
        if r > RANK_TOL * norm0 {
            out.push(v / r);
        }
    }
    DMatrix::from_fn(n, out.len(), |i, j| out[j][i])
}

/// ‖Π_a − Π_b‖_op, the sine of the largest principal angle.
pub fn metric_distance(a: &Subspace, b: &Subspace) -> Result<f64> {
    ensure!(
        a.n() == b.n() && a.d() == b.d(),
        Shape,
        "Gr({},{}) vs Gr({},{})",
        a.d(),
        a.n(),
        b.d(),
        b.n()
    );
    Ok(distance_unchecked(a, b))
}

pub(crate) fn distance_unchecked(a: &Subspace, b: &Subspace) -> f64 {
    // Fixed argument order makes the result bitwise symmetric.
    let (a, b) = if basis_order(a, b) == std::cmp::Ordering::Greater { (b, a) } else { (a, b) };
    // Largest singular value of (I − Π_a) B.
    let ab = a.basis.transpose() * &b.basis;
    let r = &b.basis - &a.basis * ab;
    let d = r.ncols();
    let s = if d == 1 {
        r.norm()
    } else {
        let g = r.transpose() * r;
        g.symmetric_eigenvalues().max().max(0.0).sqrt()
    };
    s.clamp(0.0, 1.0)
}

fn basis_order(a: &Subspace, b: &Subspace) -> std::cmp::Ordering {
    let (x, y) = (a.basis.as_slice(), b.basis.as_slice());
    x.iter().zip(y).map(|(p, q)| p.total_cmp(q)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
}

/// Haar-random orthogonal n×n matrix.
pub fn random_rotation(n: usize, rng: &mut Rng) -> DMatrix<f64> {
    let s = Subspace::random(n, n, rng);
    s.basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, unit_vector};

    #[test]
    fn identical_and_orthogonal_lines() {
        let e1 = Subspace::coordinate(2, &[0]).unwrap();
        let e2 = Subspace::coordinate(2, &[1]).unwrap();
        assert_eq!(metric_distance(&e1, &e1).unwrap(), 0.0);
        assert!((metric_distance(&e1, &e2).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lines_at_thirty_degrees() {
        // Oracle: largest eigenvalue magnitude of Π_a − Π_b from a dense eigensolve.
        let t = std::f64::consts::PI / 6.0;
        let a = Subspace::line(&[1.0, 0.0]).unwrap();
        let b = Subspace::line(&[t.cos(), t.sin()]).unwrap();
        let diff = a.projector() - b.projector();
        let oracle = diff.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let got = metric_distance(&a, &b).unwrap();
        assert!((got - 0.5).abs() < 1e-12 && (got - oracle).abs() < 1e-12, "{got} {oracle}");
    }

    #[test]
    fn distance_matches_dense_eigensolve() {
        let mut rng = seeded(4);
        for (d, n) in [(1, 3), (2, 4), (2, 5), (3, 5)] {
            for _ in 0..20 {
                let a = Subspace::random(n, d, &mut rng);
                let b = Subspace::random(n, d, &mut rng);
                let diff = a.projector() - b.projector();
                let oracle = diff.symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
                assert!((metric_distance(&a, &b).unwrap() - oracle).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Subspace::coordinate(3, &[0]).unwrap();
        let b = Subspace::coordinate(3, &[0, 1]).unwrap();
        assert!(matches!(metric_distance(&a, &b), Err(crate::Error::Shape(_))));
        assert!(Subspace::from_columns(&[vec![1.0, 0.0], vec![2.0, 0.0]]).is_err());
    }

    #[test]
    fn projection_is_idempotent_and_orthonormal() {
        let mut rng = seeded(9);
        let s = Subspace::random(5, 2, &mut rng);
        let g = s.basis().transpose() * s.basis();
        assert!((g - DMatrix::<f64>::identity(2, 2)).amax() < 1e-12);
        for _ in 0..50 {
            let x = unit_vector(&mut rng, 5);
            let p = s.project(&x);
            let pp = s.project(&p);
            assert!(p.iter().zip(&pp).all(|(a, b)| (a - b).abs() < 1e-10));
            let (par, perp) = (s.project_norm(&x), s.perp_norm(&x));
            assert!((par * par + perp * perp - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn complement_is_orthogonal() {
        let mut rng = seeded(1);
        let s = Subspace::random(5, 2, &mut rng);
        let c = s.complement();
        assert_eq!(c.d(), 3);
        assert!((s.basis().transpose() * c.basis()).amax() < 1e-12);
    }

    #[test]
    fn basis_choice_does_not_matter() {
        let a = Subspace::from_columns(&[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0]]).unwrap();
        let b = Subspace::from_columns(&[vec![1.0, 2.0, 1.0], vec![1.0, 0.0, -1.0]]).unwrap();
        assert_ne!(a.basis(), b.basis());
        assert!(metric_distance(&a, &b).unwrap() < 1e-12);
    }
}
