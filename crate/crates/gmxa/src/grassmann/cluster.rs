use nalgebra::DMatrix;

use super::net::{sphere_net, DirectionSet, Provenance};
use super::subspace::distance_unchecked;
use super::Subspace;
use crate::error::{ensure, Result};
use crate::rng::{seeded, unit_vector};

/// Cone constant 2^-2 of the two-sheeted cone Γ_{σ,δ}.
pub const CONE_WIDE: f64 = 0.25;
/// Cone constant 2^-4 used by the cluster decomposition.
pub const CONE_NARROW: f64 = 0.0625;

/// Γ_{σ,δ} membership: |Π_σ η| < c·δ·|η|.
pub fn cone_membership(sigma: &Subspace, delta: f64, eta: &[f64]) -> Result<bool> {
    cone_membership_with(sigma, delta, eta, CONE_WIDE)
}

pub fn cone_membership_with(sigma: &Subspace, delta: f64, eta: &[f64], constant: f64) -> Result<bool> {
    ensure!(eta.len() == sigma.n(), Shape, "vector has length {}, expected {}", eta.len(), sigma.n());
    let norm = eta.iter().map(|x| x * x).sum::<f64>().sqrt();
    ensure!(norm > 0.0, Domain, "cone membership undefined at η = 0");
    Ok(sigma.project_norm(eta) < constant * delta * norm)
}

/// Members of Σ nearly orthogonal to ξ, each paired with a nearby element of H_ξ(d).
#[derive(Clone, Debug)]
pub struct NearOrthogonal {
    /// Indices into the input set.
    pub indices: Vec<usize>,
    /// a_σ ∈ H_ξ(d) for each selected σ, in the same order.
    pub projected: Vec<Subspace>,
    /// d(a_σ, σ) for each selected σ.
    pub distances: Vec<f64>,
    /// True when ξ had to be normalized.
    pub normalized: bool,
}

/// Σ_ξ = {σ : |Π_σ ξ| < δ/4} and the rotation a_σ of each member into ξ⊥.
///
/// With u = |Π_σ ξ|, b_1 = Π_σ ξ / u and b_2..b_d spanning σ ∩ b_1⊥ (hence ⊥ ξ),
/// a_σ = span{(b_1 − uξ)/|b_1 − uξ|, b_2, …, b_d}.
pub fn near_orthogonal_subset(set: &DirectionSet, xi: &[f64], delta: f64) -> Result<NearOrthogonal> {
    ensure!(xi.len() == set.n, Shape, "ξ has length {}, expected {}", xi.len(), set.n);
    let norm = xi.iter().map(|x| x * x).sum::<f64>().sqrt();
    ensure!(norm > 0.0, Domain, "ξ must be nonzero");
    let normalized = (norm - 1.0).abs() > 1e-12;
    let xi: Vec<f64> = xi.iter().map(|x| x / norm).collect();
    let mut out = NearOrthogonal { indices: Vec::new(), projected: Vec::new(), distances: Vec::new(), normalized };
    for (i, sigma) in set.elements.iter().enumerate() {
        let p = sigma.project(&xi);
        let u = p.iter().map(|x| x * x).sum::<f64>().sqrt();
        if u >= delta / 4.0 {
            continue;
        }
        let a = if u < 1e-15 { sigma.clone() } else { rotate_off(sigma, &xi, &p, u)? };
        out.distances.push(distance_unchecked(&a, sigma));
        out.indices.push(i);
        out.projected.push(a);
    }
    Ok(out)
}

fn rotate_off(sigma: &Subspace, xi: &[f64], p: &[f64], u: f64) -> Result<Subspace> {
    let n = sigma.n();
    let d = sigma.d();
    let b1: Vec<f64> = p.iter().map(|x| x / u).collect();
    // [b1 | basis] orthonormalized; the first d columns span σ with b1 leading.
    let mut m = DMatrix::zeros(n, d + 1);
    for i in 0..n {
        m[(i, 0)] = b1[i];
    }
    for j in 0..d {
        m.set_column(j + 1, &sigma.basis().column(j));
    }
    let q = super::subspace::orthonormalize(&m)?;
    let mut c1: Vec<f64> = (0..n).map(|i| b1[i] - u * xi[i]).collect();
    let r = c1.iter().map(|x| x * x).sum::<f64>().sqrt();
    c1.iter_mut().for_each(|x| *x /= r);
    let mut basis = DMatrix::zeros(n, d);
    for i in 0..n {
        basis[(i, 0)] = c1[i];
    }
    for j in 1..d {
        basis.set_column(j, &q.column(j));
    }
    Subspace::from_basis(basis)
}

/// Candidate pool for the bad-ξ search.
#[derive(Clone, Debug)]
pub struct CandidatePolicy {
    /// Mesh of the sphere covering; `None` means δ/4.
    pub sphere_mesh: Option<f64>,
    /// Random unit vectors per input element.
    pub random_per_element: usize,
    /// Add a local minimizer of max(|Π_σ·|, |Π_σ'·|) for every pair.
    pub pairwise_descent: bool,
    pub seed: u64,
    /// Cone constant (2^-4 in the decomposition).
    pub cone_constant: f64,
}

impl Default for CandidatePolicy {
    fn default() -> Self {
        CandidatePolicy { sphere_mesh: None, random_per_element: 32, pairwise_descent: true, seed: 0, cone_constant: CONE_NARROW }
    }
}

impl CandidatePolicy {
    pub fn pool(&self, set: &DirectionSet, delta: f64) -> Vec<Vec<f64>> {
        let n = set.n;
        let mut pool = sphere_net(n, self.sphere_mesh.unwrap_or(delta / 4.0));
        let mut rng = seeded(self.seed);
        for _ in 0..self.random_per_element * set.len() {
            pool.push(unit_vector(&mut rng, n));
        }
        if self.pairwise_descent {
            for i in 0..set.len() {
                for j in i + 1..set.len() {
                    let start = unit_vector(&mut rng, n);
                    pool.push(pair_minimizer(&set.elements[i], &set.elements[j], start));
                }
            }
        }
        pool
    }
}

/// Projected subgradient descent on S^{n-1} for max(|Π_a x|², |Π_b x|²).
///
/// Started from the least-eigenvector of Π_a + Π_b, which already minimizes
/// the sum; a few descent steps then balance the two terms.
pub fn pair_minimizer(a: &Subspace, b: &Subspace, start: Vec<f64>) -> Vec<f64> {
    let n = a.n();
    let sum = a.projector() + b.projector();
    let eig = sum.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut x: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
    if x.iter().all(|v| v.abs() < 1e-14) {
        x = start;
    }
    let f = |x: &[f64]| a.project_norm(x).max(b.project_norm(x));
    let mut step = 0.25;
    let mut best = f(&x);
    for _ in 0..200 {
        let pa = a.project(&x);
        let pb = b.project(&x);
        let na: f64 = pa.iter().map(|v| v * v).sum();
        let nb: f64 = pb.iter().map(|v| v * v).sum();
        let g = if na >= nb { pa } else { pb };
        let y: Vec<f64> = (0..n).map(|i| x[i] - step * g[i]).collect();
        let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        let y: Vec<f64> = y.into_iter().map(|v| v / r).collect();
        let fy = f(&y);
        if fy < best {
            best = fy;
            x = y;
        } else {
            step *= 0.5;
            if step < 1e-10 {
                break;
            }
        }
    }
    x
}

/// Σ = Σ_0 ∪ Σ_1 ∪ … ∪ Σ_Θ from the greedy bad-ξ extraction.
#[derive(Clone, Debug)]
pub struct ClusterDecomposition {
    pub sigma0: DirectionSet,
    /// (Σ_j, top ξ_j).
    pub clusters: Vec<(DirectionSet, Vec<f64>)>,
    /// Indices of Σ_0 and of each Σ_j into the input.
    pub sigma0_indices: Vec<usize>,
    pub cluster_indices: Vec<Vec<usize>>,
    /// Overlap threshold ⌈N^{(n−d−1)/(n−d)}⌉.
    pub threshold: usize,
    pub steps: usize,
}

impl ClusterDecomposition {
    /// Largest number of Σ_0 cones containing any vector of `pool`.
    pub fn max_overlap(&self, pool: &[Vec<f64>], delta: f64, constant: f64) -> usize {
        pool.iter()
            .map(|eta| self.sigma0.elements.iter().filter(|s| in_cone(s, eta, delta, constant)).count())
            .max()
            .unwrap_or(0)
    }
}

pub fn overlap_threshold(count: usize, d: usize, n: usize) -> usize {
    let e = (n - d - 1) as f64 / (n - d) as f64;
    let t = (count as f64).powf(e);
    // Guard exact powers against rounding up.
    let r = t.round();
    if (t - r).abs() < 1e-9 { r as usize } else { t.ceil() as usize }
}

fn in_cone(s: &Subspace, eta_unit: &[f64], delta: f64, c: f64) -> bool {
    s.project_norm(eta_unit) < c * delta
}

/// Greedy δ-cluster extraction over a finite candidate pool.
pub fn cluster_decompose(set: &DirectionSet, delta: f64, policy: &CandidatePolicy) -> Result<ClusterDecomposition> {
    let (n, d) = (set.n, set.d);
    ensure!(d < n, Domain, "need d < n");
    ensure!(delta > 0.0, Domain, "delta must be positive");
    let count = set.len();
    let threshold = if count == 0 { 0 } else { overlap_threshold(count, d, n) };
    let empty = |idx: &[usize]| -> Result<DirectionSet> {
        DirectionSet::new(n, d, idx.iter().map(|&i| set.elements[i].clone()).collect(), Provenance::Explicit)
    };
    if count == 0 {
        return Ok(ClusterDecomposition {
            sigma0: empty(&[])?,
            clusters: Vec::new(),
            sigma0_indices: Vec::new(),
            cluster_indices: Vec::new(),
            threshold,
            steps: 0,
        });
    }
    let pool = policy.pool(set, delta);
    let words = count.div_ceil(64);
    // membership bitsets: pool vector p lies in cone of σ_i
    let mut bits = vec![0u64; pool.len() * words];
    for (p, eta) in pool.iter().enumerate() {
        for (i, s) in set.elements.iter().enumerate() {
            if in_cone(s, eta, delta, policy.cone_constant) {
                bits[p * words + i / 64] |= 1 << (i % 64);
            }
        }
    }
    let mut alive = vec![0u64; words];
    for i in 0..count {
        alive[i / 64] |= 1 << (i % 64);
    }
    let mut clusters = Vec::new();
    let mut cluster_indices = Vec::new();
    let mut steps = 0;
    loop {
        let mut best = (0usize, usize::MAX);
        for p in 0..pool.len() {
            let c: u32 = (0..words).map(|w| (bits[p * words + w] & alive[w]).count_ones()).sum();
            if c as usize > best.0 {
                best = (c as usize, p);
            }
        }
        if best.0 <= threshold {
            break;
        }
        let p = best.1;
        let idx: Vec<usize> = (0..count).filter(|&i| bits[p * words + i / 64] & alive[i / 64] & (1 << (i % 64)) != 0).collect();
        for &i in &idx {
            alive[i / 64] &= !(1 << (i % 64));
        }
        clusters.push((empty(&idx)?, pool[p].clone()));
        cluster_indices.push(idx);
        steps += 1;
        ensure!(steps <= count.pow(d as u32), Domain, "cluster extraction exceeded N^d steps");
    }
    let rest: Vec<usize> = (0..count).filter(|&i| alive[i / 64] & (1 << (i % 64)) != 0).collect();
    Ok(ClusterDecomposition { sigma0: empty(&rest)?, clusters, sigma0_indices: rest, cluster_indices, threshold, steps })
}
