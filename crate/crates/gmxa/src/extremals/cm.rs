use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ensure, Result};
use crate::grassmann::{sphere_net, DirectionSet, Provenance, Subspace};
use crate::plates::{ball_point, unit_ball_volume};
use crate::rng::{seeded, substream, unit_vector, Rng};

/// Net constant as printed in the construction (mesh 2^-18·M).
pub const CM_NET_CONSTANT: f64 = 1.0 / 262_144.0;
/// Closeness |v − η| < 2^-8/M required by the slab bound.
pub const CM_CLOSENESS: f64 = 1.0 / 256.0;
/// U_M radial shell 2^-8·M ≤ ρ ≤ 2^-7·M.
pub const CM_INNER: f64 = 1.0 / 256.0;
pub const CM_OUTER: f64 = 1.0 / 128.0;
/// Slab lower bound 2^-10·M^{d−1}.
pub const CM_SLAB: f64 = 1.0 / 1024.0;
/// Scales below this make the printed mesh 2^-18·M smaller than 2^-10.
pub const CM_MIN_SCALE: f64 = 256.0;

/// C_M = {|x_ω| ≤ M, |x − x_ω| ≤ 1} for a fixed ω ∈ Gr(d−1, n), with the
/// direction family Σ_M = {span(ω, v) : v ∈ E_M}.
#[derive(Clone, Debug)]
pub struct CMConstruction {
    pub d: usize,
    pub n: usize,
    pub m: f64,
    pub omega: Subspace,
    /// Orthonormal basis of ω⊥, of dimension n − d + 1.
    pub perp: Subspace,
    /// Chordal mesh of E_M.
    pub mesh: f64,
    /// E_M as unit vectors of R^n in ω⊥, one per line.
    pub net: Vec<Vec<f64>>,
    pub sigma: DirectionSet,
    /// Set when M < 2^8, where the printed mesh constant is replaced.
    pub adjusted: bool,
}

#[derive(Serialize)]
pub struct CMManifest {
    pub d: usize,
    pub n: usize,
    pub m: f64,
    pub omega: Vec<f64>,
    pub mesh: f64,
    pub net_size: usize,
    pub adjusted: bool,
    pub volume_c: f64,
    pub volume_u: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SlabCheck {
    pub measure: f64,
    pub stderr: f64,
    pub bound: f64,
}

/// Builds the construction with E_M of mesh 2^-8/M (the slab closeness scale).
pub fn cm_construction(d: usize, n: usize, m: f64, seed: u64) -> Result<CMConstruction> {
    cm_construction_with_mesh(d, n, m, CM_CLOSENESS / m, seed)
}

pub fn cm_construction_with_mesh(d: usize, n: usize, m: f64, mesh: f64, seed: u64) -> Result<CMConstruction> {
    ensure!(1 < d && d < n, Domain, "need 1 < d < n, got d = {d}, n = {n}");
    ensure!(m >= 1.0 && m.is_finite(), Domain, "scale M must be at least 1, got {m}");
    ensure!(mesh > 0.0 && mesh < 1.0, Domain, "mesh must lie in (0, 1)");
    let mut rng = seeded(seed);
    let omega = Subspace::random(n, d - 1, &mut rng);
    let perp = omega.complement();
    let k = n - d + 1;
    let local: Vec<Vec<f64>> = if k == 2 {
        // Lines in the plane: angles in [0, π) with step = mesh.
        let count = (std::f64::consts::PI / mesh).ceil() as usize;
        (0..count)
            .map(|i| {
                let a = std::f64::consts::PI * i as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect()
    } else {
        sphere_net(k, mesh)
            .into_iter()
            .filter(|v| v.iter().find(|c| c.abs() > 1e-12).is_some_and(|c| *c > 0.0))
            .collect()
    };
    let net: Vec<Vec<f64>> = local.iter().map(|c| perp.embed(c)).collect();
    let elements = net
        .iter()
        .map(|v| {
            let mut cols: Vec<Vec<f64>> = (0..d - 1).map(|j| omega.column(j)).collect();
            cols.push(v.clone());
            Subspace::from_columns(&cols)
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = DirectionSet::new(n, d, elements, Provenance::Net)?;
    Ok(CMConstruction { d, n, m, omega, perp, mesh, net, sigma, adjusted: m < CM_MIN_SCALE })
}

impl CMConstruction {
    fn split(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (self.omega.coords(x), self.perp.coords(x))
    }

    pub fn in_c(&self, x: &[f64]) -> bool {
        let (a, b) = self.split(x);
        norm(&a) <= self.m && norm(&b) <= 1.0
    }

    pub fn in_u(&self, x: &[f64]) -> bool {
        let (a, b) = self.split(x);
        let rho = norm(&b);
        norm(&a) <= 0.5 * self.m && (CM_INNER * self.m..=CM_OUTER * self.m).contains(&rho)
    }

    pub fn volume_c(&self) -> f64 {
        unit_ball_volume(self.d - 1) * self.m.powi(self.d as i32 - 1) * unit_ball_volume(self.n - self.d + 1)
    }

    pub fn volume_u(&self) -> f64 {
        let k = (self.n - self.d + 1) as i32;
        unit_ball_volume(self.d - 1)
            * (0.5 * self.m).powi(self.d as i32 - 1)
            * unit_ball_volume(k as usize)
            * ((CM_OUTER * self.m).powi(k) - (CM_INNER * self.m).powi(k))
    }

    /// Uniform point of U_M.
    pub fn sample_u(&self, rng: &mut Rng) -> Vec<f64> {
        let k = self.n - self.d + 1;
        let a = ball_point(rng, self.d - 1, 0.5 * self.m);
        let (r0, r1) = ((CM_INNER * self.m).powi(k as i32), (CM_OUTER * self.m).powi(k as i32));
        let rho = (r0 + rng.random::<f64>() * (r1 - r0)).powf(1.0 / k as f64);
        let eta: Vec<f64> = unit_vector(rng, k).into_iter().map(|c| c * rho).collect();
        let mut x = self.omega.embed(&a);
        for (xi, yi) in x.iter_mut().zip(self.perp.embed(&eta)) {
            *xi += yi;
        }
        x
    }

    /// Thin average of 1_{C_M} over x + T_0^M(span(ω, v)), normalized by ω_d·M^d.
    ///
    /// The ω⊥ constraint cuts an interval of the v-parameter t; for each t the
    /// ω-part is a lens of two balls in R^{d−1}, integrated by quadrature in t.
    pub fn thin_average(&self, x: &[f64], v: &[f64]) -> f64 {
        let (xa, xb) = self.split(x);
        let vb = self.perp.coords(v);
        let a = norm(&xa);
        let m = self.m;
        // |xb + t·vb|² ≤ 1 with |vb| = 1.
        let c: f64 = xb.iter().zip(&vb).map(|(p, q)| p * q).sum();
        let disc = c * c - (norm2(&xb) - 1.0);
        if disc <= 0.0 {
            return 0.0;
        }
        let (lo, hi) = ((-c - disc.sqrt()).max(-m), (-c + disc.sqrt()).min(m));
        if hi <= lo {
            return 0.0;
        }
        let nodes = 64;
        let dt = (hi - lo) / nodes as f64;
        let mut acc = 0.0;
        for i in 0..nodes {
            let t = lo + (i as f64 + 0.5) * dt;
            acc += lens_volume(self.d - 1, (m * m - t * t).max(0.0).sqrt(), m, a) * dt;
        }
        acc / (unit_ball_volume(self.d) * m.powi(self.d as i32))
    }

    /// M_{Σ_M,{M}} 1_{C_M}(x).
    pub fn maximal_at(&self, x: &[f64]) -> f64 {
        self.net.iter().map(|v| self.thin_average(x, v)).fold(0.0, f64::max)
    }

    /// MC estimate of |[x + T_0^M(span(ω, η))] ∩ C_M| with η = direction of x⊥.
    pub fn slab_check(&self, x: &[f64], samples: usize, seed: u64) -> Result<SlabCheck> {
        let (_, xb) = self.split(x);
        let rho = norm(&xb);
        ensure!(rho > 0.0, Domain, "x lies on ω");
        let eta = self.perp.embed(&xb.iter().map(|c| c / rho).collect::<Vec<_>>());
        let mut cols: Vec<Vec<f64>> = (0..self.d - 1).map(|j| self.omega.column(j)).collect();
        cols.push(eta);
        let sigma = Subspace::from_columns(&cols)?;
        let mut rng = seeded(seed);
        let mut hits = 0usize;
        for _ in 0..samples {
            let c = ball_point(&mut rng, self.d, self.m);
            let mut y = sigma.embed(&c);
            for (yi, xi) in y.iter_mut().zip(x) {
                *yi += xi;
            }
            hits += self.in_c(&y) as usize;
        }
        let vol = unit_ball_volume(self.d) * self.m.powi(self.d as i32);
        let p = hits as f64 / samples as f64;
        Ok(SlabCheck {
            measure: p * vol,
            stderr: (p * (1.0 - p) / samples as f64).sqrt() * vol,
            bound: CM_SLAB * self.m.powi(self.d as i32 - 1),
        })
    }

    /// Values of the maximal function at `count` uniform points of U_M.
    pub fn sample_maximal(&self, count: usize, seed: u64) -> Vec<f64> {
        (0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = seeded(substream(seed, i as u64));
                let x = self.sample_u(&mut rng);
                self.maximal_at(&x)
            })
            .collect()
    }

    /// (|U_M|·mean(values^p))^{1/p} / |C_M|^{1/p}: the restricted L^p quotient.
    pub fn quotient(&self, values: &[f64], p: f64) -> f64 {
        let mean = values.iter().map(|v| v.powf(p)).sum::<f64>() / values.len() as f64;
        (self.volume_u() * mean / self.volume_c()).powf(1.0 / p)
    }

    pub fn manifest(&self) -> CMManifest {
        CMManifest {
            d: self.d,
            n: self.n,
            m: self.m,
            omega: self.omega.to_column_major(),
            mesh: self.mesh,
            net_size: self.net.len(),
            adjusted: self.adjusted,
            volume_c: self.volume_c(),
            volume_u: self.volume_u(),
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

fn norm(v: &[f64]) -> f64 {
    norm2(v).sqrt()
}

/// |B(0, r) ∩ B(a·e1, R)| in R^k.
pub fn lens_volume(k: usize, r: f64, big: f64, a: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k == 1 {
        let lo = (-r).max(a - big);
        let hi = r.min(a + big);
        return (hi - lo).max(0.0);
    }
    let lo = (-r).max(a - big);
    let hi = r.min(a + big);
    if hi <= lo {
        return 0.0;
    }
    let nodes = 128;
    let dz = (hi - lo) / nodes as f64;
    let slice = unit_ball_volume(k - 1);
    let mut acc = 0.0;
    for i in 0..nodes {
        let z = lo + (i as f64 + 0.5) * dz;
        let s2 = (r * r - z * z).min(big * big - (z - a) * (z - a));
        if s2 > 0.0 {
            acc += slice * s2.powf(0.5 * (k - 1) as f64) * dz;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_direction_contains_omega() {
        let cm = cm_construction(2, 4, 4.0, 3).unwrap();
        let w = cm.omega.column(0);
        for s in &cm.sigma.elements {
            assert!(s.perp_norm(&w) < 1e-12);
        }
        assert_eq!(cm.sigma.d, 2);
    }

    #[test]
    fn net_size_is_linear_in_m() {
        let a = cm_construction(2, 3, 8.0, 1).unwrap().net.len() as f64;
        let b = cm_construction(2, 3, 16.0, 1).unwrap().net.len() as f64;
        assert!((b / a - 2.0).abs() < 0.01);
        assert!(cm_construction(2, 3, 8.0, 1).unwrap().adjusted);
    }

    #[test]
    fn net_covers_lines() {
        let cm = cm_construction(2, 3, 4.0, 2).unwrap();
        let mut rng = seeded(4);
        for _ in 0..200 {
            let c = unit_vector(&mut rng, 2);
            let v = cm.perp.embed(&c);
            let best = cm
                .net
                .iter()
                .map(|e| {
                    let dot: f64 = e.iter().zip(&v).map(|(a, b)| a * b).sum();
                    (1.0 - dot * dot).max(0.0).sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < CM_CLOSENESS / cm.m);
        }
    }

    #[test]
    fn guards() {
        assert!(cm_construction(1, 3, 8.0, 0).is_err());
        assert!(cm_construction(3, 3, 8.0, 0).is_err());
        assert!(cm_construction(2, 3, 0.5, 0).is_err());
    }

    #[test]
    fn lens_matches_circle_intersection() {
        // Two unit discs at distance 1: 2π/3 − √3/2.
        let want = 2.0 * std::f64::consts::PI / 3.0 - 3f64.sqrt() / 2.0;
        assert!((lens_volume(2, 1.0, 1.0, 1.0) - want).abs() < 1e-3);
        assert_eq!(lens_volume(1, 1.0, 2.0, 0.5), 2.0);
        assert_eq!(lens_volume(1, 1.0, 0.5, 3.0), 0.0);
    }

    #[test]
    fn thin_average_matches_sampling() {
        let cm = cm_construction(2, 3, 4.0, 7).unwrap();
        let mut rng = seeded(8);
        for _ in 0..5 {
            let x = cm.sample_u(&mut rng);
            assert!(cm.in_u(&x));
            let v = &cm.net[rng.random_range(0..cm.net.len())];
            let sigma = Subspace::from_columns(&[cm.omega.column(0), v.clone()]).unwrap();
            let samples = 200_000;
            let mut hits = 0;
            for _ in 0..samples {
                let c = ball_point(&mut rng, 2, cm.m);
                let mut y = sigma.embed(&c);
                for (yi, xi) in y.iter_mut().zip(&x) {
                    *yi += xi;
                }
                hits += cm.in_c(&y) as usize;
            }
            let mc = hits as f64 / samples as f64;
            let exact = cm.thin_average(&x, v);
            assert!((mc - exact).abs() < 4.0 * (mc * (1.0 - mc) / samples as f64).sqrt() + 2e-3, "{mc} vs {exact}");
        }
    }

    #[test]
    fn slab_lower_bound() {
        let cm = cm_construction(2, 3, 16.0, 5).unwrap();
        let mut rng = seeded(6);
        for i in 0..5 {
            let x = cm.sample_u(&mut rng);
            let s = cm.slab_check(&x, 20_000, i).unwrap();
            assert!(s.measure >= s.bound);
        }
    }

    #[test]
    fn volumes_match_sampling() {
        let cm = cm_construction(2, 3, 2.0, 1).unwrap();
        let mut rng = seeded(2);
        // Box [−3, 3]^3 contains C_M.
        let samples = 200_000;
        let hits = (0..samples)
            .filter(|_| {
                let x: Vec<f64> = (0..3).map(|_| rng.random_range(-3.0..3.0)).collect();
                cm.in_c(&x)
            })
            .count();
        let mc = hits as f64 / samples as f64 * 216.0;
        assert!((mc - cm.volume_c()).abs() < 0.03 * cm.volume_c(), "{mc} vs {}", cm.volume_c());
    }
}
