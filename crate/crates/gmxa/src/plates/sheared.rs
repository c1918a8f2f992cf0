use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng::Rng;

/// Largest admissible angle between a plate orientation and e_n.
pub const MAX_TILT: f64 = std::f64::consts::PI / 16.0;

/// P(I, K, v) = ∪_{t∈K} p(I, t, v): the points y with Π_{e_n⊥} y ∈ I lying on
/// v⊥ + (c_I, t) for some t ∈ K.
///
/// I is a cube in e_n⊥ with center `c_i`, side `side` and orthonormal axes
/// `frame` (identity for lattice plates; rotated for hat enlargements).
/// Boundaries are half-open so that lattice plates tile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearedPlate {
    pub c_i: Vec<f64>,
    pub side: f64,
    /// d×d, columns are the cube axes.
    pub frame: Vec<f64>,
    pub k: (f64, f64),
    pub v: Vec<f64>,
}

impl ShearedPlate {
    /// Axis-parallel base cube.
    pub fn new(c_i: Vec<f64>, side: f64, k: (f64, f64), v: Vec<f64>) -> Result<Self> {
        let d = c_i.len();
        let frame = DMatrix::<f64>::identity(d, d).as_slice().to_vec();
        Self::with_frame(c_i, side, frame, k, v)
    }

    pub fn with_frame(c_i: Vec<f64>, side: f64, frame: Vec<f64>, k: (f64, f64), v: Vec<f64>) -> Result<Self> {
        let d = c_i.len();
        ensure!(d >= 1, Shape, "base cube must have dimension ≥ 1");
        ensure!(v.len() == d + 1, Shape, "orientation has length {}, expected {}", v.len(), d + 1);
        ensure!(frame.len() == d * d, Shape, "frame must be {d}×{d}");
        ensure!(side > 0.0, Domain, "side must be positive");
        ensure!(k.1 > k.0, Domain, "height interval must be nonempty");
        ensure!(k.1 - k.0 <= side * (1.0 + 1e-12), Domain, "height |K| = {} exceeds side {side}", k.1 - k.0);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        ensure!((norm - 1.0).abs() < 1e-9, Domain, "orientation must be a unit vector");
        ensure!(
            v[d] >= MAX_TILT.cos() - 1e-12,
            Domain,
            "orientation is {:.4} rad from e_n, limit π/16",
            v[d].clamp(-1.0, 1.0).acos()
        );
        Ok(ShearedPlate { c_i, side, frame, k, v })
    }

    pub fn d(&self) -> usize {
        self.c_i.len()
    }

    pub fn n(&self) -> usize {
        self.d() + 1
    }

    pub fn thickness(&self) -> f64 {
        self.k.1 - self.k.0
    }

    /// Center c_Q = (c_I, c_K).
    pub fn center(&self) -> Vec<f64> {
        let mut c = self.c_i.clone();
        c.push(0.5 * (self.k.0 + self.k.1));
        c
    }

    /// |Q| = ℓ^d·|K| (the shear has unit Jacobian).
    pub fn volume(&self) -> f64 {
        self.side.powi(self.d() as i32) * self.thickness()
    }

    pub fn is_axis_parallel(&self) -> bool {
        let d = self.d();
        (0..d).all(|i| (0..d).all(|j| self.frame[j * d + i] == if i == j { 1.0 } else { 0.0 }))
    }

    /// Height of the t = 0 slice above y' ∈ e_n⊥.
    pub fn base_height(&self, yp: &[f64]) -> f64 {
        let d = self.d();
        -(0..d).map(|i| self.v[i] * (yp[i] - self.c_i[i])).sum::<f64>() / self.v[d]
    }

    /// Slice parameter t of a point on some slice.
    pub fn slice_param(&self, y: &[f64]) -> f64 {
        y[self.d()] - self.base_height(&y[..self.d()])
    }

    /// Π_{e_n⊥} y ∈ I, with I half-open along every axis.
    pub fn base_contains(&self, yp: &[f64]) -> bool {
        let d = self.d();
        let h = 0.5 * self.side;
        (0..d).all(|k| {
            let c: f64 = (0..d).map(|i| self.frame[k * d + i] * (yp[i] - self.c_i[i])).sum();
            c >= -h && c < h
        })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let d = self.d();
        if !self.base_contains(&y[..d]) {
            return false;
        }
        let t = self.slice_param(y);
        t >= self.k.0 && t < self.k.1
    }

    /// Dilation by λ about c_Q.
    pub fn dilate(&self, lambda: f64) -> ShearedPlate {
        let ck = 0.5 * (self.k.0 + self.k.1);
        let hk = 0.5 * self.thickness() * lambda;
        ShearedPlate {
            c_i: self.c_i.clone(),
            side: self.side * lambda,
            frame: self.frame.clone(),
            k: (ck - hk, ck + hk),
            v: self.v.clone(),
        }
    }

    /// ∪_{1≤s≤S}(1+s)Q, which is the largest dilate (1+S)Q.
    pub fn hat_enlargement(&self, max_s: f64) -> ShearedPlate {
        self.dilate(1.0 + max_s)
    }

    /// Default dilation range 100n.
    pub fn default_hat_range(&self) -> f64 {
        100.0 * self.n() as f64
    }

    /// Uniform point of Q.
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let d = self.d();
        let mut y = self.c_i.clone();
        for k in 0..d {
            let c = (rng.random::<f64>() - 0.5) * self.side;
            for i in 0..d {
                y[i] += c * self.frame[k * d + i];
            }
        }
        let t = self.k.0 + rng.random::<f64>() * self.thickness();
        let h = self.base_height(&y);
        y.push(h + t);
        y
    }

    /// Axis-aligned bounding box (lo, hi) of the closure.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let d = self.d();
        let h = 0.5 * self.side;
        let mut lo = vec![f64::INFINITY; d + 1];
        let mut hi = vec![f64::NEG_INFINITY; d + 1];
        for corner in 0..(1usize << d) {
            let mut yp = self.c_i.clone();
            for k in 0..d {
                let s = if corner >> k & 1 == 1 { h } else { -h };
                for i in 0..d {
                    yp[i] += s * self.frame[k * d + i];
                }
            }
            let b = self.base_height(&yp);
            for i in 0..d {
                lo[i] = lo[i].min(yp[i]);
                hi[i] = hi[i].max(yp[i]);
            }
            lo[d] = lo[d].min(b + self.k.0);
            hi[d] = hi[d].max(b + self.k.1);
        }
        (lo, hi)
    }
}

/// Q̂ for Q ≤ R: same height and orientation, base replaced by the smallest
/// cube containing I_Q whose first d−1 axes span Π_{e_n⊥} lin_{Q,R}.
pub fn hat_plate(q: &ShearedPlate, r: &ShearedPlate) -> Result<ShearedPlate> {
    ensure!(q.d() == r.d(), Shape, "plates live in different dimensions");
    let d = q.d();
    if q.v == r.v || d == 1 {
        // For d = 1 the only axis is e_1, so the hat is Q itself.
        return Ok(q.clone());
    }
    // lin_{Q,R} = v_Q⊥ ∩ v_R⊥; its projection to e_n⊥ is u⊥ (inside R^d) with
    // u the e_n⊥ part of v_R·(v_Q)_n − v_Q·(v_R)_n.
    let u: Vec<f64> = (0..d).map(|i| r.v[i] * q.v[d] - q.v[i] * r.v[d]).collect();
    let un = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    ensure!(un > 1e-14, Domain, "orientations are numerically equal");
    let g_last: Vec<f64> = u.iter().map(|x| x / un).collect();
    // Complete g_last to an orthonormal basis; it becomes the final axis.
    let mut m = DMatrix::zeros(d, d + 1);
    for i in 0..d {
        m[(i, 0)] = g_last[i];
        m[(i, 1 + i)] = 1.0;
    }
    let b = crate::grassmann::orthonormalize(&m)?;
    let mut frame = vec![0.0; d * d];
    for k in 0..d - 1 {
        for i in 0..d {
            frame[k * d + i] = b[(i, k + 1)];
        }
    }
    for i in 0..d {
        frame[(d - 1) * d + i] = g_last[i];
    }
    // Extent of I_Q along each new axis.
    let mut side = 0.0f64;
    for k in 0..d {
        let mut w = 0.0;
        for j in 0..d {
            let qa: f64 = (0..d).map(|i| frame[k * d + i] * q.frame[j * d + i]).sum();
            w += qa.abs();
        }
        side = side.max(w * q.side);
    }
    ShearedPlate::with_frame(q.c_i.clone(), side, frame, q.k, q.v.clone())
}

/// R̂ = P(d·I_R, K_R, v_R).
pub fn hat_base(r: &ShearedPlate) -> ShearedPlate {
    let mut out = r.clone();
    out.side *= r.d() as f64;
    out
}

/// d-dimensional measure of the sheared slice of Q̂ at height a, in the
/// coordinates where v_{R̂} = e_n: |{y' ∈ I_{R̂} : (y', a) ∈ S_R(Q̂)}|.
///
/// Midpoint quadrature with `resolution` points per axis of I_{R̂}.
pub fn sheared_slice_measure(q: &ShearedPlate, hat_r: &ShearedPlate, a: f64, resolution: usize) -> f64 {
    let d = q.d();
    let cell = hat_r.side / resolution as f64;
    let total = resolution.pow(d as u32);
    let mut count = 0usize;
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        let mut yp = hat_r.c_i.clone();
        for k in 0..d {
            let c = -0.5 * hat_r.side + (idx[k] as f64 + 0.5) * cell;
            for i in 0..d {
                yp[i] += c * hat_r.frame[k * d + i];
            }
        }
        if q.base_contains(&yp) {
            // Original height a + h_R(y'); Q̂ contains it iff that minus h_Q(y') lies in K_Q.
            let t = a + hat_r.base_height(&yp) - q.base_height(&yp);
            if t >= q.k.0 && t < q.k.1 {
                count += 1;
            }
        }
        for k in 0..d {
            idx[k] += 1;
            if idx[k] < resolution {
                break;
            }
            idx[k] = 0;
        }
    }
    count as f64 * cell.powi(d as i32)
}

/// Sheared heights of Q̂ over I_{R̂}: the range of a with nonzero slice.
pub fn sheared_height_range(q: &ShearedPlate, hat_r: &ShearedPlate) -> (f64, f64) {
    let d = q.d();
    let h = 0.5 * q.side;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for corner in 0..(1usize << d) {
        let mut yp = q.c_i.clone();
        for k in 0..d {
            let s = if corner >> k & 1 == 1 { h } else { -h };
            for i in 0..d {
                yp[i] += s * q.frame[k * d + i];
            }
        }
        let off = q.base_height(&yp) - hat_r.base_height(&yp);
        lo = lo.min(off + q.k.0);
        hi = hi.max(off + q.k.1);
    }
    (lo, hi)
}

/// Q ≤ R: I_Q ⊆ I_R and Q ∩ R ≠ ∅ (decided on a sample grid of I_Q).
pub fn precedes(q: &ShearedPlate, r: &ShearedPlate) -> bool {
    if !cube_inside(q, r) {
        return false;
    }
    plates_meet(q, r)
}

fn cube_inside(q: &ShearedPlate, r: &ShearedPlate) -> bool {
    let d = q.d();
    let h = 0.5 * q.side;
    let eps = 1e-12 * r.side;
    (0..(1usize << d)).all(|corner| {
        let mut yp = q.c_i.clone();
        for k in 0..d {
            let s = if corner >> k & 1 == 1 { h } else { -h };
            for i in 0..d {
                yp[i] += s * q.frame[k * d + i];
            }
        }
        let hr = 0.5 * r.side;
        (0..d).all(|k| {
            let c: f64 = (0..d).map(|i| r.frame[k * d + i] * (yp[i] - r.c_i[i])).sum();
            c >= -hr - eps && c <= hr + eps
        })
    })
}

/// Q ∩ R ≠ ∅ for plates whose bases overlap in I_Q: over I_Q ∩ I_R the
/// difference of the two sheared height bands is affine, so checking the
/// corners of I_Q (plus the center) against the overlap of the bands decides it
/// whenever I_Q ⊆ I_R.
pub fn plates_meet(q: &ShearedPlate, r: &ShearedPlate) -> bool {
    let d = q.d();
    let h = 0.5 * q.side;
    // t_R − t_Q shift g(y') = h_Q(y') − h_R(y') is affine; the plates meet iff
    // some y' in I_Q ∩ I_R has (K_Q + g(y')) ∩ K_R ≠ ∅ (open on the right).
    let mut gmin = f64::INFINITY;
    let mut gmax = f64::NEG_INFINITY;
    for corner in 0..(1usize << d) {
        let mut yp = q.c_i.clone();
        for k in 0..d {
            let s = if corner >> k & 1 == 1 { h } else { -h };
            for i in 0..d {
                yp[i] += s * q.frame[k * d + i];
            }
        }
        let g = q.base_height(&yp) - r.base_height(&yp);
        gmin = gmin.min(g);
        gmax = gmax.max(g);
    }
    // Need g with K_Q.0 + g < K_R.1 and K_R.0 < K_Q.1 + g.
    let need_lo = r.k.0 - q.k.1;
    let need_hi = r.k.1 - q.k.0;
    gmax > need_lo && gmin < need_hi
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn tilted(rng: &mut Rng, n: usize, max: f64) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let ang = rng.random_range(0.0..max);
        v.iter_mut().for_each(|x| *x *= ang.sin() / r);
        v.push(ang.cos());
        v
    }

    #[test]
    fn construction_checks() {
        assert!(ShearedPlate::new(vec![0.0], 1.0, (0.0, 0.1), vec![0.0, 1.0]).is_ok());
        assert!(ShearedPlate::new(vec![0.0], 1.0, (0.0, 2.0), vec![0.0, 1.0]).is_err());
        let steep = MAX_TILT * 1.5;
        assert!(ShearedPlate::new(vec![0.0], 1.0, (0.0, 0.1), vec![steep.sin(), steep.cos()]).is_err());
        assert!(ShearedPlate::new(vec![0.0, 0.0], 1.0, (0.0, 0.1), vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn samples_lie_inside_and_volume_is_sheared_box() {
        let mut rng = seeded(3);
        let q = ShearedPlate::new(vec![0.5, -0.5], 0.5, (0.1, 0.2), tilted(&mut rng, 3, MAX_TILT)).unwrap();
        assert!((0..1000).all(|_| q.contains(&q.sample(&mut rng))));
        let (lo, hi) = q.bounding_box();
        let samples = 100_000;
        let hits = (0..samples)
            .filter(|_| {
                let y: Vec<f64> = (0..3).map(|i| rng.random_range(lo[i]..hi[i])).collect();
                q.contains(&y)
            })
            .count();
        let boxv: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
        let f = hits as f64 / samples as f64;
        let se = boxv * (f * (1.0 - f) / samples as f64).sqrt();
        assert!((boxv * f - q.volume()).abs() <= 3.0 * se);
    }

    #[test]
    fn untilted_slice_is_the_base_overlap() {
        let q = ShearedPlate::new(vec![0.25, 0.25], 0.5, (0.0, 0.25), vec![0.0, 0.0, 1.0]).unwrap();
        let r = ShearedPlate::new(vec![0.5, 0.5], 1.0, (0.0, 0.25), vec![0.0, 0.0, 1.0]).unwrap();
        let hr = hat_base(&r);
        for a in [0.0, 0.1, 0.2] {
            assert!((sheared_slice_measure(&q, &hr, a, 64) - 0.25).abs() < 1e-12);
        }
        assert_eq!(sheared_slice_measure(&q, &hr, 0.3, 64), 0.0);
        assert_eq!(sheared_slice_measure(&q, &hr, -0.01, 64), 0.0);
        assert_eq!(sheared_height_range(&q, &hr), (0.0, 0.25));
    }

    #[test]
    fn order_and_hat() {
        let mut rng = seeded(5);
        let v = tilted(&mut rng, 3, MAX_TILT);
        let r = ShearedPlate::new(vec![0.5, 0.5], 1.0, (0.0, 0.1), v.clone()).unwrap();
        assert!(precedes(&r, &r));
        let q = ShearedPlate::new(vec![0.25, 0.25], 0.5, (0.0, 0.05), v).unwrap();
        assert!(precedes(&q, &r));
        assert!(!precedes(&r, &q));
        assert_eq!(hat_plate(&q, &r).unwrap(), q);
        // Different orientation: the hat base contains I_Q.
        let w = tilted(&mut rng, 3, MAX_TILT);
        let q2 = ShearedPlate::new(vec![0.25, 0.25], 0.5, (0.0, 0.05), w).unwrap();
        let hq = hat_plate(&q2, &r).unwrap();
        assert!(hq.side >= q2.side);
        for _ in 0..500 {
            let y = q2.sample(&mut rng);
            assert!(hq.base_contains(&y[..2]));
        }
    }

    #[test]
    fn tilted_slices_are_controlled_by_their_average() {
        // max_a slice ≤ 16 · mean over 3K on random tilted pairs in R³.
        let mut rng = seeded(7);
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let r = ShearedPlate::new(vec![0.5, 0.5], 1.0, (0.0, 0.05), tilted(&mut rng, 3, MAX_TILT)).unwrap();
            let q = ShearedPlate::new(vec![0.375, 0.625], 0.25, (0.0, 0.0125), tilted(&mut rng, 3, MAX_TILT)).unwrap();
            let hr = hat_base(&r);
            let (lo, hi) = sheared_height_range(&q, &hr);
            let steps = 200;
            let slice = |a: f64| sheared_slice_measure(&q, &hr, a, 48);
            let max = (0..=steps).map(|i| slice(lo + (hi - lo) * i as f64 / steps as f64)).fold(0.0, f64::max);
            let len = hi - lo;
            let (t0, t1) = (lo - len, hi + len);
            let dt = (t1 - t0) / steps as f64;
            let mean = (0..steps).map(|i| slice(t0 + (i as f64 + 0.5) * dt)).sum::<f64>() * dt / (3.0 * len);
            worst = worst.max(max / mean);
        }
        assert!(worst <= 16.0, "{worst}");
    }
}
