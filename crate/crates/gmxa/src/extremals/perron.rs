use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::gridops::GridFunction;

/// δ × L rectangle in the plane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tube {
    pub center: [f64; 2],
    pub direction: [f64; 2],
    pub length: f64,
    pub width: f64,
}

impl Tube {
    pub fn contains(&self, p: &[f64]) -> bool {
        let (dx, dy) = (p[0] - self.center[0], p[1] - self.center[1]);
        let a = dx * self.direction[0] + dy * self.direction[1];
        let b = -dx * self.direction[1] + dy * self.direction[0];
        a.abs() <= 0.5 * self.length && b.abs() <= 0.5 * self.width
    }

    pub fn angle(&self) -> f64 {
        self.direction[1].atan2(self.direction[0])
    }

    /// Same center and direction, length scaled by `factor`.
    pub fn lengthened(&self, factor: f64) -> Tube {
        Tube { length: self.length * factor, ..self.clone() }
    }

    /// x-interval of the row y = `y`, if any.
    fn row(&self, y: f64) -> Option<(f64, f64)> {
        let (u, v) = (self.direction[0], self.direction[1]);
        let dy = y - self.center[1];
        // |dx·u + dy·v| ≤ L/2 and |−dx·v + dy·u| ≤ W/2.
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (coef, off, half) in [(u, dy * v, 0.5 * self.length), (-v, dy * u, 0.5 * self.width)] {
            if coef.abs() < 1e-15 {
                if off.abs() > half {
                    return None;
                }
                continue;
            }
            let (a, b) = ((-half - off) / coef, (half - off) / coef);
            lo = lo.max(a.min(b));
            hi = hi.min(a.max(b));
        }
        (lo <= hi).then(|| (lo + self.center[0], hi + self.center[0]))
    }

    fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let (u, v) = (self.direction[0], self.direction[1]);
        let ex = 0.5 * (self.length * u.abs() + self.width * v.abs());
        let ey = 0.5 * (self.length * v.abs() + self.width * u.abs());
        ([self.center[0] - ex, self.center[1] - ey], [self.center[0] + ex, self.center[1] + ey])
    }
}

/// Planar tube family K_δ = ∪ T together with its generating parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeFamily {
    pub tubes: Vec<Tube>,
    pub delta: f64,
    pub arc: (f64, f64),
    pub depth: u32,
    pub alpha: f64,
    /// Height of the tube centers along the triangle medians (apex at height 2).
    pub height: f64,
    /// Rasterized |∪T| at spacing δ/8.
    pub union_area: f64,
}

/// Depth-k Perron tree: 2^k triangles on base [−2, 2] with apex (0, 2),
/// bisected and translated k times with overlap ratio α. Returns the base
/// shift of each elementary triangle.
pub fn perron_shifts(depth: u32, alpha: f64) -> Vec<f64> {
    let count = 1usize << depth;
    let w = 4.0 / count as f64;
    let mut shifts = vec![0.0; count];
    for j in 1..=depth {
        let half = 2f64.powi(j as i32 - 1);
        let a = alpha.powi(j as i32 - 1);
        let step = -(1.0 - a) * half * w - (1.0 - alpha) * a * 2.0 * half * w;
        for (i, s) in shifts.iter_mut().enumerate() {
            if (i >> (j - 1)) & 1 == 1 {
                *s += step;
            }
        }
    }
    shifts
}

/// Exact area of the union of the translated triangles, by slicing.
pub fn perron_triangle_area(depth: u32, alpha: f64, levels: usize) -> f64 {
    let count = 1usize << depth;
    let w = 4.0 / count as f64;
    let shifts = perron_shifts(depth, alpha);
    let dy = 2.0 / levels as f64;
    let mut total = 0.0;
    let mut iv: Vec<(f64, f64)> = Vec::with_capacity(count);
    for l in 0..levels {
        let y = (l as f64 + 0.5) * dy;
        let t = 1.0 - 0.5 * y;
        iv.clear();
        for (i, s) in shifts.iter().enumerate() {
            let x0 = -2.0 + i as f64 * w;
            iv.push((s + x0 * t, s + (x0 + w) * t));
        }
        total += merged_length(&mut iv) * dy;
    }
    total
}

fn merged_length(iv: &mut [(f64, f64)]) -> f64 {
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut len = 0.0;
    let (mut lo, mut hi) = iv[0];
    for &(a, b) in &iv[1..] {
        if a > hi {
            len += hi - lo;
            lo = a;
            hi = b;
        } else {
            hi = hi.max(b);
        }
    }
    len + hi - lo
}

/// Overlap ratios and tube heights searched by [`perron_kakeya`].
pub const PERRON_ALPHAS: [f64; 10] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95];
pub const PERRON_HEIGHTS: [f64; 7] = [0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8];

/// 1/δ tubes of size δ × 1 inscribed in a Perron tree, one per direction of
/// a δ-net of a quarter-circle arc.
///
/// The arc must have length π/2; the family is built for [π/4, 3π/4] and
/// rotated. The overlap ratio and the height of the tubes along the
/// triangle medians are chosen from a fixed grid to minimize |∪T|.
pub fn perron_kakeya(delta: f64, arc: (f64, f64)) -> Result<TubeFamily> {
    let depth = dyadic_depth(delta)?;
    let mut best: Option<TubeFamily> = None;
    for &alpha in &PERRON_ALPHAS {
        for &height in &PERRON_HEIGHTS {
            let fam = perron_family(depth, alpha, height, arc)?;
            let area = fam.area(delta / 4.0);
            if best.as_ref().is_none_or(|b| area < b.union_area) {
                best = Some(TubeFamily { union_area: area, ..fam });
            }
        }
    }
    let mut fam = best.expect("parameter grid is nonempty");
    fam.union_area = fam.area(delta / 8.0);
    Ok(fam)
}

fn dyadic_depth(delta: f64) -> Result<u32> {
    let k = (1.0 / delta).log2().round();
    ensure!(
        k >= 2.0 && (2f64.powf(-k) - delta).abs() <= 1e-12 * delta,
        Domain,
        "delta must be 2^-k with k ≥ 2, got {delta}"
    );
    Ok(k as u32)
}

/// Perron family with explicit parameters; tubes are centered at `height`
/// on the median of their triangle.
pub fn perron_family(depth: u32, alpha: f64, height: f64, arc: (f64, f64)) -> Result<TubeFamily> {
    ensure!(
        (arc.1 - arc.0 - std::f64::consts::FRAC_PI_2).abs() < 1e-9,
        Domain,
        "arc must have length π/2, got {}",
        arc.1 - arc.0
    );
    ensure!(alpha > 0.0 && alpha < 1.0, Domain, "overlap ratio must lie in (0, 1)");
    ensure!((0.5..=0.8).contains(&height), Domain, "tube height must lie in [0.5, 0.8]");
    let delta = 2f64.powi(-(depth as i32));
    let shifts = perron_shifts(depth, alpha);
    let w = 4.0 / shifts.len() as f64;
    let rot = 0.5 * (arc.0 + arc.1) - std::f64::consts::FRAC_PI_2;
    let (c, s) = (rot.cos(), rot.sin());
    let rotate = |p: [f64; 2]| [c * p[0] - s * p[1], s * p[0] + c * p[1]];
    let tubes = shifts
        .iter()
        .enumerate()
        .map(|(i, sh)| {
            let base = -2.0 + (i as f64 + 0.5) * w + sh;
            let (dx, dy) = (sh - base, 2.0);
            let norm = dx.hypot(dy);
            let u = [dx / norm, dy / norm];
            let t = height / u[1];
            let center = [base + t * u[0], height];
            Tube { center: rotate(center), direction: rotate(u), length: 1.0, width: delta }
        })
        .collect();
    let mut fam = TubeFamily { tubes, delta, arc, depth, alpha, height, union_area: 0.0 };
    fam.union_area = fam.area(delta / 8.0);
    Ok(fam)
}

impl TubeFamily {
    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        self.tubes.iter().any(|t| t.contains(p))
    }

    /// T*: same centers and directions, length 3.
    pub fn star(&self) -> TubeFamily {
        let tubes: Vec<Tube> = self.tubes.iter().map(|t| t.lengthened(3.0)).collect();
        let mut fam = TubeFamily { tubes, union_area: 0.0, ..self.clone() };
        fam.union_area = fam.area(self.delta / 8.0);
        fam
    }

    /// Directions as angles in [0, π), ascending.
    pub fn angles(&self) -> Vec<f64> {
        let mut a: Vec<f64> = self.tubes.iter().map(|t| t.angle().rem_euclid(std::f64::consts::PI)).collect();
        a.sort_by(f64::total_cmp);
        a
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for t in &self.tubes {
            let (a, b) = t.bounding_box();
            for k in 0..2 {
                lo[k] = lo[k].min(a[k]);
                hi[k] = hi[k].max(b[k]);
            }
        }
        (lo, hi)
    }

    /// Node mask of ∪T on a lattice, via per-row scanlines.
    fn mask(&self, shape: [usize; 2], origin: [f64; 2], h: f64) -> Vec<bool> {
        let mut m = vec![false; shape[0] * shape[1]];
        for t in &self.tubes {
            let (lo, hi) = t.bounding_box();
            let j0 = (((lo[1] - origin[1]) / h).floor().max(0.0)) as usize;
            let j1 = (((hi[1] - origin[1]) / h).ceil().max(0.0) as usize).min(shape[1].saturating_sub(1));
            for j in j0..=j1 {
                let y = origin[1] + j as f64 * h;
                if let Some((a, b)) = t.row(y) {
                    let i0 = ((a - origin[0]) / h).ceil().max(0.0) as usize;
                    let i1 = ((b - origin[0]) / h).floor();
                    if i1 < 0.0 {
                        continue;
                    }
                    let i1 = (i1 as usize).min(shape[0] - 1);
                    for i in i0..=i1 {
                        m[i * shape[1] + j] = true;
                    }
                }
            }
        }
        m
    }

    fn lattice(&self, h: f64, margin: f64) -> ([usize; 2], [f64; 2]) {
        let (lo, hi) = self.bounding_box();
        let origin = [lo[0] - margin, lo[1] - margin];
        let shape = [0, 1].map(|k| ((hi[k] - lo[k] + 2.0 * margin) / h).ceil() as usize + 1);
        (shape, origin)
    }

    /// Node-counted |∪T| at spacing h.
    pub fn area(&self, h: f64) -> f64 {
        let (shape, origin) = self.lattice(h, h);
        self.mask(shape, origin, h).iter().filter(|&&b| b).count() as f64 * h * h
    }

    /// Indicator of ∪T sampled at the nodes of a lattice.
    pub fn indicator_on(&self, shape: Vec<usize>, origin: Vec<f64>, h: f64) -> Result<GridFunction> {
        ensure!(shape.len() == 2 && origin.len() == 2, Shape, "tube families live in the plane");
        let m = self.mask([shape[0], shape[1]], [origin[0], origin[1]], h);
        GridFunction::new(shape, origin, h, m.into_iter().map(|b| b as u8 as f64).collect())
    }

    /// Indicator on the bounding box padded by `margin`.
    pub fn indicator(&self, h: f64, margin: f64) -> Result<GridFunction> {
        let (shape, origin) = self.lattice(h, margin);
        self.indicator_on(shape.to_vec(), origin.to_vec(), h)
    }

    /// Node-counted |K*| = |∪T* \ ∪T|.
    pub fn star_minus_area(&self, h: f64) -> f64 {
        let star = self.star();
        let (shape, origin) = star.lattice(h, h);
        let a = star.mask(shape, origin, h);
        let b = self.mask(shape, origin, h);
        a.iter().zip(&b).filter(|(x, y)| **x && !**y).count() as f64 * h * h
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tube family serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const ARC: (f64, f64) = (FRAC_PI_4, 3.0 * FRAC_PI_4);

    #[test]
    fn quarter_delta_overlaps() {
        let fam = perron_kakeya(0.25, ARC).unwrap();
        assert_eq!(fam.len(), 4);
        assert!(fam.union_area < 4.0 * 0.25 * 1.0);
    }

    #[test]
    fn rejects_non_dyadic_and_bad_arc() {
        assert!(perron_kakeya(0.3, ARC).is_err());
        assert!(perron_kakeya(0.5, ARC).is_err());
        assert!(perron_kakeya(0.125, (0.0, 1.0)).is_err());
    }

    #[test]
    fn directions_form_delta_net_of_arc() {
        for k in 3..=6 {
            let delta = 2f64.powi(-k);
            let fam = perron_kakeya(delta, ARC).unwrap();
            let a = fam.angles();
            for w in a.windows(2) {
                let g = w[1] - w[0];
                assert!(g >= delta * (1.0 - 1e-9) && g <= 2.0 * delta * (1.0 + 1e-9), "gap {g} at δ = {delta}");
            }
            assert!(a[0] - ARC.0 <= 2.0 * delta && ARC.1 - a[a.len() - 1] <= 2.0 * delta);
            assert!(fam.tubes.iter().all(|t| t.length == 1.0 && t.width == delta));
        }
    }

    #[test]
    fn tubes_lie_in_bounding_box() {
        let fam = perron_kakeya(0.0625, ARC).unwrap();
        let (lo, hi) = fam.bounding_box();
        let mut rng = crate::rng::seeded(1);
        use rand::Rng as _;
        for t in &fam.tubes {
            for _ in 0..50 {
                let a = (rng.random::<f64>() - 0.5) * t.length;
                let b = (rng.random::<f64>() - 0.5) * t.width;
                let p = [t.center[0] + a * t.direction[0] - b * t.direction[1], t.center[1] + a * t.direction[1] + b * t.direction[0]];
                assert!(t.contains(&p) && fam.contains(&p));
                assert!(p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]);
            }
        }
    }

    #[test]
    fn areas_decrease_with_depth() {
        let mut prev = f64::INFINITY;
        for k in 2..=7 {
            let a = perron_triangle_area(k, 0.8, 2000);
            assert!(a <= prev + 1e-9, "triangle area grew at depth {k}");
            prev = a;
        }
        let mut prev = f64::INFINITY;
        for k in 2..=6 {
            let fam = perron_kakeya(2f64.powi(-k), ARC).unwrap();
            assert!(fam.union_area <= prev);
            prev = fam.union_area;
        }
    }

    #[test]
    fn star_region_is_large() {
        let fam = perron_kakeya(0.03125, ARC).unwrap();
        assert!(fam.star_minus_area(fam.delta / 8.0) >= 0.25);
        assert!(fam.star().tubes.iter().all(|t| t.length == 3.0));
    }

    #[test]
    fn scanline_area_matches_rectangle() {
        let t = Tube { center: [0.3, -0.2], direction: [0.6, 0.8], length: 1.0, width: 0.1 };
        let fam = TubeFamily { tubes: vec![t], delta: 0.1, arc: ARC, depth: 0, alpha: 0.5, height: 0.5, union_area: 0.0 };
        assert!((fam.area(0.002) - 0.1).abs() < 2e-3);
    }

    #[test]
    fn json_round_trip() {
        let fam = perron_kakeya(0.125, ARC).unwrap();
        assert_eq!(TubeFamily::from_json(&fam.to_json()).unwrap(), fam);
    }

    #[test]
    fn rotation_preserves_area() {
        let a = perron_family(4, 0.8, 0.7, ARC).unwrap();
        let b = perron_family(4, 0.8, 0.7, (0.0, std::f64::consts::FRAC_PI_2)).unwrap();
        assert!((a.union_area - b.union_area).abs() < 0.02 * a.union_area);
    }
}
