use std::fmt;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::plates::{ShearedPlate, MAX_TILT};
use crate::rng::{seeded, unit_vector, Rng};

/// Index of a lattice plate P(I, K, v).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PlateId {
    pub v: usize,
    pub level: usize,
    pub cube: Vec<i64>,
    /// Which of the shifted height grids K⁰, K¹, K².
    pub grid: usize,
    pub k: i64,
}

impl fmt::Display for PlateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cube: Vec<String> = self.cube.iter().map(|c| c.to_string()).collect();
        write!(f, "v{}/l{}/c{}/g{}/k{}", self.v, self.level, cube.join(","), self.grid, self.k)
    }
}

/// Sheared plates D_{V,δ} truncated to a working box.
///
/// Level j has base cubes of side ℓ_j = top_scale·2^-j from the dyadic grid
/// anchored at `base_origin`, and heights K of length δ·ℓ_j from up to three
/// grids shifted by thirds. Plates lie in the box when I lies in the base box
/// and K lies in `heights`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateLattice {
    pub directions: Vec<Vec<f64>>,
    pub delta: f64,
    pub base_origin: Vec<f64>,
    pub base_side: f64,
    pub heights: (f64, f64),
    pub top_scale: f64,
    pub depth: usize,
    pub k_grids: usize,
}

#[allow(clippy::too_many_arguments)]
pub fn build_lattice(
    directions: Vec<Vec<f64>>,
    delta: f64,
    base_origin: Vec<f64>,
    base_side: f64,
    heights: (f64, f64),
    top_scale: f64,
    depth: usize,
    k_grids: usize,
) -> Result<PlateLattice> {
    ensure!(!directions.is_empty(), Domain, "direction set is empty");
    let n = directions[0].len();
    ensure!(n >= 2, Shape, "ambient dimension must be at least 2");
    ensure!(base_origin.len() == n - 1, Shape, "base origin has length {}, expected {}", base_origin.len(), n - 1);
    for (i, v) in directions.iter().enumerate() {
        ensure!(v.len() == n, Shape, "direction {i} has length {}, expected {n}", v.len());
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        ensure!((norm - 1.0).abs() < 1e-9, Domain, "direction {i} is not a unit vector");
        ensure!(v[n - 1] >= MAX_TILT.cos() - 1e-12, Domain, "direction {i} is more than π/16 from e_n");
    }
    ensure!(delta > 0.0 && delta <= 1.0, Domain, "delta must lie in (0, 1], got {delta}");
    ensure!(depth >= 1, Domain, "depth must be at least 1");
    ensure!((1..=3).contains(&k_grids), Domain, "between 1 and 3 height grids, got {k_grids}");
    ensure!(top_scale > 0.0 && base_side >= top_scale, Domain, "base box must hold a top-level cube");
    let ratio = base_side / top_scale;
    ensure!((ratio - ratio.round()).abs() < 1e-9, Domain, "base side must be a multiple of the top scale");
    ensure!(heights.1 - heights.0 >= delta * top_scale, Domain, "height range is thinner than one plate");
    Ok(PlateLattice { directions, delta, base_origin, base_side, heights, top_scale, depth, k_grids })
}

impl PlateLattice {
    pub fn n(&self) -> usize {
        self.directions[0].len()
    }

    pub fn d(&self) -> usize {
        self.n() - 1
    }

    pub fn scale(&self, level: usize) -> f64 {
        self.top_scale * 0.5f64.powi(level as i32)
    }

    pub fn thickness(&self, level: usize) -> f64 {
        self.delta * self.scale(level)
    }

    pub fn cubes_per_axis(&self, level: usize) -> i64 {
        (self.base_side / self.scale(level)).round() as i64
    }

    /// Valid k for grid g at a level: K ⊂ heights.
    pub fn k_range(&self, level: usize, grid: usize) -> (i64, i64) {
        let tau = self.thickness(level);
        let off = grid as f64 / 3.0;
        let span = (self.heights.1 - self.heights.0) / tau;
        let lo = (-off).ceil() as i64;
        let hi = (span - 1.0 - off + 1e-9).floor() as i64;
        (lo, hi)
    }

    pub fn contains_id(&self, id: &PlateId) -> bool {
        if id.v >= self.directions.len() || id.level >= self.depth || id.grid >= self.k_grids || id.cube.len() != self.d() {
            return false;
        }
        let m = self.cubes_per_axis(id.level);
        let (lo, hi) = self.k_range(id.level, id.grid);
        id.cube.iter().all(|&c| (0..m).contains(&c)) && (lo..=hi).contains(&id.k)
    }

    pub fn plate(&self, id: &PlateId) -> Result<ShearedPlate> {
        ensure!(self.contains_id(id), Domain, "plate {id} is not in the lattice");
        let l = self.scale(id.level);
        let tau = self.thickness(id.level);
        let c_i: Vec<f64> = id.cube.iter().zip(&self.base_origin).map(|(&c, o)| o + (c as f64 + 0.5) * l).collect();
        let k0 = self.heights.0 + (id.k as f64 + id.grid as f64 / 3.0) * tau;
        ShearedPlate::new(c_i, l, (k0, k0 + tau), self.directions[id.v].clone())
    }

    /// Number of plates in the box.
    pub fn count(&self) -> u64 {
        let mut total = 0u64;
        for level in 0..self.depth {
            let cubes = (self.cubes_per_axis(level) as u64).pow(self.d() as u32);
            for g in 0..self.k_grids {
                let (lo, hi) = self.k_range(level, g);
                total += cubes * (hi - lo + 1).max(0) as u64;
            }
        }
        total * self.directions.len() as u64
    }

    /// All plate ids, refusing lattices with more than `limit` plates.
    pub fn enumerate(&self, limit: u64) -> Result<Vec<PlateId>> {
        let count = self.count();
        ensure!(count <= limit, Domain, "lattice has {count} plates, limit {limit}");
        let d = self.d();
        let mut out = Vec::with_capacity(count as usize);
        for v in 0..self.directions.len() {
            for level in 0..self.depth {
                let m = self.cubes_per_axis(level);
                for flat in 0..m.pow(d as u32) {
                    let mut cube = vec![0i64; d];
                    let mut r = flat;
                    for c in cube.iter_mut().rev() {
                        *c = r % m;
                        r /= m;
                    }
                    for grid in 0..self.k_grids {
                        let (lo, hi) = self.k_range(level, grid);
                        for k in lo..=hi {
                            out.push(PlateId { v, level, cube: cube.clone(), grid, k });
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    /// The plate of (v, level, grid) containing x, if it lies in the box.
    pub fn locate(&self, x: &[f64], v: usize, level: usize, grid: usize) -> Option<PlateId> {
        let d = self.d();
        let l = self.scale(level);
        let cube: Vec<i64> = (0..d).map(|i| ((x[i] - self.base_origin[i]) / l).floor() as i64).collect();
        let c_i: Vec<f64> = cube.iter().zip(&self.base_origin).map(|(&c, o)| o + (c as f64 + 0.5) * l).collect();
        let dir = &self.directions[v];
        let base = -(0..d).map(|i| dir[i] * (x[i] - c_i[i])).sum::<f64>() / dir[d];
        let t = x[d] - base;
        let k = ((t - self.heights.0) / self.thickness(level) - grid as f64 / 3.0).floor() as i64;
        let id = PlateId { v, level, cube, grid, k };
        self.contains_id(&id).then_some(id)
    }

    /// A uniformly random plate id of the lattice.
    pub fn random_id(&self, rng: &mut Rng) -> PlateId {
        let v = rng.random_range(0..self.directions.len());
        let level = rng.random_range(0..self.depth);
        let m = self.cubes_per_axis(level);
        let cube = (0..self.d()).map(|_| rng.random_range(0..m)).collect();
        let grid = rng.random_range(0..self.k_grids);
        let (lo, hi) = self.k_range(level, grid);
        let k = rng.random_range(lo..=hi);
        PlateId { v, level, cube, grid, k }
    }

    /// The 3^d variants of the base grid shifted by thirds of the top scale.
    pub fn shift_variants(&self) -> Vec<PlateLattice> {
        let d = self.d();
        (0..3usize.pow(d as u32))
            .map(|mut j| {
                let mut out = self.clone();
                for o in out.base_origin.iter_mut() {
                    *o += (j % 3) as f64 * self.top_scale / 3.0;
                    j /= 3;
                }
                out
            })
            .collect()
    }
}

/// `count` random unit vectors within `max_angle` of e_n, uniform on the cap.
pub fn random_cap_directions(n: usize, count: usize, max_angle: f64, seed: u64) -> Result<Vec<Vec<f64>>> {
    ensure!(n >= 2, Shape, "ambient dimension must be at least 2");
    ensure!(max_angle > 0.0 && max_angle <= MAX_TILT, Domain, "cap angle must lie in (0, π/16]");
    let mut rng = seeded(seed);
    let floor = max_angle.cos();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut v = unit_vector(&mut rng, n);
        if v[n - 1] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        if v[n - 1] >= floor {
            out.push(v);
        }
    }
    Ok(out)
}
