use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Plate;
use crate::error::{ensure, Error, Result};
use crate::grassmann::{principal_angles, ZERO_ANGLE_TOL};
use crate::rng::{seeded, substream};

const BLOCK: usize = 4096;

/// δ^{n−m} Π_{j>m} max(δ, θ_j)^{-1}, scaled by s^n for plates of common scale s.
pub fn intersection_volume_bound(p: &Plate, q: &Plate) -> Result<f64> {
    ensure!(p.n() == q.n() && p.d() == q.d(), Shape, "plates live in different Grassmannians");
    ensure!(p.delta == q.delta, Domain, "plates have different thickness");
    ensure!(p.s == q.s, Domain, "plates have different scale");
    let pd = principal_angles(&p.sigma, &q.sigma, ZERO_ANGLE_TOL)?;
    let delta = p.delta;
    let mut b = delta.powi((p.n() - pd.m) as i32);
    for &t in &pd.angles[pd.m..] {
        b /= delta.max(t);
    }
    Ok(b * p.s.powi(p.n() as i32))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
    pub box_volume: f64,
}

impl McEstimate {
    fn empty(samples: u64) -> Self {
        McEstimate { estimate: 0.0, stderr: 0.0, hits: 0, samples, box_volume: 0.0 }
    }
}

/// Sampling box: p's own frame box, tightened along the principal directions
/// of (σ, τ) by the slab constraints q imposes there.
struct SampleBox {
    origin: Vec<f64>,
    axes: DMatrix<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl SampleBox {
    fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    fn point(&self, u: &[f64]) -> Vec<f64> {
        let n = self.origin.len();
        let mut x = self.origin.clone();
        for k in 0..n {
            let c = self.lo[k] + (self.hi[k] - self.lo[k]) * u[k];
            for i in 0..n {
                x[i] += c * self.axes[(i, k)];
            }
        }
        x
    }
}

fn sample_box(p: &Plate, q: &Plate) -> Result<Option<SampleBox>> {
    let n = p.n();
    let d = p.d();
    let rp = p.s;
    let tp = p.s * p.delta;
    if q.d() != d {
        let axes = p.frame();
        let mut lo = vec![-rp; d];
        lo.extend(std::iter::repeat_n(-tp, n - d));
        let hi = lo.iter().map(|v| -v).collect();
        return Ok(Some(SampleBox { origin: p.center.clone(), axes, lo, hi }));
    }
    let pd = principal_angles(&p.sigma, &q.sigma, ZERO_ANGLE_TOL)?;
    let m = pd.m;
    // Frame: s_1..s_d, z_{m+1}..z_d, then a basis of span{σ,τ}⊥.
    let mut axes = DMatrix::zeros(n, n);
    let zcols = pd.basis_z.ncols();
    for k in 0..zcols {
        axes.set_column(k, &pd.basis_z.column(k));
    }
    if zcols < n {
        let zeta = crate::grassmann::Subspace::from_orthonormal(pd.basis_z.clone())?;
        let w = zeta.complement();
        for k in 0..n - zcols {
            axes.set_column(zcols + k, &w.basis().column(k));
        }
    }
    let mut lo = vec![0.0; n];
    let mut hi = vec![0.0; n];
    for k in 0..d {
        lo[k] = -rp;
        hi[k] = rp;
    }
    for k in d..n {
        lo[k] = -tp;
        hi[k] = tp;
    }
    let offset: Vec<f64> = q.center.iter().zip(&p.center).map(|(a, b)| a - b).collect();
    let tq = q.s * q.delta;
    for j in m..d {
        let th = pd.angles[j];
        let (sn, cs) = th.sin_cos();
        if sn <= 0.0 {
            continue;
        }
        // n_j = −sin θ s_j + cos θ z_j lies in τ⊥, so |(x − c_q)·n_j| < s_q δ_q.
        let sj = pd.basis_s.column(j);
        let zj = pd.z(j).unwrap();
        let cn: f64 = (0..n).map(|i| offset[i] * (-sn * sj[i] + cs * zj[i])).sum();
        let r = tq + cs * tp;
        let a = (-cn - r) / sn;
        let b = (-cn + r) / sn;
        lo[j] = lo[j].max(a);
        hi[j] = hi[j].min(b);
        if lo[j] >= hi[j] {
            return Ok(None);
        }
    }
    Ok(Some(SampleBox { origin: p.center.clone(), axes, lo, hi }))
}

/// Hit-or-miss estimate of |p ∩ q|.
///
/// Samples are split into fixed blocks with seeds derived from `seed`, so the
/// result does not depend on the thread count.
pub fn mc_intersection_volume(p: &Plate, q: &Plate, samples: usize, seed: u64) -> Result<McEstimate> {
    ensure!(samples >= 1000, Domain, "need at least 1000 samples, got {samples}");
    ensure!(p.n() == q.n(), Shape, "ambient dimensions differ");
    let dist = p.center.iter().zip(&q.center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    if dist > p.radius() + q.radius() {
        return Ok(McEstimate::empty(samples as u64));
    }
    let Some(bx) = sample_box(p, q)? else {
        return Ok(McEstimate::empty(samples as u64));
    };
    let n = p.n();
    let blocks = samples.div_ceil(BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = seeded(substream(seed, b as u64));
            let count = BLOCK.min(samples - b * BLOCK);
            let mut u = vec![0.0; n];
            let mut h = 0u64;
            for _ in 0..count {
                u.iter_mut().for_each(|v| *v = rng.random());
                let x = bx.point(&u);
                if p.contains_unchecked(&x) && q.contains_unchecked(&x) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let vol = bx.volume();
    let frac = hits as f64 / samples as f64;
    Ok(McEstimate {
        estimate: vol * frac,
        stderr: vol * (frac * (1.0 - frac) / samples as f64).sqrt(),
        hits,
        samples: samples as u64,
        box_volume: vol,
    })
}

/// One row of an MC audit: pair_id, bound, mc, stderr, ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McRecord {
    pub pair_id: usize,
    pub bound: f64,
    pub mc: f64,
    pub stderr: f64,
    pub ratio: f64,
}

/// Appends records to a CSV file, writing the header when the file is new.
pub fn append_mc_csv(path: &Path, records: &[McRecord]) -> Result<()> {
    let exists = path.exists() && std::fs::metadata(path).map(|m| m.len() > 0).unwrap_or(false);
    let file = std::fs::OpenOptions::new().create(true).append(true).open(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(!exists).from_writer(file);
    for r in records {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
