use std::collections::BTreeMap;

use serde::Serialize;

use super::bump::{BumpProfile, BUMP_RADIUS};
use super::ops::ALIAS_FRACTION;
use super::spectral::SpectralField;
use crate::error::{ensure, Result};
use crate::gridops::GridFunction;

#[derive(Clone, Debug, Serialize)]
pub struct GapTerm {
    pub gap: usize,
    pub directions: usize,
    /// ‖A_{V_j,S} f‖₂.
    pub norm: f64,
    /// ‖A_{V_j,S} Γ_j f‖₂ with Γ_j the sharp cutoff to the frequency cone of the gap.
    pub restricted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct AoReport {
    pub constant: f64,
    pub lhs: f64,
    pub u_norm: f64,
    pub max_gap: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Smallest C for which lhs ≤ C·u_norm + max_gap.
    pub critical_constant: f64,
    pub gaps: Vec<GapTerm>,
}

/// Compares ‖A_{V,S} f‖₂ with C‖A_{U,S} f‖₂ + max_j ‖A_{V_j,S} f‖₂ in the plane.
///
/// Directions are angles; U must increase and span at most π, and each
/// V_j must lie in [u_j, u_{j+1}].
pub fn ao2d_experiment(f: &GridFunction, u: &[f64], v: &[Vec<f64>], scales: &[f64], constant: f64) -> Result<AoReport> {
    ensure!(f.n() == 2, Shape, "the experiment lives in the plane");
    ensure!(u.len() >= 2, Domain, "need at least two dividing directions");
    ensure!(v.len() == u.len() - 1, Shape, "need one direction set per gap ({} gaps, {} sets)", u.len() - 1, v.len());
    ensure!(u.windows(2).all(|w| w[0] < w[1]) && u[u.len() - 1] - u[0] <= std::f64::consts::PI + 1e-12, Domain, "U must be ordered counterclockwise within a half-turn");
    for (j, vj) in v.iter().enumerate() {
        ensure!(vj.iter().all(|a| (u[j]..=u[j + 1]).contains(a)), Domain, "V_{} leaves the cone bordered by u_{} and u_{}", j + 1, j + 1, j + 2);
    }
    ensure!(!scales.is_empty() && scales.iter().all(|&s| s > 0.0), Domain, "scales must be positive and nonempty");
    let spec = SpectralField::forward(f);
    let limit = ALIAS_FRACTION * spec.nyquist();
    for &s in scales {
        ensure!(BUMP_RADIUS / s <= limit, Domain, "scale {s} is not resolved by the grid");
    }
    let phi = BumpProfile::new(1);
    let mut cache: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
    let mut average = |spec: &SpectralField, a: f64, tag: u64| -> Result<Vec<f64>> {
        let key = a.to_bits() ^ tag.rotate_left(17);
        if let Some(v) = cache.get(&key) {
            return Ok(v.clone());
        }
        let (c, s_) = (a.cos(), a.sin());
        let mut best = vec![0.0f64; f.len()];
        for &s in scales {
            let out = spec.apply(|xi| phi.eval_sq(s * s * (xi[0] * c + xi[1] * s_).powi(2))).inverse()?.0;
            for (b, v) in best.iter_mut().zip(&out.values) {
                *b = b.max(v.abs());
            }
        }
        cache.insert(key, best.clone());
        Ok(best)
    };
    let cell = f.cell_volume();
    let sup_norm = |rows: &[Vec<f64>]| -> f64 {
        if rows.is_empty() {
            return 0.0;
        }
        let mut m = vec![0.0f64; rows[0].len()];
        for r in rows {
            for (a, b) in m.iter_mut().zip(r) {
                *a = a.max(*b);
            }
        }
        (m.iter().map(|x| x * x).sum::<f64>() * cell).sqrt()
    };
    let mut u_rows = Vec::new();
    for &a in u {
        u_rows.push(average(&spec, a, 0)?);
    }
    let u_norm = sup_norm(&u_rows);
    let mut all = Vec::new();
    let mut gaps = Vec::new();
    for (j, vj) in v.iter().enumerate() {
        let mut rows = Vec::new();
        for &a in vj {
            rows.push(average(&spec, a, 0)?);
        }
        let norm_j = sup_norm(&rows);
        // Frequencies whose normal line lies between u_j and u_{j+1}.
        let (a0, a1) = (u[j], u[j + 1]);
        let restricted_spec = spec.apply(|xi| {
            if xi[0] == 0.0 && xi[1] == 0.0 {
                return 0.0;
            }
            let t = (xi[1].atan2(xi[0]) - std::f64::consts::FRAC_PI_2 - a0).rem_euclid(std::f64::consts::PI);
            (t <= a1 - a0) as u8 as f64
        });
        let mut rrows = Vec::new();
        for &a in vj {
            rrows.push(average(&restricted_spec, a, 1 + j as u64)?);
        }
        gaps.push(GapTerm { gap: j + 1, directions: vj.len(), norm: norm_j, restricted: sup_norm(&rrows) });
        all.extend(rows);
    }
    let lhs = sup_norm(&all);
    let max_gap = gaps.iter().fold(0.0f64, |m, g| m.max(g.norm));
    let rhs = constant * u_norm + max_gap;
    let critical_constant = if u_norm > 0.0 { ((lhs - max_gap) / u_norm).max(0.0) } else { 0.0 };
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(AoReport { constant, lhs, u_norm, max_gap, rhs, ratio, critical_constant, gaps })
}
