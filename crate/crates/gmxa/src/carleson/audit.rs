use rand::Rng as _;
use rayon::prelude::*;
use serde::Serialize;

use super::geometry::{contained_in, for_each_node, intersection_volume, intersection_volume_quadrature};
use super::sequence::{adjoint_sequence, random_selection, CarlesonSequence, SequenceEntry};
use crate::error::{ensure, Result};
use crate::extremals::perron_kakeya;
use crate::gridops::GridFunction;
use crate::plates::{hat_base, hat_plate, precedes, sheared_height_range, sheared_slice_measure, ShearedPlate, MAX_TILT};
use crate::rng::seeded;

/// ‖Σ a_Q 1_Q/|Q|‖₂² = Σ_{Q,R} a_Q a_R |Q∩R|/(|Q||R|), with exact pairwise volumes.
pub fn balayage_norm(seq: &CarlesonSequence) -> f64 {
    let live: Vec<&SequenceEntry> = seq.entries.iter().filter(|e| e.a > 0.0).collect();
    let boxes: Vec<(Vec<f64>, Vec<f64>)> = live.iter().map(|e| e.plate.bounding_box()).collect();
    let w: Vec<f64> = live.iter().map(|e| e.a / e.plate.volume()).collect();
    let rows: Vec<f64> = (0..live.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = w[i] * w[i] * live[i].plate.volume();
            for j in i + 1..live.len() {
                let disjoint = (0..seq.n).any(|k| boxes[i].1[k] <= boxes[j].0[k] || boxes[j].1[k] <= boxes[i].0[k]);
                if !disjoint {
                    acc += 2.0 * w[i] * w[j] * overlap(&live[i].plate, &live[j].plate);
                }
            }
            acc
        })
        .collect();
    rows.iter().sum::<f64>().sqrt()
}

fn overlap(p: &ShearedPlate, q: &ShearedPlate) -> f64 {
    if p.is_axis_parallel() && q.is_axis_parallel() {
        intersection_volume(p, q)
    } else {
        intersection_volume_quadrature(p, q, 64)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EmbeddingReport {
    pub directions: usize,
    pub plates: usize,
    pub mass: f64,
    pub norm: f64,
    /// log max(#V, 2).
    pub log_factor: f64,
    /// ‖T_Q(a)‖₂ / ((log #V)^{1/2} mass^{1/2}).
    pub quotient: f64,
    /// ‖T_Q(a)‖₂ / mass^{1/2}, the single-direction comparison.
    pub baseline: f64,
}

pub fn embedding_audit(seq: &CarlesonSequence) -> Result<EmbeddingReport> {
    let mass = seq.mass();
    ensure!(mass > 0.0, Domain, "sequence has zero mass");
    let directions = seq.restrict(|_| true).directions().len();
    let norm = balayage_norm(seq);
    let log_factor = (directions.max(2) as f64).ln();
    Ok(EmbeddingReport {
        directions,
        plates: seq.entries.iter().filter(|e| e.a > 0.0).count(),
        mass,
        norm,
        log_factor,
        quotient: norm / (log_factor * mass).sqrt(),
        baseline: norm / mass.sqrt(),
    })
}

/// Cell-counted |∪ plates| on the lattice of `grid`.
pub fn shadow_measure<'a>(plates: impl IntoIterator<Item = &'a ShearedPlate>, grid: &GridFunction) -> f64 {
    let mut hit = vec![false; grid.len()];
    for p in plates {
        for_each_node(p, grid, |node| hit[node] = true);
    }
    hit.iter().filter(|&&b| b).count() as f64 * grid.cell_volume()
}

#[derive(Clone, Debug, Serialize)]
pub struct SubordinationCheck {
    pub kind: String,
    pub direction: usize,
    pub members: usize,
    pub mass: f64,
    pub shadow: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubordinationReport {
    pub checks: Vec<SubordinationCheck>,
    pub worst_ratio: f64,
    pub coverage: String,
}

/// Samples families 𝒯 of a single orientation and checks Σ_{L ⊆ some T} a_L ≤ |sh(𝒯)|.
///
/// Per direction: 𝒯 = Q_v itself ("self"), and `random` families of one to
/// four random plates, each the hull of a random sequence plate dilated by
/// 1 to 4 ("tower").
pub fn subordination_audit(seq: &CarlesonSequence, grid: &GridFunction, random: usize, seed: u64) -> Result<SubordinationReport> {
    ensure!(grid.n() == seq.n, Shape, "grid lives in R^{}, sequence in R^{}", grid.n(), seq.n);
    let live = seq.restrict(|_| true);
    ensure!(!live.is_empty(), Domain, "sequence has no positive entries");
    let dirs = live.directions();
    let mut rng = seeded(seed);
    let mut checks = Vec::new();
    let eps = 1e-9;
    for (vi, v) in dirs.iter().enumerate() {
        let own: Vec<&SequenceEntry> = live.entries.iter().filter(|e| e.plate.v == *v).collect();
        let family: Vec<ShearedPlate> = own.iter().map(|e| e.plate.clone()).collect();
        checks.push(check("self", vi, &live, &family, grid, eps));
        for _ in 0..random {
            let members = rng.random_range(1..=4usize);
            let fam: Vec<ShearedPlate> = (0..members)
                .map(|_| {
                    let base = &own[rng.random_range(0..own.len())].plate;
                    base.dilate(rng.random_range(1.0..4.0))
                })
                .collect();
            checks.push(check("tower", vi, &live, &fam, grid, eps));
        }
    }
    let worst_ratio = checks.iter().map(|c| c.ratio).fold(0.0, f64::max);
    let coverage = format!("{} directions: self-family plus {random} random dilated families each", dirs.len());
    Ok(SubordinationReport { checks, worst_ratio, coverage })
}

fn check(kind: &str, direction: usize, seq: &CarlesonSequence, family: &[ShearedPlate], grid: &GridFunction, eps: f64) -> SubordinationCheck {
    let mut mass = 0.0;
    let mut members = 0;
    for e in &seq.entries {
        if family.iter().any(|t| contained_in(&e.plate, t, eps)) {
            mass += e.a;
            members += 1;
        }
    }
    let shadow = shadow_measure(family, grid);
    SubordinationCheck { kind: kind.into(), direction, members, mass, shadow, ratio: if shadow > 0.0 { mass / shadow } else { 0.0 } }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub k: usize,
    pub plates: usize,
    pub shadow: f64,
    /// 2^{-k}·mass.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub direction: usize,
    pub mu: f64,
    pub c_n: f64,
    pub mass: f64,
    pub max_b: f64,
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of ln|sh| against k over the populated rows.
    pub slope: Option<f64>,
}

/// B_R = ⨏_{R̂} Σ_{Q≤R} a_Q 1_{Q̂}/|Q̂| for every plate R of one orientation,
/// and the shadows of {R : B_R > c_n μ k}.
pub fn decay_audit(seq: &CarlesonSequence, direction: usize, ks: std::ops::RangeInclusive<usize>, mu: f64, c_n: f64, grid: &GridFunction) -> Result<DecayReport> {
    let live = seq.restrict(|_| true);
    let dirs = live.directions();
    ensure!(direction < dirs.len(), Domain, "sequence has {} directions, asked for {direction}", dirs.len());
    ensure!(mu > 0.0 && c_n > 0.0, Domain, "mu and c_n must be positive");
    let v = &dirs[direction];
    let rs: Vec<&ShearedPlate> = live.entries.iter().filter(|e| e.plate.v == *v).map(|e| &e.plate).collect();
    let b: Vec<f64> = rs
        .par_iter()
        .map(|r| {
            let hat_r = hat_base(r);
            let mut acc = 0.0;
            for q in &live.entries {
                if !precedes(&q.plate, r) {
                    continue;
                }
                let hat_q = hat_plate(&q.plate, r).expect("same dimension");
                acc += q.a * intersection_volume_quadrature(&hat_q, &hat_r, 24) / (hat_q.volume() * hat_r.volume());
            }
            acc
        })
        .collect();
    let mass = live.mass();
    let mut rows = Vec::new();
    for k in ks {
        let sel: Vec<&ShearedPlate> = rs.iter().zip(&b).filter(|(_, &bv)| bv > c_n * mu * k as f64).map(|(r, _)| *r).collect();
        let shadow = shadow_measure(sel.iter().copied(), grid);
        rows.push(DecayRow { k, plates: sel.len(), shadow, bound: 0.5f64.powi(k as i32) * mass });
    }
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.shadow > 0.0).map(|r| (r.k as f64, r.shadow.ln())).collect();
    let slope = (pts.len() >= 2).then(|| {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
        let (mx, my) = (sx / m, sy / m);
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        sxy / sxx
    });
    Ok(DecayReport { direction, mu, c_n, mass, max_b: b.iter().cloned().fold(0.0, f64::max), rows, slope })
}

#[derive(Clone, Debug, Serialize)]
pub struct SliceCheck {
    pub max_slice: f64,
    pub mean_slice: f64,
    pub ratio: f64,
}

/// max_a |Q̂ ∩ p(I_R̂, a)|/|I_R̂| against (|I_R̂||K|)^{-1}∫_{3K}|Q̂ ∩ p(I_R̂, a)| da.
///
/// Requires Q ≤ R, K ⊇ K_R and the sheared height range of Q̂ not inside 3K.
pub fn slicing_check(q: &ShearedPlate, r: &ShearedPlate, k: (f64, f64), resolution: usize) -> Result<SliceCheck> {
    ensure!(precedes(q, r), Domain, "slicing needs Q ≤ R");
    ensure!(k.0 <= r.k.0 && k.1 >= r.k.1, Domain, "K must contain K_R");
    let hat_q = hat_plate(q, r)?;
    let hat_r = hat_base(r);
    let (lo, hi) = sheared_height_range(&hat_q, &hat_r);
    let len = k.1 - k.0;
    let (t0, t1) = (k.0 - len, k.1 + len);
    ensure!(lo < t0 || hi > t1, Domain, "Q̂ projects inside 3K");
    let area = hat_r.side.powi(hat_r.d() as i32);
    let steps = 400;
    let slice = |a: f64| sheared_slice_measure(&hat_q, &hat_r, a, resolution);
    let mut max_slice = 0.0f64;
    for i in 0..=steps {
        max_slice = max_slice.max(slice(lo + (hi - lo) * i as f64 / steps as f64));
    }
    let dt = (t1 - t0) / steps as f64;
    let integral: f64 = (0..steps).map(|i| slice(t0 + (i as f64 + 0.5) * dt)).sum::<f64>() * dt;
    let max_slice = max_slice / area;
    let mean_slice = integral / (area * len);
    Ok(SliceCheck { max_slice, mean_slice, ratio: if mean_slice > 0.0 { max_slice / mean_slice } else { f64::INFINITY } })
}

/// Codimension-1 Kakeya extension in R³: a Perron family with 2^depth tubes
/// is squeezed by (x, y) ↦ (y, tan(π/16)·x) into directions within π/16 of
/// the x_1-axis, each lengthened tube is covered by the sheared plate over a
/// base square of side 3 + δ in (x_1, x_2), and E = ∪ plates is split among
/// them by a random linearization on a grid of spacing `h` in (x_1, x_3).
pub fn adversarial_sequence(depth: u32, h: f64, seed: u64) -> Result<CarlesonSequence> {
    ensure!(depth >= 2, Domain, "depth must be at least 2");
    let delta = 0.5f64.powi(depth as i32);
    let fam = perron_kakeya(delta, (std::f64::consts::FRAC_PI_4, 3.0 * std::f64::consts::FRAC_PI_4))?;
    let b = MAX_TILT.tan();
    let side = 3.0 + delta;
    let mut plates2 = Vec::with_capacity(fam.len());
    for (i, t) in fam.tubes.iter().enumerate() {
        let (ux, uy) = (t.direction[0], t.direction[1]);
        let c = [t.center[1], b * t.center[0]];
        let slope = b * ux / uy;
        let thick = b * t.width / uy;
        let norm = slope.hypot(1.0);
        let v = vec![-slope / norm, 1.0 / norm];
        plates2.push((format!("t{i}"), ShearedPlate::new(vec![c[0]], side, (c[1] - 0.5 * thick, c[1] + 0.5 * thick), v)?));
    }
    let thinnest = plates2.iter().map(|(_, p)| p.thickness()).fold(f64::INFINITY, f64::min);
    ensure!(h <= thinnest / 4.0, Domain, "spacing {h} does not resolve plates of thickness {thinnest}");
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for (_, p) in &plates2 {
        let (a, z) = p.bounding_box();
        for k in 0..2 {
            lo[k] = lo[k].min(a[k]);
            hi[k] = hi[k].max(z[k]);
        }
    }
    let shape: Vec<usize> = (0..2).map(|k| ((hi[k] - lo[k]) / h).ceil() as usize + 2).collect();
    let grid = GridFunction::zeros(shape, vec![lo[0] - h, lo[1] - h], h)?;
    let geometry: Vec<ShearedPlate> = plates2.iter().map(|(_, p)| p.clone()).collect();
    let regions = random_selection(&geometry, &grid, seed);
    let seq2 = adjoint_sequence(&plates2, &regions, &grid, |_| true)?;
    // Lift: insert x_2 ∈ [0, side) as the second coordinate.
    let entries = seq2
        .entries
        .into_iter()
        .map(|e| {
            let p = e.plate;
            let v = vec![p.v[0], 0.0, p.v[1]];
            let plate = ShearedPlate::new(vec![p.c_i[0], 0.5 * side], side, p.k, v)?;
            Ok(SequenceEntry { id: e.id, plate, a: e.a * side })
        })
        .collect::<Result<Vec<_>>>()?;
    CarlesonSequence::new(3, entries)
}
