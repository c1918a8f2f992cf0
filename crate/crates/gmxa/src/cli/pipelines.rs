use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use super::config::{ExperimentConfig, Kind};
use crate::carleson::{adversarial_sequence, build_lattice, decay_audit, embedding_audit, random_cap_directions, random_lattice_sequence};
use crate::error::{ensure, Error, Result};
use crate::extremals::{cm_construction, perron_kakeya, radial_log_example_with, radial_log_norm2, TubeFamily};
use crate::grassmann::{
    cluster_decompose, greedy_net_with_budget, metric_distance, near_orthogonal_subset, principal_angles, CandidatePolicy,
    DirectionSet, Subspace, CONE_NARROW, ZERO_ANGLE_TOL,
};
use crate::gridops::{dyadic_scales, kakeya_maximal, maximal_average_at, nikodym_maximal_on, norm_estimate, GridFunction, NormKind};
use crate::plates::{intersection_volume_bound, mc_intersection_volume, McRecord, Plate, MAX_TILT};
use crate::rng::{gaussian, seeded, substream};

/// Result of one sweep point: the headline value, named side quantities and
/// artifact files (name, bytes) for the report directory.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointOutput {
    pub value: f64,
    pub extra: BTreeMap<String, f64>,
    pub files: Vec<(String, Vec<u8>)>,
}

impl PointOutput {
    fn new(value: f64) -> Self {
        PointOutput { value, ..Default::default() }
    }

    fn with(mut self, key: &str, v: f64) -> Self {
        self.extra.insert(key.to_string(), v);
        self
    }

    fn file(mut self, name: String, bytes: Vec<u8>) -> Self {
        self.files.push((name, bytes));
        self
    }
}

/// Runs the pipeline of `cfg.kind` at sweep value `x`.
pub fn run_point(cfg: &ExperimentConfig, index: usize, x: f64, seed: u64) -> Result<PointOutput> {
    match cfg.kind {
        Kind::Net => net_point(cfg, index, x, seed),
        Kind::Angles => angles_point(cfg, x, seed),
        Kind::Intersect => intersect_point(cfg, index, x, seed),
        Kind::Maxavg => maxavg_point(cfg, x, seed),
        Kind::Nikodym => nikodym_point(cfg, x, seed),
        Kind::Kakeya => kakeya_point(cfg, x, seed),
        Kind::Cluster => cluster_point(cfg, x, seed),
        Kind::Extremal => extremal_point(cfg, index, x, seed),
        Kind::Carleson => carleson_point(cfg, index, x, seed),
        Kind::Scaling => Err(Error::Domain("scaling reads its points from the input file".into())),
    }
}

fn as_count(x: f64, what: &str) -> Result<usize> {
    ensure!(x >= 1.0 && x.fract() == 0.0, Domain, "{what} must be a positive integer, got {x}");
    Ok(x as usize)
}

fn net_point(cfg: &ExperimentConfig, index: usize, delta: f64, seed: u64) -> Result<PointOutput> {
    let budget = cfg.opts().get("budget", 50usize)?;
    let net = greedy_net_with_budget(cfg.d, cfg.n, delta, seed, budget)?;
    Ok(PointOutput::new(net.len() as f64)
        .with("normalized", net.len() as f64 * delta.powi((cfg.d * (cfg.n - cfg.d)) as i32))
        .with("min_separation", net.min_separation())
        .file(format!("net_{index}.json"), net.to_json().into_bytes()))
}

/// Pairs (a, b) with b spanned by a's basis plus ε-sized Gaussian noise.
fn angles_point(cfg: &ExperimentConfig, eps: f64, seed: u64) -> Result<PointOutput> {
    let pairs = cfg.opts().get("pairs", 100usize)?;
    ensure!(pairs > 0, Domain, "pairs must be positive");
    let mut rng = seeded(seed);
    let (mut sum, mut gap) = (0.0, 0.0f64);
    for _ in 0..pairs {
        let a = Subspace::random(cfg.n, cfg.d, &mut rng);
        let cols: Vec<Vec<f64>> = (0..cfg.d)
            .map(|j| a.column(j).into_iter().map(|v| v + eps * gaussian(&mut rng)).collect())
            .collect();
        let b = Subspace::from_columns(&cols)?;
        let dec = principal_angles(&a, &b, ZERO_ANGLE_TOL)?;
        sum += dec.largest();
        gap = gap.max((dec.largest().sin() - metric_distance(&a, &b)?).abs());
    }
    Ok(PointOutput::new(sum / pairs as f64).with("max_metric_gap", gap))
}

fn intersect_point(cfg: &ExperimentConfig, index: usize, delta: f64, seed: u64) -> Result<PointOutput> {
    let o = cfg.opts();
    let pairs = o.get("pairs", 200usize)?;
    let samples = o.get("samples", 20_000usize)?;
    ensure!(pairs > 0, Domain, "pairs must be positive");
    let mut rng = seeded(seed);
    let mut records = Vec::with_capacity(pairs);
    for pair_id in 0..pairs {
        let p = Plate::unit(Subspace::random(cfg.n, cfg.d, &mut rng), vec![0.0; cfg.n], delta)?;
        let q = Plate::unit(Subspace::random(cfg.n, cfg.d, &mut rng), vec![0.0; cfg.n], delta)?;
        let bound = intersection_volume_bound(&p, &q)?;
        let mc = mc_intersection_volume(&p, &q, samples, substream(seed, pair_id as u64))?;
        records.push(McRecord { pair_id, bound, mc: mc.estimate, stderr: mc.stderr, ratio: mc.estimate / bound });
    }
    let max = records.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let mean = records.iter().map(|r| r.ratio).sum::<f64>() / pairs as f64;
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &records {
        w.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    Ok(PointOutput::new(max).with("mean_ratio", mean).file(format!("mc_{index}.csv"), bytes))
}

/// Radial profile integration of M_{Σ,S}f for the log example: M is sampled
/// on log-spaced radii at a few angles and ‖Mf‖₂² = ∫ 2πr·mean_θ (Mf)² dr.
pub fn maxavg_quotient(big_n: usize, h: f64, radii: usize, angles: usize, factor: f64, density: usize, seed: u64) -> Result<(f64, usize)> {
    ensure!(radii >= 8 && angles >= 1, Domain, "need at least 8 radii and 1 angle");
    let outer = factor * big_n as f64;
    let half = outer.max(2.0 * big_n as f64);
    let f = radial_log_example_with(big_n, half, h, factor)?;
    let sigma = greedy_net_with_budget(1, 2, 1.0 / big_n as f64, seed, 50)?;
    let scales = dyadic_scales(1.0, big_n as f64);
    let fabs = f.abs();
    let r_lo = 0.5f64;
    let r_hi = outer + big_n as f64;
    let us: Vec<f64> = (0..radii).map(|j| r_lo.ln() + (r_hi / r_lo).ln() * j as f64 / (radii - 1) as f64).collect();
    use rayon::prelude::*;
    let profile: Vec<f64> = us
        .par_iter()
        .map(|&u| {
            let r = u.exp();
            (0..angles)
                .map(|k| {
                    let t = 0.1 + PI * k as f64 / angles as f64 / 2.0;
                    let m = maximal_average_at(&fabs, &sigma, &scales, &[r * t.cos(), r * t.sin()], density);
                    m * m
                })
                .sum::<f64>()
                / angles as f64
        })
        .collect();
    // ∫ 2π r² g(e^u) du by the trapezoid rule, plus the disc r < r_lo at g(r_lo).
    let du = (r_hi / r_lo).ln() / (radii - 1) as f64;
    let mut norm2 = PI * r_lo * r_lo * profile[0];
    for j in 0..radii {
        let r = us[j].exp();
        let w = if j == 0 || j == radii - 1 { 0.5 } else { 1.0 };
        norm2 += w * du * 2.0 * PI * r * r * profile[j];
    }
    Ok(((norm2 / radial_log_norm2(big_n, factor)).sqrt(), sigma.len()))
}

fn maxavg_point(cfg: &ExperimentConfig, x: f64, seed: u64) -> Result<PointOutput> {
    ensure!(cfg.d == 1 && cfg.n == 2, Domain, "maxavg runs the planar log example (d = 1, n = 2)");
    let big_n = as_count(x, "N")?;
    let o = cfg.opts();
    let factor = o.get("radial_factor", crate::extremals::RADIAL_FACTOR)?;
    let half = (factor * big_n as f64).max(2.0 * big_n as f64);
    let h = cfg.grid_h.unwrap_or((2.0 * half / 2047.0).max(0.25));
    let (q, size) = maxavg_quotient(big_n, h, o.get("radii", 200)?, o.get("angles", 3)?, factor, cfg.density, seed)?;
    Ok(PointOutput::new(q).with("directions", size as f64).with("h", h))
}

fn perron(delta: f64) -> Result<TubeFamily> {
    perron_kakeya(delta, (FRAC_PI_4, 3.0 * FRAC_PI_4))
}

/// Weak-(2,2) quotient of N_δ on the indicator of a Perron–Kakeya set.
pub fn nikodym_weak_quotient(delta: f64, h: f64, margin: f64, density: usize, seed: u64) -> Result<(f64, f64, usize)> {
    let fam = perron(delta)?;
    let f = fam.indicator(h, margin)?;
    let net = greedy_net_with_budget(1, 2, delta / 2.0, seed, 50)?;
    let (lo, hi) = fam.bounding_box();
    let step = delta / 2.0;
    let shape: Vec<usize> = (0..2).map(|k| ((hi[k] - lo[k] + 2.0) / step).ceil() as usize + 1).collect();
    let out = GridFunction::zeros(shape, vec![lo[0] - 1.0, lo[1] - 1.0], step)?;
    let g = nikodym_maximal_on(&f, delta, &net, density, &out)?;
    let est = norm_estimate(&g, &f, NormKind::Weak, 2.0, "perron-kakeya")?;
    Ok((est.value, fam.union_area, net.len()))
}

fn nikodym_point(cfg: &ExperimentConfig, delta: f64, seed: u64) -> Result<PointOutput> {
    ensure!(cfg.d == 1 && cfg.n == 2, Domain, "nikodym runs on Perron–Kakeya sets in the plane (d = 1, n = 2)");
    let h = cfg.grid_h.unwrap_or(delta / 4.0);
    let margin = cfg.opts().get("margin", delta)?;
    let (q, area, size) = nikodym_weak_quotient(delta, h, margin, cfg.density, seed)?;
    Ok(PointOutput::new(q).with("set_area", area).with("directions", size as f64))
}

fn kakeya_point(cfg: &ExperimentConfig, delta: f64, seed: u64) -> Result<PointOutput> {
    ensure!(cfg.d == 1 && cfg.n == 2, Domain, "kakeya runs on Perron–Kakeya sets in the plane (d = 1, n = 2)");
    let fam = perron(delta)?;
    let h = cfg.grid_h.unwrap_or(delta / 4.0);
    let f = fam.indicator(h, delta)?;
    let net = greedy_net_with_budget(1, 2, delta / 2.0, seed, 50)?;
    let spacing = cfg.opts().get("centers", 0.5)? * delta;
    ensure!(spacing > 0.0, Domain, "center spacing must be positive");
    let (lo, hi) = fam.bounding_box();
    let (mx, my) = (((hi[0] - lo[0]) / spacing).ceil() as usize + 1, ((hi[1] - lo[1]) / spacing).ceil() as usize + 1);
    let centers: Vec<Vec<f64>> = (0..mx * my).map(|i| vec![lo[0] + (i / my) as f64 * spacing, lo[1] + (i % my) as f64 * spacing]).collect();
    let k = kakeya_maximal(&f, delta, &net, &centers, cfg.density)?;
    let l2 = (k.iter().map(|v| v * v).sum::<f64>() / k.len() as f64).sqrt();
    let fnorm = f.lp_norm(2.0);
    Ok(PointOutput::new(l2 / fnorm).with("mean_square_root", l2).with("set_area", fam.union_area).with("directions", net.len() as f64))
}

fn cluster_point(cfg: &ExperimentConfig, x: f64, seed: u64) -> Result<PointOutput> {
    let count = as_count(x, "N")?;
    let o = cfg.opts();
    let delta = o.get("delta", 0.1)?;
    let set = DirectionSet::random(cfg.n, cfg.d, count, seed);
    let policy = CandidatePolicy { seed: substream(seed, 1), random_per_element: o.get("random_per_element", 32)?, ..Default::default() };
    let dec = cluster_decompose(&set, delta, &policy)?;
    let fresh = CandidatePolicy { seed: substream(seed, 2 + o.get("pool_seed_offset", 0u64)?), ..policy };
    let overlap = dec.max_overlap(&fresh.pool(&dec.sigma0, delta), delta, CONE_NARROW);
    let mut certified = 0usize;
    for (cl, xi) in &dec.clusters {
        let near = near_orthogonal_subset(cl, xi, delta)?;
        if near.indices.len() == cl.len() && near.distances.iter().all(|&d| d < delta / 3.0) {
            certified += 1;
        }
    }
    Ok(PointOutput::new(overlap as f64)
        .with("steps", dec.steps as f64)
        .with("clusters", dec.clusters.len() as f64)
        .with("certified", certified as f64)
        .with("sigma0", dec.sigma0.len() as f64)
        .with("threshold", dec.threshold as f64)
        .with("step_limit", (count as f64).powi(cfg.d as i32)))
}

fn extremal_point(cfg: &ExperimentConfig, index: usize, m: f64, seed: u64) -> Result<PointOutput> {
    let o = cfg.opts();
    let samples = o.get("samples", 200usize)?;
    let p = o.get("p", 2.0)?;
    let cm = cm_construction(cfg.d, cfg.n, m, seed)?;
    let vals = cm.sample_maximal(samples, substream(seed, 1));
    let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(PointOutput::new(cm.quotient(&vals, p))
        .with("min_times_m", min * m)
        .with("volume_c", cm.volume_c())
        .with("volume_u", cm.volume_u())
        .with("directions", cm.net.len() as f64)
        .file(format!("cm_{index}.json"), serde_json::to_vec_pretty(&cm.manifest()).map_err(|e| Error::Format(e.to_string()))?))
}

fn carleson_point(cfg: &ExperimentConfig, index: usize, x: f64, seed: u64) -> Result<PointOutput> {
    ensure!(cfg.d == 2 && cfg.n == 3, Domain, "carleson experiments run in codimension 1 with n = 3 (d = 2)");
    let count = as_count(x, "V")?;
    let o = cfg.opts();
    let family = o.string("family", "random");
    let seeds = o.get("seeds", 5usize)?;
    ensure!(seeds > 0, Domain, "seeds must be positive");
    let grid_m = o.get("grid", 64usize)?;
    let grid = GridFunction::zeros(vec![grid_m; 3], vec![0.5 / grid_m as f64; 3], 1.0 / grid_m as f64)?;
    let mut reports = Vec::with_capacity(seeds);
    let mut first = None;
    for s in 0..seeds {
        let sd = substream(seed, s as u64);
        let seq = match family.as_str() {
            "random" => {
                let dirs = random_cap_directions(3, count, MAX_TILT, sd)?;
                let lat = build_lattice(dirs, o.get("delta", 0.25)?, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, o.get("depth", 2)?, 3)?;
                random_lattice_sequence(&lat, o.get("plates", 400)?, &grid, sd)?
            }
            "adversarial" => {
                ensure!(count.is_power_of_two() && count >= 4, Domain, "adversarial V must be a power of two ≥ 4, got {count}");
                let depth = count.trailing_zeros();
                let delta = 0.5f64.powi(depth as i32);
                adversarial_sequence(depth, 0.25 * delta * MAX_TILT.tan(), sd)?
            }
            other => return Err(Error::Validation(vec![format!("family must be random or adversarial, got {other:?}")])),
        };
        reports.push(embedding_audit(&seq)?);
        if first.is_none() {
            first = Some(seq);
        }
    }
    let seq = first.unwrap();
    let q: Vec<f64> = reports.iter().map(|r| r.quotient).collect();
    let mean = q.iter().sum::<f64>() / q.len() as f64;
    let mut out = PointOutput::new(mean)
        .with("quotient_min", q.iter().cloned().fold(f64::INFINITY, f64::min))
        .with("quotient_max", q.iter().cloned().fold(0.0, f64::max))
        .with("baseline", reports.iter().map(|r| r.baseline).sum::<f64>() / q.len() as f64)
        .with("directions", reports[0].directions as f64)
        .with("plates", reports[0].plates as f64)
        .file(format!("sequence_{index}.json"), seq.to_json().into_bytes());
    if family == "random" {
        let decay = decay_audit(&seq, 0, 1..=8, 8.0, 1.0, &grid)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["k", "shadow", "bound"]).map_err(|e| Error::Format(e.to_string()))?;
        for row in &decay.rows {
            w.write_record([row.k.to_string(), row.shadow.to_string(), row.bound.to_string()]).map_err(|e| Error::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
        out = out.with("max_b", decay.max_b).file(format!("audit_{index}.csv"), bytes);
    }
    Ok(out)
}
