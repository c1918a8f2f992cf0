use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use gmxa::carleson::{adversarial_sequence, build_lattice, embedding_audit, random_cap_directions, random_lattice_sequence};
use gmxa::cli::{fit_scaling, maxavg_quotient, nikodym_weak_quotient, FitModel};
use gmxa::extremals::{cm_construction, RADIAL_FACTOR};
use gmxa::fourierops::{cone_cutoff, fourier_average, low_high_split, sector_overlap_audit, switch_defect};
use gmxa::grassmann::{
    cluster_decompose, greedy_net, greedy_net_with_budget, near_orthogonal_subset, principal_angles, CandidatePolicy, DirectionSet,
    Subspace, CONE_NARROW, ZERO_ANGLE_TOL,
};
use gmxa::gridops::GridFunction;
use gmxa::plates::{intersection_volume_bound, mc_intersection_volume, Plate, MAX_TILT};
use gmxa::rng::{seeded, substream};
use rand::Rng;

type Outcome = gmxa::Result<(bool, String)>;

/// Criteria that fail as stated; each one is explained in the decisions ledger.
const KNOWN_FAILURES: &[&str] = &["A10"];

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn increasing(v: &[f64], strict: bool) -> bool {
    v.windows(2).all(|w| if strict { w[1] > w[0] } else { w[1] >= w[0] })
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    max / min
}

fn a1() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (d, n) in [(1, 2), (1, 3), (2, 3)] {
        let pts: Vec<(f64, f64)> = (3..=6)
            .map(|k| {
                let delta = 2f64.powi(-k);
                greedy_net_with_budget(d, n, delta, 1, 50).map(|net| (1.0 / delta, net.len() as f64))
            })
            .collect::<gmxa::Result<_>>()?;
        let fit = fit_scaling(&pts, FitModel::Power)?;
        let target = (d * (n - d)) as f64;
        ok &= (fit.slope - target).abs() <= 0.15 * target && fit.r2 >= 0.97;
        detail.push(format!("Gr({d},{n}) slope {:.3}/{target} R² {:.4}", fit.slope, fit.r2));
    }
    Ok((ok, detail.join("; ")))
}

/// Angles of two planes in R⁴ by sequential maximization of |u·v| over unit
/// u ∈ a, v ∈ b, then over the orthogonal complements within a and b.
fn argmin_angles(a: &Subspace, b: &Subspace) -> [f64; 2] {
    let (a1, a2, b1, b2) = (a.column(0), a.column(1), b.column(0), b.column(1));
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
    let m = [[dot(&a1, &b1), dot(&a1, &b2)], [dot(&a2, &b1), dot(&a2, &b2)]];
    let g = |al: f64, be: f64| {
        let (ca, sa, cb, sb) = (al.cos(), al.sin(), be.cos(), be.sin());
        ca * cb * m[0][0] + ca * sb * m[0][1] + sa * cb * m[1][0] + sa * sb * m[1][1]
    };
    let (mut best, mut at) = (f64::NEG_INFINITY, (0.0, 0.0));
    let coarse = 256;
    for i in 0..coarse {
        for j in 0..coarse {
            let (al, be) = (PI * i as f64 / coarse as f64, PI * j as f64 / coarse as f64);
            let v = g(al, be).abs();
            if v > best {
                (best, at) = (v, (al, be));
            }
        }
    }
    let mut width = 2.0 * PI / coarse as f64;
    for _ in 0..12 {
        let c = at;
        for i in -10..=10 {
            for j in -10..=10 {
                let (al, be) = (c.0 + width * i as f64 / 10.0, c.1 + width * j as f64 / 10.0);
                let v = g(al, be).abs();
                if v > best {
                    (best, at) = (v, (al, be));
                }
            }
        }
        width /= 5.0;
    }
    let theta1 = best.min(1.0).acos();
    let theta2 = g(at.0 + FRAC_PI_2, at.1 + FRAC_PI_2).abs().min(1.0).acos();
    [theta1, theta2]
}

fn a2() -> Outcome {
    let mut rng = seeded(2);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let a = Subspace::random(4, 2, &mut rng);
        let b = Subspace::random(4, 2, &mut rng);
        let svd = principal_angles(&a, &b, ZERO_ANGLE_TOL)?.angles;
        let mut brute = argmin_angles(&a, &b);
        brute.sort_by(f64::total_cmp);
        for k in 0..2 {
            worst = worst.max((svd[k] - brute[k]).abs());
        }
    }
    Ok((worst <= 2e-3, format!("max |SVD − arg-min| = {worst:.2e} rad over 100 pairs in Gr(2,4)")))
}

fn a3() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (d, n) in [(1, 2), (1, 3), (2, 3), (2, 4)] {
        let mut cs = Vec::new();
        for (k, delta) in [0.1, 0.05, 0.025].into_iter().enumerate() {
            let seed = substream(3, (10 * n + d + 100 * k) as u64);
            let mut rng = seeded(seed);
            let mut c = 0.0f64;
            for pair in 0..200 {
                let p = Plate::unit(Subspace::random(n, d, &mut rng), vec![0.0; n], delta)?;
                let q = Plate::unit(Subspace::random(n, d, &mut rng), vec![0.0; n], delta)?;
                let mc = mc_intersection_volume(&p, &q, 20_000, substream(seed, pair))?;
                c = c.max(mc.estimate / intersection_volume_bound(&p, &q)?);
            }
            cs.push(c);
        }
        let s = spread(&cs);
        ok &= s <= 2.0 && cs.iter().all(|c| c.is_finite() && *c > 0.0);
        detail.push(format!("Gr({d},{n}) C = [{}] spread {s:.2}", fmt(&cs)));
    }
    let delta = 0.05;
    let e1 = Subspace::line(&[1.0, 0.0])?;
    for (k, theta) in [0.3f64, 0.7, 1.2, FRAC_PI_2].into_iter().enumerate() {
        let p = Plate::unit(e1.clone(), vec![0.0, 0.0], delta / 2.0)?;
        let q = Plate::unit(Subspace::line(&[theta.cos(), theta.sin()])?, vec![0.0, 0.0], delta / 2.0)?;
        let mc = mc_intersection_volume(&p, &q, 400_000, 30 + k as u64)?;
        let exact = delta * delta / theta.sin();
        let z = (mc.estimate - exact).abs() / mc.stderr.max(1e-15);
        ok &= (mc.estimate - exact).abs() <= 3.0 * mc.stderr + 1e-12 * exact;
        detail.push(format!("rhombus θ={theta:.3} |MC − δ²/sinθ|/σ = {z:.2}"));
    }
    Ok((ok, detail.join("; ")))
}

fn a4() -> Outcome {
    let mut pts = Vec::new();
    for big_n in [8usize, 16, 32, 64, 128] {
        let half = (RADIAL_FACTOR * big_n as f64).max(2.0 * big_n as f64);
        let h = (2.0 * half / 2047.0).max(0.25);
        let (q, _) = maxavg_quotient(big_n, h, 200, 3, RADIAL_FACTOR, 2, 4)?;
        pts.push((big_n as f64, q));
    }
    let fit = fit_scaling(&pts, FitModel::Log)?;
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok((fit.r2 >= 0.9 && increasing(&ys, true), format!("quotients [{}], log fit slope {:.3} R² {:.4}", fmt(&ys), fit.slope, fit.r2)))
}

fn a5() -> Outcome {
    let mut pts = Vec::new();
    for k in 4..=7 {
        let delta = 2f64.powi(-k);
        let (q, _, _) = nikodym_weak_quotient(delta, delta / 4.0, delta, 2, 5)?;
        pts.push((1.0 / delta, q));
    }
    let fit = fit_scaling(&pts, FitModel::SqrtLog)?;
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    Ok((fit.r2 >= 0.85 && increasing(&ys, false), format!("quotients [{}], sqrtlog fit R² {:.4}", fmt(&ys), fit.r2)))
}

fn a6() -> Outcome {
    let grid = GridFunction::zeros(vec![64; 3], vec![0.5 / 64.0; 3], 1.0 / 64.0)?;
    let mut random = Vec::new();
    for count in [4usize, 8, 16, 32, 64] {
        for s in 0..20u64 {
            let seed = substream(6, 100 * count as u64 + s);
            let dirs = random_cap_directions(3, count, MAX_TILT, seed)?;
            let lat = build_lattice(dirs, 0.25, vec![0.0, 0.0], 1.0, (0.0, 1.0), 0.5, 2, 3)?;
            random.push(embedding_audit(&random_lattice_sequence(&lat, 400, &grid, seed)?)?.quotient);
        }
    }
    let mut adversarial = Vec::new();
    for depth in 2..=6u32 {
        let delta = 0.5f64.powi(depth as i32);
        adversarial.push(embedding_audit(&adversarial_sequence(depth, 0.25 * delta * MAX_TILT.tan(), 6)?)?.quotient);
    }
    let (rs, amin) = (spread(&random), adversarial.iter().cloned().fold(f64::INFINITY, f64::min));
    let ok = rs <= 4.0 && amin > 0.0 && 1.0 / spread(&adversarial) >= 0.25;
    Ok((ok, format!("random max/min {rs:.3} over 100 sequences; adversarial [{}], min {amin:.4}", fmt(&adversarial))))
}

fn a7() -> Outcome {
    let (delta, count) = (0.1, 64);
    let (mut ok, mut max_steps, mut clusters, mut worst_margin) = (true, 0, 0, i64::MAX);
    for s in 0..20u64 {
        let seed = substream(7, s);
        let set = DirectionSet::random(3, 1, count, seed);
        let policy = CandidatePolicy { seed: substream(seed, 1), random_per_element: 32, ..Default::default() };
        let dec = cluster_decompose(&set, delta, &policy)?;
        ok &= dec.steps <= count;
        max_steps = max_steps.max(dec.steps);
        for (cl, xi) in &dec.clusters {
            let near = near_orthogonal_subset(cl, xi, delta)?;
            ok &= near.indices.len() == cl.len() && near.distances.iter().all(|&d| d < delta / 3.0);
            clusters += 1;
        }
        let fresh = CandidatePolicy { seed: substream(seed, 2), ..policy };
        let overlap = dec.max_overlap(&fresh.pool(&dec.sigma0, delta), delta, CONE_NARROW);
        ok &= overlap <= dec.threshold;
        worst_margin = worst_margin.min(dec.threshold as i64 - overlap as i64);
    }
    Ok((ok, format!("max steps {max_steps} ≤ {count}, {clusters} clusters certified, min threshold − fresh overlap {worst_margin}")))
}

fn rel(a: &[f64], b: &[f64], f: &[f64]) -> f64 {
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (d / f.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

fn a8() -> Outcome {
    let mut rng = seeded(8);
    let (mut identity, mut recon, mut min_low) = (0.0f64, 0.0f64, f64::INFINITY);
    for draw in 0..50 {
        let f = GridFunction::new(vec![128, 128], vec![0.0, 0.0], 1.0, (0..128 * 128).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let t = [PI / 4.0, 3.0 * PI / 4.0][draw % 2] + rng.random_range(-0.005..0.005);
        let sigma = Subspace::line(&[t.cos(), t.sin()])?;
        let s = rng.random_range(0.075..0.08);
        let delta = rng.random_range(0.95..1.0);
        let c = if draw % 2 == 0 { 0.25 } else { 0.0625 };
        let (hi, lo) = low_high_split(&f, &sigma, s, delta)?;
        let (_, lo_g) = low_high_split(&cone_cutoff(&f, &sigma, delta, c)?, &sigma, s, delta)?;
        identity = identity.max(rel(&lo.values, &lo_g.values, &f.values));
        min_low = min_low.min(lo.lp_norm(2.0) / f.lp_norm(2.0));
        let a = fourier_average(&f, &sigma, s)?;
        let sum: Vec<f64> = hi.values.iter().zip(&lo.values).map(|(x, y)| x + y).collect();
        recon = recon.max(rel(&sum, &a.values, &a.values));
    }
    let bump = GridFunction::from_fn(vec![128, 128], vec![0.0, 0.0], 1.0, |x| (-((x[0] - 64.0).powi(2) + (x[1] - 64.0).powi(2)) / 400.0).exp())?;
    let e1 = Subspace::line(&[1.0, 0.0])?;
    let delta: f64 = 0.1;
    let mut per_unit = Vec::new();
    for frac in [0.125f64, 0.25, 0.5, 1.0] {
        let tau = Subspace::line(&[(delta * frac).asin().cos(), delta * frac])?;
        per_unit.push(switch_defect(&bump, &e1, &tau, 0.02, delta)?.value / frac);
    }
    let lin = spread(&per_unit);
    let ok = identity <= 1e-10 && min_low > 1e-6 && recon <= 1e-12 && lin <= 4.0;
    Ok((
        ok,
        format!("cone identity {identity:.1e} (min low part {min_low:.2e}), reconstruction {recon:.1e}, defect/(d/δ) spread {lin:.3}"),
    ))
}

/// Sum of plane waves at lattice frequencies inside {lo < |ξ| < hi}.
fn annulus_waves(n: usize, m: usize, h: f64, lo: f64, hi: f64, count: usize, seed: u64) -> gmxa::Result<GridFunction> {
    let mut rng = seeded(seed);
    let unit = 2.0 * PI / (m as f64 * h);
    let kmax = (hi / unit).ceil() as i64;
    let mut waves = Vec::new();
    while waves.len() < count {
        let k: Vec<f64> = (0..n).map(|_| rng.random_range(-kmax..=kmax) as f64 * unit).collect();
        let r = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        if lo < r && r < hi {
            waves.push((k, rng.random_range(0.5..1.0), rng.random_range(0.0..2.0 * PI)));
        }
    }
    GridFunction::from_fn(vec![m; n], vec![0.0; n], h, |x| {
        waves.iter().map(|(k, a, p)| a * (k.iter().zip(x).map(|(u, v)| u * v).sum::<f64>() + p).cos()).sum()
    })
}

fn a9() -> Outcome {
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, m) in [(2usize, 128usize), (3, 64)] {
        let mut ratios = Vec::new();
        for (k, delta) in [0.2, 0.1, 0.05].into_iter().enumerate() {
            let f = annulus_waves(n, m, 0.125, 2f64.powi(-5) / delta, 0.5 / delta, 100, substream(9, (10 * n + k) as u64))?;
            let net = greedy_net(1, n, delta, 9, None)?;
            ratios.push(sector_overlap_audit(&f, &net, delta)?.ratio);
        }
        let s = spread(&ratios);
        ok &= s <= 3.0 && ratios[2] <= 3.0 * ratios[0];
        detail.push(format!("Gr(1,{n}) ratios [{}] spread {s:.2}", fmt(&ratios)));
    }
    Ok((ok, detail.join("; ")))
}

fn a10() -> Outcome {
    let (d, n, p) = (2usize, 3usize, 2.0);
    let mut pts = Vec::new();
    let mut min_m = f64::INFINITY;
    for m in [8.0, 16.0, 32.0] {
        let cm = cm_construction(d, n, m, 10)?;
        let vals = cm.sample_maximal(200, substream(10, m as u64));
        min_m = min_m.min(vals.iter().cloned().fold(f64::INFINITY, f64::min) * m);
        pts.push((m, cm.quotient(&vals, p)));
    }
    let fit = fit_scaling(&pts, FitModel::Power)?;
    let formula = ((n - d + 1) as f64 - p) / (p * (n - d) as f64);
    let stated = 0.25;
    let tol = 0.3 * stated;
    let lower = min_m >= 2f64.powi(-12);
    let ok = lower && (fit.slope - stated).abs() <= tol;
    Ok((
        ok,
        format!(
            "min M·value {min_m:.4} ≥ 2^-12: {lower}; quotient slope {:.4} vs stated 1/4 ± {tol}: {}; exponent formula gives {formula}, |slope − {formula}| ≤ {tol}: {}",
            fit.slope,
            (fit.slope - stated).abs() <= tol,
            (fit.slope - formula).abs() <= tol
        ),
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Outcome); 10] = [
        ("A1", 60, a1),
        ("A2", 120, a2),
        ("A3", 600, a3),
        ("A4", 900, a4),
        ("A5", 900, a5),
        ("A6", 1200, a6),
        ("A7", 300, a7),
        ("A8", 300, a8),
        ("A9", 300, a9),
        ("A10", 900, a10),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (name, limit, run) in criteria {
        let start = Instant::now();
        let result = run();
        let secs = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok && secs <= Duration::from_secs(limit), detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("{name:<4} {} {:>7.1}s/{limit}s  {detail}", if ok { "PASS" } else { "FAIL" }, secs.as_secs_f64());
        if ok {
            passed += 1;
        } else if !KNOWN_FAILURES.contains(&name) {
            unexpected.push(name);
        }
    }
    println!("{passed}/10 criteria pass; known failures: {}", KNOWN_FAILURES.join(", "));
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
