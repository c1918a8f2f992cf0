use rayon::prelude::*;

use super::GridFunction;
use crate::error::{ensure, Result};
use crate::grassmann::{DirectionSet, Subspace};

/// Midpoint rule on the radius-r ball of R^k with node spacing ≈ q.
///
/// k = 1 uses nodes ±(j + ½)q with a fractional end weight so that the
/// weights sum to exactly 2r/q; k ≥ 2 uses a square grid whose cut cells are
/// weighted by their sub-sampled area fraction.
#[derive(Clone, Debug)]
pub struct BallRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    total: f64,
}

impl BallRule {
    pub fn new(k: usize, r: f64, q: f64) -> BallRule {
        if k == 0 || r == 0.0 {
            return BallRule { nodes: vec![vec![0.0; k]], weights: vec![1.0], total: 1.0 };
        }
        if k == 1 {
            let full = (r / q).floor() as usize;
            let frac = r / q - full as f64;
            let mut nodes = Vec::with_capacity(2 * full + 2);
            let mut weights = Vec::with_capacity(2 * full + 2);
            for j in 0..full {
                let t = (j as f64 + 0.5) * q;
                nodes.push(vec![t]);
                nodes.push(vec![-t]);
                weights.push(1.0);
                weights.push(1.0);
            }
            if frac > 1e-12 {
                // Fractional end cell [full·q, r], evaluated at its midpoint.
                let t = full as f64 * q + 0.5 * frac * q;
                nodes.push(vec![t]);
                nodes.push(vec![-t]);
                weights.push(frac);
                weights.push(frac);
            }
            let total = weights.iter().sum();
            return BallRule { nodes, weights, total };
        }
        let m = ((2.0 * r / q).ceil() as usize).max(1);
        let cell = 2.0 * r / m as f64;
        let sub = 4usize;
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        let mut idx = vec![0usize; k];
        let total_cells = m.pow(k as u32);
        let half_diag = 0.5 * cell * (k as f64).sqrt();
        for _ in 0..total_cells {
            let c: Vec<f64> = idx.iter().map(|&i| -r + (i as f64 + 0.5) * cell).collect();
            let rc = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            let w = if rc + half_diag <= r {
                1.0
            } else if rc - half_diag >= r {
                0.0
            } else {
                let mut inside = 0usize;
                let total_sub = sub.pow(k as u32);
                let mut sidx = vec![0usize; k];
                for _ in 0..total_sub {
                    let r2: f64 = (0..k)
                        .map(|a| {
                            let v = c[a] - 0.5 * cell + (sidx[a] as f64 + 0.5) * cell / sub as f64;
                            v * v
                        })
                        .sum();
                    if r2 <= r * r {
                        inside += 1;
                    }
                    bump(&mut sidx, sub);
                }
                inside as f64 / total_sub as f64
            };
            if w > 0.0 {
                nodes.push(c);
                weights.push(w);
            }
            bump(&mut idx, m);
        }
        let total = weights.iter().sum();
        BallRule { nodes, weights, total }
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }
}

fn bump(idx: &mut [usize], m: usize) {
    for v in idx.iter_mut() {
        *v += 1;
        if *v < m {
            return;
        }
        *v = 0;
    }
}

fn check_density(density: usize) -> Result<()> {
    ensure!(density >= 2, Domain, "density must be at least 2 samples per cell, got {density}");
    Ok(())
}

/// ⟨f⟩_{s,σ}(x): average of f(x − y) over y ∈ sB_n ∩ σ (thin, d-dimensional).
pub fn subspace_average(f: &GridFunction, sigma: &Subspace, s: f64, x: &[f64], density: usize) -> Result<f64> {
    ensure!(sigma.n() == f.n() && x.len() == f.n(), Shape, "dimension mismatch");
    ensure!(sigma.d() < sigma.n(), Domain, "d = n is the Hardy–Littlewood case and is not supported");
    ensure!(s > 0.0, Domain, "scale must be positive, got {s}");
    check_density(density)?;
    let rule = BallRule::new(sigma.d(), s, f.h / density as f64);
    Ok(average_with_rule(f, sigma, x, &rule))
}

pub(crate) fn average_with_rule(f: &GridFunction, sigma: &Subspace, x: &[f64], rule: &BallRule) -> f64 {
    let n = f.n();
    let mut p = vec![0.0; n];
    let mut acc = 0.0;
    for (node, w) in rule.nodes.iter().zip(&rule.weights) {
        let y = sigma.embed(node);
        for i in 0..n {
            p[i] = x[i] - y[i];
        }
        acc += w * f.eval(&p);
    }
    acc / rule.total
}

/// sup over (σ, s) ∈ Σ × S of ⟨|f|⟩_{s,σ}(x), at one point.
///
/// For lines the samples along x + tσ are shared by all scales.
pub fn maximal_average_at(fabs: &GridFunction, sigma: &DirectionSet, scales: &[f64], x: &[f64], density: usize) -> f64 {
    let q = fabs.h / density as f64;
    let mut best = 0.0f64;
    if sigma.d == 1 {
        let smax = scales.iter().cloned().fold(0.0, f64::max);
        let full = (smax / q).floor() as usize + 1;
        let n = fabs.n();
        let mut plus = vec![0.0; full + 1];
        let mut minus = vec![0.0; full + 1];
        let mut p = vec![0.0; n];
        for s in &sigma.elements {
            let u = s.column(0);
            let eval = |t: f64, p: &mut Vec<f64>| {
                for i in 0..n {
                    p[i] = x[i] - t * u[i];
                }
                fabs.eval(p)
            };
            // Cumulative sums of midpoint samples on each side.
            for j in 0..full {
                let t = (j as f64 + 0.5) * q;
                plus[j + 1] = plus[j] + eval(t, &mut p);
                minus[j + 1] = minus[j] + eval(-t, &mut p);
            }
            for &sc in scales {
                let k = (sc / q).floor() as usize;
                let frac = sc / q - k as f64;
                let mut acc = plus[k] + minus[k];
                if frac > 1e-12 {
                    let t = k as f64 * q + 0.5 * frac * q;
                    acc += frac * (eval(t, &mut p) + eval(-t, &mut p));
                }
                best = best.max(acc / (2.0 * sc / q));
            }
        }
        return best;
    }
    for &sc in scales {
        let rule = BallRule::new(sigma.d, sc, q);
        for s in &sigma.elements {
            best = best.max(average_with_rule(fabs, s, x, &rule));
        }
    }
    best
}

/// M_{Σ,S}|f| on the lattice of `f`.
pub fn maximal_subspace_average(f: &GridFunction, sigma: &DirectionSet, scales: &[f64], density: usize) -> Result<GridFunction> {
    ensure!(!sigma.is_empty(), Domain, "direction set is empty");
    ensure!(!scales.is_empty(), Domain, "scale set is empty");
    ensure!(sigma.n == f.n(), Shape, "direction set lives in R^{}, grid in R^{}", sigma.n, f.n());
    ensure!(sigma.d < sigma.n, Domain, "d = n is not supported");
    ensure!(scales.iter().all(|&s| s > 0.0), Domain, "scales must be positive");
    check_density(density)?;
    let fabs = f.abs();
    let values: Vec<f64> = (0..f.len())
        .into_par_iter()
        .map(|i| {
            let x = f.point(i);
            maximal_average_at(&fabs, sigma, scales, &x, density)
        })
        .collect();
    GridFunction::new(f.shape.clone(), f.origin.clone(), f.h, values)
}

/// Dyadic scales 2^k in [lo, hi].
pub fn dyadic_scales(lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut s = 2f64.powi(lo.log2().ceil() as i32);
    while s <= hi * (1.0 + 1e-12) {
        out.push(s);
        s *= 2.0;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(elems: Vec<Subspace>) -> DirectionSet {
        DirectionSet::from_elements(elems).unwrap()
    }

    #[test]
    fn ball_rule_weights() {
        let r = BallRule::new(1, 1.3, 0.25);
        assert!((r.total_weight() - 2.0 * 1.3 / 0.25).abs() < 1e-12);
        let r = BallRule::new(2, 1.0, 0.05);
        let area = r.total_weight() * (2.0 / (2.0f64 / 0.05).ceil()).powi(2);
        assert!((area - std::f64::consts::PI).abs() < 2e-3, "{area}");
    }

    #[test]
    fn constant_averages_to_one() {
        let f = GridFunction::centered(3, 3.0, 0.25, |_| 1.0).unwrap();
        for d in 1..3 {
            let s = Subspace::random(3, d, &mut crate::rng::seeded(d as u64));
            let v = subspace_average(&f, &s, 1.5, &[0.1, -0.2, 0.3], 2).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn half_space_is_half() {
        let h = 0.05;
        let f = GridFunction::centered(2, 2.0, h, |x| if x[0] >= 0.0 { 1.0 } else { 0.0 }).unwrap();
        let s = Subspace::coordinate(2, &[0]).unwrap();
        for &sc in &[0.5, 1.0, 1.5] {
            let v = subspace_average(&f, &s, sc, &[0.0, 0.0], 4).unwrap();
            assert!((v - 0.5).abs() <= h / sc, "s = {sc}: {v}");
        }
    }

    #[test]
    fn guards() {
        let f = GridFunction::centered(2, 1.0, 0.1, |_| 1.0).unwrap();
        let s = Subspace::coordinate(2, &[0]).unwrap();
        assert!(subspace_average(&f, &s, 0.0, &[0.0, 0.0], 2).is_err());
        assert!(subspace_average(&f, &s, 1.0, &[0.0, 0.0], 1).is_err());
        let full = Subspace::coordinate(2, &[0, 1]).unwrap();
        assert!(subspace_average(&f, &full, 1.0, &[0.0, 0.0], 2).is_err());
        assert!(maximal_subspace_average(&f, &set(vec![s.clone()]), &[], 2).is_err());
    }

    #[test]
    fn singleton_maximal_matches_single_average() {
        let f = GridFunction::centered(2, 2.0, 0.125, |x| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp() - 0.3).unwrap();
        let s = Subspace::line(&[0.6, 0.8]).unwrap();
        let m = maximal_subspace_average(&f, &set(vec![s.clone()]), &[0.7], 2).unwrap();
        let fa = f.abs();
        for i in (0..f.len()).step_by(37) {
            let x = f.point(i);
            let v = subspace_average(&fa, &s, 0.7, &x, 2).unwrap();
            assert!((m.values[i] - v).abs() < 1e-12);
        }
    }

    #[test]
    fn l1_preserved_for_separable_function() {
        // ∫ ⟨f⟩_{s,e1}(x) dx = ∫ f for f = g(x1)g(x2).
        let h = 0.05;
        let g = |t: f64| (1.0 - t.abs()).max(0.0);
        let f = GridFunction::centered(2, 3.0, h, |x| g(x[0]) * g(x[1])).unwrap();
        let s = Subspace::coordinate(2, &[0]).unwrap();
        let sc = 1.0;
        let m = maximal_subspace_average(&f, &set(vec![s]), &[sc], 2).unwrap();
        let rel = (m.integral() - f.integral()).abs() / f.integral();
        assert!(rel <= 2.0 * h / sc, "{rel}");
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_scales(1.0, 8.0), vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(dyadic_scales(0.3, 1.9), vec![0.5, 1.0]);
    }
}
