use rayon::prelude::*;

use super::average::BallRule;
use super::GridFunction;
use crate::error::{ensure, Result};
use crate::grassmann::{DirectionSet, Subspace};

/// Product quadrature for the full plate x + T_δ(σ).
#[derive(Clone, Debug)]
pub struct PlateRule {
    long: BallRule,
    short: BallRule,
}

impl PlateRule {
    pub fn new(d: usize, n: usize, delta: f64, q: f64) -> Self {
        PlateRule { long: BallRule::new(d, 1.0, q), short: BallRule::new(n - d, delta, q) }
    }
}

/// Volume average of f over x + T_δ(σ).
pub fn plate_average(f: &GridFunction, sigma: &Subspace, delta: f64, x: &[f64], density: usize) -> Result<f64> {
    ensure!(sigma.n() == f.n() && x.len() == f.n(), Shape, "dimension mismatch");
    ensure!(sigma.d() < sigma.n(), Domain, "need d < n");
    ensure!(density >= 1, Domain, "density must be positive");
    let rule = PlateRule::new(sigma.d(), sigma.n(), delta, f.h / density as f64);
    Ok(plate_average_with(f, sigma, &sigma.complement(), x, &rule))
}

fn plate_average_with(f: &GridFunction, sigma: &Subspace, perp: &Subspace, x: &[f64], rule: &PlateRule) -> f64 {
    let n = f.n();
    let mut p = vec![0.0; n];
    let mut acc = 0.0;
    let shorts: Vec<Vec<f64>> = rule.short.nodes.iter().map(|c| perp.embed(c)).collect();
    for (a, wa) in rule.long.nodes.iter().zip(&rule.long.weights) {
        let ya = sigma.embed(a);
        for (yb, wb) in shorts.iter().zip(&rule.short.weights) {
            for i in 0..n {
                p[i] = x[i] + ya[i] + yb[i];
            }
            acc += wa * wb * f.eval(&p);
        }
    }
    acc / (rule.long.total_weight() * rule.short.total_weight())
}

fn check_delta(delta: f64) -> Result<()> {
    ensure!(delta > 0.0 && delta <= 0.5, Domain, "delta must lie in (0, 1/2], got {delta}");
    Ok(())
}

/// N_δ|f| on the lattice of `f`. The net should have mesh ≤ δ/4.
pub fn nikodym_maximal(f: &GridFunction, delta: f64, net: &DirectionSet, density: usize) -> Result<GridFunction> {
    let out = GridFunction::zeros(f.shape.clone(), f.origin.clone(), f.h)?;
    nikodym_maximal_on(f, delta, net, density, &out)
}

/// N_δ|f| evaluated at the nodes of `out` (its values are ignored).
pub fn nikodym_maximal_on(
    f: &GridFunction,
    delta: f64,
    net: &DirectionSet,
    density: usize,
    out: &GridFunction,
) -> Result<GridFunction> {
    check_delta(delta)?;
    ensure!(!net.is_empty(), Domain, "direction net is empty");
    ensure!(net.n == f.n() && out.n() == f.n(), Shape, "dimension mismatch");
    ensure!(net.d < net.n, Domain, "need d < n");
    ensure!(density >= 1, Domain, "density must be positive");
    let fabs = f.abs();
    let q = f.h / density as f64;
    let values = if f.n() == 2 {
        let points: Vec<[f64; 2]> = (0..out.len()).map(|i| {
            let p = out.point(i);
            [p[0], p[1]]
        }).collect();
        net.elements
            .par_iter()
            .map(|s| {
                let u = s.column(0);
                let lat = RotatedAverage::build(&fabs, [u[0], u[1]], delta, q, &points);
                points.iter().map(|p| lat.eval(p)).collect::<Vec<f64>>()
            })
            .reduce(|| vec![0.0; out.len()], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
    } else {
        let rule = PlateRule::new(net.d, net.n, delta, q);
        let perps: Vec<Subspace> = net.elements.iter().map(Subspace::complement).collect();
        (0..out.len())
            .into_par_iter()
            .map(|i| {
                let x = out.point(i);
                net.elements
                    .iter()
                    .zip(&perps)
                    .map(|(s, p)| plate_average_with(&fabs, s, p, &x, &rule))
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    GridFunction::new(out.shape.clone(), out.origin.clone(), out.h, values)
}

/// K_δ|f|(σ) = max over `centers` of the plate average over x + T_δ(σ), per net element.
pub fn kakeya_maximal(f: &GridFunction, delta: f64, net: &DirectionSet, centers: &[Vec<f64>], density: usize) -> Result<Vec<f64>> {
    check_delta(delta)?;
    ensure!(!centers.is_empty(), Domain, "no centers");
    ensure!(net.n == f.n() && centers.iter().all(|c| c.len() == f.n()), Shape, "dimension mismatch");
    ensure!(net.d < net.n, Domain, "need d < n");
    ensure!(density >= 1, Domain, "density must be positive");
    let fabs = f.abs();
    let q = f.h / density as f64;
    if f.n() == 2 {
        let points: Vec<[f64; 2]> = centers.iter().map(|c| [c[0], c[1]]).collect();
        return Ok(net
            .elements
            .par_iter()
            .map(|s| {
                let u = s.column(0);
                let lat = RotatedAverage::build(&fabs, [u[0], u[1]], delta, q, &points);
                points.iter().map(|p| lat.eval(p)).fold(0.0, f64::max)
            })
            .collect());
    }
    let rule = PlateRule::new(net.d, net.n, delta, q);
    Ok(net
        .elements
        .par_iter()
        .map(|s| {
            let perp = s.complement();
            centers.iter().map(|x| plate_average_with(&fabs, s, &perp, x, &rule)).fold(0.0, f64::max)
        })
        .collect())
}

/// Plate averages of a planar function for one direction u, on a lattice
/// aligned with (u, u⊥): resample, box-filter each axis with prefix sums,
/// then interpolate bilinearly at query points.
struct RotatedAverage {
    u: [f64; 2],
    a0: f64,
    b0: f64,
    qa: f64,
    qb: f64,
    na: usize,
    nb: usize,
    vals: Vec<f64>,
}

impl RotatedAverage {
    /// The sample lattice has spacing `2q` along u (the unit-length axis) and
    /// `q` across, and is clipped to the rotated support box of f widened by
    /// the plate; points outside it read 0 from the zero padding.
    fn build(f: &GridFunction, u: [f64; 2], delta: f64, q: f64, points: &[[f64; 2]]) -> Self {
        let w = [-u[1], u[0]];
        let range = |pts: &mut dyn Iterator<Item = [f64; 2]>| {
            pts.fold((f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY), |r, p| {
                let a = p[0] * u[0] + p[1] * u[1];
                let b = p[0] * w[0] + p[1] * w[1];
                (r.0.min(a), r.1.max(a), r.2.min(b), r.3.max(b))
            })
        };
        let (pa0, pa1, pb0, pb1) = range(&mut points.iter().copied());
        let (sa0, sa1, sb0, sb1) = match support_box(f) {
            Some((lo, hi)) => range(&mut [[lo[0], lo[1]], [lo[0], hi[1]], [hi[0], lo[1]], [hi[0], hi[1]]].into_iter()),
            None => (0.0, 0.0, 0.0, 0.0),
        };
        let qa = 2.0 * q;
        let qb = q;
        let amin = pa0.max(sa0 - 1.0 - 2.0 * qa);
        let amax = pa1.min(sa1 + 1.0 + 2.0 * qa).max(amin);
        let bmin = pb0.max(sb0 - delta - 2.0 * qb);
        let bmax = pb1.min(sb1 + delta + 2.0 * qb).max(bmin);
        // Half-offset output lattice a0 + (i + ½)q; the filter nodes then land on
        // the sample lattice a0 + i·q.
        let ka = (1.0 / qa).floor() as usize;
        let fa = 1.0 / qa - ka as f64;
        let kb = (delta / qb).floor() as usize;
        let fb = delta / qb - kb as f64;
        let pad_a = ka + 2;
        let pad_b = kb + 2;
        let a0 = amin - (pad_a as f64 + 1.0) * qa;
        let b0 = bmin - (pad_b as f64 + 1.0) * qb;
        let na = ((amax - a0) / qa).ceil() as usize + pad_a + 3;
        let nb = ((bmax - b0) / qb).ceil() as usize + pad_b + 3;
        // Samples, b fastest.
        let mut s = vec![0.0; na * nb];
        for i in 0..na {
            let a = a0 + i as f64 * qa;
            for j in 0..nb {
                let b = b0 + j as f64 * qb;
                s[i * nb + j] = f.eval2(a * u[0] + b * w[0], a * u[1] + b * w[1]);
            }
        }
        let s = box_filter(&s, na, nb, ka, fa, true);
        let s = box_filter(&s, na, nb, kb, fb, false);
        RotatedAverage { u, a0, b0, qa, qb, na, nb, vals: s }
    }

    fn eval(&self, p: &[f64; 2]) -> f64 {
        let w = [-self.u[1], self.u[0]];
        let a = p[0] * self.u[0] + p[1] * self.u[1];
        let b = p[0] * w[0] + p[1] * w[1];
        let fa = (a - self.a0) / self.qa - 0.5;
        let fb = (b - self.b0) / self.qb - 0.5;
        let ia = (fa.floor().max(0.0) as usize).min(self.na - 2);
        let ib = (fb.floor().max(0.0) as usize).min(self.nb - 2);
        let ta = (fa - ia as f64).clamp(0.0, 1.0);
        let tb = (fb - ib as f64).clamp(0.0, 1.0);
        let v = |i: usize, j: usize| self.vals[i * self.nb + j];
        let x0 = v(ia, ib) * (1.0 - tb) + v(ia, ib + 1) * tb;
        let x1 = v(ia + 1, ib) * (1.0 - tb) + v(ia + 1, ib + 1) * tb;
        x0 * (1.0 - ta) + x1 * ta
    }
}

/// Bounding box of the nodes where f ≠ 0.
fn support_box(f: &GridFunction) -> Option<([f64; 2], [f64; 2])> {
    let (nx, ny) = (f.shape[0], f.shape[1]);
    let (mut lo, mut hi) = ([usize::MAX; 2], [0usize; 2]);
    for i in 0..nx {
        for j in 0..ny {
            if f.values[i * ny + j] != 0.0 {
                lo = [lo[0].min(i), lo[1].min(j)];
                hi = [hi[0].max(i), hi[1].max(j)];
            }
        }
    }
    (lo[0] != usize::MAX).then(|| {
        let at = |k: usize, i: usize| f.origin[k] + i as f64 * f.h;
        ([at(0, lo[0]) - f.h, at(1, lo[1]) - f.h], [at(0, hi[0]) + f.h, at(1, hi[1]) + f.h])
    })
}

/// Average over nodes ±(j + ½)q, j < k, plus end nodes of weight `frac`,
/// centered at the half-offset point i + ½ of the chosen axis.
fn box_filter(s: &[f64], na: usize, nb: usize, k: usize, frac: f64, along_a: bool) -> Vec<f64> {
    let (len, stride, lines) = if along_a { (na, nb, nb) } else { (nb, 1, na) };
    let line_step = if along_a { 1 } else { nb };
    let mut out = vec![0.0; na * nb];
    let norm = 2.0 * (k as f64 + frac);
    let mut prefix = vec![0.0; len + 1];
    for l in 0..lines {
        let base = l * line_step;
        for i in 0..len {
            prefix[i + 1] = prefix[i] + s[base + i * stride];
        }
        let at = |i: isize| if i >= 0 && (i as usize) < len { s[base + i as usize * stride] } else { 0.0 };
        for i in 0..len {
            // Nodes i+1−k ..= i+k (half-offset center i + ½).
            let lo = (i as isize + 1 - k as isize).max(0) as usize;
            let hi = (i + k).min(len - 1);
            let mut acc = if hi >= lo { prefix[hi + 1] - prefix[lo] } else { 0.0 };
            if frac > 1e-12 {
                acc += frac * (at(i as isize - k as isize) + at((i + k + 1) as isize));
            }
            out[base + i * stride] = acc / norm;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::sphere_net;

    fn lines(angles: &[f64]) -> DirectionSet {
        DirectionSet::from_elements(angles.iter().map(|a| Subspace::line(&[a.cos(), a.sin()]).unwrap()).collect()).unwrap()
    }

    #[test]
    fn constant_gives_one() {
        let f = GridFunction::centered(2, 3.0, 0.1, |_| 1.0).unwrap();
        let out = GridFunction::centered(2, 1.0, 0.5, |_| 0.0).unwrap();
        let m = nikodym_maximal_on(&f, 0.25, &lines(&[0.0, 0.7, 2.0]), 2, &out).unwrap();
        assert!(m.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rotated_path_matches_direct_quadrature() {
        let f = GridFunction::centered(2, 3.0, 0.05, |x| (-(x[0] - 0.3).powi(2) - 3.0 * x[1] * x[1]).exp()).unwrap();
        let out = GridFunction::centered(2, 1.0, 0.25, |_| 0.0).unwrap();
        for a in [0.0, 0.4, 1.9] {
            let net = lines(&[a]);
            let m = nikodym_maximal_on(&f, 0.2, &net, 2, &out).unwrap();
            for i in 0..out.len() {
                let x = out.point(i);
                let v = plate_average(&f, &net.elements[0], 0.2, &x, 2).unwrap();
                assert!((m.values[i] - v).abs() < 5e-3, "angle {a}: {} vs {v}", m.values[i]);
            }
        }
    }

    #[test]
    fn dominates_single_plate_average() {
        let f = GridFunction::centered(3, 2.0, 0.125, |x| if x.iter().map(|v| v * v).sum::<f64>() < 1.0 { 1.0 } else { 0.0 }).unwrap();
        let net = DirectionSet::from_elements(sphere_net(3, 0.6).into_iter().map(|u| Subspace::line(&u).unwrap()).collect()).unwrap();
        let out = GridFunction::centered(3, 1.0, 1.0, |_| 0.0).unwrap();
        let m = nikodym_maximal_on(&f, 0.25, &net, 1, &out).unwrap();
        for i in 0..out.len() {
            let x = out.point(i);
            for s in &net.elements {
                assert!(m.values[i] + 1e-12 >= plate_average(&f, s, 0.25, &x, 1).unwrap());
            }
        }
    }

    #[test]
    fn kakeya_of_ball_is_about_one() {
        let delta = 0.1;
        let f = GridFunction::centered(2, 2.0, 0.02, |x| if x[0] * x[0] + x[1] * x[1] <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let net = lines(&[0.0, 0.5, 1.3]);
        let k = kakeya_maximal(&f, delta, &net, &[vec![0.0, 0.0]], 2).unwrap();
        // Tube of length 2, width 2δ through the centre of the unit disc.
        let exact = {
            let w = delta;
            // Area of the strip |y| ≤ w inside the disc divided by the tube area 4w.
            (2.0 * (w * (1.0 - w * w).sqrt() + w.asin())) / (4.0 * w)
        };
        for v in k {
            assert!((v - exact).abs() < 0.02, "{v} vs {exact}");
        }
    }

    #[test]
    fn guards() {
        let f = GridFunction::centered(2, 1.0, 0.1, |_| 1.0).unwrap();
        assert!(nikodym_maximal(&f, 0.0, &lines(&[0.0]), 2).is_err());
        assert!(nikodym_maximal(&f, 0.6, &lines(&[0.0]), 2).is_err());
        assert!(kakeya_maximal(&f, 0.1, &lines(&[0.0]), &[], 2).is_err());
    }
}
