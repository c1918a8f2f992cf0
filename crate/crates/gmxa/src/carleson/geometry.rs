use crate::gridops::GridFunction;
use crate::plates::ShearedPlate;

/// Composite Gauss–Legendre rule on [0, 1]: 8 panels of 4 nodes.
fn unit_rule() -> Vec<(f64, f64)> {
    const X: [f64; 4] = [-0.861_136_311_594_052_6, -0.339_981_043_584_856_3, 0.339_981_043_584_856_3, 0.861_136_311_594_052_6];
    const W: [f64; 4] = [0.347_854_845_137_453_9, 0.652_145_154_862_546_1, 0.652_145_154_862_546_1, 0.347_854_845_137_453_9];
    let panels = 8;
    let mut out = Vec::with_capacity(4 * panels);
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for k in 0..4 {
            out.push((0.5 * (a + b) + 0.5 * (b - a) * X[k], 0.5 * (b - a) * W[k]));
        }
    }
    out
}

/// Base extent of an axis-parallel plate along each axis.
fn base_box(p: &ShearedPlate) -> Vec<(f64, f64)> {
    p.c_i.iter().map(|c| (c - 0.5 * p.side, c + 0.5 * p.side)).collect()
}

/// Slope and offset of the base height: h(y') = g0 + Σ a_i y'_i.
fn height_form(p: &ShearedPlate) -> (f64, Vec<f64>) {
    let d = p.d();
    let a: Vec<f64> = (0..d).map(|i| -p.v[i] / p.v[d]).collect();
    let g0 = -(0..d).map(|i| a[i] * p.c_i[i]).sum::<f64>();
    (g0, a)
}

fn ramp2(x: f64) -> f64 {
    if x > 0.0 {
        0.5 * x * x
    } else {
        0.0
    }
}

/// Overlap length of [a1 + g, b1 + g) and [a2, b2) as a sum of ramps in g.
struct Trapezoid {
    knots: [f64; 4],
}

impl Trapezoid {
    fn new(k_q: (f64, f64), k_r: (f64, f64)) -> Trapezoid {
        let (a1, b1) = k_q;
        let (a2, b2) = k_r;
        let (m1, m2) = ((a2 - a1).min(b2 - b1), (a2 - a1).max(b2 - b1));
        Trapezoid { knots: [a2 - b1, m1, m2, b2 - a1] }
    }

    fn eval(&self, g: f64) -> f64 {
        let r = |x: f64| x.max(0.0);
        let k = &self.knots;
        r(g - k[0]) - r(g - k[1]) - r(g - k[2]) + r(g - k[3])
    }

    /// Antiderivative.
    fn integral(&self, g: f64) -> f64 {
        let k = &self.knots;
        ramp2(g - k[0]) - ramp2(g - k[1]) - ramp2(g - k[2]) + ramp2(g - k[3])
    }
}

/// |Q ∩ R| for plates with axis-parallel bases.
///
/// The height offset between the two slices is affine over the base overlap;
/// the overlap length is integrated exactly along the axis of steepest
/// offset and by composite Gauss–Legendre along the others (exact when the
/// offset does not depend on them).
pub fn intersection_volume(q: &ShearedPlate, r: &ShearedPlate) -> f64 {
    debug_assert!(q.is_axis_parallel() && r.is_axis_parallel());
    let d = q.d();
    let bq = base_box(q);
    let br = base_box(r);
    let mut lo = vec![0.0; d];
    let mut hi = vec![0.0; d];
    for i in 0..d {
        lo[i] = bq[i].0.max(br[i].0);
        hi[i] = bq[i].1.min(br[i].1);
        if hi[i] <= lo[i] {
            return 0.0;
        }
    }
    let (gq, aq) = height_form(q);
    let (gr, ar) = height_form(r);
    let a: Vec<f64> = aq.iter().zip(&ar).map(|(x, y)| x - y).collect();
    let g0 = gq - gr;
    let trap = Trapezoid::new(q.k, r.k);
    let j = (0..d).max_by(|&x, &y| a[x].abs().total_cmp(&a[y].abs())).unwrap();
    let inner = |g_rest: f64| -> f64 {
        if a[j].abs() < 1e-15 {
            return trap.eval(g_rest + a[j] * 0.5 * (lo[j] + hi[j])) * (hi[j] - lo[j]);
        }
        (trap.integral(g_rest + a[j] * hi[j]) - trap.integral(g_rest + a[j] * lo[j])) / a[j]
    };
    let others: Vec<usize> = (0..d).filter(|&i| i != j).collect();
    let flat: Vec<usize> = others.iter().copied().filter(|&i| a[i].abs() < 1e-15).collect();
    let tilted: Vec<usize> = others.iter().copied().filter(|&i| a[i].abs() >= 1e-15).collect();
    let flat_volume: f64 = flat.iter().map(|&i| hi[i] - lo[i]).product();
    let flat_offset: f64 = flat.iter().map(|&i| a[i] * 0.5 * (lo[i] + hi[i])).sum();
    if tilted.is_empty() {
        return flat_volume * inner(g0 + flat_offset);
    }
    let rule = unit_rule();
    let m = tilted.len();
    let mut idx = vec![0usize; m];
    let mut acc = 0.0;
    loop {
        let mut g = g0 + flat_offset;
        let mut w = 1.0;
        for (t, &axis) in tilted.iter().enumerate() {
            let (x, wx) = rule[idx[t]];
            let len = hi[axis] - lo[axis];
            g += a[axis] * (lo[axis] + x * len);
            w *= wx * len;
        }
        acc += w * inner(g);
        let mut t = 0;
        loop {
            if t == m {
                return acc * flat_volume;
            }
            idx[t] += 1;
            if idx[t] < rule.len() {
                break;
            }
            idx[t] = 0;
            t += 1;
        }
    }
}

/// |Q ∩ R| for general frames by midpoint quadrature over Q's base with
/// `resolution` nodes per axis; the height overlap is exact at each node.
pub fn intersection_volume_quadrature(q: &ShearedPlate, r: &ShearedPlate, resolution: usize) -> f64 {
    let d = q.d();
    let cell = q.side / resolution as f64;
    let mut idx = vec![0usize; d];
    let mut acc = 0.0;
    let mut yp = vec![0.0; d];
    for _ in 0..resolution.pow(d as u32) {
        yp.copy_from_slice(&q.c_i);
        for k in 0..d {
            let c = -0.5 * q.side + (idx[k] as f64 + 0.5) * cell;
            for i in 0..d {
                yp[i] += c * q.frame[k * d + i];
            }
        }
        if r.base_contains(&yp) {
            let g = q.base_height(&yp) - r.base_height(&yp);
            let lo = (q.k.0 + g).max(r.k.0);
            let hi = (q.k.1 + g).min(r.k.1);
            acc += (hi - lo).max(0.0);
        }
        for v in idx.iter_mut() {
            *v += 1;
            if *v < resolution {
                break;
            }
            *v = 0;
        }
    }
    acc * cell.powi(d as i32)
}

/// Calls `visit(flat)` for every node of the lattice of `grid` inside `p`
/// (the values of `grid` are not read).
pub fn for_each_node(p: &ShearedPlate, grid: &GridFunction, visit: impl FnMut(usize)) {
    for_each_node_on(p, &grid.shape, &grid.origin, grid.h, visit)
}

fn for_each_node_on(p: &ShearedPlate, shape: &[usize], origin: &[f64], h: f64, mut visit: impl FnMut(usize)) {
    let n = shape.len();
    let d = n - 1;
    let (blo, bhi) = p.bounding_box();
    let range = |k: usize, lo: f64, hi: f64| -> Option<(usize, usize)> {
        let m = shape[k] as f64;
        let a = ((lo - origin[k]) / h).ceil().max(0.0);
        let b = ((hi - origin[k]) / h).floor().min(m - 1.0);
        (a <= b).then_some((a as usize, b as usize))
    };
    let mut ranges = Vec::with_capacity(d);
    for k in 0..d {
        match range(k, blo[k], bhi[k]) {
            Some(r) => ranges.push(r),
            None => return,
        }
    }
    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    let mut yp = vec![0.0; d];
    let mut strides = vec![1usize; n];
    for k in (0..n - 1).rev() {
        strides[k] = strides[k + 1] * shape[k + 1];
    }
    loop {
        for k in 0..d {
            yp[k] = origin[k] + idx[k] as f64 * h;
        }
        if p.base_contains(&yp) {
            let b = p.base_height(&yp);
            // Half-open height band [b + K0, b + K1).
            let m = shape[d];
            let a = ((b + p.k.0 - origin[d]) / h).ceil().max(0.0) as usize;
            let top = (b + p.k.1 - origin[d]) / h;
            let last = if top.fract() == 0.0 { top - 1.0 } else { top.floor() };
            if last >= 0.0 {
                let last = (last as usize).min(m - 1);
                let base: usize = (0..d).map(|k| idx[k] * strides[k]).sum();
                for z in a..=last {
                    visit(base + z);
                }
            }
        }
        let mut k = d;
        loop {
            k -= 1;
            idx[k] += 1;
            if idx[k] <= ranges[k].1 {
                break;
            }
            idx[k] = ranges[k].0;
            if k == 0 {
                return;
            }
        }
    }
}

/// Vertices of the closure of a plate.
pub fn vertices(p: &ShearedPlate) -> Vec<Vec<f64>> {
    let d = p.d();
    let h = 0.5 * p.side;
    let mut out = Vec::with_capacity(1 << (d + 1));
    for corner in 0..(1usize << d) {
        let mut yp = p.c_i.clone();
        for k in 0..d {
            let s = if corner >> k & 1 == 1 { h } else { -h };
            for i in 0..d {
                yp[i] += s * p.frame[k * d + i];
            }
        }
        let b = p.base_height(&yp);
        for t in [p.k.0, p.k.1] {
            let mut y = yp.clone();
            y.push(b + t);
            out.push(y);
        }
    }
    out
}

/// Closure of `inner` ⊆ closure of `outer` (both convex), up to `eps`.
pub fn contained_in(inner: &ShearedPlate, outer: &ShearedPlate, eps: f64) -> bool {
    let d = outer.d();
    let h = 0.5 * outer.side + eps;
    vertices(inner).iter().all(|y| {
        let inside_base = (0..d).all(|k| {
            let c: f64 = (0..d).map(|i| outer.frame[k * d + i] * (y[i] - outer.c_i[i])).sum();
            c.abs() <= h
        });
        let t = outer.slice_param(y);
        inside_base && t >= outer.k.0 - eps && t <= outer.k.1 + eps
    })
}
