use crate::plates::unit_ball_volume;

/// Support radius of φ_d.
pub const BUMP_RADIUS: f64 = 1.0 / 256.0;

/// φ_d(x) = c·exp(−1/(1 − |x/r|²)) on |x| < r = 2^-8, with ∫_{R^d} φ_d = 1.
#[derive(Clone, Copy, Debug)]
pub struct BumpProfile {
    pub d: usize,
    pub c: f64,
}

impl BumpProfile {
    pub fn new(d: usize) -> BumpProfile {
        assert!(d >= 1);
        let surface = d as f64 * unit_ball_volume(d);
        let radial = simpson(|t| t.powi(d as i32 - 1) * profile(t * t), 0.0, 1.0, 20_000);
        let c = 1.0 / (surface * radial * BUMP_RADIUS.powi(d as i32));
        BumpProfile { d, c }
    }

    /// φ_d at a point with squared norm `r2`.
    pub fn eval_sq(&self, r2: f64) -> f64 {
        self.c * profile(r2 / (BUMP_RADIUS * BUMP_RADIUS))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.eval_sq(x.iter().map(|v| v * v).sum())
    }

    pub fn peak(&self) -> f64 {
        self.eval_sq(0.0)
    }
}

fn profile(t2: f64) -> f64 {
    if t2 < 1.0 {
        (-1.0 / (1.0 - t2)).exp()
    } else {
        0.0
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let hh = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * hh);
    }
    acc * hh / 3.0
}

/// Radial Φ with 1_{B} ≤ Φ ≤ 1_{2B}, smooth transition on 1 ≤ |ξ| ≤ 2.
pub fn big_phi(r: f64) -> f64 {
    let g = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let (a, b) = (g(2.0 - r), g(r - 1.0));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}
