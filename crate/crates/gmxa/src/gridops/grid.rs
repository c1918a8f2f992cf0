use crate::error::{ensure, Result};

/// Samples of a scalar field at the nodes origin + i·h of a box grid, row-major
/// (last axis fastest). Evaluation outside the box is 0.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub h: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn new(shape: Vec<usize>, origin: Vec<f64>, h: f64, values: Vec<f64>) -> Result<Self> {
        ensure!(!shape.is_empty() && shape.len() <= 255, Shape, "dimension must be in 1..=255");
        ensure!(origin.len() == shape.len(), Shape, "origin has length {}, expected {}", origin.len(), shape.len());
        ensure!(shape.iter().all(|&s| s > 0), Shape, "empty axis in shape {shape:?}");
        ensure!(h > 0.0 && h.is_finite(), Domain, "spacing must be positive, got {h}");
        let len: usize = shape.iter().product();
        ensure!(values.len() == len, Shape, "{} values for shape {shape:?}", values.len());
        ensure!(values.iter().all(|v| v.is_finite()), Domain, "values must be finite");
        Ok(GridFunction { shape, origin, h, values })
    }

    pub fn zeros(shape: Vec<usize>, origin: Vec<f64>, h: f64) -> Result<Self> {
        let len = shape.iter().product();
        Self::new(shape, origin, h, vec![0.0; len])
    }

    /// Samples `f` at every node.
    pub fn from_fn(shape: Vec<usize>, origin: Vec<f64>, h: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let mut g = Self::zeros(shape, origin, h)?;
        let mut x = vec![0.0; g.n()];
        for i in 0..g.len() {
            g.point_into(i, &mut x);
            g.values[i] = f(&x);
        }
        ensure!(g.values.iter().all(|v| v.is_finite()), Domain, "sampled values must be finite");
        Ok(g)
    }

    /// Cube grid [−half, half]^n with spacing h (nodes symmetric about 0).
    pub fn centered(n: usize, half: f64, h: f64, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let m = (2.0 * half / h).round() as usize + 1;
        Self::from_fn(vec![m; n], vec![-half; n], h, f)
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Measure of one cell, h^n.
    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.n() as i32)
    }

    /// Largest coordinate along each axis.
    pub fn upper(&self) -> Vec<f64> {
        self.origin.iter().zip(&self.shape).map(|(o, &s)| o + (s - 1) as f64 * self.h).collect()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n()];
        for k in (0..self.n()).rev() {
            idx[k] = flat % self.shape[k];
            flat /= self.shape[k];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.shape).fold(0, |acc, (&i, &s)| acc * s + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n()];
        self.point_into(flat, &mut x);
        x
    }

    pub fn point_into(&self, mut flat: usize, x: &mut [f64]) {
        for k in (0..self.n()).rev() {
            let i = flat % self.shape[k];
            flat /= self.shape[k];
            x[k] = self.origin[k] + i as f64 * self.h;
        }
    }

    /// Multilinear interpolation; 0 outside the box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self.n() {
            2 => self.eval2(x[0], x[1]),
            _ => self.eval_general(x),
        }
    }

    #[inline]
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        let fx = (x - self.origin[0]) / self.h;
        let fy = (y - self.origin[1]) / self.h;
        let (nx, ny) = (self.shape[0], self.shape[1]);
        if !(fx >= 0.0 && fy >= 0.0) || fx > (nx - 1) as f64 || fy > (ny - 1) as f64 {
            return 0.0;
        }
        let ix = (fx as usize).min(nx.saturating_sub(2));
        let iy = (fy as usize).min(ny.saturating_sub(2));
        let tx = fx - ix as f64;
        let ty = fy - iy as f64;
        let v = &self.values;
        let at = |i: usize, j: usize| if i < nx && j < ny { v[i * ny + j] } else { 0.0 };
        let a = at(ix, iy) * (1.0 - ty) + at(ix, iy + 1) * ty;
        let b = at(ix + 1, iy) * (1.0 - ty) + at(ix + 1, iy + 1) * ty;
        a * (1.0 - tx) + b * tx
    }

    fn eval_general(&self, x: &[f64]) -> f64 {
        let n = self.n();
        let mut base = vec![0usize; n];
        let mut frac = vec![0.0; n];
        for k in 0..n {
            let f = (x[k] - self.origin[k]) / self.h;
            let m = self.shape[k];
            if !(f >= 0.0) || f > (m - 1) as f64 {
                return 0.0;
            }
            let i = if m >= 2 { (f as usize).min(m - 2) } else { 0 };
            base[k] = i;
            frac[k] = f - i as f64;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut flat = 0usize;
            let mut ok = true;
            for k in 0..n {
                let bit = corner >> (n - 1 - k) & 1;
                let i = base[k] + bit;
                if i >= self.shape[k] {
                    if frac[k] * bit as f64 != 0.0 {
                        ok = false;
                    }
                    w = if bit == 1 { 0.0 } else { w };
                    flat = flat * self.shape[k];
                    continue;
                }
                w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
                flat = flat * self.shape[k] + i;
            }
            if ok && w != 0.0 {
                acc += w * self.values[flat];
            }
        }
        acc
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction { values: self.values.iter().map(|&v| f(v)).collect(), ..self.clone() }
    }

    pub fn abs(&self) -> GridFunction {
        self.map(f64::abs)
    }

    pub fn same_lattice(&self, other: &GridFunction) -> bool {
        self.shape == other.shape && self.origin == other.origin && self.h == other.h
    }

    /// (Σ |v|^p h^n)^{1/p}; p = ∞ gives the max norm.
    pub fn lp_norm(&self, p: f64) -> f64 {
        if p.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        (self.values.iter().map(|v| v.abs().powf(p)).sum::<f64>() * self.cell_volume()).powf(1.0 / p)
    }

    /// Σ v h^n.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// Cell-counted measure of {v > λ}.
    pub fn level_measure(&self, lambda: f64) -> f64 {
        self.values.iter().filter(|&&v| v > lambda).count() as f64 * self.cell_volume()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolation_is_exact_on_affine_functions() {
        for n in 1..=3 {
            let g = GridFunction::centered(n, 1.0, 0.25, |x| 1.0 + x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum::<f64>()).unwrap();
            let x: Vec<f64> = (0..n).map(|i| 0.13 - 0.31 * i as f64).collect();
            let want = 1.0 + x.iter().enumerate().map(|(i, v)| (i + 1) as f64 * v).sum::<f64>();
            assert!((g.eval(&x) - want).abs() < 1e-12, "n = {n}");
            assert!((g.eval(&g.upper()) - g.values[g.len() - 1]).abs() < 1e-12);
            assert_eq!(g.eval(&vec![1.5; n]), 0.0);
        }
    }

    #[test]
    fn index_round_trip() {
        let g = GridFunction::zeros(vec![3, 4, 5], vec![0.0; 3], 1.0).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.flat_index(&g.multi_index(i)), i);
        }
        assert_eq!(g.point(g.flat_index(&[1, 2, 3])), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GridFunction::new(vec![2], vec![0.0], 1.0, vec![1.0]).is_err());
        assert!(GridFunction::new(vec![1], vec![0.0], 0.0, vec![1.0]).is_err());
        assert!(GridFunction::new(vec![1], vec![0.0], 1.0, vec![f64::NAN]).is_err());
    }

    #[test]
    fn norms_of_indicator() {
        let g = GridFunction::from_fn(vec![10, 10], vec![0.0, 0.0], 0.1, |_| 1.0).unwrap();
        assert!((g.lp_norm(2.0) - 1.0).abs() < 1e-12);
        assert!((g.integral() - 1.0).abs() < 1e-12);
        assert_eq!(g.lp_norm(f64::INFINITY), 1.0);
        assert!((g.level_measure(0.5) - 1.0).abs() < 1e-12);
    }
}
