use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;

use crate::error::{ensure, Result};
use crate::gridops::GridFunction;

/// DFT of a GridFunction on its (periodized) lattice. Frequencies are
/// angular: the index k on an axis of length N maps to 2πk/(N h), with k
/// wrapped to [−N/2, N/2).
#[derive(Clone, Debug)]
pub struct SpectralField {
    pub shape: Vec<usize>,
    pub origin: Vec<f64>,
    pub h: f64,
    pub data: Vec<Complex64>,
}

fn transform(shape: &[usize], data: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let n = shape.len();
    for axis in 0..n {
        let len = shape[axis];
        if len == 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(len) } else { planner.plan_fft_forward(len) };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * len * stride + inner;
                for (k, l) in line.iter_mut().enumerate() {
                    *l = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, l) in line.iter().enumerate() {
                    data[base + k * stride] = *l;
                }
            }
        }
    }
}

impl SpectralField {
    pub fn forward(f: &GridFunction) -> SpectralField {
        let mut data: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        transform(&f.shape, &mut data, false);
        SpectralField { shape: f.shape.clone(), origin: f.origin.clone(), h: f.h, data }
    }

    /// Inverse transform; returns the real part and the largest |imaginary part|.
    pub fn inverse(&self) -> Result<(GridFunction, f64)> {
        let mut data = self.data.clone();
        transform(&self.shape, &mut data, true);
        let scale = 1.0 / data.len() as f64;
        let imag = data.iter().fold(0.0f64, |m, c| m.max((c.im * scale).abs()));
        let values = data.iter().map(|c| c.re * scale).collect();
        Ok((GridFunction::new(self.shape.clone(), self.origin.clone(), self.h, values)?, imag))
    }

    pub fn n(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Largest resolvable angular frequency per axis, π/h.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI / self.h
    }

    /// Angular frequency of entry `flat`.
    pub fn frequency_into(&self, mut flat: usize, xi: &mut [f64]) {
        for k in (0..self.n()).rev() {
            let m = self.shape[k];
            let i = flat % m;
            flat /= m;
            let w = if i < m.div_ceil(2) { i as f64 } else { i as f64 - m as f64 };
            xi[k] = 2.0 * std::f64::consts::PI * w / (m as f64 * self.h);
        }
    }

    pub fn frequency(&self, flat: usize) -> Vec<f64> {
        let mut xi = vec![0.0; self.n()];
        self.frequency_into(flat, &mut xi);
        xi
    }

    /// True when entry `flat` sits on a Nyquist line (index N/2 of an even axis),
    /// which is its own mirror image under ξ ↦ −ξ.
    pub fn on_nyquist(&self, mut flat: usize) -> bool {
        for &m in self.shape.iter().rev() {
            if m % 2 == 0 && flat % m == m / 2 {
                return true;
            }
            flat /= m;
        }
        false
    }

    /// Pointwise product with a real even multiplier m(ξ). Nyquist lines are
    /// treated as unresolved and zeroed, so real inputs stay real for any m.
    pub fn apply(&self, m: impl Fn(&[f64]) -> f64 + Sync) -> SpectralField {
        let n = self.n();
        let data = self
            .data
            .par_iter()
            .enumerate()
            .map_init(
                || vec![0.0; n],
                |xi, (i, c)| {
                    if self.on_nyquist(i) {
                        return Complex64::new(0.0, 0.0);
                    }
                    self.frequency_into(i, xi);
                    c * m(xi)
                },
            )
            .collect();
        SpectralField { data, ..self.clone() }
    }

    /// Σ_ξ m(ξ)|F(ξ)|², deterministic reduction.
    pub fn weighted_energy(&self, m: impl Fn(&[f64]) -> f64 + Sync) -> f64 {
        let n = self.n();
        let parts: Vec<f64> = self
            .data
            .par_chunks(4096)
            .enumerate()
            .map(|(c, chunk)| {
                let mut xi = vec![0.0; n];
                let mut acc = 0.0;
                for (j, v) in chunk.iter().enumerate() {
                    self.frequency_into(c * 4096 + j, &mut xi);
                    acc += m(&xi) * v.norm_sqr();
                }
                acc
            })
            .collect();
        parts.iter().sum()
    }

    /// ‖f‖₂ of the represented function (Parseval with cell volume h^n).
    pub fn l2_norm(&self) -> f64 {
        (self.weighted_energy(|_| 1.0) * self.h.powi(self.n() as i32) / self.len() as f64).sqrt()
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        ensure!(self.shape == other.shape && self.h == other.h, Shape, "spectra live on different lattices");
        Ok(SpectralField { data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(), ..self.clone() })
    }
}
