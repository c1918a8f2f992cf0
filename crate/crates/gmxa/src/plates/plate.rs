use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};
use crate::grassmann::Subspace;
use crate::rng::{gaussian, Rng};

/// Volume of the unit ball in R^k.
pub fn unit_ball_volume(k: usize) -> f64 {
    match k {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(k - 2) * 2.0 * std::f64::consts::PI / k as f64,
    }
}

/// center + s·T_δ(σ): |Π_σ(x−c)| ≤ s and |Π_{σ⊥}(x−c)| < s·δ.
#[derive(Clone, Debug, PartialEq)]
pub struct Plate {
    pub sigma: Subspace,
    pub center: Vec<f64>,
    pub s: f64,
    pub delta: f64,
}

#[derive(Serialize, Deserialize)]
struct PlateJson {
    sigma: Vec<f64>,
    center: Vec<f64>,
    s: f64,
    delta: f64,
}

impl Plate {
    pub fn new(sigma: Subspace, center: Vec<f64>, s: f64, delta: f64) -> Result<Self> {
        ensure!(center.len() == sigma.n(), Shape, "center has length {}, expected {}", center.len(), sigma.n());
        ensure!(s > 0.0 && s.is_finite(), Domain, "scale must be positive, got {s}");
        ensure!(delta >= 0.0 && delta.is_finite(), Domain, "thickness must be nonnegative, got {delta}");
        Ok(Plate { sigma, center, s, delta })
    }

    /// Unit-scale plate x + T_δ(σ).
    pub fn unit(sigma: Subspace, center: Vec<f64>, delta: f64) -> Result<Self> {
        Self::new(sigma, center, 1.0, delta)
    }

    pub fn n(&self) -> usize {
        self.sigma.n()
    }

    pub fn d(&self) -> usize {
        self.sigma.d()
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        ensure!(x.len() == self.n(), Shape, "point has length {}, expected {}", x.len(), self.n());
        Ok(self.contains_unchecked(x))
    }

    pub(crate) fn contains_unchecked(&self, x: &[f64]) -> bool {
        let y: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        let total: f64 = y.iter().map(|v| v * v).sum();
        let par: f64 = self.sigma.coords(&y).iter().map(|c| c * c).sum();
        let perp = (total - par).max(0.0);
        par <= self.s * self.s && perp < (self.s * self.delta).powi(2)
    }

    /// ω_d s^d · ω_{n−d} (sδ)^{n−d}.
    pub fn volume(&self) -> f64 {
        let (n, d) = (self.n(), self.d());
        unit_ball_volume(d) * self.s.powi(d as i32) * unit_ball_volume(n - d) * (self.s * self.delta).powi((n - d) as i32)
    }

    /// Circumscribed radius about the center.
    pub fn radius(&self) -> f64 {
        self.s * (1.0 + self.delta * self.delta).sqrt()
    }

    /// Orthonormal frame: columns 0..d span σ, the rest span σ⊥.
    pub fn frame(&self) -> DMatrix<f64> {
        let (n, d) = (self.n(), self.d());
        let mut f = DMatrix::zeros(n, n);
        for j in 0..d {
            f.set_column(j, &self.sigma.basis().column(j));
        }
        if d < n {
            let c = self.sigma.complement();
            for j in 0..n - d {
                f.set_column(d + j, &c.basis().column(j));
            }
        }
        f
    }

    /// Uniform point of the plate (open/closed boundaries have measure zero).
    pub fn sample(&self, rng: &mut Rng) -> Vec<f64> {
        let (n, d) = (self.n(), self.d());
        let a = ball_point(rng, d, self.s);
        let b = ball_point(rng, n - d, self.s * self.delta);
        let mut x = self.center.clone();
        let par = self.sigma.embed(&a);
        for i in 0..n {
            x[i] += par[i];
        }
        if d < n {
            let c = self.sigma.complement();
            let perp = c.embed(&b);
            for i in 0..n {
                x[i] += perp[i];
            }
        }
        x
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("plate serializes")
    }

    fn to_json_value(&self) -> PlateJson {
        PlateJson { sigma: self.sigma.to_column_major(), center: self.center.clone(), s: self.s, delta: self.delta }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: PlateJson = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        Self::from_json_value(j)
    }

    fn from_json_value(j: PlateJson) -> Result<Self> {
        let n = j.center.len();
        ensure!(n > 0 && j.sigma.len() % n == 0, Format, "sigma has {} entries for n = {n}", j.sigma.len());
        let d = j.sigma.len() / n;
        let sigma = Subspace::from_orthonormal(DMatrix::from_column_slice(n, d, &j.sigma))?;
        Plate::new(sigma, j.center, j.s, j.delta)
    }
}

/// Uniform point of the radius-r ball in R^k.
pub(crate) fn ball_point(rng: &mut Rng, k: usize, r: f64) -> Vec<f64> {
    use rand::Rng as _;
    if k == 0 {
        return Vec::new();
    }
    let g: Vec<f64> = (0..k).map(|_| gaussian(rng)).collect();
    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
    let u: f64 = rng.random();
    let rad = r * u.powf(1.0 / k as f64);
    g.into_iter().map(|v| v / norm * rad).collect()
}

pub fn plate_membership(p: &Plate, x: &[f64]) -> Result<bool> {
    p.contains(x)
}

pub fn save_plates(path: &Path, plates: &[Plate]) -> Result<()> {
    let list: Vec<PlateJson> = plates.iter().map(Plate::to_json_value).collect();
    let text = serde_json::to_string(&list).expect("plates serialize");
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_plates(path: &Path) -> Result<Vec<Plate>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let list: Vec<PlateJson> = serde_json::from_str(&text).map_err(|e| Error::Format(e.to_string()))?;
    list.into_iter().map(Plate::from_json_value).collect()
}
