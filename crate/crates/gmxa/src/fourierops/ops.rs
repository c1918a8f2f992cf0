use serde::Serialize;

use super::bump::{big_phi, BumpProfile, BUMP_RADIUS};
use super::spectral::SpectralField;
use crate::error::{ensure, Result};
use crate::grassmann::{metric_distance, DirectionSet, Subspace};
use crate::gridops::GridFunction;

/// Multiplier supports must stay below this fraction of the Nyquist frequency.
pub const ALIAS_FRACTION: f64 = 0.45;
/// Ann⁺(δ) = {2^-5 < δ|ξ| < 2^-1}.
pub const ANN_PLUS: (f64, f64) = (1.0 / 32.0, 0.5);

fn check_sigma(f: &GridFunction, sigma: &Subspace) -> Result<()> {
    ensure!(sigma.n() == f.n(), Shape, "subspace lives in R^{}, grid in R^{}", sigma.n(), f.n());
    Ok(())
}

fn check_average(spec: &SpectralField, s: f64) -> Result<()> {
    ensure!(s > 0.0 && s.is_finite(), Domain, "scale must be positive, got {s}");
    let support = BUMP_RADIUS / s;
    let limit = ALIAS_FRACTION * spec.nyquist();
    ensure!(support <= limit, Domain, "multiplier support {support:.4} exceeds {ALIAS_FRACTION}×Nyquist = {limit:.4}; increase s or refine h");
    Ok(())
}

/// m(ξ) = φ_d(s·Π_σ ξ).
fn average_multiplier<'a>(sigma: &'a Subspace, s: f64, phi: BumpProfile) -> impl Fn(&[f64]) -> f64 + Sync + 'a {
    move |xi: &[f64]| {
        let c = sigma.coords(xi);
        phi.eval_sq(s * s * c.iter().map(|v| v * v).sum::<f64>())
    }
}

/// Spectrum of A_{σ,s} f.
pub fn fourier_average_spectrum(spec: &SpectralField, sigma: &Subspace, s: f64) -> Result<SpectralField> {
    ensure!(sigma.n() == spec.n(), Shape, "dimension mismatch");
    check_average(spec, s)?;
    Ok(spec.apply(average_multiplier(sigma, s, BumpProfile::new(sigma.d()))))
}

/// A_{σ,s} f.
pub fn fourier_average(f: &GridFunction, sigma: &Subspace, s: f64) -> Result<GridFunction> {
    check_sigma(f, sigma)?;
    let spec = SpectralField::forward(f);
    Ok(fourier_average_spectrum(&spec, sigma, s)?.inverse()?.0)
}

/// Spectra (A^{>δ}, A^{<δ}) of the low-high splitting.
pub fn split_spectra(spec: &SpectralField, sigma: &Subspace, s: f64, delta: f64) -> Result<(SpectralField, SpectralField)> {
    ensure!(delta > 0.0 && delta <= 1.0, Domain, "delta must lie in (0, 1], got {delta}");
    let a = fourier_average_spectrum(spec, sigma, s)?;
    let high = a.apply(|xi| big_phi(4.0 * s * delta * norm(xi)));
    let low = a.sub(&high)?;
    Ok((high, low))
}

/// (A^{>δ}_{σ,s} f, A^{<δ}_{σ,s} f) with A^{>δ} carrying the factor Φ(4sδξ).
pub fn low_high_split(f: &GridFunction, sigma: &Subspace, s: f64, delta: f64) -> Result<(GridFunction, GridFunction)> {
    check_sigma(f, sigma)?;
    let (high, low) = split_spectra(&SpectralField::forward(f), sigma, s, delta)?;
    Ok((high.inverse()?.0, low.inverse()?.0))
}

/// 1 on {ξ ≠ 0 : |Π_σ ξ| < c·δ|ξ|}.
pub fn in_cone(sigma: &Subspace, delta: f64, constant: f64, xi: &[f64]) -> bool {
    let r = norm(xi);
    r > 0.0 && sigma.project_norm(xi) < constant * delta * r
}

pub fn cone_cutoff_spectrum(spec: &SpectralField, sigma: &Subspace, delta: f64, constant: f64) -> SpectralField {
    spec.apply(|xi| in_cone(sigma, delta, constant, xi) as u8 as f64)
}

/// Sharp restriction of f̂ to the two-sheeted cone Γ_{σ,δ} with aperture constant c.
pub fn cone_cutoff(f: &GridFunction, sigma: &Subspace, delta: f64, constant: f64) -> Result<GridFunction> {
    check_sigma(f, sigma)?;
    ensure!(delta > 0.0 && constant > 0.0, Domain, "delta and the cone constant must be positive");
    Ok(cone_cutoff_spectrum(&SpectralField::forward(f), sigma, delta, constant).inverse()?.0)
}

#[derive(Clone, Debug, Serialize)]
pub struct SwitchDefect {
    pub distance: f64,
    pub defect: f64,
    pub majorant: f64,
    /// defect / majorant.
    pub value: f64,
    pub tail_terms: usize,
}

/// ‖A^{>δ}_{σ,s}f − A^{>δ}_{τ,s}f‖₂ normalized by the tailed plate majorant
/// Σ_k 2^{-kn}‖⟨|f|⟩ over x + 2^k s T_δ(τ)‖₂.
pub fn switch_defect(f: &GridFunction, sigma: &Subspace, tau: &Subspace, s: f64, delta: f64) -> Result<SwitchDefect> {
    check_sigma(f, sigma)?;
    check_sigma(f, tau)?;
    ensure!(sigma.d() == tau.d(), Shape, "subspaces of different dimension");
    let distance = metric_distance(sigma, tau)?;
    ensure!(delta <= 1.0, Domain, "delta must be at most 1, got {delta}");
    ensure!(distance <= delta * (1.0 + 1e-12), Domain, "d(σ,τ) = {distance} exceeds δ = {delta}");
    let spec = SpectralField::forward(f);
    let (hs, _) = split_spectra(&spec, sigma, s, delta)?;
    let (ht, _) = split_spectra(&spec, tau, s, delta)?;
    let defect = hs.sub(&ht)?.l2_norm();
    let (majorant, tail_terms) = tailed_majorant(f, tau, s, delta)?;
    ensure!(majorant > 0.0, Domain, "input vanishes");
    Ok(SwitchDefect { distance, defect, majorant, value: defect / majorant, tail_terms })
}

/// Σ_k 2^{-kn}‖P_k|f|‖₂ with P_k the average over x + 2^k s T_δ(τ), computed
/// by periodic convolution; stops once the plate exceeds the box or the
/// weight drops below 1e-8.
pub fn tailed_majorant(f: &GridFunction, tau: &Subspace, s: f64, delta: f64) -> Result<(f64, usize)> {
    let n = f.n();
    let fabs = SpectralField::forward(&f.abs());
    let box_half = f.shape.iter().map(|&m| 0.5 * m as f64 * f.h).fold(f64::INFINITY, f64::min);
    let mut total = 0.0;
    let mut k = 0;
    loop {
        let r = 2f64.powi(k) * s;
        let weight = 2f64.powi(-(k * n as i32));
        let kernel = plate_kernel(f, tau, r, delta);
        let kspec = SpectralField::forward(&kernel);
        let prod = SpectralField { data: fabs.data.iter().zip(&kspec.data).map(|(a, b)| a * b).collect(), ..fabs.clone() };
        total += weight * prod.l2_norm();
        k += 1;
        if r > box_half || weight < 1e-8 {
            break;
        }
    }
    Ok((total, k as usize))
}

/// Normalized indicator of r·T_δ(τ) on the periodic lattice (wrapped offsets).
fn plate_kernel(f: &GridFunction, tau: &Subspace, r: f64, delta: f64) -> GridFunction {
    let n = f.n();
    let mut k = GridFunction { values: vec![0.0; f.len()], ..f.clone() };
    let mut y = vec![0.0; n];
    let mut count = 0usize;
    for i in 0..f.len() {
        let mut flat = i;
        for a in (0..n).rev() {
            let m = f.shape[a];
            let j = flat % m;
            flat /= m;
            let w = if j < m.div_ceil(2) { j as f64 } else { j as f64 - m as f64 };
            y[a] = w * f.h;
        }
        if tau.project_norm(&y) <= r && tau.perp_norm(&y) < r * delta {
            k.values[i] = 1.0;
            count += 1;
        }
    }
    if count == 0 {
        k.values[0] = 1.0;
        count = 1;
    }
    for v in &mut k.values {
        *v /= count as f64;
    }
    k
}

#[derive(Clone, Debug, Serialize)]
pub struct SectorAudit {
    pub delta: f64,
    pub net_size: usize,
    pub exponent: f64,
    pub sum: f64,
    pub norm2: f64,
    /// sum / (δ^{−exponent}·‖f‖₂²).
    pub ratio: f64,
}

/// Σ_τ ‖O_{τ,δ} f‖₂² / (δ^{−d(n−d−1)}‖f‖₂²) over a δ-separated net.
pub fn sector_overlap_audit(f: &GridFunction, net: &DirectionSet, delta: f64) -> Result<SectorAudit> {
    ensure!(net.n == f.n(), Shape, "net lives in Gr({},{}), grid in R^{}", net.d, net.n, f.n());
    ensure!(!net.is_empty(), Domain, "net is empty");
    ensure!(delta > 0.0 && delta <= 1.0, Domain, "delta must lie in (0, 1]");
    let sep = net.min_separation();
    ensure!(sep >= delta * (1.0 - 1e-9), Domain, "net is only {sep}-separated, need δ = {delta}");
    let spec = SpectralField::forward(f);
    let outer = ANN_PLUS.1 / delta;
    let limit = ALIAS_FRACTION * spec.nyquist();
    ensure!(outer <= limit, Domain, "Ann⁺(δ) reaches {outer:.3}, beyond {ALIAS_FRACTION}×Nyquist = {limit:.3}");
    let (lo, hi) = (ANN_PLUS.0 / delta, ANN_PLUS.1 / delta);
    // Per frequency, count the sectors containing it.
    let count = |xi: &[f64]| {
        let r = norm(xi);
        if !(lo < r && r < hi) {
            return 0.0;
        }
        net.elements.iter().filter(|t| t.project_norm(xi) <= 2.0 * delta * r).count() as f64
    };
    let scale = f.h.powi(f.n() as i32) / spec.len() as f64;
    let sum = spec.weighted_energy(count) * scale;
    let norm2 = spec.weighted_energy(|_| 1.0) * scale;
    ensure!(norm2 > 0.0, Domain, "input vanishes");
    let exponent = (net.d * (net.n - net.d - 1)) as f64;
    Ok(SectorAudit { delta, net_size: net.len(), exponent, sum, norm2, ratio: sum / (delta.powf(-exponent) * norm2) })
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}
