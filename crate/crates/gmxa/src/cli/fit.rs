use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Regression model for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// log y = slope·log x + intercept.
    Power,
    /// y = slope·log x + intercept.
    Log,
    /// y² = slope·log x + intercept.
    SqrtLog,
}

impl std::str::FromStr for FitModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "power" => Ok(FitModel::Power),
            "log" => Ok(FitModel::Log),
            "sqrtlog" => Ok(FitModel::SqrtLog),
            _ => Err(Error::Domain(format!("unknown fit model {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub model: FitModel,
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares in the model's transformed coordinates.
pub fn fit_scaling(points: &[(f64, f64)], model: FitModel) -> Result<Fit> {
    ensure!(points.len() >= 3, Domain, "need at least 3 points, got {}", points.len());
    ensure!(
        points.iter().all(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()),
        Domain,
        "fit requires positive finite values"
    );
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points
        .iter()
        .map(|&(_, y)| match model {
            FitModel::Power => y.ln(),
            FitModel::Log => y,
            FitModel::SqrtLog => y * y,
        })
        .collect();
    let (slope, intercept, r2) = least_squares(&xs, &ys)?;
    Ok(Fit { model, slope, intercept, r2 })
}

/// Ordinary least squares line; R² clamped to [0, 1].
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    ensure!(sxx > 0.0, Domain, "abscissae are all equal");
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let pts: Vec<_> = (1..=6).map(|k| (k as f64, (k as f64).sqrt())).collect();
        let f = fit_scaling(&pts, FitModel::Power).unwrap();
        assert!((f.slope - 0.5).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_log_law() {
        let pts: Vec<_> = (2..=8).map(|k| (k as f64, (k as f64).ln())).collect();
        let f = fit_scaling(&pts, FitModel::Log).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && f.intercept.abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)], FitModel::Power).is_err());
        assert!(fit_scaling(&[(1.0, 1.0), (2.0, 1.0)], FitModel::Power).is_err());
    }
}
