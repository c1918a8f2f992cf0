use serde::{Deserialize, Serialize};

use super::GridFunction;
use crate::error::{ensure, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Strong,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub kind: NormKind,
    pub p: f64,
    pub value: f64,
    pub test_function: String,
    /// Level attaining the weak quotient (weak case only).
    pub level: Option<f64>,
    pub levels_scanned: usize,
}

/// Empirical quotient ‖g‖/‖f‖_p, strong or weak type.
///
/// The weak quotient is the sup over distinct values v of g of
/// v·|{g ≥ v}|^{1/p}, the left limit of λ|{g > λ}|^{1/p} at λ = v.
pub fn norm_estimate(g: &GridFunction, f: &GridFunction, kind: NormKind, p: f64, test_function: &str) -> Result<NormEstimate> {
    ensure!(p >= 1.0, Domain, "p must be at least 1, got {p}");
    let fnorm = f.lp_norm(p);
    ensure!(fnorm > 0.0, Domain, "input has zero L^{p} norm");
    let (value, level, levels_scanned) = match kind {
        NormKind::Strong => (g.lp_norm(p) / fnorm, None, 0),
        NormKind::Weak => {
            let mut vals: Vec<f64> = g.values.iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
            vals.sort_by(|a, b| b.total_cmp(a));
            let cell = g.cell_volume();
            let (mut best, mut at, mut distinct) = (0.0f64, None, 0usize);
            let mut i = 0;
            while i < vals.len() {
                let v = vals[i];
                while i < vals.len() && vals[i] == v {
                    i += 1;
                }
                distinct += 1;
                let q = v * (i as f64 * cell).powf(1.0 / p);
                if q > best {
                    best = q;
                    at = Some(v);
                }
            }
            (best / fnorm, at, distinct)
        }
    };
    Ok(NormEstimate { kind, p, value, test_function: test_function.to_string(), level, levels_scanned })
}
