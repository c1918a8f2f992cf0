use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::Kind;
use super::fit::{fit_scaling, Fit, FitModel};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointRecord {
    pub index: usize,
    pub param: f64,
    pub seed: u64,
    /// `None` when the point exceeded its wall-clock budget.
    pub value: Option<f64>,
    pub skipped: bool,
    pub extra: BTreeMap<String, f64>,
}

/// Sweep results plus the fit and the comparison exponent with its source.
/// Wall-clock times live in `timing.csv` so that the report stays byte-stable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub kind: Kind,
    pub d: usize,
    pub n: usize,
    pub sweep: String,
    /// Abscissa used by the fit: the sweep value or its reciprocal.
    pub abscissa: String,
    pub seed: u64,
    pub points: Vec<PointRecord>,
    pub fit: Option<Fit>,
    pub comparison_exponent: Option<f64>,
    pub citation: String,
    pub comparison_tag: String,
    pub notes: Vec<String>,
}

impl ScalingReport {
    /// Points that finished within budget, as (abscissa, value).
    pub fn series(&self) -> Vec<(f64, f64)> {
        let invert = self.abscissa.starts_with("1/");
        self.points
            .iter()
            .filter_map(|p| p.value.map(|v| (if invert { 1.0 / p.param } else { p.param }, v)))
            .collect()
    }

    /// Fits the completed points; notes why when no fit is possible.
    pub fn refit(&mut self, model: Option<FitModel>) {
        self.fit = None;
        self.notes.retain(|n| !n.starts_with("fit:"));
        let Some(model) = model else { return };
        match fit_scaling(&self.series(), model) {
            Ok(f) => self.fit = Some(f),
            Err(e) => self.notes.push(format!("fit: {e}")),
        }
    }

    pub fn all_skipped(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.skipped)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format(format!("report JSON: {e}")))
    }

    /// CSV series: index, param, value, skipped, then the union of extra keys.
    pub fn to_csv(&self) -> String {
        let keys: BTreeSet<&str> = self.points.iter().flat_map(|p| p.extra.keys().map(String::as_str)).collect();
        let mut out = String::from("index,param,value,skipped");
        for k in &keys {
            out.push(',');
            out.push_str(k);
        }
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}", p.index, p.param, p.value.map(|v| v.to_string()).unwrap_or_default(), p.skipped));
            for k in &keys {
                out.push(',');
                if let Some(v) = p.extra.get(*k) {
                    out.push_str(&v.to_string());
                }
            }
            out.push('\n');
        }
        out
    }

    /// Two space-separated columns (abscissa, value) for plotting.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {} {}\n", self.abscissa, self.kind);
        for (x, y) in self.series() {
            out.push_str(&format!("{x} {y}\n"));
        }
        out
    }
}

/// Writes report.json, series.csv and series.dat into `dir`.
pub fn emit_report(report: &ScalingReport, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [("report.json", report.to_json()), ("series.csv", report.to_csv()), ("series.dat", report.to_dat())];
    let mut paths = Vec::with_capacity(files.len());
    for (name, text) in files {
        let p = dir.join(name);
        write_atomic(&p, text.as_bytes())?;
        paths.push(p);
    }
    Ok(paths)
}

/// Write to a sibling temporary file, then rename over `path`.
pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
