use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::fit::FitModel;
use crate::error::{Error, Result};

/// Flat `key = value` text. `#` starts a comment, `include PATH` splices
/// another file (relative to the including one); later keys win.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RawConfig {
    entries: BTreeMap<String, Entry>,
}

#[derive(Clone, Debug, PartialEq)]
struct Entry {
    value: String,
    origin: String,
}

const MAX_INCLUDE_DEPTH: usize = 16;

impl RawConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = RawConfig::default();
        let mut errors = Vec::new();
        cfg.load_into(path, &mut Vec::new(), &mut errors)?;
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(errors))
        }
    }

    /// Parses text with no include support beyond `base` (includes resolve against it).
    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let mut cfg = RawConfig::default();
        let mut errors = Vec::new();
        cfg.parse_into(text, "<text>", base, &mut Vec::new(), &mut errors)?;
        if errors.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Validation(errors))
        }
    }

    fn load_into(&mut self, path: &Path, stack: &mut Vec<PathBuf>, errors: &mut Vec<String>) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let canon = path.canonicalize().map_err(|e| Error::io(path, e))?;
        if stack.contains(&canon) {
            errors.push(format!("include cycle through {}", path.display()));
            return Ok(());
        }
        if stack.len() >= MAX_INCLUDE_DEPTH {
            errors.push(format!("includes nested deeper than {MAX_INCLUDE_DEPTH} at {}", path.display()));
            return Ok(());
        }
        stack.push(canon);
        let base = path.parent().unwrap_or(Path::new("."));
        let name = path.display().to_string();
        self.parse_into(&text, &name, base, stack, errors)?;
        stack.pop();
        Ok(())
    }

    fn parse_into(&mut self, text: &str, name: &str, base: &Path, stack: &mut Vec<PathBuf>, errors: &mut Vec<String>) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let origin = format!("{name}:{}", i + 1);
            if let Some(rest) = line.strip_prefix("include") {
                if rest.starts_with(char::is_whitespace) {
                    let target = base.join(rest.trim().trim_matches('"'));
                    self.load_into(&target, stack, errors)?;
                    continue;
                }
            }
            match line.split_once('=') {
                Some((k, v)) if !k.trim().is_empty() => {
                    let key = k.trim().to_string();
                    let value = v.trim().trim_matches('"').to_string();
                    self.entries.insert(key, Entry { value, origin });
                }
                _ => errors.push(format!("{origin}: expected `key = value` or `include PATH`")),
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), Entry { value: value.into(), origin: "<override>".into() });
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Canonical `key = value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        self.entries.iter().map(|(k, e)| format!("{k} = {}\n", e.value)).collect()
    }

    pub fn reader(&self) -> Reader<'_> {
        Reader { raw: self, used: BTreeSet::new(), errors: Vec::new() }
    }
}

/// Typed access that records every violation instead of stopping at the first.
pub struct Reader<'a> {
    raw: &'a RawConfig,
    used: BTreeSet<String>,
    errors: Vec<String>,
}

impl Reader<'_> {
    fn lookup(&mut self, key: &str) -> Option<(String, String)> {
        self.used.insert(key.to_string());
        self.raw.entries.get(key).map(|e| (e.value.clone(), e.origin.clone()))
    }

    pub fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    pub fn opt<T: FromStr>(&mut self, key: &str) -> Option<T> {
        let (value, origin) = self.lookup(key)?;
        match value.parse() {
            Ok(v) => Some(v),
            Err(_) => {
                self.errors.push(format!("{origin}: {key} = {value:?} is not a valid {}", std::any::type_name::<T>()));
                None
            }
        }
    }

    pub fn or<T: FromStr>(&mut self, key: &str, default: T) -> T {
        self.opt(key).unwrap_or(default)
    }

    pub fn required<T: FromStr>(&mut self, key: &str) -> Option<T> {
        if self.raw.get(key).is_none() {
            self.used.insert(key.to_string());
            self.errors.push(format!("missing required key {key}"));
            return None;
        }
        self.opt(key)
    }

    pub fn string(&mut self, key: &str, default: &str) -> String {
        self.lookup(key).map(|(v, _)| v).unwrap_or_else(|| default.to_string())
    }

    /// Comma- or whitespace-separated list.
    pub fn list<T: FromStr>(&mut self, key: &str) -> Option<Vec<T>> {
        let (value, origin) = self.lookup(key)?;
        let mut out = Vec::new();
        for item in value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()) {
            match item.parse() {
                Ok(v) => out.push(v),
                Err(_) => {
                    self.errors.push(format!("{origin}: {key} has invalid entry {item:?}"));
                    return None;
                }
            }
        }
        Some(out)
    }

    /// Fails with every violation plus any key that was never read.
    pub fn finish(mut self) -> Result<()> {
        for (k, e) in &self.raw.entries {
            if !self.used.contains(k) {
                self.errors.push(format!("{}: unknown key {k}", e.origin));
            }
        }
        if self.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(self.errors))
        }
    }
}

/// Experiment family, one per subcommand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Net,
    Angles,
    Intersect,
    Maxavg,
    Nikodym,
    Kakeya,
    Cluster,
    Extremal,
    Carleson,
    Scaling,
}

impl Kind {
    pub const ALL: [Kind; 10] = [
        Kind::Net,
        Kind::Angles,
        Kind::Intersect,
        Kind::Maxavg,
        Kind::Nikodym,
        Kind::Kakeya,
        Kind::Cluster,
        Kind::Extremal,
        Kind::Carleson,
        Kind::Scaling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Net => "net",
            Kind::Angles => "angles",
            Kind::Intersect => "intersect",
            Kind::Maxavg => "maxavg",
            Kind::Nikodym => "nikodym",
            Kind::Kakeya => "kakeya",
            Kind::Cluster => "cluster",
            Kind::Extremal => "extremal",
            Kind::Carleson => "carleson",
            Kind::Scaling => "scaling",
        }
    }

    /// Name of the swept parameter.
    pub fn sweep_name(self) -> &'static str {
        match self {
            Kind::Net | Kind::Intersect | Kind::Nikodym | Kind::Kakeya => "delta",
            Kind::Angles => "eps",
            Kind::Maxavg | Kind::Cluster => "N",
            Kind::Extremal => "M",
            Kind::Carleson => "V",
            Kind::Scaling => "x",
        }
    }

    /// Sweeps over δ are fitted against 1/δ.
    pub fn inverts_abscissa(self) -> bool {
        self.sweep_name() == "delta"
    }

    fn defaults(self) -> (usize, usize, &'static str) {
        match self {
            Kind::Net => (1, 2, "power"),
            Kind::Angles => (2, 4, "power"),
            Kind::Intersect => (1, 2, "power"),
            Kind::Maxavg => (1, 2, "log"),
            Kind::Nikodym => (1, 2, "sqrtlog"),
            Kind::Kakeya => (1, 2, "sqrtlog"),
            Kind::Cluster => (1, 3, "power"),
            Kind::Extremal => (2, 3, "power"),
            Kind::Carleson => (2, 3, "power"),
            Kind::Scaling => (1, 2, "power"),
        }
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Kind::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| Error::Domain(format!("unknown experiment kind {s:?}")))
    }
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Validated experiment description. Kind-specific options stay in `options`
/// and are read by the pipelines through [`Options`].
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub d: usize,
    pub n: usize,
    pub values: Vec<f64>,
    pub grid_h: Option<f64>,
    pub seed: u64,
    pub density: usize,
    pub scales: Option<Vec<f64>>,
    pub out: PathBuf,
    pub budget_secs: f64,
    pub model: Option<FitModel>,
    pub comparison_exponent: Option<f64>,
    pub citation: String,
    pub comparison_tag: String,
    pub input: Option<PathBuf>,
    pub options: BTreeMap<String, String>,
    /// Canonical text of the resolved configuration (for checkpoint identity).
    pub canonical: String,
}


/// Keys each kind accepts beyond the common ones.
pub fn option_keys(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Net => &["budget"],
        Kind::Angles => &["pairs"],
        Kind::Intersect => &["pairs", "samples"],
        Kind::Maxavg => &["radii", "angles", "radial_factor"],
        Kind::Nikodym => &["margin"],
        Kind::Kakeya => &["centers"],
        Kind::Cluster => &["delta", "random_per_element", "pool_seed_offset"],
        Kind::Extremal => &["samples", "p"],
        Kind::Carleson => &["family", "seeds", "plates", "depth", "delta", "grid"],
        Kind::Scaling => &[],
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = RawConfig::load(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_raw(&raw, base)
    }

    /// Validates `raw`; `input` resolves against `base`, `out` against the working directory.
    pub fn from_raw(raw: &RawConfig, base: &Path) -> Result<Self> {
        let mut r = raw.reader();
        let kind: Option<Kind> = r.required("kind");
        let kind_ = kind.unwrap_or(Kind::Scaling);
        let (dd, dn, dmodel) = kind_.defaults();
        let d = r.or("d", dd);
        let n = r.or("n", dn);
        if d == 0 || d >= n {
            r.error(format!("need 1 ≤ d < n, got d = {d}, n = {n}"));
        }
        let values: Vec<f64> = if kind_ == Kind::Scaling { r.list("values").unwrap_or_default() } else { r.required::<String>("values").and_then(|_| r.list("values")).unwrap_or_default() };
        if kind_ != Kind::Scaling && values.is_empty() && raw.get("values").is_some() {
            r.error("values must be nonempty");
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            r.error(format!("values must be strictly increasing, got {values:?}"));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            r.error("values must be positive and finite");
        }
        if kind_.sweep_name() == "delta" && values.iter().any(|&v| v > 0.5) {
            r.error("delta values must lie in (0, 1/2]");
        }
        let grid_h: Option<f64> = r.opt("grid_h");
        if let Some(h) = grid_h {
            if !(h > 0.0 && h.is_finite()) {
                r.error(format!("grid_h must be positive, got {h}"));
            } else if kind_.sweep_name() == "delta" {
                if let Some(&dmin) = values.first() {
                    if h > 0.5 * dmin {
                        r.error(format!("grid_h = {h} does not resolve the smallest delta {dmin} (need grid_h ≤ delta/2)"));
                    }
                }
            }
        }
        let seed = r.or("seed", 0u64);
        let density = r.or("density", 2usize);
        if density < 2 {
            r.error(format!("density must be at least 2, got {density}"));
        }
        let scales: Option<Vec<f64>> = r.list("scales");
        if let Some(s) = &scales {
            if s.is_empty() || s.iter().any(|&v| !(v > 0.0)) {
                r.error("scales must be a nonempty list of positive numbers");
            }
        }
        let out = PathBuf::from(r.string("out", "out"));
        let budget_secs = r.or("budget_secs", 120.0);
        if !(budget_secs > 0.0) {
            r.error("budget_secs must be positive");
        }
        let model_s = r.string("model", dmodel);
        let model = match model_s.as_str() {
            "none" => None,
            s => match s.parse::<FitModel>() {
                Ok(m) => Some(m),
                Err(e) => {
                    r.error(e.to_string());
                    None
                }
            },
        };
        let comparison_exponent = r.opt("comparison_exponent");
        let citation = r.string("citation", "");
        let comparison_tag = r.string("comparison_tag", "");
        let _threads: Option<usize> = r.opt("threads");
        let input = r.lookup("input").map(|(v, _)| base.join(v));
        if kind_ == Kind::Scaling && input.is_none() {
            r.error("scaling needs input = PATH (CSV with columns x,y)");
        }
        let mut options = BTreeMap::new();
        if let Some(k) = kind {
            for key in option_keys(k) {
                if let Some((v, _)) = r.lookup(key) {
                    options.insert(key.to_string(), v);
                }
            }
        }
        r.finish()?;
        Ok(ExperimentConfig {
            kind: kind_,
            d,
            n,
            values,
            grid_h,
            seed,
            density,
            scales,
            out,
            budget_secs,
            model,
            comparison_exponent,
            citation,
            comparison_tag,
            input,
            options,
            canonical: raw.canonical(),
        })
    }

    pub fn opts(&self) -> Options<'_> {
        Options { map: &self.options }
    }
}

/// Typed access to kind-specific options (already checked for unknown keys).
pub struct Options<'a> {
    map: &'a BTreeMap<String, String>,
}

impl Options<'_> {
    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.map.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Validation(vec![format!("{key} = {v:?} is not valid")])),
        }
    }

    pub fn string(&self, key: &str, default: &str) -> String {
        self.map.get(key).cloned().unwrap_or_else(|| default.to_string())
    }
}
