//! Config-driven sweeps from code: parse a key-value config, run it with
//! checkpoints, and read back the report.
//!
//! ```bash
//! cargo run --example run_config
//! ```
//!
//! The same sweep from the shell:
//!
//! ```bash
//! cargo run --bin gmxa -- net --config crates/gmxa/configs/net.cfg --out target/reports/net
//! ```

use std::path::Path;

use gmxa::cli::{exit_code, run_experiment, ExperimentConfig, RawConfig, RunOptions};

const CONFIG: &str = "
# Greedy nets of lines in the plane.
kind = net
d = 1
n = 2
values = 0.015625, 0.03125, 0.0625, 0.125
seed = 3
comparison_exponent = 1
comparison_tag = derived
citation = example run
";

fn main() -> gmxa::Result<()> {
    let raw = RawConfig::parse(CONFIG, Path::new("."))?;
    let cfg = ExperimentConfig::from_raw(&raw, Path::new("."))?;
    let opts = RunOptions { out: Some("target/examples-out/net".into()), seed: None, threads: Some(1), resume: true };
    let result = run_experiment(&cfg, &opts);
    println!("exit code {}", exit_code(&result));
    let outcome = result?;
    for p in &outcome.report.points {
        println!("δ = {}: {:?} elements", p.param, p.value);
    }
    if let Some(fit) = outcome.report.fit {
        println!("slope {:.3} (expected 1), R² {:.4}", fit.slope, fit.r2);
    }
    println!("report in {}", outcome.dir.display());
    Ok(())
}
