//! `gmxa <kind> --config PATH [--out DIR] [--seed U64] [--threads INT] [--resume]`
//!
//! Exit codes: 0 ok, 2 validation, 3 every sweep point over budget, 4 I/O.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmxa::cli::{exit_code, run_experiment, ExperimentConfig, Kind, RawConfig, RunOptions};
use gmxa::Error;

#[derive(Parser)]
#[command(name = "gmxa", version, about = "Sweeps, fits and reports for maximal subspace averages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Greedy net cardinality in Gr(d,n) against 1/δ.
    Net(Flags),
    /// Principal angles of perturbed pairs against the perturbation size.
    Angles(Flags),
    /// Monte-Carlo plate intersections against the volume bound.
    Intersect(Flags),
    /// ‖M_{Σ,S}f‖₂/‖f‖₂ on the radial log example against N.
    Maxavg(Flags),
    /// Weak-(2,2) quotient of the Nikodym maximal function on Perron–Kakeya sets.
    Nikodym(Flags),
    /// L² size of the Kakeya maximal function on Perron–Kakeya sets.
    Kakeya(Flags),
    /// Greedy cluster decomposition of random direction sets.
    Cluster(Flags),
    /// Lower-bound construction C_M and its L^p quotient.
    Extremal(Flags),
    /// Directional Carleson embedding quotients against #V.
    Carleson(Flags),
    /// Fit a model to (x, y) points read from a CSV file.
    Scaling(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    resume: bool,
}

fn load(kind: Kind, path: &Path) -> gmxa::Result<ExperimentConfig> {
    let mut raw = RawConfig::load(path)?;
    match raw.get("kind") {
        None => raw.set("kind", kind.name()),
        Some(k) if k != kind.name() => {
            return Err(Error::Validation(vec![format!("config kind {k:?} does not match subcommand {kind}")]));
        }
        Some(_) => {}
    }
    ExperimentConfig::from_raw(&raw, path.parent().unwrap_or(Path::new(".")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::Net(f) => (Kind::Net, f),
        Command::Angles(f) => (Kind::Angles, f),
        Command::Intersect(f) => (Kind::Intersect, f),
        Command::Maxavg(f) => (Kind::Maxavg, f),
        Command::Nikodym(f) => (Kind::Nikodym, f),
        Command::Kakeya(f) => (Kind::Kakeya, f),
        Command::Cluster(f) => (Kind::Cluster, f),
        Command::Extremal(f) => (Kind::Extremal, f),
        Command::Carleson(f) => (Kind::Carleson, f),
        Command::Scaling(f) => (Kind::Scaling, f),
    };
    if let Some(t) = flags.threads {
        if t == 0 {
            eprintln!("error: --threads must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let result = load(kind, &flags.config).and_then(|cfg| {
        let opts = RunOptions { out: flags.out, seed: flags.seed, threads: flags.threads, resume: flags.resume };
        run_experiment(&cfg, &opts)
    });
    let code = exit_code(&result);
    match &result {
        Ok(o) => {
            let r = &o.report;
            let done = r.points.iter().filter(|p| !p.skipped).count();
            println!("{kind}: {done}/{} points, report in {}", r.points.len(), o.dir.display());
            if let Some(f) = r.fit {
                println!("fit {:?}: slope {:.4}, intercept {:.4}, R² {:.4}", f.model, f.slope, f.intercept, f.r2);
            }
            for n in &r.notes {
                println!("note: {n}");
            }
        }
        Err(Error::Validation(errs)) => {
            for e in errs {
                eprintln!("error: {e}");
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(code as u8)
}
