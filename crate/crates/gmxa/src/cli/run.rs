use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use super::config::{ExperimentConfig, Kind};
use super::pipelines::{run_point, PointOutput};
use super::report::{emit_report, write_atomic, PointRecord, ScalingReport};
use crate::error::{Error, Result};
use crate::rng::substream;

/// Command-line overrides of the config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    /// Worker threads for the sweep; defaults to the available parallelism.
    pub threads: Option<usize>,
    pub resume: bool,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub report: ScalingReport,
    pub dir: PathBuf,
}

const CHECKPOINT_DIR: &str = "checkpoint";

/// Runs the sweep of `cfg`, checkpointing each finished point, then writes
/// the report directory. Points over budget are recorded as skipped.
pub fn run_experiment(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<RunOutcome> {
    let dir = opts.out.clone().unwrap_or_else(|| cfg.out.clone());
    let seed = opts.seed.unwrap_or(cfg.seed);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let mut report = ScalingReport {
        kind: cfg.kind,
        d: cfg.d,
        n: cfg.n,
        sweep: cfg.kind.sweep_name().to_string(),
        abscissa: if cfg.kind.inverts_abscissa() { format!("1/{}", cfg.kind.sweep_name()) } else { cfg.kind.sweep_name().to_string() },
        seed,
        points: Vec::new(),
        fit: None,
        comparison_exponent: cfg.comparison_exponent,
        citation: cfg.citation.clone(),
        comparison_tag: cfg.comparison_tag.clone(),
        notes: Vec::new(),
    };
    let mut timing = String::from("index,param,seconds,status\n");
    if cfg.kind == Kind::Scaling {
        report.points = read_points(cfg.input.as_deref().expect("validated"))?;
    } else {
        let (points, t) = sweep(cfg, &dir, seed, opts)?;
        report.points = points;
        timing.push_str(&t);
    }
    report.refit(cfg.model);
    emit_report(&report, &dir)?;
    write_atomic(&dir.join("timing.csv"), timing.as_bytes())?;
    Ok(RunOutcome { report, dir })
}

/// (x, y) rows from a CSV with a header naming columns x and y.
fn read_points(path: &Path) -> Result<Vec<PointRecord>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Format(format!("{other:?}")),
    })?;
    let headers = rdr.headers().map_err(|e| Error::Format(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Format(format!("{}: missing column {name}", path.display())));
    let (xi, yi) = (col("x")?, col("y")?);
    let mut out = Vec::new();
    for (index, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Format(e.to_string()))?;
        let parse = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok()).ok_or_else(|| Error::Format(format!("{}: row {} is not numeric", path.display(), index + 1)));
        out.push(PointRecord { index, param: parse(xi)?, seed: 0, value: Some(parse(yi)?), skipped: false, extra: Default::default() });
    }
    Ok(out)
}

fn identity(cfg: &ExperimentConfig, seed: u64) -> String {
    format!("{}seed-override = {seed}\n", cfg.canonical)
}

enum Finished {
    Done(PointRecord, f64),
    Skipped(usize, f64),
    Failed(Error),
}

fn sweep(cfg: &ExperimentConfig, dir: &Path, seed: u64, opts: &RunOptions) -> Result<(Vec<PointRecord>, String)> {
    let ck = dir.join(CHECKPOINT_DIR);
    let id = identity(cfg, seed);
    let id_path = ck.join("config.txt");
    let mut done: Vec<Option<PointRecord>> = vec![None; cfg.values.len()];
    let same = std::fs::read_to_string(&id_path).map(|t| t == id).unwrap_or(false);
    if opts.resume && same {
        for (i, slot) in done.iter_mut().enumerate() {
            if let Ok(text) = std::fs::read_to_string(ck.join(format!("point_{i}.json"))) {
                let rec: PointRecord = serde_json::from_str(&text).map_err(|e| Error::Format(format!("checkpoint {i}: {e}")))?;
                if rec.param == cfg.values[i] {
                    *slot = Some(rec);
                }
            }
        }
    } else if ck.exists() {
        std::fs::remove_dir_all(&ck).map_err(|e| Error::io(&ck, e))?;
    }
    std::fs::create_dir_all(&ck).map_err(|e| Error::io(&ck, e))?;
    write_atomic(&id_path, id.as_bytes())?;

    let todo: Vec<usize> = (0..cfg.values.len()).filter(|&i| done[i].is_none()).collect();
    let workers = opts.threads.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)).clamp(1, todo.len().max(1));
    let budget = Duration::from_secs_f64(cfg.budget_secs);
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::new());
    let shared = Arc::new(cfg.clone());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::SeqCst);
                let Some(&i) = todo.get(k) else { break };
                let r = run_with_budget(&shared, i, seed, budget, dir);
                let stop = matches!(r, Finished::Failed(_));
                results.lock().unwrap().push(r);
                if stop {
                    next.store(todo.len(), Ordering::SeqCst);
                }
            });
        }
    });
    let mut timing = Vec::new();
    for r in results.into_inner().unwrap() {
        match r {
            Finished::Done(rec, secs) => {
                timing.push((rec.index, format!("{},{},{secs:.3},ok\n", rec.index, rec.param)));
                let i = rec.index;
                done[i] = Some(rec);
            }
            Finished::Skipped(i, secs) => {
                timing.push((i, format!("{i},{},{secs:.3},over-budget\n", cfg.values[i])));
                done[i] = Some(PointRecord { index: i, param: cfg.values[i], seed: substream(seed, i as u64), value: None, skipped: true, extra: Default::default() });
            }
            Finished::Failed(e) => return Err(e),
        }
    }
    timing.sort_by_key(|t| t.0);
    Ok((done.into_iter().map(|r| r.expect("every point ran")).collect(), timing.into_iter().map(|t| t.1).collect()))
}

/// Runs one point on its own thread and waits at most `budget`; an
/// over-budget point is abandoned (its thread is detached) and flagged.
fn run_with_budget(cfg: &Arc<ExperimentConfig>, i: usize, seed: u64, budget: Duration, dir: &Path) -> Finished {
    let (tx, rx) = mpsc::channel();
    let cfg2 = Arc::clone(cfg);
    let x = cfg.values[i];
    let ps = substream(seed, i as u64);
    let start = Instant::now();
    std::thread::spawn(move || {
        let _ = tx.send(run_point(&cfg2, i, x, ps));
    });
    match rx.recv_timeout(budget) {
        Ok(Ok(out)) => {
            let secs = start.elapsed().as_secs_f64();
            let rec = PointRecord { index: i, param: x, seed: ps, value: Some(out.value), skipped: false, extra: out.extra.clone() };
            match save_point(dir, &rec, &out) {
                Ok(()) => Finished::Done(rec, secs),
                Err(e) => Finished::Failed(e),
            }
        }
        Ok(Err(e)) => Finished::Failed(e),
        Err(mpsc::RecvTimeoutError::Timeout) => Finished::Skipped(i, start.elapsed().as_secs_f64()),
        Err(mpsc::RecvTimeoutError::Disconnected) => Finished::Failed(Error::Domain(format!("point {i} panicked"))),
    }
}

/// Artifacts first, then the checkpoint record.
fn save_point(dir: &Path, rec: &PointRecord, out: &PointOutput) -> Result<()> {
    for (name, bytes) in &out.files {
        write_atomic(&dir.join(name), bytes)?;
    }
    let text = serde_json::to_string_pretty(rec).expect("record serializes");
    write_atomic(&dir.join(CHECKPOINT_DIR).join(format!("point_{}.json", rec.index)), text.as_bytes())
}

/// Process exit code for a run result: 0 ok, 2 validation, 3 every point
/// over budget, 4 I/O.
pub fn exit_code(result: &Result<RunOutcome>) -> i32 {
    match result {
        Ok(o) if o.report.all_skipped() => 3,
        Ok(_) => 0,
        Err(Error::Io { .. }) => 4,
        Err(_) => 2,
    }
}
