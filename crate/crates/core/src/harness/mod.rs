//! Seeded experiments: configuration, trial execution and report files.
//!
//! Trial `i` (counting from zero) uses `seed_i = mix(master_seed, i + 1)`.
//! Within a trial the signal is drawn from `mix(seed_i, 0)`, a fresh matrix
//! (when requested) from `mix(seed_i, 1)` and decoder randomness from
//! `mix(seed_i, 2)`. The shared matrix of an experiment comes from
//! `mix(master_seed, 0)`. Trials run in parallel and are collected in index
//! order, so outputs do not depend on the thread count.

mod config;
mod stats;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

pub use config::{
    parse_config, CollideParams, DimParams, ExperimentConfig, ExperimentKind, InterleaveParams, KronParams,
    NspParams, Params, RecoverParams, SetSource,
};
pub use stats::{write_sweep, write_trial_records, SweepRow, TrialClass, TrialRecord, TrialStats};

use crate::decode::{
    collision_search, deinterleave, graph_point, kron_decode, l0_decode, DecodeOutcome, DecodeStatus, KronOptions,
    KronShape, DISTINCT,
};
use crate::error::{invalid, AlcError, Result};
use crate::fracdim::{minkowski_dim, DimensionEstimate, ScaleSchedule};
use crate::measureop::{apply, nsp_min_gain, sample_matrix, sparse_kernel_witness, MeasurementMatrix, SignalFamily};
use crate::rng::{mix, SeedStream};
use crate::setgen::{embed, gen_cantor, gen_kron, gen_segment, gen_set_f, gen_sparse, gen_square, PointCloud};

/// Seed of trial `i`.
pub fn trial_seed(master_seed: u64, trial: usize) -> u64 {
    mix(master_seed, trial as u64 + 1)
}

/// Seed of the experiment-wide measurement matrix.
pub fn matrix_seed(master_seed: u64) -> u64 {
    mix(master_seed, 0)
}

/// A pass/fail verdict attached to a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail,
        }
    }
}

/// What a run produced: a JSON summary, assertion checks and the files written.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub kind: ExperimentKind,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl RunReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Per-trial records and their aggregate for a recover or kron experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodingRun {
    pub n: usize,
    pub records: Vec<TrialRecord>,
    pub stats: TrialStats,
}

/// Classifies a decoder outcome against the true embedding.
pub fn classify(outcome: &DecodeOutcome, truth: &DVector<f64>) -> TrialClass {
    match outcome.status {
        DecodeStatus::Unique => {
            let est = outcome.estimate.as_ref().expect("unique outcomes carry an estimate");
            if (est - truth).norm() <= DISTINCT * truth.norm().max(1.0) {
                TrialClass::UniqueCorrect
            } else {
                TrialClass::UniqueWrong
            }
        }
        DecodeStatus::Ambiguous => TrialClass::Ambiguous,
        DecodeStatus::NoSolution => TrialClass::NoSolution,
    }
}

fn with_trial(i: usize, e: AlcError) -> AlcError {
    match e {
        AlcError::ResourceLimit(msg) => AlcError::ResourceLimit(format!("trial {i}: {msg}")),
        other => other,
    }
}

struct DecodingSetup {
    m: usize,
    trials: usize,
    fresh_matrix: bool,
}

fn decoding_setup(cfg: &ExperimentConfig) -> Result<DecodingSetup> {
    match &cfg.params {
        Params::Recover(p) => Ok(DecodingSetup {
            m: p.m,
            trials: p.trials,
            fresh_matrix: p.fresh_matrix,
        }),
        Params::Kron(p) => Ok(DecodingSetup {
            m: p.k * p.l,
            trials: p.trials,
            fresh_matrix: p.fresh_matrix,
        }),
        _ => Err(invalid(format!("kind `{}` is not a decoding experiment", cfg.kind()))),
    }
}

fn decode_trial(cfg: &ExperimentConfig, a: &MeasurementMatrix, seed: u64) -> Result<TrialRecord> {
    let (truth, outcome) = match &cfg.params {
        Params::Recover(p) => {
            let x = embed(&gen_sparse(p.m, p.s, mix(seed, 0))?.into());
            let y = apply(a, &x)?;
            (x, l0_decode(a, &y, p.s, p.tol)?)
        }
        Params::Kron(p) => {
            let x = embed(&gen_kron(p.k, p.l, p.r, p.t, mix(seed, 0))?.into());
            let y = apply(a, &x)?;
            let opts = KronOptions {
                starts: p.starts,
                tol: p.tol,
                seed: mix(seed, 2),
                ..KronOptions::default()
            };
            let shape = KronShape::new(p.k, p.l, p.r, p.t)?;
            (x, kron_decode(a, &y, shape, &opts)?)
        }
        _ => unreachable!("checked by decoding_setup"),
    };
    Ok(TrialRecord {
        trial: 0,
        status: classify(&outcome, &truth),
        residual: outcome.residual,
        margin: outcome.margin,
    })
}

/// Runs a recover or kron experiment with `n` rows.
pub fn run_decoding_with_rows(cfg: &ExperimentConfig, n: usize) -> Result<DecodingRun> {
    let setup = decoding_setup(cfg)?;
    if n == 0 || n > setup.m {
        return Err(invalid(format!("row count {n} must be in [1, {}]", setup.m)));
    }
    let shared = if setup.fresh_matrix {
        None
    } else {
        Some(sample_matrix(n, setup.m, matrix_seed(cfg.master_seed))?)
    };
    let records: Vec<TrialRecord> = (0..setup.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(cfg.master_seed, i);
            let fresh;
            let a = match &shared {
                Some(a) => a,
                None => {
                    fresh = sample_matrix(n, setup.m, mix(seed, 1))?;
                    &fresh
                }
            };
            let mut rec = decode_trial(cfg, a, seed).map_err(|e| with_trial(i, e))?;
            rec.trial = i;
            Ok(rec)
        })
        .collect::<Result<_>>()?;
    let stats = TrialStats::from_records(&records)?;
    Ok(DecodingRun { n, records, stats })
}

/// Runs a recover or kron experiment at its configured row count.
pub fn run_decoding(cfg: &ExperimentConfig) -> Result<DecodingRun> {
    let n = match &cfg.params {
        Params::Recover(p) => p.n,
        Params::Kron(p) => p.n,
        _ => return Err(invalid(format!("kind `{}` is not a decoding experiment", cfg.kind()))),
    };
    run_decoding_with_rows(cfg, n)
}

/// Aggregate statistics of a recover or kron experiment.
///
/// ```
/// let cfg = alc::harness::parse_config("kind = recover\nm = 8\nn = 3\ns = 2\ntrials = 5\n").unwrap();
/// let stats = alc::harness::run_trials(&cfg).unwrap();
/// assert_eq!(stats.trials, 5);
/// assert!(stats.is_partition());
/// ```
pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialStats> {
    Ok(run_decoding(cfg)?.stats)
}

/// `path` with its file name replaced by `<stem><suffix>`.
pub fn sibling_path(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

/// Loads or generates the point set of a `dim` experiment.
pub fn load_set(source: &SetSource, seed: u64) -> Result<PointCloud> {
    match source {
        SetSource::Segment { points } => gen_segment(*points, seed),
        SetSource::Cantor { depth } => gen_cantor(*depth),
        SetSource::SetF { points } => gen_set_f(*points),
        SetSource::Square { points } => gen_square(*points, seed),
        SetSource::Csv { input } => {
            let label = input.display().to_string();
            PointCloud::read_csv(File::open(input)?, label)
        }
    }
}

fn run_dim(cfg: &ExperimentConfig, p: &DimParams) -> Result<(DimensionEstimate, RunReport)> {
    let cloud = load_set(&p.set, matrix_seed(cfg.master_seed))?;
    let est = minkowski_dim(&cloud, &ScaleSchedule::dyadic(p.scales.0, p.scales.1)?)?;
    let mut checks = Vec::new();
    if let Some(e) = p.expect {
        checks.push(Check::new(
            "slope",
            (est.slope - e).abs() <= p.expect_tol,
            format!("slope {} vs expected {e} ± {}", est.slope, p.expect_tol),
        ));
    }
    let mut summary = est.sidecar_json();
    summary["points"] = json!(cloud.len());
    Ok((
        est,
        RunReport {
            kind: ExperimentKind::Dim,
            summary,
            checks,
            files: Vec::new(),
        },
    ))
}

fn decoding_report(cfg: &ExperimentConfig, max_error: Option<f64>, sweep: Option<(usize, usize)>) -> Result<RunReport> {
    let run = run_decoding(cfg)?;
    let mut checks = vec![Check::new(
        "unique_wrong",
        run.stats.unique_wrong == 0,
        format!("{} unique-but-wrong outcomes", run.stats.unique_wrong),
    )];
    if let Some(e) = max_error {
        checks.push(Check::new(
            "empirical_error",
            run.stats.empirical_error <= e,
            format!("empirical error {} vs bound {e}", run.stats.empirical_error),
        ));
    }
    let mut sweep_rows = Vec::new();
    if let Some((lo, hi)) = sweep {
        for n in lo..=hi {
            let st = if n == run.n { run.stats.clone() } else { run_decoding_with_rows(cfg, n)?.stats };
            sweep_rows.push(SweepRow {
                param: "n".into(),
                value: n.to_string(),
                stat: st.empirical_error,
            });
        }
    }
    let mut files = Vec::new();
    if let Some(out) = &cfg.output_path {
        write_trial_records(&run.records, create(out)?)?;
        files.push(out.clone());
        let stats_path = sibling_path(out, ".stats.csv");
        run.stats.write_csv(create(&stats_path)?)?;
        files.push(stats_path);
        if !sweep_rows.is_empty() {
            let sweep_path = sibling_path(out, ".sweep.csv");
            write_sweep(&sweep_rows, create(&sweep_path)?)?;
            files.push(sweep_path);
        }
    }
    let mut summary = serde_json::to_value(&run.stats)?;
    summary["n"] = json!(run.n);
    if !sweep_rows.is_empty() {
        summary["sweep"] = serde_json::to_value(&sweep_rows)?;
    }
    Ok(RunReport {
        kind: cfg.kind(),
        summary,
        checks,
        files,
    })
}

fn run_nsp(cfg: &ExperimentConfig, p: &NspParams) -> Result<RunReport> {
    let a = sample_matrix(p.n, p.m, matrix_seed(cfg.master_seed))?;
    let report = nsp_min_gain(&a, &SignalFamily::Sparse { m: p.m, s: p.s }, p.trials, mix(cfg.master_seed, 1))?;
    let mut summary = serde_json::to_value(&report)?;
    if p.s > p.n && p.n < p.m {
        let u = sparse_kernel_witness(&a, p.s)?;
        summary["witness_gain"] = json!(apply(&a, &u)?.norm());
        summary["witness"] = json!(u.iter().collect::<Vec<_>>());
    }
    let checks = p
        .min_gain
        .map(|g| {
            vec![Check::new(
                "min_gain",
                report.min_gain > g,
                format!("min gain {} vs threshold {g}", report.min_gain),
            )]
        })
        .unwrap_or_default();
    Ok(RunReport {
        kind: ExperimentKind::Nsp,
        summary,
        checks,
        files: Vec::new(),
    })
}

fn run_collide(cfg: &ExperimentConfig, p: &CollideParams) -> Result<RunReport> {
    let shape = KronShape::new(p.k, p.l, p.r, p.t)?;
    let a = sample_matrix(p.n, shape.dim(), matrix_seed(cfg.master_seed))?;
    let found = collision_search(&a, shape, p.starts, mix(cfg.master_seed, 1))?;
    let summary = match &found {
        Some(rep) => json!({ "found": true, "report": rep }),
        None => json!({ "found": false }),
    };
    let checks = p
        .expect
        .map(|e| {
            vec![Check::new(
                "collision",
                found.is_some() == e,
                format!("collision found: {}, expected: {e}", found.is_some()),
            )]
        })
        .unwrap_or_default();
    Ok(RunReport {
        kind: ExperimentKind::Collide,
        summary,
        checks,
        files: Vec::new(),
    })
}

/// Largest precision whose full grid is checked exhaustively.
const EXHAUSTIVE_PRECISION: u32 = 10;

/// Counts grid points whose single-coordinate measurement fails to recover them.
pub fn interleave_failures(precision: u32, trials: usize, seed: u64) -> Result<(usize, usize)> {
    let scale = (1u64 << precision) as f64;
    let check = |i: u64, j: u64| -> Result<bool> {
        let (x, y) = (i as f64 / scale, j as f64 / scale);
        let (v, f) = graph_point(x, y, precision)?;
        let z = apply(&f, &v)?[0];
        Ok(deinterleave(z, precision)? == (x, y))
    };
    let mut checked = 0;
    let mut failures = 0;
    if precision <= EXHAUSTIVE_PRECISION {
        let side = 1u64 << precision;
        for i in 0..side {
            for j in 0..side {
                checked += 1;
                failures += usize::from(!check(i, j)?);
            }
        }
    }
    let mut rng = SeedStream::new(seed);
    let side = 1u64 << precision;
    for _ in 0..trials {
        let (i, j) = (rng.random_range(0..side), rng.random_range(0..side));
        checked += 1;
        failures += usize::from(!check(i, j)?);
    }
    Ok((checked, failures))
}

fn run_interleave(cfg: &ExperimentConfig, p: &InterleaveParams) -> Result<RunReport> {
    let (checked, failures) = interleave_failures(p.precision, p.trials, matrix_seed(cfg.master_seed))?;
    Ok(RunReport {
        kind: ExperimentKind::Interleave,
        summary: json!({ "precision": p.precision, "checked": checked, "failures": failures }),
        checks: vec![Check::new(
            "round_trip",
            failures == 0,
            format!("{failures} of {checked} points not recovered"),
        )],
        files: Vec::new(),
    })
}

/// Runs any experiment, writes its output files and returns the summary.
///
/// Outputs, when `output` is set: `dim` writes `rho,count` to the output
/// path and the regression diagnostics to `<stem>.json`; `recover` and
/// `kron` write `trial,status,residual`, the aggregate to
/// `<stem>.stats.csv` and an optional sweep to `<stem>.sweep.csv`; the other
/// kinds write their JSON summary.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    let mut report = match &cfg.params {
        Params::Dim(p) => {
            let (est, mut report) = run_dim(cfg, p)?;
            if let Some(out) = &cfg.output_path {
                est.write_csv(create(out)?)?;
                let side = out.with_extension("json");
                write_json(&side, &est.sidecar_json())?;
                report.files = vec![out.clone(), side];
            }
            return Ok(report);
        }
        Params::Recover(p) => return decoding_report(cfg, p.max_error, p.sweep_n),
        Params::Kron(p) => return decoding_report(cfg, p.max_error, p.sweep_n),
        Params::Nsp(p) => run_nsp(cfg, p)?,
        Params::Collide(p) => run_collide(cfg, p)?,
        Params::Interleave(p) => run_interleave(cfg, p)?,
    };
    if let Some(out) = &cfg.output_path {
        write_json(out, &report.summary)?;
        report.files.push(out.clone());
    }
    Ok(report)
}
