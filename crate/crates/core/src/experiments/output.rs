use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use super::config::{ExperimentConfig, Variant};
use super::run::{error_bound_over_delta, run_trials, theorem_regime, TrialRecord};
use crate::bounds::{mu_thresholds, worst_case_bound};
use crate::error::{Error, Result};
use crate::scalar::format_f64;

pub const TRIALS_HEADER: &str =
    "ratio,trial,found_over_max,err_over_delta,start_good,final_good,steps,epsilon,lower_bound,err_bound";
pub const SUMMARY_HEADER: &str =
    "ratio,mean_found,min_found,mean_err,max_err,lower_bound_curve,err_bound_curve,p_bad_random,p_bad_algo";

/// Per-ratio aggregate. Fields are `None` when no trial defines them.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub ratio: f64,
    pub mean_found_over_max: f64,
    pub min_found_over_max: f64,
    pub mean_err_over_delta: Option<f64>,
    pub max_err_over_delta: Option<f64>,
    pub lower_bound_curve: Option<f64>,
    pub error_bound_curve: f64,
    pub p_bad_random_start: Option<f64>,
    pub p_bad_after_algorithm: Option<f64>,
    pub trials: usize,
    /// Trials with a zero pivot; excluded from the error statistics.
    pub degenerate: usize,
    pub resamples: usize,
}

/// Bound curves at the nominal `eps = 1/x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCurvePoint {
    pub ratio: f64,
    pub eps: f64,
    /// Error bound over `delta`.
    pub err_bound_over_delta: f64,
    /// `mu2^2 + eps`: the found-element lower bound in units of
    /// `sigma ||u||_inf ||v||_inf`. `None` when `eps > 1/8`.
    pub lower_bound_over_signal: Option<f64>,
    /// Worst-case bound in units of `sigma ||u||_inf ||v||_inf`, when it is
    /// the one in use.
    pub worst_case: Option<f64>,
}

pub fn bound_curves(config: &ExperimentConfig) -> Result<Vec<BoundCurvePoint>> {
    config
        .ratios
        .iter()
        .map(|&ratio| bound_curve_point(config.variant, ratio))
        .collect()
}

fn bound_curve_point(variant: Variant, ratio: f64) -> Result<BoundCurvePoint> {
    let eps = 1.0 / ratio;
    let regime = theorem_regime(eps);
    Ok(BoundCurvePoint {
        ratio,
        eps,
        err_bound_over_delta: error_bound_over_delta(variant, eps)?,
        lower_bound_over_signal: if regime {
            let (_, mu2) = mu_thresholds(eps)?;
            Some(mu2 * mu2 + eps)
        } else {
            None
        },
        worst_case: if regime { None } else { Some(worst_case_bound(eps)?) },
    })
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates `records` (ordered by ratio, as produced by the runner).
pub fn summarize(config: &ExperimentConfig, records: &[TrialRecord]) -> Result<Vec<SummaryRow>> {
    let curves = bound_curves(config)?;
    let mut rows = Vec::with_capacity(config.ratios.len());
    for (ri, curve) in curves.iter().enumerate() {
        let group = &records[ri * config.trials..(ri + 1) * config.trials];
        let errs = || group.iter().filter_map(|r| r.err_over_delta);
        let labelled: Vec<bool> = group.iter().filter_map(|r| r.final_col_good).collect();
        rows.push(SummaryRow {
            ratio: curve.ratio,
            mean_found_over_max: mean(group.iter().map(|r| r.found_over_max)).unwrap_or(f64::NAN),
            min_found_over_max: group.iter().map(|r| r.found_over_max).fold(f64::INFINITY, f64::min),
            mean_err_over_delta: mean(errs()),
            max_err_over_delta: errs().reduce(f64::max),
            lower_bound_curve: mean(group.iter().filter_map(|r| r.lower_bound_value)),
            error_bound_curve: curve.err_bound_over_delta,
            p_bad_random_start: mean(group.iter().filter_map(|r| r.bad_column_fraction)),
            p_bad_after_algorithm: (!labelled.is_empty())
                .then(|| labelled.iter().filter(|good| !**good).count() as f64 / labelled.len() as f64),
            trials: group.len(),
            degenerate: group.iter().filter(|r| r.degenerate).count(),
            resamples: group.iter().map(|r| r.resamples).sum(),
        });
    }
    Ok(rows)
}

fn opt(x: Option<f64>) -> String {
    x.map(format_f64).unwrap_or_default()
}

fn flag(x: Option<bool>) -> &'static str {
    match x {
        Some(true) => "1",
        Some(false) => "0",
        None => "",
    }
}

/// Writes `trials.csv`. Undefined fields are left empty.
pub fn write_trials_csv<W: Write>(mut out: W, records: &[TrialRecord]) -> Result<()> {
    writeln!(out, "{TRIALS_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            format_f64(r.ratio),
            r.trial_index,
            format_f64(r.found_over_max),
            opt(r.err_over_delta),
            flag(r.start_col_good),
            flag(r.final_col_good),
            r.steps,
            format_f64(r.epsilon),
            opt(r.lower_bound_value),
            format_f64(r.bound_err_over_delta),
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary_csv<W: Write>(mut out: W, rows: &[SummaryRow]) -> Result<()> {
    writeln!(out, "{SUMMARY_HEADER}")?;
    for s in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            format_f64(s.ratio),
            format_f64(s.mean_found_over_max),
            format_f64(s.min_found_over_max),
            opt(s.mean_err_over_delta),
            opt(s.max_err_over_delta),
            opt(s.lower_bound_curve),
            format_f64(s.error_bound_curve),
            opt(s.p_bad_random_start),
            opt(s.p_bad_after_algorithm),
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Fixed-width table for terminals.
pub fn format_summary_table(rows: &[SummaryRow]) -> String {
    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
    let mut s = format!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>6} {:>9}\n",
        "ratio", "mean_found", "min_found", "mean_err", "max_err", "lower_bd", "err_bound", "p_bad_rnd", "p_bad_alg",
        "degen", "resamples"
    );
    for r in rows {
        s.push_str(&format!(
            "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10} {:>6} {:>9}\n",
            r.ratio,
            cell(Some(r.mean_found_over_max)),
            cell(Some(r.min_found_over_max)),
            cell(r.mean_err_over_delta),
            cell(r.max_err_over_delta),
            cell(r.lower_bound_curve),
            cell(Some(r.error_bound_curve)),
            cell(r.p_bad_random_start),
            cell(r.p_bad_after_algorithm),
            r.degenerate,
            r.resamples,
        ));
    }
    s
}

/// Result of [`run_experiment`].
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub trials: Vec<TrialRecord>,
    pub summary: Vec<SummaryRow>,
    pub curves: Vec<BoundCurvePoint>,
    pub warnings: Vec<String>,
    pub trials_path: PathBuf,
    pub summary_path: PathBuf,
}

/// Runs every trial and writes `trials.csv` and `summary.csv` into
/// `config.output_path`. Both files are created before any trial runs, so an
/// unwritable directory fails fast.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let warnings = config.validate()?;
    fs::create_dir_all(&config.output_path)?;
    let trials_path = config.output_path.join("trials.csv");
    let summary_path = config.output_path.join("summary.csv");
    let trials_file = File::create(&trials_path)?;
    let summary_file = File::create(&summary_path)?;

    let trials = run_trials(config)?;
    let summary = summarize(config, &trials)?;
    write_trials_csv(BufWriter::new(trials_file), &trials)?;
    write_summary_csv(BufWriter::new(summary_file), &summary)?;
    Ok(ExperimentOutput {
        curves: bound_curves(config)?,
        trials,
        summary,
        warnings,
        trials_path,
        summary_path,
    })
}

/// [`run_experiment`] on a dedicated pool of `threads` workers (`None`: the
/// global pool). Output does not depend on the thread count.
pub fn run_experiment_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<ExperimentOutput> {
    match threads {
        None => run_experiment(config),
        Some(0) => Err(Error::param("threads", "must be at least 1")),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::param("threads", e.to_string()))?
            .install(|| run_experiment(config)),
    }
}
