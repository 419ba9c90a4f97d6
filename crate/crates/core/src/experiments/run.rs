use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, StartRule, Variant};
use crate::bounds::{
    large_entry_fraction, mu_thresholds, theorem1_error_bound, theorem2_error_bound, worst_case_bound, EPS_MAX,
    EPS_SNAP_TOL,
};
use crate::error::{Error, Result};
use crate::matrix::{cnorm, max_modulus};
use crate::maxvol::{
    cross_residual_norm, label_quality, maxvol, maxvol_fixed_steps, maxvol_max_among_viewed,
    scan_start_column_among, PivotTrace, StartPolicy,
};
use crate::model::{build_ratio_model, RankOneModel, SingularSpectrumSpec};
use crate::rng::{stream_rng, trial_stream};
use crate::scalar::{Field, Scalar};

/// Steps of the fixed-step variant.
pub const FIXED_STEPS: usize = 4;

/// Everything measured in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub ratio: f64,
    pub trial_index: usize,
    /// `|a_found| / max |A_ij|`.
    pub found_over_max: f64,
    /// Residual C-norm over `delta`; `None` for a degenerate pivot.
    pub err_over_delta: Option<f64>,
    /// Good-column labels; `None` when `eps > 1/8`.
    pub start_col_good: Option<bool>,
    pub final_col_good: Option<bool>,
    pub final_row_good: Option<bool>,
    pub steps: usize,
    pub epsilon: f64,
    /// `(sigma mu2^2 ||u||_inf ||v||_inf + delta) / max |A_ij|` when `eps <= 1/8`.
    pub lower_bound_value: Option<f64>,
    /// Error bound over `delta`: the theorem bound for the variant when
    /// `eps <= 1/8`, otherwise the worst-case bound.
    pub bound_err_over_delta: f64,
    /// Fraction of bad columns of `v`, i.e. the chance that a uniform start
    /// column is bad. `None` when `eps > 1/8`.
    pub bad_column_fraction: Option<f64>,
    pub found_abs: f64,
    pub lower_bound_abs: Option<f64>,
    pub degenerate: bool,
    /// Rejected draws of the verified-good start rule.
    pub resamples: usize,
    pub start_col: usize,
    pub pivot_row: usize,
    pub pivot_col: usize,
}

/// `eps` as seen by the bounds: values within rounding of 1/8 count as 1/8.
pub(crate) fn theorem_regime(eps: f64) -> bool {
    eps <= EPS_MAX * (1.0 + EPS_SNAP_TOL)
}

/// Error bound over `delta` used for `variant` at noise ratio `eps`.
pub fn error_bound_over_delta(variant: Variant, eps: f64) -> Result<f64> {
    if theorem_regime(eps) {
        match variant {
            Variant::Fixed4 => theorem2_error_bound(1.0, eps),
            Variant::Converge | Variant::MaxAmongViewed => theorem1_error_bound(1.0, eps),
        }
    } else {
        Ok(worst_case_bound(eps)? / eps)
    }
}

/// Runs trial `trial_index` of grid point `ratio_index`.
pub fn run_trial(config: &ExperimentConfig, ratio_index: usize, trial_index: usize) -> Result<TrialRecord> {
    match config.field {
        Field::Real => run_trial_typed::<f64>(config, ratio_index, trial_index),
        Field::Complex => run_trial_typed::<Complex64>(config, ratio_index, trial_index),
    }
}

fn run_trial_typed<T: Scalar>(config: &ExperimentConfig, ratio_index: usize, trial_index: usize) -> Result<TrialRecord> {
    let ratio = *config.ratios.get(ratio_index).ok_or(Error::IndexOutOfRange {
        axis: "ratio",
        index: ratio_index,
        len: config.ratios.len(),
    })?;
    let mut rng = stream_rng(config.master_seed, trial_stream(ratio_index, trial_index));
    let spec = SingularSpectrumSpec {
        ratio,
        rows: config.rows,
        cols: config.cols,
        field: config.field,
    };
    let model = build_ratio_model::<T, _>(&spec, &mut rng)?;
    let eps = model.epsilon();
    let thresholds = mu_thresholds(eps).ok();

    let (start_col, policy, resamples) = choose_start(config, &model, thresholds.map(|t| t.0), &mut rng)?;
    let a = model.matrix();
    let trace: PivotTrace<T> = match config.variant {
        Variant::Converge => maxvol(a, start_col)?,
        Variant::Fixed4 => maxvol_fixed_steps(a, start_col, FIXED_STEPS)?,
        Variant::MaxAmongViewed => maxvol_max_among_viewed(a, start_col, config.k)?,
    }
    .with_start_policy(policy);

    let max_abs = cnorm(a);
    let delta = model.delta();
    let found_abs = trace.pivot.abs_value;
    let err_over_delta = if trace.degenerate {
        None
    } else {
        Some(cross_residual_norm(a, &trace.pivot)? / delta)
    };
    let labels = match thresholds {
        Some(_) => Some(label_quality(&model, &trace)?),
        None => None,
    };
    let lower_bound_abs = thresholds.map(|(_, mu2)| mu2 * mu2 * model.signal_scale() + delta);
    let bad_column_fraction = match thresholds {
        Some(_) => Some(large_entry_fraction(model.v(), eps)?),
        None => None,
    };

    Ok(TrialRecord {
        ratio,
        trial_index,
        found_over_max: found_abs / max_abs,
        err_over_delta,
        start_col_good: labels.map(|l| l.start_col_good),
        final_col_good: labels.map(|l| l.final_col_good),
        final_row_good: labels.map(|l| l.final_row_good),
        steps: trace.steps,
        epsilon: eps,
        lower_bound_value: lower_bound_abs.map(|lb| lb / max_abs),
        bound_err_over_delta: error_bound_over_delta(config.variant, eps)?,
        bad_column_fraction,
        found_abs,
        lower_bound_abs,
        degenerate: trace.degenerate,
        resamples,
        start_col: trace.start_col,
        pivot_row: trace.pivot.row,
        pivot_col: trace.pivot.col,
    })
}

fn choose_start<T: Scalar, R: Rng + ?Sized>(
    config: &ExperimentConfig,
    model: &RankOneModel<T>,
    mu1: Option<f64>,
    rng: &mut R,
) -> Result<(usize, StartPolicy, usize)> {
    let n = config.cols;
    match config.start_policy {
        StartRule::RandomColumn => Ok((rng.random_range(0..n), StartPolicy::RandomColumn, 0)),
        StartRule::VerifiedGood => {
            let Some(mu1) = mu1 else {
                return Ok((rng.random_range(0..n), StartPolicy::RandomColumn, 0));
            };
            let threshold = match config.variant {
                Variant::Fixed4 => 4.0 * model.epsilon().min(EPS_MAX),
                Variant::Converge | Variant::MaxAmongViewed => mu1,
            };
            // The largest entry always passes (threshold <= 1/2), so this ends.
            let v = model.v();
            let bar = threshold * max_modulus(v);
            let mut resamples = 0;
            loop {
                let j = rng.random_range(0..n);
                if v[j].modulus() > bar {
                    return Ok((j, StartPolicy::VerifiedGood, resamples));
                }
                resamples += 1;
            }
        }
        StartRule::ScanK => {
            let cols = index::sample(rng, n, config.k).into_vec();
            let col = scan_start_column_among(model.matrix(), &cols)?;
            Ok((col, StartPolicy::ScanK(config.k), 0))
        }
    }
}

/// All trials of `config`, ordered by `(ratio, trial)` whatever the
/// execution order. Runs on the current rayon pool.
pub fn run_trials(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, usize)> = (0..config.ratios.len())
        .flat_map(|r| (0..config.trials).map(move |t| (r, t)))
        .collect();
    jobs.par_iter().map(|&(r, t)| run_trial(config, r, t)).collect()
}
