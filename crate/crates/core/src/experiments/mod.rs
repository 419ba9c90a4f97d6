//! Seeded Monte Carlo sweeps over the signal-to-noise ratio `x`.
//!
//! Each trial draws a ratio model, picks a start column, runs one search
//! variant and records how large the found element is and how well the
//! resulting cross approximates the matrix.

mod config;
mod output;
mod run;

pub use config::{parse_config_text, ExperimentConfig, StartRule, Variant, CONFIG_KEYS, DEFAULT_RATIOS};
pub use output::{
    bound_curves, format_summary_table, run_experiment, run_experiment_with_threads, summarize, write_summary_csv, write_trials_csv,
    BoundCurvePoint, ExperimentOutput, SummaryRow, SUMMARY_HEADER, TRIALS_HEADER,
};
pub use run::{error_bound_over_delta, run_trial, run_trials, TrialRecord, FIXED_STEPS};
