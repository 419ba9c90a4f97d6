use std::fs;

use maxvol_rank1::experiments::{
    run_experiment, run_experiment_with_threads, run_trials, summarize, ExperimentConfig, StartRule, Variant,
    SUMMARY_HEADER, TRIALS_HEADER,
};
use maxvol_rank1::{Error, Field};

fn small(dir: &std::path::Path) -> ExperimentConfig {
    ExperimentConfig {
        ratios: vec![2.0, 8.0, 32.0],
        rows: 25,
        cols: 30,
        trials: 12,
        master_seed: 42,
        output_path: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

#[test]
fn output_is_independent_of_thread_count() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let one = run_experiment_with_threads(&small(a.path()), Some(1)).unwrap();
    let four = run_experiment_with_threads(&small(b.path()), Some(4)).unwrap();
    assert_eq!(one.trials, four.trials);
    for name in ["trials.csv", "summary.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap());
    }
    assert!(run_experiment_with_threads(&small(a.path()), Some(0)).is_err());
}

#[test]
fn records_are_ordered_and_files_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path());
    let out = run_experiment(&cfg).unwrap();
    for (i, rec) in out.trials.iter().enumerate() {
        assert_eq!(rec.ratio, cfg.ratios[i / cfg.trials]);
        assert_eq!(rec.trial_index, i % cfg.trials);
    }
    let trials = fs::read_to_string(&out.trials_path).unwrap();
    let summary = fs::read_to_string(&out.summary_path).unwrap();
    assert_eq!(trials.lines().next(), Some(TRIALS_HEADER));
    assert_eq!(summary.lines().next(), Some(SUMMARY_HEADER));
    assert_eq!(trials.lines().count(), 1 + cfg.ratios.len() * cfg.trials);
    assert_eq!(summary.lines().count(), 1 + cfg.ratios.len());
    let columns = TRIALS_HEADER.split(',').count();
    assert!(trials.lines().all(|l| l.split(',').count() == columns));
    // x = 2 is outside the theorem regime: a warning, and no good/bad labels.
    assert!(!out.warnings.is_empty());
    assert_eq!(out.summary[0].p_bad_after_algorithm, None);
    assert!(out.summary[1].p_bad_after_algorithm.is_some());
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let mut cfg = small(&blocker.join("sub"));
    cfg.trials = 1_000_000_000;
    assert!(matches!(run_experiment(&cfg), Err(Error::Io(_))));
}

#[test]
fn strong_signal_finds_the_maximum() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.ratios = vec![1e6];
    cfg.start_policy = StartRule::RandomColumn;
    let out = run_experiment(&cfg).unwrap();
    assert!(out.summary[0].min_found_over_max >= 0.999);
}

#[test]
fn random_start_rate_is_the_bad_column_fraction() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.ratios = vec![8.0];
    cfg.trials = 400;
    cfg.start_policy = StartRule::RandomColumn;
    let trials = run_trials(&cfg).unwrap();
    let row = &summarize(&cfg, &trials).unwrap()[0];
    let p = row.p_bad_random_start.unwrap();
    // The empirical bad-start rate tracks the mean fraction of bad columns.
    let observed = trials.iter().filter(|r| r.start_col_good == Some(false)).count() as f64 / trials.len() as f64;
    let se = (p * (1.0 - p) / trials.len() as f64).sqrt();
    assert!((observed - p).abs() <= 4.0 * se + 1e-12, "{observed} vs {p}");
    assert!(row.p_bad_after_algorithm.unwrap() <= p);
}

#[test]
fn single_trial_summary() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.trials = 1;
    let out = run_experiment(&cfg).unwrap();
    for row in &out.summary {
        assert_eq!(row.mean_found_over_max, row.min_found_over_max);
        assert_eq!(row.mean_err_over_delta, row.max_err_over_delta);
    }
}

#[test]
fn every_variant_and_field_runs() {
    let dir = tempfile::tempdir().unwrap();
    for variant in [Variant::Converge, Variant::Fixed4, Variant::MaxAmongViewed] {
        for start_policy in [StartRule::RandomColumn, StartRule::VerifiedGood, StartRule::ScanK] {
            for field in [Field::Real, Field::Complex] {
                let cfg = ExperimentConfig {
                    ratios: vec![8.0, 64.0],
                    rows: 12,
                    cols: 10,
                    trials: 4,
                    variant,
                    start_policy,
                    field,
                    k: 3,
                    master_seed: 1,
                    output_path: dir.path().to_path_buf(),
                };
                let out = run_experiment(&cfg).unwrap();
                for rec in &out.trials {
                    assert!(!rec.degenerate);
                    if variant == Variant::Fixed4 {
                        assert!(rec.steps <= 4);
                    }
                    if start_policy == StartRule::VerifiedGood && variant != Variant::Fixed4 {
                        assert_eq!(rec.start_col_good, Some(true));
                    }
                }
            }
        }
    }
}

#[test]
fn invalid_configs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let base = small(dir.path());
    let bad = [
        ExperimentConfig { ratios: vec![], ..base.clone() },
        ExperimentConfig { ratios: vec![-1.0], ..base.clone() },
        ExperimentConfig { trials: 0, ..base.clone() },
        ExperimentConfig { rows: 1, ..base.clone() },
        ExperimentConfig { k: 0, start_policy: StartRule::ScanK, ..base.clone() },
        ExperimentConfig { k: 31, start_policy: StartRule::ScanK, ..base.clone() },
    ];
    for cfg in bad {
        assert!(run_trials(&cfg).is_err(), "{cfg:?}");
    }
}
