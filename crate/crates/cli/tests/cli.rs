use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn maxvol(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maxvol"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn value_of(text: &str, key: &str) -> String {
    let prefix = format!("{key} = ");
    text.lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("`{key}` missing in:\n{text}"))
        .to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn approx_hand_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "a.txt", "3 3 real\n1 2 3\n4 5 6\n7 8 10\n");
    let out = maxvol(&["approx", &m, "--start-col", "0", "--trace"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("pivot = (2, 2) = 1.0000000000000000e1"), "{text}");
    assert_eq!(value_of(&text, "steps"), "2");
    assert!(text.contains("visit 0: (2, 0)"));
}

#[test]
fn approx_rank_one_residual_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "r1.txt", "3 2 real\n1 2\n2 4\n-3 -6\n");
    let out = maxvol(&["approx", &m]);
    assert!(out.status.success());
    let r: f64 = value_of(&stdout(&out), "residual_cnorm").parse().unwrap();
    assert!(r <= 1e-12);
}

#[test]
fn approx_complex_and_fixed4() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(
        dir.path(),
        "c.txt",
        "2 3 complex\n1+1i 0.5-2i 3\n-1i 2+0i 1e-1+1e-1i\n",
    );
    let out = maxvol(&["approx", &m, "--variant", "fixed4", "--start-col", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let steps: usize = value_of(&stdout(&out), "steps").parse().unwrap();
    assert!(steps <= 4);
}

#[test]
fn approx_parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "bad.txt", "2 2 real\n1 2\n3 oops\n");
    let out = maxvol(&["approx", &m]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    assert!(err.contains("line 3") && err.contains("column 3"), "{err}");
}

#[test]
fn missing_file_is_io_error() {
    let out = maxvol(&["approx", "/definitely/not/here.txt"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bounds_values() {
    let out = maxvol(&["bounds", "--eps", "0.125", "--delta", "1"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(value_of(&stdout(&out), "error_bound"), "12");
    let out = maxvol(&["bounds", "--eps", "0", "--delta", "1"]);
    assert_eq!(value_of(&stdout(&out), "error_bound"), "4");
}

#[test]
fn bounds_rejects_large_eps() {
    let out = maxvol(&["bounds", "--eps", "0.2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("1/8"));
}

#[test]
fn unknown_flag_and_subcommand_fail() {
    assert_eq!(maxvol(&["bounds", "--eps", "0.1", "--bogus", "1"]).status.code(), Some(1));
    assert_eq!(maxvol(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(maxvol(&["--help"]).status.code(), Some(0));
}

#[test]
fn experiment_requires_seed() {
    let dir = tempfile::tempdir().unwrap();
    let out = maxvol(&["experiment", "--trials", "1", "--ratios", "8", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("seed"));
}

fn run_small(dir: &Path, extra: &[&str]) -> (String, String) {
    let trials = if extra.contains(&"--trials") { vec![] } else { vec!["--trials", "1"] };
    let mut args = vec!["experiment"];
    args.extend(trials);
    args.extend([
        "--ratios",
        "8",
        "--m",
        "30",
        "--n",
        "30",
        "--seed",
        "7",
        "--output",
        dir.to_str().unwrap(),
    ]);
    args.extend_from_slice(extra);
    let out = maxvol(&args);
    assert!(out.status.success(), "{}", stderr(&out));
    (
        fs::read_to_string(dir.join("trials.csv")).unwrap(),
        fs::read_to_string(dir.join("summary.csv")).unwrap(),
    )
}

#[test]
fn experiment_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let first = run_small(a.path(), &[]);
    let second = run_small(b.path(), &["--threads", "2"]);
    assert_eq!(first, second);
    assert!(first.0.starts_with("ratio,trial,found_over_max,"));
}

#[test]
fn experiment_config_file_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let cfg = write(
        dir.path(),
        "exp.cfg",
        &format!(
            "ratios = 4, 8\nm = 20\nn = 20\ntrials = 2\nmaster_seed = 3\noutput_path = {}\n",
            out_dir.display()
        ),
    );
    let out = maxvol(&["experiment", "--config", &cfg, "--ratios", "16"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().starts_with("1.6000000000000000e1,"));
}

#[test]
fn experiment_verified_good_reports_bad_column_rates() {
    let dir = tempfile::tempdir().unwrap();
    let (_, summary) = run_small(dir.path(), &["--start-policy", "verified-good", "--trials", "5"]);
    let row: Vec<&str> = summary.lines().nth(1).unwrap().split(',').collect();
    let p_random: f64 = row[7].parse().unwrap();
    let p_algo: f64 = row[8].parse().unwrap();
    assert!(p_algo <= p_random);
}

#[test]
fn experiment_bad_config_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.cfg", "master_seed = 1\nratio = 8\n");
    let out = maxvol(&["experiment", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 2"));
}

#[test]
fn experiment_unwritable_output_is_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let out = maxvol(&[
        "experiment", "--trials", "1", "--ratios", "8", "--seed", "1", "--output", &format!("{blocker}/sub"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_subcommands() {
    let out = maxvol(&["oracle", "chi2", "--n", "2", "--threshold", "2"]);
    assert!(out.status.success());
    let v: f64 = value_of(&stdout(&out), "value").parse().unwrap();
    assert!((v - (-1.0f64).exp()).abs() < 1e-14);

    let out = maxvol(&["oracle", "coherence", "--n", "50", "--mu", "10", "--trials", "10000", "--seed", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("std_error"));

    let out = maxvol(&["oracle", "sphere-tail", "--n", "10", "--tau", "0.1", "--trials", "100", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let m = write(dir.path(), "b.txt", "2 2 real\n1 1\n1 3\n");
    let out = maxvol(&["oracle", "best-cross", &m]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("max_entry = (1, 1)"));
}

#[test]
fn selftest_passes() {
    let out = maxvol(&["selftest", "--seed", "2", "--mc-trials", "10000"]);
    let text = stdout(&out);
    assert!(out.status.success(), "{text}");
    assert!(text.contains("chi-square tail n=10 c=1"));
    assert!(!text.contains("[FAIL]"));
}
