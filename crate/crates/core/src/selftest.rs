//! Oracle-versus-bound checks bundled for a quick health report.

use std::fmt;

use num_complex::Complex64;

use crate::bounds::{
    alpha_bound_valid, chi2_tail_bound, chi2_tail_threshold, lemma1_beta, mu_coherence_failure_bound_real,
    mu_coherence_probability, mu_thresholds,
    theorem1_beta_v, theorem1_error_bound, theorem1_error_bound_real, EPS_MAX,
};
use crate::error::Result;
use crate::experiments::{run_trials, ExperimentConfig, StartRule, Variant};
use crate::matrix::DenseMatrix;
use crate::maxvol::{cross_residual_norm, maxvol};
use crate::model::{build_ratio_model, SingularSpectrumSpec};
use crate::oracle::{best_cross_residual, chi2_tail_exact, chi2_tail_quadrature, coherence_failure_mc, sphere_tail_mc};
use crate::rng::{stream_rng, trial_stream};
use crate::scalar::Field;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn check(name: impl Into<String>, outcome: Result<(bool, String)>) -> Check {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

/// Sample sizes for the Monte Carlo checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Draws per Monte Carlo check (at least 10^4).
    pub mc_trials: usize,
    /// Small random matrices compared against the exhaustive cross search.
    pub oracle_models: usize,
}

impl Default for SelftestOptions {
    fn default() -> Self {
        SelftestOptions {
            seed: 0,
            mc_trials: 20_000,
            oracle_models: 20,
        }
    }
}

/// Runs every check; the suite passes iff every element has `passed`.
pub fn run_selftest(opts: &SelftestOptions) -> Vec<Check> {
    let mut out = vec![
        check("error-bound constants", bound_constants()),
        check("mu identities", mu_identities()),
    ];
    for (n, c) in [(10, 1.0), (50, 1.0), (100, 2.0), (500, 3.0)] {
        out.push(check(format!("chi-square tail n={n} c={c}"), chi2_check(n, c)));
    }
    for tau in [0.01, 0.02] {
        out.push(check(
            format!("sphere coordinate tail tau={tau}"),
            sphere_check(tau, opts),
        ));
    }
    out.push(check("coherence failure rate", coherence_check(opts)));
    out.push(check("exhaustive cross oracle", cross_oracle_check(opts)));
    out.push(check("ratio-8 experiment within 12 delta", ratio_eight_check(opts)));
    out
}

fn bound_constants() -> Result<(bool, String)> {
    let general = theorem1_error_bound(1.0, EPS_MAX)?;
    let real = theorem1_error_bound_real(1.0, EPS_MAX)?;
    let ok = (general - 12.0).abs() <= 1e-12 && (real - 6.0).abs() <= 1e-12;
    Ok((ok, format!("bound(1, 1/8) = {general}, real bound(1, 1/8) = {real}")))
}

fn mu_identities() -> Result<(bool, String)> {
    let points = 10_000;
    let mut worst = 0.0_f64;
    for i in 0..points {
        let eps = EPS_MAX * i as f64 / (points - 1) as f64;
        let (mu1, mu2) = mu_thresholds(eps)?;
        worst = worst.max((mu1 + mu2 - 1.0).abs()).max((mu1 * mu2 - 2.0 * eps).abs());
        let v_inf = 0.3;
        let bv = theorem1_beta_v(100, 2.0, eps, v_inf)?;
        worst = worst.max((bv - lemma1_beta(100, 2.0, mu1 * v_inf)?).abs());
    }
    Ok((worst <= 1e-12, format!("largest deviation {worst:.3e} over {points} points")))
}

fn chi2_check(n: usize, c: f64) -> Result<(bool, String)> {
    if !alpha_bound_valid(n, c)? {
        return Ok((true, "validity condition fails; bound not claimed".into()));
    }
    let t = chi2_tail_threshold(n, c)?;
    let quad = chi2_tail_quadrature(n, t)?.value;
    let exact = chi2_tail_exact(n, t)?.value;
    let bound = chi2_tail_bound(n, c)?;
    let agree = (quad - exact).abs() <= 1e-8 * exact;
    Ok((
        agree && quad <= bound,
        format!("quadrature tail {quad:.4e} (incomplete gamma {exact:.4e}) <= bound {bound:.4e}"),
    ))
}

fn sphere_check(tau: f64, opts: &SelftestOptions) -> Result<(bool, String)> {
    let (n, c) = (100, 2.0);
    let mut lines = Vec::new();
    let mut ok = true;
    for k in [1, 3, 5] {
        let est = sphere_tail_mc::<f64>(n, tau, k, opts.mc_trials, opts.seed ^ (k as u64))?;
        let bound = chi2_tail_bound(n, c)? + lemma1_beta(n, c, tau)?.powi(k as i32);
        ok &= est.value <= bound + 3.0 * est.std_error.unwrap_or(0.0);
        lines.push(format!("k={k}: {:.4} vs {:.4}", est.value, bound));
    }
    Ok((ok, lines.join(", ")))
}

fn coherence_check(opts: &SelftestOptions) -> Result<(bool, String)> {
    let (n, c) = (100, 2.0);
    let mu = 2.0 * c * (n as f64).ln();
    let complex = coherence_failure_mc::<Complex64>(n, mu, opts.mc_trials, opts.seed)?;
    let stated = 1.0 - mu_coherence_probability(n, c)?.raw;
    let real = coherence_failure_mc::<f64>(n, mu, opts.mc_trials, opts.seed)?;
    let corrected = mu_coherence_failure_bound_real(n, c)?;
    Ok((
        complex.value <= stated + 3.0 * complex.std_error.unwrap_or(0.0)
            && real.value <= corrected + 3.0 * real.std_error.unwrap_or(0.0),
        format!(
            "complex {:.3e} vs {stated:.3e}, real {:.3e} vs {corrected:.3e}",
            complex.value, real.value
        ),
    ))
}

/// Relative slack when two code paths evaluate the same residual.
pub const ROUNDOFF: f64 = 1e-12;

fn cross_oracle_check(opts: &SelftestOptions) -> Result<(bool, String)> {
    let spec = SingularSpectrumSpec {
        ratio: 16.0,
        rows: 15,
        cols: 15,
        field: Field::Real,
    };
    let mut ok = true;
    let mut checked = 0;
    for t in 0..opts.oracle_models {
        let mut rng = stream_rng(opts.seed, trial_stream(1, t));
        let model = build_ratio_model::<f64, _>(&spec, &mut rng)?;
        let a: &DenseMatrix<f64> = model.matrix();
        let (mu1, _) = mu_thresholds(model.epsilon())?;
        let v_inf = model.v_inf();
        let Some(start) = (0..spec.cols).find(|&j| model.v()[j].abs() > mu1 * v_inf) else {
            continue;
        };
        let trace = maxvol(a, start)?;
        let found = cross_residual_norm(a, &trace.pivot)?;
        let (_, best) = best_cross_residual(a)?;
        let bound = theorem1_error_bound(model.delta(), model.epsilon())?;
        // Same residual evaluated in a different order can differ in the last bits.
        ok &= best <= found * (1.0 + ROUNDOFF) && found <= bound + 1e-9;
        checked += 1;
    }
    Ok((ok, format!("{checked} models")))
}

fn ratio_eight_check(opts: &SelftestOptions) -> Result<(bool, String)> {
    let cfg = ExperimentConfig {
        ratios: vec![8.0],
        rows: 30,
        cols: 30,
        trials: 50,
        variant: Variant::Converge,
        start_policy: StartRule::VerifiedGood,
        master_seed: opts.seed,
        ..ExperimentConfig::default()
    };
    let recs = run_trials(&cfg)?;
    let worst = recs
        .iter()
        .filter_map(|r| r.err_over_delta)
        .fold(0.0_f64, f64::max);
    Ok((worst <= 12.0 + 1e-9, format!("max error {worst:.4} delta over {} trials", recs.len())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        let opts = SelftestOptions {
            seed: 1,
            mc_trials: 10_000,
            oracle_models: 5,
        };
        let checks = run_selftest(&opts);
        for c in &checks {
            assert!(c.passed, "{c}");
        }
    }
}
