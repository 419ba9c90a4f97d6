//! Closed-form constants, probabilities and error bounds for rank-1 maxvol.
//!
//! Every function checks its domain and returns an error instead of a NaN.
//! Probabilities are clamped to `[0, 1]`; [`ClampedProbability::vacuous`]
//! records when clamping was needed.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::matrix::max_modulus;
use crate::scalar::Scalar;

/// Largest noise-to-signal ratio for which `mu1`, `mu2` are real.
pub const EPS_MAX: f64 = 0.125;

/// A probability bound clamped to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedProbability {
    pub value: f64,
    /// Unclamped expression.
    pub raw: f64,
    /// The raw expression left `[0, 1]`, so the bound says nothing.
    pub vacuous: bool,
}

impl ClampedProbability {
    pub fn new(raw: f64) -> Self {
        let vacuous = !(0.0..=1.0).contains(&raw);
        ClampedProbability {
            value: raw.clamp(0.0, 1.0),
            raw,
            vacuous,
        }
    }
}

/// A value with a flag marking a degenerate or boundary evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged {
    pub value: f64,
    pub flagged: bool,
}

fn check_n(n: usize) -> Result<f64> {
    if n <= 2 {
        return Err(Error::Domain(format!("n must exceed 2, got {n}")));
    }
    Ok(n as f64)
}

fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("{name} must be nonnegative, got {x}")));
    }
    Ok(())
}

/// Relative slack above 1/8 still treated as 1/8; absorbs rounding in a
/// computed `eps` when the signal-to-noise ratio is exactly 8.
pub const EPS_SNAP_TOL: f64 = 1e-12;

/// Validates `eps` and snaps values within rounding of 1/8 onto 1/8.
fn check_eps(eps: f64) -> Result<f64> {
    if eps.is_nan() || eps < 0.0 {
        return Err(Error::Domain(format!("eps must lie in [0, 1/8], got {eps}")));
    }
    if eps > EPS_MAX * (1.0 + EPS_SNAP_TOL) {
        return Err(Error::ThresholdsUndefined { eps });
    }
    Ok(eps.min(EPS_MAX))
}

fn check_unit_interval(name: &'static str, x: f64) -> Result<()> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::Domain(format!("{name} must lie in (0, 1], got {x}")));
    }
    Ok(())
}

/// Chi-square tail point `n - 2 + 2 sqrt(c (n-2) ln n)`.
pub fn chi2_tail_threshold(n: usize, c: f64) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("c", c)?;
    Ok(nf - 2.0 + 2.0 * (c * (nf - 2.0) * nf.ln()).sqrt())
}

/// `n - 2 - 2 sqrt(c (n-2) ln n)`; may be negative for small `n`.
fn chi2_lower_point(nf: f64, c: f64) -> f64 {
    nf - 2.0 - 2.0 * (c * (nf - 2.0) * nf.ln()).sqrt()
}

/// Constant `alpha` of the chi-square tail bound
/// `P(x > chi2_tail_threshold(n, c)) <= alpha n^{-c}`.
pub fn alpha_const(n: usize, c: f64) -> Result<f64> {
    let nf = check_n(n)?;
    check_positive("c", c)?;
    let ln_n = nf.ln();
    let prefactor = 1.0 / (PI * (nf - 2.0)).sqrt() + 1.0 / (2.0 * (c * PI * ln_n).sqrt());
    let exponent = (4.0 / 3.0) * (c.powi(3) * ln_n.powi(3) / (nf - 2.0)).sqrt();
    Ok(prefactor * exponent.exp())
}

/// The tail bound decays like `n^{-c}` only while
/// `(4/3) sqrt(c ln n / (n-2)) < 1`.
pub fn alpha_bound_valid(n: usize, c: f64) -> Result<bool> {
    let nf = check_n(n)?;
    check_positive("c", c)?;
    Ok((4.0 / 3.0) * (c * nf.ln() / (nf - 2.0)).sqrt() < 1.0)
}

/// `alpha n^{-c}`, the chi-square tail bound itself.
pub fn chi2_tail_bound(n: usize, c: f64) -> Result<f64> {
    Ok(alpha_const(n, c)? * (n as f64).powf(-c))
}

/// `beta = sqrt(2 tau^2 (n - 2 + 2 sqrt(c (n-2) ln n)) / pi)`: bound on the
/// probability that one coordinate of a sphere-uniform vector is below `tau`.
pub fn lemma1_beta(n: usize, c: f64, tau: f64) -> Result<f64> {
    check_nonnegative("tau", tau)?;
    let t = chi2_tail_threshold(n, c)?;
    Ok((2.0 * tau * tau * t / PI).sqrt())
}

/// Probability `1 - alpha n^{-c} - beta^k` that among `k` preselected
/// coordinates of a sphere-uniform vector at least one has modulus `>= tau`.
pub fn lemma1_probability(n: usize, c: f64, tau: f64, k: usize) -> Result<ClampedProbability> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let beta = lemma1_beta(n, c, tau)?;
    Ok(ClampedProbability::new(1.0 - chi2_tail_bound(n, c)? - beta.powi(k as i32)))
}

/// Roots `mu1 <= mu2` of `mu^2 - mu + 2 eps = 0`.
pub fn mu_thresholds(eps: f64) -> Result<(f64, f64)> {
    let eps = check_eps(eps)?;
    let s = (1.0 - 8.0 * eps).sqrt();
    Ok(((1.0 - s) / 2.0, (1.0 + s) / 2.0))
}

/// `beta_v = (1 - sqrt(1 - 8 eps)) ||v||_inf sqrt(n - 2 + 2 sqrt(c (n-2) ln n)) / sqrt(2 pi)`.
pub fn theorem1_beta_v(n: usize, c: f64, eps: f64, v_inf: f64) -> Result<f64> {
    let eps = check_eps(eps)?;
    check_unit_interval("v_inf", v_inf)?;
    let t = chi2_tail_threshold(n, c)?;
    Ok((1.0 - (1.0 - 8.0 * eps).sqrt()) * v_inf * t.sqrt() / (2.0 * PI).sqrt())
}

/// Upper estimate `8 eps ||v||_inf sqrt(...) / sqrt(2 pi)` of `beta_v`; also the
/// `beta_v` used by the fixed four-step variant.
pub fn beta_v_upper(n: usize, c: f64, eps: f64, v_inf: f64) -> Result<f64> {
    let eps = check_eps(eps)?;
    check_unit_interval("v_inf", v_inf)?;
    let t = chi2_tail_threshold(n, c)?;
    Ok(8.0 * eps * v_inf * t.sqrt() / (2.0 * PI).sqrt())
}

/// Success probability `1 - alpha n^{-c} - beta_v^k` of the scan-`k`-columns start.
pub fn theorem1_probability(n: usize, c: f64, eps: f64, v_inf: f64, k: usize) -> Result<ClampedProbability> {
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let beta_v = theorem1_beta_v(n, c, eps, v_inf)?;
    Ok(ClampedProbability::new(1.0 - chi2_tail_bound(n, c)? - beta_v.powi(k as i32)))
}

/// `||A - c a^{-1} r||_C <= 8 delta (1 + eps) / (1 + sqrt(1 - 8 eps) - 2 eps)`.
pub fn theorem1_error_bound(delta: f64, eps: f64) -> Result<f64> {
    check_nonnegative("delta", delta)?;
    let eps = check_eps(eps)?;
    Ok(8.0 * delta * (1.0 + eps) / (1.0 + (1.0 - 8.0 * eps).sqrt() - 2.0 * eps))
}

/// `4 delta (1 + 16 eps)`, which dominates [`theorem1_error_bound`].
pub fn theorem1_error_bound_simplified(delta: f64, eps: f64) -> Result<f64> {
    check_nonnegative("delta", delta)?;
    let eps = check_eps(eps)?;
    Ok(4.0 * delta * (1.0 + 16.0 * eps))
}

/// Real-matrix bound `4 delta (1 + 4 eps)`.
pub fn theorem1_error_bound_real(delta: f64, eps: f64) -> Result<f64> {
    check_nonnegative("delta", delta)?;
    let eps = check_eps(eps)?;
    Ok(4.0 * delta * (1.0 + 4.0 * eps))
}

/// Error bound of the fixed four-step search: `4 delta (1 + 16 eps)`.
pub fn theorem2_error_bound(delta: f64, eps: f64) -> Result<f64> {
    theorem1_error_bound_simplified(delta, eps)
}

/// Number of scanned columns `c ln n / ln(1 / beta_v)` (real-valued; round up).
///
/// `beta_v <= 0` means a single column is enough: returns 1 with the flag set.
pub fn required_k(n: usize, c: f64, beta_v: f64) -> Result<Flagged> {
    let nf = check_n(n)?;
    check_positive("c", c)?;
    if beta_v.is_nan() {
        return Err(Error::Domain("beta_v is NaN".into()));
    }
    if beta_v >= 1.0 {
        return Err(Error::Vacuous(format!(
            "beta_v = {beta_v} >= 1, no number of columns suffices"
        )));
    }
    if beta_v <= 0.0 {
        return Ok(Flagged {
            value: 1.0,
            flagged: true,
        });
    }
    Ok(Flagged {
        value: c * nf.ln() / (1.0 / beta_v).ln(),
        flagged: false,
    })
}

/// Lower bounds of the fixed-step recurrence `nu_{k+1} >= 1 - 2 eps / nu_k`
/// started from `nu_1 = 4 eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NuSequence {
    pub nu1: f64,
    /// `None` when `eps = 0` (the recurrence divides by `nu_1 = 0`).
    pub nu2_lb: Option<f64>,
    pub nu3_lb: Option<f64>,
}

pub fn theorem2_nu_sequence(eps: f64) -> Result<NuSequence> {
    let eps = check_eps(eps)?;
    let nu1 = 4.0 * eps;
    if nu1 == 0.0 {
        return Ok(NuSequence {
            nu1,
            nu2_lb: None,
            nu3_lb: None,
        });
    }
    let nu2 = 1.0 - 2.0 * eps / nu1;
    let nu3 = 1.0 - 2.0 * eps / nu2;
    Ok(NuSequence {
        nu1,
        nu2_lb: Some(nu2),
        nu3_lb: Some(nu3),
    })
}

/// Constants of the k-step bound for square real matrices with independent noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem3Constants {
    /// `eps0 = 2 ln n / n`.
    pub eps0: f64,
    /// `mu0 = c0 ln n / (n sqrt(2 (n - 2 - 2 sqrt(c (n-2) ln n)) / pi))`.
    pub mu0: f64,
    /// `tau = mu1 ||u||_inf + eps0 delta / (sigma mu0)`.
    pub tau: f64,
    /// Lemma-1 `beta` at `tau`.
    pub beta: f64,
    /// `gamma` in the stated (looser) form, with `n - 2 + 2 sqrt(...)`.
    pub gamma: f64,
    /// `1 - sqrt(2 tau^2 (n - 2 - 2 sqrt(...)) / pi)`, the form used inside the
    /// derivation.
    pub gamma_proof: f64,
    pub alpha: f64,
    /// `alpha0 = exp(gamma k^2 ln^2 n / (2 n))`.
    pub alpha0: f64,
    /// `1 - 2 alpha n^{-c} - alpha0 n^{-gamma k} - (c0 ln n / n)^k`.
    pub success_probability: ClampedProbability,
    /// `gamma <= 0`, `c0 ln n >= n`, or the probability was clamped.
    pub vacuous: bool,
}

pub fn theorem3_constants(
    n: usize,
    c: f64,
    c0: f64,
    eps: f64,
    u_inf: f64,
    v_inf: f64,
    k: usize,
) -> Result<Theorem3Constants> {
    let nf = check_n(n)?;
    check_positive("c", c)?;
    check_positive("c0", c0)?;
    check_unit_interval("u_inf", u_inf)?;
    check_unit_interval("v_inf", v_inf)?;
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    let (mu1, _) = mu_thresholds(eps)?;
    let ln_n = nf.ln();
    let upper = chi2_tail_threshold(n, c)?;
    let lower = chi2_lower_point(nf, c);
    if lower <= 0.0 {
        return Err(Error::Domain(format!(
            "n - 2 - 2 sqrt(c (n-2) ln n) = {lower} <= 0; mu0 is undefined for n = {n}, c = {c}"
        )));
    }
    let eps0 = 2.0 * ln_n / nf;
    let mu0 = c0 * ln_n / (nf * (2.0 * lower / PI).sqrt());
    // delta / sigma = eps ||u||_inf ||v||_inf
    let tau = mu1 * u_inf + eps0 * eps * u_inf * v_inf / mu0;
    let beta = (2.0 * tau * tau * upper / PI).sqrt();
    let gamma = 1.0 - beta - (2.0 * eps * u_inf * v_inf / c0) * (2.0 * upper / PI);
    let gamma_proof = 1.0 - (2.0 * tau * tau * lower / PI).sqrt();
    let alpha = alpha_const(n, c)?;
    let kf = k as f64;
    let alpha0 = (gamma * kf * kf * ln_n * ln_n / (2.0 * nf)).exp();
    let coverage = c0 * ln_n / nf;
    let raw = 1.0
        - 2.0 * alpha * nf.powf(-c)
        - alpha0 * nf.powf(-gamma * kf)
        - coverage.powi(k as i32);
    let success_probability = ClampedProbability::new(raw);
    Ok(Theorem3Constants {
        eps0,
        mu0,
        tau,
        beta,
        gamma,
        gamma_proof,
        alpha,
        alpha0,
        success_probability,
        vacuous: gamma <= 0.0 || coverage >= 1.0 || success_probability.vacuous,
    })
}

/// `true` iff `||v||_inf <= sqrt(mu / n)`, up to rounding in the last bits.
pub fn mu_coherence_check<T: Scalar>(v: &[T], mu: f64) -> bool {
    let n = v.len() as f64;
    let inf = max_modulus(v);
    inf * inf * n <= mu * (1.0 + 4.0 * f64::EPSILON)
}

/// Probability `1 - n^{-c(1 - 1/n)} / sqrt(c ln n)` that a sphere-uniform
/// vector is `mu`-coherent with `mu = 2 c ln n`.
pub fn mu_coherence_probability(n: usize, c: f64) -> Result<ClampedProbability> {
    if n <= 1 {
        return Err(Error::Domain(format!("n must exceed 1, got {n}")));
    }
    check_positive("c", c)?;
    let nf = n as f64;
    Ok(ClampedProbability::new(
        1.0 - nf.powf(-c * (1.0 - 1.0 / nf)) / (c * nf.ln()).sqrt(),
    ))
}

/// `sqrt(2 c ln n / n)`: the largest `||v||_inf` of a vector that is
/// `mu`-coherent with `mu = 2 c ln n`, capped at 1.
pub fn coherent_inf_bound(n: usize, c: f64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::Domain(format!("n must exceed 1, got {n}")));
    }
    check_positive("c", c)?;
    let nf = n as f64;
    Ok((2.0 * c * nf.ln() / nf).sqrt().min(1.0))
}

/// Failure bound `n sqrt(n / (pi c (n-1) ln n)) n^{-c(1 - 1/n)}` for a
/// sphere-uniform vector in `R^n` and `mu = 2 c ln n`.
///
/// The per-coordinate tail of a real sphere vector decays only like a
/// chi-square with one degree of freedom, so the union over `n` coordinates
/// keeps its factor `n`; [`mu_coherence_probability`] holds for the complex
/// sphere but not for the real one.
pub fn mu_coherence_failure_bound_real(n: usize, c: f64) -> Result<f64> {
    if n <= 1 {
        return Err(Error::Domain(format!("n must exceed 1, got {n}")));
    }
    check_positive("c", c)?;
    let nf = n as f64;
    Ok(nf * (nf / (PI * c * (nf - 1.0) * nf.ln())).sqrt() * nf.powf(-c * (1.0 - 1.0 / nf)))
}

/// `delta <= mu / sqrt(m n) * sum_{j >= 2} sigma_j` for mu-coherent singular
/// vectors. Fewer than two singular values gives 0 with the flag set.
pub fn delta_bound_coherent(sigmas: &[f64], mu: f64, m: usize, n: usize) -> Result<Flagged> {
    check_positive("mu", mu)?;
    if m == 0 || n == 0 {
        return Err(Error::Domain(format!("m and n must be positive, got {m}, {n}")));
    }
    if let Some(s) = sigmas.iter().find(|s| !(**s >= 0.0 && s.is_finite())) {
        return Err(Error::Domain(format!("singular values must be nonnegative, got {s}")));
    }
    if sigmas.len() < 2 {
        return Ok(Flagged {
            value: 0.0,
            flagged: true,
        });
    }
    let tail: f64 = sigmas[1..].iter().sum();
    Ok(Flagged {
        value: mu / ((m * n) as f64).sqrt() * tail,
        flagged: false,
    })
}

/// `delta <= sqrt(2 c ln m / m) sigma_2`, holding with probability
/// `1 - n m^{-c(1 - 1/m)} / sqrt(c ln m)` for a random unitary left factor.
pub fn delta_bound_unitary(sigma2: f64, c: f64, m: usize, n: usize) -> Result<(f64, ClampedProbability)> {
    if m <= 1 {
        return Err(Error::Domain(format!("m must exceed 1, got {m}")));
    }
    check_nonnegative("sigma2", sigma2)?;
    check_positive("c", c)?;
    let mf = m as f64;
    let bound = (2.0 * c * mf.ln() / mf).sqrt() * sigma2;
    let raw = 1.0 - n as f64 * mf.powf(-c * (1.0 - 1.0 / mf)) / (c * mf.ln()).sqrt();
    Ok((bound, ClampedProbability::new(raw)))
}

/// Worst-case error `(1 + d + sqrt((1 + d)(1 + 17 d))) / 2` when the noise
/// condition fails, in units where `sigma ||u||_inf ||v||_inf = 1`.
pub fn worst_case_bound(delta_normalized: f64) -> Result<f64> {
    check_nonnegative("delta_normalized", delta_normalized)?;
    let d = delta_normalized;
    Ok((1.0 + d + ((1.0 + d) * (1.0 + 17.0 * d)).sqrt()) / 2.0)
}

/// Fraction of entries with `|v_i| <= mu1 ||v||_inf` (the "bad" fraction).
pub fn large_entry_fraction<T: Scalar>(v: &[T], eps: f64) -> Result<f64> {
    let (mu1, _) = mu_thresholds(eps)?;
    let inf = max_modulus(v);
    if inf == 0.0 {
        return Err(Error::Domain("vector is zero; the bad fraction is undefined".into()));
    }
    let bad = v.iter().filter(|x| x.modulus() <= mu1 * inf).count();
    Ok(bad as f64 / v.len() as f64)
}

/// Parameters shared by all bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    /// Column dimension.
    pub n: usize,
    /// Row dimension.
    pub m: usize,
    pub c: f64,
    pub c0: f64,
    pub eps: f64,
    pub delta: f64,
    pub u_inf: f64,
    pub v_inf: f64,
    pub k: usize,
    /// Lemma-1 threshold.
    pub tau: f64,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_n(self.n)?;
        if self.m <= 2 {
            return Err(Error::Domain(format!("m must exceed 2, got {}", self.m)));
        }
        check_positive("c", self.c)?;
        check_positive("c0", self.c0)?;
        check_eps(self.eps)?;
        check_nonnegative("delta", self.delta)?;
        check_unit_interval("u_inf", self.u_inf)?;
        check_unit_interval("v_inf", self.v_inf)?;
        if self.k == 0 {
            return Err(Error::Domain("k must be at least 1".into()));
        }
        check_nonnegative("tau", self.tau)?;
        Ok(())
    }
}

/// Every constant and bound evaluated at one [`BoundInputs`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub inputs: BoundInputs,
    pub chi2_threshold: f64,
    pub alpha: f64,
    pub alpha_valid: bool,
    pub beta: f64,
    pub beta_v: f64,
    pub beta_u: f64,
    pub beta_v_upper: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub error_bound_main: f64,
    pub error_bound_simplified: f64,
    pub error_bound_real: f64,
    pub nu: NuSequence,
    /// `Err` text when `beta_v >= 1`.
    pub required_k: std::result::Result<Flagged, String>,
    pub lemma1_probability: ClampedProbability,
    pub theorem1_probability: ClampedProbability,
    pub mu_coherence_probability: ClampedProbability,
    /// `Err` text when the constants are undefined at this `(n, c)`.
    pub theorem3: std::result::Result<Theorem3Constants, String>,
}

pub fn bound_report(inputs: &BoundInputs) -> Result<BoundReport> {
    inputs.validate()?;
    let BoundInputs {
        n,
        m,
        c,
        c0,
        eps,
        delta,
        u_inf,
        v_inf,
        k,
        tau,
    } = *inputs;
    let (mu1, mu2) = mu_thresholds(eps)?;
    let beta_v = theorem1_beta_v(n, c, eps, v_inf)?;
    Ok(BoundReport {
        inputs: *inputs,
        chi2_threshold: chi2_tail_threshold(n, c)?,
        alpha: alpha_const(n, c)?,
        alpha_valid: alpha_bound_valid(n, c)?,
        beta: lemma1_beta(n, c, tau)?,
        beta_v,
        beta_u: theorem1_beta_v(m, c, eps, u_inf)?,
        beta_v_upper: beta_v_upper(n, c, eps, v_inf)?,
        mu1,
        mu2,
        error_bound_main: theorem1_error_bound(delta, eps)?,
        error_bound_simplified: theorem1_error_bound_simplified(delta, eps)?,
        error_bound_real: theorem1_error_bound_real(delta, eps)?,
        nu: theorem2_nu_sequence(eps)?,
        required_k: required_k(n, c, beta_v).map_err(|e| e.to_string()),
        lemma1_probability: lemma1_probability(n, c, tau, k)?,
        theorem1_probability: theorem1_probability(n, c, eps, v_inf, k)?,
        mu_coherence_probability: mu_coherence_probability(n, c)?,
        theorem3: theorem3_constants(n, c, c0, eps, u_inf, v_inf, k).map_err(|e| e.to_string()),
    })
}

fn fmt_prob(p: &ClampedProbability) -> String {
    if p.vacuous {
        format!("{} (vacuous, raw {})", p.value, p.raw)
    } else {
        p.value.to_string()
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = &self.inputs;
        writeln!(
            f,
            "inputs: n = {}, m = {}, c = {}, c0 = {}, eps = {}, delta = {}, u_inf = {}, v_inf = {}, k = {}, tau = {}",
            i.n, i.m, i.c, i.c0, i.eps, i.delta, i.u_inf, i.v_inf, i.k, i.tau
        )?;
        writeln!(f, "chi2_threshold = {}", self.chi2_threshold)?;
        writeln!(
            f,
            "alpha = {}{}",
            self.alpha,
            if self.alpha_valid { "" } else { " (exponent condition fails: bound is not O(n^-c))" }
        )?;
        writeln!(f, "beta = {}", self.beta)?;
        writeln!(f, "beta_v = {}", self.beta_v)?;
        writeln!(f, "beta_u = {}", self.beta_u)?;
        writeln!(f, "beta_v_upper = {}", self.beta_v_upper)?;
        writeln!(f, "mu1 = {}", self.mu1)?;
        writeln!(f, "mu2 = {}", self.mu2)?;
        writeln!(f, "error_bound = {}", self.error_bound_main)?;
        writeln!(f, "error_bound_simplified = {}", self.error_bound_simplified)?;
        writeln!(f, "error_bound_real = {}", self.error_bound_real)?;
        let opt = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| v.to_string());
        writeln!(
            f,
            "nu = ({}, {}, {})",
            self.nu.nu1,
            opt(self.nu.nu2_lb),
            opt(self.nu.nu3_lb)
        )?;
        match &self.required_k {
            Ok(k) if k.flagged => writeln!(f, "required_k = {} (beta_v = 0)", k.value)?,
            Ok(k) => writeln!(f, "required_k = {}", k.value)?,
            Err(e) => writeln!(f, "required_k = undefined ({e})")?,
        }
        writeln!(f, "lemma1_probability = {}", fmt_prob(&self.lemma1_probability))?;
        writeln!(f, "theorem1_probability = {}", fmt_prob(&self.theorem1_probability))?;
        writeln!(
            f,
            "mu_coherence_probability = {}",
            fmt_prob(&self.mu_coherence_probability)
        )?;
        match &self.theorem3 {
            Ok(t) => {
                writeln!(f, "theorem3.eps0 = {}", t.eps0)?;
                writeln!(f, "theorem3.mu0 = {}", t.mu0)?;
                writeln!(f, "theorem3.tau = {}", t.tau)?;
                writeln!(f, "theorem3.beta = {}", t.beta)?;
                writeln!(f, "theorem3.gamma = {}", t.gamma)?;
                writeln!(f, "theorem3.gamma_proof = {}", t.gamma_proof)?;
                writeln!(f, "theorem3.alpha0 = {}", t.alpha0)?;
                writeln!(
                    f,
                    "theorem3.probability = {}{}",
                    fmt_prob(&t.success_probability),
                    if t.vacuous { " [vacuous]" } else { "" }
                )
            }
            Err(e) => writeln!(f, "theorem3 = undefined ({e})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;

    use super::*;

    #[test]
    fn threshold_examples() {
        assert_relative_eq!(chi2_tail_threshold(3, 1e-300).unwrap(), 1.0, epsilon = 1e-12);
        let t = chi2_tail_threshold(102, 1.0).unwrap();
        assert_relative_eq!(t, 100.0 + 2.0 * (100.0 * 102f64.ln()).sqrt(), epsilon = 1e-12);
        assert!((t - 143.01).abs() < 0.01, "{t}");
        assert!(chi2_tail_threshold(2, 1.0).is_err());
        assert!(chi2_tail_threshold(10, 0.0).is_err());
    }

    #[test]
    fn threshold_is_monotone() {
        for n in [3usize, 10, 100, 1000] {
            for c in [0.5, 1.0, 2.0, 4.0] {
                let t = chi2_tail_threshold(n, c).unwrap();
                assert!(chi2_tail_threshold(n + 1, c).unwrap() > t);
                assert!(chi2_tail_threshold(n, c * 1.5).unwrap() > t);
            }
        }
    }

    #[test]
    fn alpha_decreases_in_n() {
        let mut prev = f64::INFINITY;
        for n in [1_000usize, 10_000, 100_000, 1_000_000, 10_000_000] {
            let a = alpha_const(n, 1.0).unwrap();
            assert!(a < prev);
            prev = a;
        }
        assert!(prev < 0.15);
    }

    #[test]
    fn alpha_validity_flag() {
        // (4/3) sqrt(ln 3 / 1) > 1
        assert!(!alpha_bound_valid(3, 1.0).unwrap());
        assert!(alpha_bound_valid(100, 2.0).unwrap());
    }

    #[test]
    fn lemma1_beta_examples() {
        assert_eq!(lemma1_beta(100, 2.0, 0.0).unwrap(), 0.0);
        let t = chi2_tail_threshold(50, 1.5).unwrap();
        assert_relative_eq!(
            lemma1_beta(50, 1.5, 0.03).unwrap(),
            0.03 * (2.0 * t / PI).sqrt(),
            max_relative = 1e-14
        );
        assert!(lemma1_beta(50, 1.5, -0.1).is_err());
    }

    #[test]
    fn lemma1_probability_edges() {
        let p = lemma1_probability(100, 2.0, 0.0, 1).unwrap();
        assert_relative_eq!(p.value, 1.0 - chi2_tail_bound(100, 2.0).unwrap(), epsilon = 1e-15);
        assert!(!p.vacuous);
        let q = lemma1_probability(100, 2.0, 1.0, 1).unwrap();
        assert!(q.vacuous);
        assert_eq!(q.value, 0.0);
        assert!(lemma1_probability(100, 2.0, 0.1, 0).is_err());
    }

    #[test]
    fn mu_threshold_examples() {
        assert_eq!(mu_thresholds(0.0).unwrap(), (0.0, 1.0));
        assert_eq!(mu_thresholds(0.125).unwrap(), (0.5, 0.5));
        let (a, b) = mu_thresholds(3.0 / 32.0).unwrap();
        assert_eq!((a, b), (0.25, 0.75));
        for mu in [a, b] {
            assert!((mu * mu - mu + 2.0 * 3.0 / 32.0).abs() < 1e-15);
        }
        assert!(matches!(mu_thresholds(0.2), Err(Error::ThresholdsUndefined { .. })));
        assert!(mu_thresholds(-0.01).is_err());
        assert!(mu_thresholds(f64::NAN).is_err());
    }

    #[test]
    fn error_bound_endpoints() {
        assert_relative_eq!(theorem1_error_bound(1.0, 0.0).unwrap(), 4.0, epsilon = 1e-15);
        assert_relative_eq!(theorem1_error_bound(1.0, 0.125).unwrap(), 12.0, epsilon = 1e-12);
        assert_relative_eq!(theorem1_error_bound_simplified(1.0, 0.125).unwrap(), 12.0, epsilon = 1e-12);
        assert_relative_eq!(theorem1_error_bound_real(1.0, 0.125).unwrap(), 6.0, epsilon = 1e-12);
        assert_eq!(theorem1_error_bound_simplified(2.0, 0.0).unwrap(), 8.0);
        assert_eq!(theorem1_error_bound_real(2.0, 0.0).unwrap(), 8.0);
        assert!(theorem1_error_bound(1.0, 0.13).is_err());
        assert!(theorem1_error_bound(-1.0, 0.1).is_err());
    }

    #[test]
    fn error_bounds_ordered_and_monotone() {
        let mut prev = 0.0;
        for i in 0..=1000 {
            let eps = EPS_MAX * i as f64 / 1000.0;
            let main = theorem1_error_bound(1.0, eps).unwrap();
            let simple = theorem1_error_bound_simplified(1.0, eps).unwrap();
            let real = theorem1_error_bound_real(1.0, eps).unwrap();
            assert!(main >= prev);
            assert!(main <= simple + 1e-12);
            assert!(real <= simple);
            prev = main;
        }
    }

    #[test]
    fn required_k_examples() {
        let n = 100;
        assert_relative_eq!(required_k(n, 2.0, 1.0 / 100.0).unwrap().value, 2.0, epsilon = 1e-12);
        assert_relative_eq!(required_k(n, 2.0, 100f64.powf(-2.0)).unwrap().value, 1.0, epsilon = 1e-12);
        let k = required_k(n, 2.0, 0.5).unwrap();
        assert_relative_eq!(k.value, 2.0 * 100f64.ln() / 2f64.ln(), epsilon = 1e-12);
        assert!((k.value - 13.29).abs() < 0.01);
        assert!(matches!(required_k(n, 2.0, 1.0), Err(Error::Vacuous(_))));
        assert_eq!(
            required_k(n, 2.0, 0.0).unwrap(),
            Flagged {
                value: 1.0,
                flagged: true
            }
        );
    }

    #[test]
    fn nu_sequence_examples() {
        for eps in [1e-6, 0.01, 0.0625, 0.1, 0.125] {
            assert_eq!(theorem2_nu_sequence(eps).unwrap().nu2_lb, Some(0.5));
        }
        assert_eq!(theorem2_nu_sequence(0.125).unwrap().nu3_lb, Some(0.5));
        assert_eq!(theorem2_nu_sequence(1.0 / 16.0).unwrap().nu3_lb, Some(0.75));
        let zero = theorem2_nu_sequence(0.0).unwrap();
        assert_eq!((zero.nu1, zero.nu2_lb, zero.nu3_lb), (0.0, None, None));
    }

    #[test]
    fn theorem3_examples() {
        let t = theorem3_constants(100, 2.0, 1e12, 1e-14, 0.3, 0.3, 3).unwrap();
        assert_relative_eq!(t.gamma, 1.0 - t.beta, epsilon = 1e-9);
        assert_relative_eq!(t.eps0, 2.0 * 100f64.ln() / 100.0, epsilon = 1e-15);
        assert!((t.eps0 - 0.0921).abs() < 1e-4);
        // c0 ln n >= n
        let v = theorem3_constants(100, 2.0, 30.0, 0.01, 0.3, 0.3, 2).unwrap();
        assert!(v.vacuous);
        // mu0 undefined when n - 2 - 2 sqrt(c (n-2) ln n) <= 0
        assert!(theorem3_constants(10, 2.0, 1.0, 0.01, 0.5, 0.5, 2).is_err());
    }

    #[test]
    fn coherence_examples() {
        let n = 37;
        let flat = vec![1.0 / (n as f64).sqrt(); n];
        assert!(mu_coherence_check(&flat, 1.0));
        assert!(!mu_coherence_check(&flat, 0.99));
        let mut basis = vec![0.0; n];
        basis[3] = 1.0;
        assert!(!mu_coherence_check(&basis, n as f64 - 1.0));
        assert!(mu_coherence_check(&basis, n as f64));
    }

    #[test]
    fn coherence_probability_edges() {
        // c ln n = 1: the denominator is exactly 1.
        let n = 10usize;
        let c = 1.0 / (n as f64).ln();
        let p = mu_coherence_probability(n, c).unwrap();
        assert_relative_eq!(p.raw, 1.0 - (n as f64).powf(-c * 0.9), epsilon = 1e-14);
        let direct = 1.0 - 100f64.powf(-2.0 * 0.99) / (2.0 * 100f64.ln()).sqrt();
        assert_relative_eq!(mu_coherence_probability(100, 2.0).unwrap().value, direct, epsilon = 1e-15);
        let mut prev = 0.0;
        for n in [10usize, 20, 50, 100, 1000] {
            let p = mu_coherence_probability(n, 2.0).unwrap().value;
            assert!(p > prev);
            prev = p;
        }
        assert!(mu_coherence_probability(1, 1.0).is_err());
    }

    #[test]
    fn coherent_inf_values() {
        assert_relative_eq!(coherent_inf_bound(100, 2.0).unwrap(), (0.04 * 100f64.ln()).sqrt(), epsilon = 1e-15);
        assert_eq!(coherent_inf_bound(3, 5.0).unwrap(), 1.0);
        assert!(coherent_inf_bound(1, 1.0).is_err());
    }

    #[test]
    fn real_coherence_bound() {
        let b = mu_coherence_failure_bound_real(100, 2.0).unwrap();
        assert_relative_eq!(b, 2.048_658_765_982_003e-3, max_relative = 1e-12);
        // n * P(Beta(1/2, 99/2) > 0.04 ln 100), from scipy.stats.beta.sf
        assert!(b >= 7.520_591_865_125_768e-4);
        let stated = 1.0 - mu_coherence_probability(100, 2.0).unwrap().raw;
        assert_relative_eq!(b / stated, 100.0 * (100.0 / (PI * 99.0)).sqrt(), max_relative = 1e-9);
        assert!(mu_coherence_failure_bound_real(1, 2.0).is_err());
    }

    #[test]
    fn delta_bounds() {
        let zero = delta_bound_coherent(&[5.0, 0.0, 0.0], 2.0, 4, 4).unwrap();
        assert_eq!(zero.value, 0.0);
        let b = delta_bound_coherent(&[10.0, 1.0, 1.0, 1.0], 1.0, 4, 4).unwrap();
        assert_relative_eq!(b.value, 0.75, epsilon = 1e-15);
        let b2 = delta_bound_coherent(&[10.0, 2.0, 2.0, 2.0], 1.0, 4, 4).unwrap();
        assert_relative_eq!(b2.value, 2.0 * b.value, epsilon = 1e-15);
        assert!(delta_bound_coherent(&[1.0], 1.0, 4, 4).unwrap().flagged);

        let (bound, _) = delta_bound_unitary(0.0, 2.0, 100, 100).unwrap();
        assert_eq!(bound, 0.0);
        let (bound, p) = delta_bound_unitary(1.0, 2.0, 100, 100).unwrap();
        assert!((bound - 0.429).abs() < 1e-3, "{bound}");
        assert!(!p.vacuous);
        assert!(delta_bound_unitary(1.0, 2.0, 1, 100).is_err());
    }

    #[test]
    fn worst_case_examples() {
        assert_eq!(worst_case_bound(0.0).unwrap(), 1.0);
        assert_eq!(worst_case_bound(1.0).unwrap(), 4.0);
        assert!(worst_case_bound(-0.5).is_err());
    }

    #[test]
    fn worst_case_dominates_envelope() {
        // max over |a| of min(4 d |d_el| / |a|, |d_el| + |a|), |d_el| = 1 + d
        for d in [0.01, 0.1, 0.25, 0.5, 1.0, 3.0] {
            let dd = 1.0 + d;
            let envelope = (1..=200_000)
                .map(|i| {
                    let a = 10.0 * i as f64 / 200_000.0;
                    (4.0 * d * dd / a).min(dd + a)
                })
                .fold(0.0_f64, f64::max);
            let w = worst_case_bound(d).unwrap();
            assert!(w >= envelope - 1e-12);
            assert!(w - envelope < 1e-3, "{d}: {w} vs {envelope}");
        }
    }

    #[test]
    fn large_entry_fraction_examples() {
        let flat = vec![0.5; 4];
        assert_eq!(large_entry_fraction(&flat, 0.1).unwrap(), 0.0);
        let mut basis = vec![0.0; 10];
        basis[0] = 1.0;
        assert_eq!(large_entry_fraction(&basis, 0.05).unwrap(), 0.9);
        assert!(large_entry_fraction(&[0.0, 0.0], 0.1).is_err());
        assert!(large_entry_fraction(&flat, 0.2).is_err());
    }

    #[test]
    fn report_matches_components() {
        let inputs = BoundInputs {
            n: 100,
            m: 100,
            c: 2.0,
            c0: 10.0,
            eps: 0.125,
            delta: 1.0,
            u_inf: 0.3,
            v_inf: 0.3,
            k: 3,
            tau: 0.01,
        };
        let r = bound_report(&inputs).unwrap();
        assert_relative_eq!(r.error_bound_main, 12.0, epsilon = 1e-12);
        assert_relative_eq!(r.mu1 + r.mu2, 1.0, epsilon = 1e-15);
        assert!(r.to_string().contains("error_bound = 12"));
        let bad = BoundInputs { eps: 0.2, ..inputs };
        assert!(matches!(bound_report(&bad), Err(Error::ThresholdsUndefined { .. })));
    }
}
