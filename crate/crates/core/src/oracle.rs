//! Independent oracles: exact chi-square tails, Monte Carlo tail estimates and
//! exhaustive scans. They share no code path with the bounds or the search
//! they are used to check.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::maxvol::Pivot;
use crate::model::sample_sphere_vector;
use crate::rng::stream_rng;
use crate::scalar::Scalar;

/// Minimum trial count accepted by the Monte Carlo oracles.
pub const MIN_MC_TRIALS: usize = 10_000;

/// Monte Carlo work is split into this many independent streams.
const MC_SHARDS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailMethod {
    /// Regularized incomplete gamma function (series / continued fraction).
    IncompleteGamma,
    /// Adaptive Simpson integration of the density.
    Quadrature,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub value: f64,
    pub method: TailMethod,
    /// Series/continued-fraction terms, or Monte Carlo samples.
    pub samples_or_nodes: usize,
    /// Binomial standard error; present only for Monte Carlo estimates.
    pub std_error: Option<f64>,
}

impl TailEstimate {
    fn monte_carlo(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        TailEstimate {
            value: p,
            method: TailMethod::MonteCarlo,
            samples_or_nodes: trials,
            std_error: Some((p * (1.0 - p) / trials as f64).sqrt()),
        }
    }

    /// `value + 3 * std_error` (just `value` for exact methods).
    pub fn upper_3sigma(&self) -> f64 {
        self.value + 3.0 * self.std_error.unwrap_or(0.0)
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Gamma(x)` for `x > 0` (Lanczos approximation).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1 - x) = pi / sin(pi x)
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut sum = LANCZOS[0];
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        sum += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + sum.ln()
}

const GAMMA_MAX_ITER: usize = 10_000;
const GAMMA_TOL: f64 = 1e-16;

/// Regularized upper incomplete gamma `Q(a, x)`, with the number of terms used.
pub fn gamma_q(a: f64, x: f64) -> Result<(f64, usize)> {
    if a.is_nan() || x.is_nan() || a <= 0.0 || x < 0.0 {
        return Err(Error::Domain(format!("gamma_q needs a > 0, x >= 0, got a = {a}, x = {x}")));
    }
    if x == 0.0 {
        return Ok((1.0, 0));
    }
    let log_prefactor = -x + a * x.ln() - ln_gamma(a);
    if x < a + 1.0 {
        // P(a, x) = e^{-x} x^a / Gamma(a + 1) * sum x^k / ((a+1)...(a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        for k in 1..GAMMA_MAX_ITER {
            term *= x / (a + k as f64);
            sum += term;
            if term.abs() < sum.abs() * GAMMA_TOL {
                return Ok((1.0 - sum * log_prefactor.exp(), k + 1));
            }
        }
        Err(Error::NoConvergence(format!(
            "incomplete gamma series, a = {a}, x = {x}, {GAMMA_MAX_ITER} terms"
        )))
    } else {
        // Modified Lentz evaluation of the continued fraction for Q(a, x).
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..GAMMA_MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < GAMMA_TOL {
                return Ok((log_prefactor.exp() * h, i + 1));
            }
        }
        Err(Error::NoConvergence(format!(
            "incomplete gamma continued fraction, a = {a}, x = {x}, {GAMMA_MAX_ITER} terms"
        )))
    }
}

/// Exact upper tail `P(chi2_n > threshold)`.
pub fn chi2_tail_exact(n: usize, threshold: f64) -> Result<TailEstimate> {
    if n == 0 {
        return Err(Error::Domain("chi-square needs n >= 1 degrees of freedom".into()));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
    }
    let (q, terms) = gamma_q(n as f64 / 2.0, threshold / 2.0)?;
    Ok(TailEstimate {
        value: q.clamp(0.0, 1.0),
        method: TailMethod::IncompleteGamma,
        samples_or_nodes: terms,
        std_error: None,
    })
}

fn chi2_density(n: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return if n < 2.0 { f64::INFINITY } else if n == 2.0 { 0.5 } else { 0.0 };
    }
    let half = n / 2.0;
    ((half - 1.0) * x.ln() - x / 2.0 - half * std::f64::consts::LN_2 - ln_gamma(half)).exp()
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    nodes: &mut usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    *nodes += 2;
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    // Second clause: the refinement is already at roundoff level.
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-12 * (left + right).abs() {
        return left + right + delta / 15.0;
    }
    adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1, nodes)
        + adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1, nodes)
}

/// Upper tail `P(chi2_n > threshold)` by adaptive Simpson integration of the
/// density; shares nothing with [`chi2_tail_exact`] beyond `ln_gamma`.
pub fn chi2_tail_quadrature(n: usize, threshold: f64) -> Result<TailEstimate> {
    if n == 0 {
        return Err(Error::Domain("chi-square needs n >= 1 degrees of freedom".into()));
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
    }
    let nf = n as f64;
    // Far enough out that the remaining mass is below 1e-25 of the total.
    let upper = threshold.max(nf) + 120.0 + 40.0 * (2.0 * nf).sqrt();
    let f = |x: f64| chi2_density(nf, x);
    const PANELS: usize = 64;
    let h = (upper - threshold) / PANELS as f64;
    let mut nodes = 0;
    let mut panels = Vec::with_capacity(PANELS);
    let mut coarse = 0.0;
    for p in 0..PANELS {
        let a = threshold + p as f64 * h;
        let b = a + h;
        let (fa, fm, fb) = (f(a), f(a + h / 2.0), f(b));
        nodes += 3;
        let whole = simpson(fa, fm, fb, h);
        coarse += whole;
        panels.push((a, b, fa, fm, fb, whole));
    }
    let tol = 1e-13 * coarse / PANELS as f64;
    let value: f64 = panels
        .into_iter()
        .map(|(a, b, fa, fm, fb, whole)| adaptive_simpson(&f, a, b, fa, fm, fb, whole, tol, 40, &mut nodes))
        .sum();
    Ok(TailEstimate {
        value: value.clamp(0.0, 1.0),
        method: TailMethod::Quadrature,
        samples_or_nodes: nodes,
        std_error: None,
    })
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_MC_TRIALS {
        return Err(Error::param(
            "trials",
            format!("Monte Carlo oracles need at least {MIN_MC_TRIALS} trials, got {trials}"),
        ));
    }
    Ok(())
}

/// Counts hits of `event` over `trials` draws split across seeded shards.
fn sharded_count<F>(trials: usize, seed: u64, event: F) -> usize
where
    F: Fn(&mut crate::rng::StreamRng) -> bool + Sync,
{
    (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let share = trials / MC_SHARDS + usize::from(shard < trials % MC_SHARDS);
            let mut rng = stream_rng(seed, shard as u64);
            (0..share).filter(|_| event(&mut rng)).count()
        })
        .sum()
}

/// Monte Carlo estimate of `P(|v_i| < tau, i = 1..k)` for a sphere-uniform `v`
/// in dimension `n`.
pub fn sphere_tail_mc<T: Scalar>(n: usize, tau: f64, k: usize, trials: usize, seed: u64) -> Result<TailEstimate> {
    check_trials(trials)?;
    if k == 0 || k > n {
        return Err(Error::param("k", format!("must lie in 1..={n}, got {k}")));
    }
    let hits = sharded_count(trials, seed, |rng| {
        let v = sample_sphere_vector::<T, _>(n, rng).expect("n >= 1");
        v[..k].iter().all(|x| x.modulus() < tau)
    });
    Ok(TailEstimate::monte_carlo(hits, trials))
}

/// Monte Carlo estimate of `P(x_1^2 / sum_{j>=2} x_j^2 < t / (1 - t))` for a
/// standard Gaussian `x` in `R^n`.
pub fn fisher_tail_mc(n: usize, t: f64, trials: usize, seed: u64) -> Result<TailEstimate> {
    check_trials(trials)?;
    if n < 2 {
        return Err(Error::Domain(format!("need n >= 2, got {n}")));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t must lie in (0, 1), got {t}")));
    }
    let cut = t / (1.0 - t);
    let hits = sharded_count(trials, seed, |rng| {
        let x1: f64 = f64::sample_gaussian(rng);
        let rest: f64 = (1..n).map(|_| f64::sample_gaussian(rng).powi(2)).sum();
        x1 * x1 < cut * rest
    });
    Ok(TailEstimate::monte_carlo(hits, trials))
}

/// Monte Carlo estimate of the probability that a sphere-uniform vector in
/// dimension `n` is *not* `mu`-coherent, i.e. `||v||_inf^2 > mu / n`.
pub fn coherence_failure_mc<T: Scalar>(n: usize, mu: f64, trials: usize, seed: u64) -> Result<TailEstimate> {
    check_trials(trials)?;
    let limit = mu / n as f64;
    let hits = sharded_count(trials, seed, |rng| {
        let v = sample_sphere_vector::<T, _>(n, rng).expect("n >= 1");
        v.iter().any(|x| x.norm_sqr() > limit)
    });
    Ok(TailEstimate::monte_carlo(hits, trials))
}

/// Exhaustive scan for the largest-modulus entry; row-major first on ties.
pub fn global_argmax<T: Scalar>(a: &DenseMatrix<T>) -> Pivot<T> {
    let mut best = (0, 0);
    let mut best_abs = a.get(0, 0).modulus();
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let v = a.get(i, j).modulus();
            if v > best_abs {
                best_abs = v;
                best = (i, j);
            }
        }
    }
    Pivot::at(a, best.0, best.1)
}

/// Largest `m * n` accepted by [`best_cross_residual`].
pub const BEST_CROSS_MAX_ENTRIES: usize = 1_000_000;

/// The pivot whose rank-1 cross has the smallest residual C-norm, found by
/// trying every nonzero entry. Row-major first on ties.
pub fn best_cross_residual<T: Scalar>(a: &DenseMatrix<T>) -> Result<(Pivot<T>, f64)> {
    let size = a.rows() * a.cols();
    if size > BEST_CROSS_MAX_ENTRIES {
        return Err(Error::TooLarge(format!(
            "{}x{} has {size} entries; exhaustive cross search allows at most {BEST_CROSS_MAX_ENTRIES}",
            a.rows(),
            a.cols()
        )));
    }
    let mut best: Option<((usize, usize), f64)> = None;
    for p in 0..a.rows() {
        for q in 0..a.cols() {
            let pivot = a.get(p, q);
            if pivot.modulus() == 0.0 {
                continue;
            }
            let mut worst = 0.0_f64;
            for i in 0..a.rows() {
                for j in 0..a.cols() {
                    if i == p || j == q {
                        continue;
                    }
                    let r = a.get(i, j) - a.get(i, q) * a.get(p, j) / pivot;
                    worst = worst.max(r.modulus());
                }
            }
            if best.is_none_or(|(_, b)| worst < b) {
                best = Some(((p, q), worst));
            }
        }
    }
    let ((p, q), norm) = best.ok_or(Error::DegeneratePivot { row: 0, col: 0 })?;
    Ok((Pivot::at(a, p, q), norm))
}

/// Two-sample Kolmogorov-Smirnov statistic and its 1% critical value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n1, n2) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0_f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    // c(0.01) = sqrt(-ln(0.005) / 2)
    let c = (-(0.005_f64).ln() / 2.0).sqrt();
    (d, c * ((n1 + n2) / (n1 * n2)).sqrt())
}
