//! Lower-tail probability `P(B_alpha(1/k) <= eta for all 0 < |k| <= K)` of a
//! standard fractional Brownian motion (`Var B_alpha(t) = |t|^alpha`).
//!
//! Time inversion makes `|t|^alpha B_alpha(1/t)` another standard fBm, and
//! self-similarity then turns the event into `W(delta k) <= 0` for
//! `W = sqrt(2) B_alpha - |t|^alpha` on the grid `delta Z` with
//! `delta = (sqrt(2) eta)^{2/alpha}`. Paths are therefore drawn on a uniform
//! grid with the exact samplers of [`crate::sampler`].

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{PickandsError, Result};
use crate::estimators::{doubling, Method, TruncationPolicy};
use crate::model::{ProcessModel, VarianceFunction};
use crate::parallel::replicate;
use crate::rng::{child_seed, stream, Purpose};
use crate::sampler::PointSampler;
use crate::stats::{weighted_linear_fit, Moments};

/// Path construction for the small-ball event.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmallBallSampler {
    /// `Factorized` for `alpha = 1`, `Inverted` otherwise.
    #[default]
    Auto,
    /// Two-sided path on the uniform grid `delta Z` after time inversion.
    Inverted,
    /// `alpha = 1` only: the two sides are independent, so the probability
    /// is a product of one-sided random-walk probabilities with early exit.
    Factorized,
    /// Joint Gaussian vector on the reciprocal grid `{1/k}`; no growth in K.
    Reciprocal,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallOptions {
    pub sampler: SmallBallSampler,
    /// Grow K from the given cutoff until the probability is stable.
    pub grow: bool,
    pub tolerance: f64,
    pub max_k: usize,
}

impl Default for SmallBallOptions {
    fn default() -> Self {
        SmallBallOptions { sampler: SmallBallSampler::Auto, grow: true, tolerance: 0.1, max_k: 1 << 16 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallEstimate {
    pub alpha: f64,
    pub eta: f64,
    /// Grid step of the equivalent `W` event.
    pub delta: f64,
    /// Final cutoff K.
    pub k_cutoff: usize,
    pub probability: f64,
    pub stderr: f64,
    /// `eta^{-2/alpha} * probability`.
    pub scaled: f64,
    pub scaled_stderr: f64,
    pub replications: usize,
    pub sampler: SmallBallSampler,
    pub stable: bool,
    pub flags: Vec<String>,
}

/// Flag when no replication satisfied the event.
pub const FLAG_NO_HITS: &str = "no-hits";

/// Grid step `(sqrt(2) eta)^{2/alpha}` matching level `eta`.
pub fn inverted_delta(alpha: f64, eta: f64) -> f64 {
    (2f64.sqrt() * eta).powf(2.0 / alpha)
}

fn check(alpha: f64, eta: f64, k: usize, reps: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(PickandsError::InvalidModel(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if !(eta > 0.0) {
        return Err(PickandsError::InvalidArgument(format!("eta must be positive, got {eta}")));
    }
    if k < 1 {
        return Err(PickandsError::InvalidArgument("cutoff K must be at least 1".into()));
    }
    if reps < 2 {
        return Err(PickandsError::InvalidArgument("at least 2 replications are needed".into()));
    }
    Ok(())
}

/// Monte Carlo estimate of `P(B_alpha(1/k) <= eta, 0 < |k| <= K)`.
pub fn est_smallball_prob(
    alpha: f64,
    eta: f64,
    k_cutoff: usize,
    reps: usize,
    seed: u64,
    opts: SmallBallOptions,
) -> Result<SmallBallEstimate> {
    check(alpha, eta, k_cutoff, reps)?;
    let sampler = match opts.sampler {
        SmallBallSampler::Auto if alpha == 1.0 => SmallBallSampler::Factorized,
        SmallBallSampler::Auto => SmallBallSampler::Inverted,
        SmallBallSampler::Factorized if alpha != 1.0 => {
            return Err(PickandsError::Unsupported("factorization needs independent increments (alpha = 1)".into()))
        }
        s => s,
    };
    let delta = inverted_delta(alpha, eta);
    let max_k = if opts.grow { opts.max_k.max(k_cutoff) } else { k_cutoff };
    let policy = TruncationPolicy { initial_horizon: k_cutoff, growth: 2, tolerance: opts.tolerance, max_horizon: max_k };
    let (probability, stderr, k_final, stable) = match sampler {
        SmallBallSampler::Inverted => {
            // the argmax statistic is (1/delta) 1{W(delta k) <= 0 for k != 0}, up to null events
            let r = doubling(&ProcessModel::fbm(alpha), delta, &policy, reps, seed, &[Method::Argmax])?.remove(0);
            (r.estimate * delta, r.stderr * delta, r.truncation.horizon, r.truncation.stable)
        }
        SmallBallSampler::Factorized => factorized(delta, &policy, reps, seed),
        SmallBallSampler::Reciprocal => {
            let (p, se) = reciprocal(alpha, eta, k_cutoff, reps, seed)?;
            (p, se, k_cutoff, true)
        }
        SmallBallSampler::Auto => unreachable!(),
    };
    let scale = eta.powf(-2.0 / alpha);
    let mut flags = Vec::new();
    if probability == 0.0 {
        flags.push(FLAG_NO_HITS.to_string());
    }
    Ok(SmallBallEstimate {
        alpha,
        eta,
        delta,
        k_cutoff: k_final,
        probability,
        stderr,
        scaled: scale * probability,
        scaled_stderr: scale * stderr,
        replications: reps,
        sampler,
        stable,
        flags,
    })
}

/// Steps of the walk `W(delta k) = sqrt(2) B(delta k) - delta k` until it
/// exceeds 0 (returns the index) or reaches `k_max` (returns `k_max + 1`).
fn first_passage<R: Rng>(delta: f64, k_max: usize, rng: &mut R) -> usize {
    let sd = (2.0 * delta).sqrt();
    let mut x = 0.0;
    for k in 1..=k_max {
        x += sd * rng.sample::<f64, _>(StandardNormal) - delta;
        if x > 0.0 {
            return k;
        }
    }
    k_max + 1
}

/// Product of the two one-sided survival probabilities with its standard error.
fn factorized(delta: f64, policy: &TruncationPolicy, reps: usize, seed: u64) -> (f64, f64, usize, bool) {
    let seeds = [seed, child_seed(seed, 1)];
    let mut k = policy.initial_horizon;
    loop {
        let prev = k / 2;
        let sides: Vec<Vec<Moments>> = seeds
            .iter()
            .map(|&s| {
                replicate(reps, 2, || (), |_, r, out| {
                    let tau = first_passage(delta, k, &mut stream(s, Purpose::Path, r));
                    out[0] = if tau > k { 1.0 } else { 0.0 };
                    out[1] = if tau > prev { 1.0 } else { 0.0 };
                })
            })
            .collect();
        let (p, m) = (&sides[0], &sides[1]);
        let prob = p[0].mean * m[0].mean;
        let se = ((m[0].mean * p[0].stderr()).powi(2) + (p[0].mean * m[0].stderr()).powi(2)).sqrt();
        let prev_prob = p[1].mean * m[1].mean;
        let stable = prev >= 1 && (prob - prev_prob).abs() <= policy.tolerance * se;
        if stable || k >= policy.max_horizon {
            return (prob, se, k, stable);
        }
        k = (k * 2).min(policy.max_horizon);
    }
}

/// Direct simulation of `B_alpha` at the times `1/k`.
fn reciprocal(alpha: f64, eta: f64, k: usize, reps: usize, seed: u64) -> Result<(f64, f64)> {
    let times: Vec<f64> = (1..=k).flat_map(|j| [1.0 / j as f64, -1.0 / j as f64]).collect();
    // sample W for sigma^2 = |t|^alpha and add the drift back to recover B
    let model = ProcessModel::Gaussian(VarianceFunction::power(alpha, 1.0));
    let sampler = PointSampler::new(&model, &times)?;
    let drift: Vec<f64> = times.iter().map(|t| 0.5 * t.abs().powf(alpha)).collect();
    let m = replicate(reps, 1, || (Vec::new(), Vec::new()), |(z, w), r, out| {
        sampler.sample_into(&mut stream(seed, Purpose::Path, r), z, w);
        out[0] = if w.iter().zip(&drift).all(|(x, d)| x + d <= eta) { 1.0 } else { 0.0 };
    });
    Ok((m[0].mean, m[0].stderr()))
}

/// Intercept of `eta^{-2/alpha} p` extrapolated linearly to `eta = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmallBallFit {
    pub intercept: f64,
    pub stderr: f64,
    pub slope: f64,
    pub chi2: f64,
    pub warnings: Vec<String>,
}

/// Warning when the scaled values are not monotone in eta beyond 3 SE.
pub const WARN_NON_MONOTONE: &str = "non-monotone-sequence";
/// Reminder that the linear-in-eta model is a pragmatic choice.
pub const WARN_LINEAR_MODEL: &str = "linear-in-eta-extrapolation";

/// Weighted linear fit of `eta^{-2/alpha} p` against `eta` from at least
/// three levels in decreasing geometric progression.
pub fn smallball_extrapolate(alpha: f64, series: &[(f64, f64, f64)]) -> Result<SmallBallFit> {
    if series.len() < 3 {
        return Err(PickandsError::InvalidArgument("need at least three eta values".into()));
    }
    let ratio = series[1].0 / series[0].0;
    let geometric = ratio < 1.0
        && series.windows(2).all(|w| w[1].0 > 0.0 && ((w[1].0 / w[0].0) / ratio - 1.0).abs() < 1e-6);
    if !geometric {
        return Err(PickandsError::InvalidArgument("eta values must decrease geometrically".into()));
    }
    let x: Vec<f64> = series.iter().map(|s| s.0).collect();
    let y: Vec<f64> = series.iter().map(|s| s.0.powf(-2.0 / alpha) * s.1).collect();
    let se: Vec<f64> = series.iter().map(|s| s.0.powf(-2.0 / alpha) * s.2).collect();
    let fit = weighted_linear_fit(&x, &y, &se)
        .ok_or_else(|| PickandsError::InvalidArgument("degenerate extrapolation design".into()))?;
    let mut warnings = vec![WARN_LINEAR_MODEL.to_string()];
    let trend = (y[y.len() - 1] - y[0]).signum();
    let reversal = y.windows(2).zip(se.windows(2)).any(|(v, s)| {
        let step = v[1] - v[0];
        step * trend < 0.0 && step.abs() > 3.0 * (s[0].powi(2) + s[1].powi(2)).sqrt()
    });
    if reversal {
        warnings.push(WARN_NON_MONOTONE.to_string());
    }
    Ok(SmallBallFit { intercept: fit.intercept, stderr: fit.intercept_se, slope: fit.slope, chi2: fit.chi2, warnings })
}
