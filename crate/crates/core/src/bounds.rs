//! Closed-form lower bounds for `H_W^delta` and a growth diagnostic for the
//! variance function.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{PickandsError, Result};
use crate::model::{laplace_exponent, variance_at, LevyModel, VarianceFunction};

/// Target accuracy of truncated series.
pub const SERIES_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundFormula {
    /// `(1/delta) max(0, 1 - sum_k exp(-sigma^2(delta k) / 8))`.
    GaussianSeries,
    /// Integral comparison for `sigma(t) >= C t^{kappa/2}`.
    GaussianPower,
    /// `(1/delta) max(0, 1 - 2q) / (1 - q)` with `q = exp(-lambda delta)`.
    Levy,
    /// `lambda / 4` for `delta = 0`.
    LevyContinuous,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    /// Bound value, never negative.
    pub value: f64,
    pub formula: BoundFormula,
    pub inputs: BTreeMap<String, f64>,
    /// Number of series terms summed explicitly (0 for closed forms).
    pub series_terms: usize,
    /// Upper bound on the omitted series tail.
    pub series_tail_bound: f64,
    pub diagnostics: Vec<String>,
}

impl BoundResult {
    fn closed(value: f64, formula: BoundFormula, inputs: &[(&str, f64)]) -> Self {
        BoundResult {
            value: value.max(0.0),
            formula,
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            series_terms: 0,
            series_tail_bound: 0.0,
            diagnostics: Vec::new(),
        }
    }
}

/// Truncated value of `sum_{k>=1} exp(-sigma^2(delta k)/8)` and a bound on the rest.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSum {
    pub partial: f64,
    pub terms: usize,
    pub tail_bound: f64,
    /// The partial sum reached 1 before the tail was small enough.
    pub saturated: bool,
    pub diverges: bool,
}

/// Evaluate the series with `terms` chosen so the tail bound is below
/// [`SERIES_TOLERANCE`], or stop early once the partial sum reaches 1.
pub fn gaussian_series(vf: &VarianceFunction, delta: f64) -> Result<SeriesSum> {
    gaussian_series_with(vf, delta, None)
}

/// As [`gaussian_series`] but with an explicit number of terms.
pub fn gaussian_series_terms(vf: &VarianceFunction, delta: f64, terms: usize) -> Result<SeriesSum> {
    gaussian_series_with(vf, delta, Some(terms))
}

fn gaussian_series_with(vf: &VarianceFunction, delta: f64, fixed: Option<usize>) -> Result<SeriesSum> {
    vf.validate()?;
    if !(delta > 0.0) {
        return Err(PickandsError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    // integral comparison for a decreasing summand: sum_{k>K} f(k) <= int_K^inf f
    let tail: Box<dyn Fn(usize) -> f64> = match vf {
        VarianceFunction::Power { alpha, scale } => {
            let a = scale * delta.powf(*alpha) / 8.0;
            if *alpha == 1.0 && fixed.is_none() {
                let q = (-a).exp();
                return Ok(SeriesSum { partial: q / (1.0 - q), terms: 0, tail_bound: 0.0, saturated: false, diverges: false });
            }
            let (alpha, inv) = (*alpha, 1.0 / alpha);
            Box::new(move |k| {
                let x = a * (k as f64).powf(alpha);
                inv * a.powf(-inv) * gamma_ur(inv, x) * gamma(inv)
            })
        }
        VarianceFunction::Logarithmic { scale } => {
            let p = scale / 8.0;
            if p <= 1.0 {
                return Ok(SeriesSum {
                    partial: f64::INFINITY,
                    terms: 0,
                    tail_bound: f64::INFINITY,
                    saturated: true,
                    diverges: true,
                });
            }
            Box::new(move |k| (1.0 + delta * k as f64).powf(1.0 - p) / (delta * (p - 1.0)))
        }
        VarianceFunction::Tabulated { .. } => {
            return Err(PickandsError::Unsupported(
                "the series tail cannot be bounded beyond a tabulated variance".into(),
            ))
        }
    };
    let mut partial = 0.0;
    let mut k = 0usize;
    loop {
        if let Some(n) = fixed {
            if k == n {
                break;
            }
        } else if partial >= 1.0 || (k > 0 && tail(k) < SERIES_TOLERANCE) {
            break;
        }
        k += 1;
        partial += (-variance_at(vf, delta * k as f64)? / 8.0).exp();
    }
    Ok(SeriesSum { partial, terms: k, tail_bound: tail(k), saturated: partial >= 1.0, diverges: false })
}

/// Lower bound `(1/delta) max(0, 1 - sum_{k>=1} exp(-sigma^2(delta k)/8))`.
pub fn gaussian_lower_bound(vf: &VarianceFunction, delta: f64) -> Result<BoundResult> {
    let series = gaussian_series(vf, delta)?;
    let mut inputs = vec![("delta", delta)];
    if let VarianceFunction::Power { alpha, scale } = vf {
        inputs.extend([("alpha", *alpha), ("scale", *scale)]);
    }
    if let VarianceFunction::Logarithmic { scale } = vf {
        inputs.push(("scale", *scale));
    }
    // the bracket uses the largest value the full series can take
    let value = if series.saturated { 0.0 } else { (1.0 - series.partial - series.tail_bound) / delta };
    let mut res = BoundResult::closed(value, BoundFormula::GaussianSeries, &inputs);
    res.series_terms = series.terms;
    res.series_tail_bound = series.tail_bound;
    if series.diverges {
        res.diagnostics.push("series diverges: sigma^2 grows too slowly".into());
    } else if series.saturated {
        res.diagnostics.push("series sum reaches 1; bound is trivial".into());
    }
    Ok(res)
}

/// Lower bound for `sigma(t) >= C t^{kappa/2}`:
/// `(1/delta) (1 - Gamma(1/kappa) / (delta kappa (C^2/8)^{1/kappa}))`.
pub fn gaussian_power_bound(c: f64, kappa: f64, delta: f64) -> Result<BoundResult> {
    if !(c > 0.0 && kappa > 0.0 && delta > 0.0) {
        return Err(PickandsError::InvalidArgument("C, kappa and delta must be positive".into()));
    }
    let integral = gamma(1.0 / kappa) / (kappa * (c * c / 8.0).powf(1.0 / kappa));
    let value = (1.0 - integral / delta) / delta;
    Ok(BoundResult::closed(value, BoundFormula::GaussianPower, &[("C", c), ("kappa", kappa), ("delta", delta)]))
}

fn levy_lambda(model: &LevyModel) -> Result<(f64, f64, f64)> {
    model.validate()?;
    let phi1 = laplace_exponent(model, 1.0)?;
    let phi_half = laplace_exponent(model, 0.5)?;
    let lambda = phi1 / 2.0 - phi_half;
    if !(lambda > 0.0) {
        return Err(PickandsError::Degenerate(format!("lambda = Phi(1)/2 - Phi(1/2) = {lambda} is not positive")));
    }
    Ok((lambda, phi1, phi_half))
}

/// Lower bound `(1/delta) max(0, 1 - 2q) / (1 - q)`, `q = exp(-lambda delta)`.
pub fn levy_lower_bound(model: &LevyModel, delta: f64) -> Result<BoundResult> {
    if !(delta > 0.0) {
        return Err(PickandsError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let (lambda, phi1, phi_half) = levy_lambda(model)?;
    let q = (-lambda * delta).exp();
    let value = (1.0 - 2.0 * q).max(0.0) / (1.0 - q) / delta;
    Ok(BoundResult::closed(
        value,
        BoundFormula::Levy,
        &[("delta", delta), ("lambda", lambda), ("phi_1", phi1), ("phi_half", phi_half)],
    ))
}

/// Lower bound `lambda / 4 = (Phi(1) - 2 Phi(1/2)) / 8` for `H_W^0`.
pub fn levy_h0_bound(model: &LevyModel) -> Result<BoundResult> {
    let (lambda, phi1, phi_half) = levy_lambda(model)?;
    Ok(BoundResult::closed(
        lambda / 4.0,
        BoundFormula::LevyContinuous,
        &[("lambda", lambda), ("phi_1", phi1), ("phi_half", phi_half)],
    ))
}

/// Threshold for `liminf sigma^2(t) / ln t`.
pub const LN8_THRESHOLD: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ln8Verdict {
    Holds,
    Fails,
}

impl Ln8Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Ln8Verdict::Holds => "condition holds numerically",
            Ln8Verdict::Fails => "condition fails numerically",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ln8Point {
    pub t: f64,
    pub ratio: f64,
    /// Minimum of the ratio over the grid points `>= t`.
    pub min_beyond: f64,
}

/// Advisory check of `liminf_{t -> inf} sigma^2(t) / ln t > 8`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ln8Report {
    pub points: Vec<Ln8Point>,
    /// Smallest ratio over the last decade of the grid.
    pub tail_min: f64,
    pub verdict: Ln8Verdict,
    pub horizon: f64,
    pub diagnostics: Vec<String>,
}

/// Evaluate `sigma^2(t) / ln t` on a log-spaced grid in `[10, horizon]`.
pub fn check_ln8(vf: &VarianceFunction, horizon: f64) -> Result<Ln8Report> {
    vf.validate()?;
    let mut diagnostics = Vec::new();
    let mut top = horizon;
    if top > vf.max_time() {
        top = vf.max_time();
        diagnostics.push(format!("horizon clipped to the table end {top}"));
    }
    if !(top > 10.0) {
        return Err(PickandsError::InvalidArgument("horizon must exceed 10".into()));
    }
    const STEPS: usize = 200;
    let (l0, l1) = (10f64.ln(), top.ln());
    let mut points = (0..=STEPS)
        .map(|j| {
            let t = (l0 + (l1 - l0) * j as f64 / STEPS as f64).exp().min(top);
            Ok(Ln8Point { t, ratio: variance_at(vf, t)? / t.ln(), min_beyond: f64::INFINITY })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut running = f64::INFINITY;
    for p in points.iter_mut().rev() {
        running = running.min(p.ratio);
        p.min_beyond = running;
    }
    let tail_min = points.iter().filter(|p| p.t >= top / 10.0).map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let verdict = if tail_min > LN8_THRESHOLD { Ln8Verdict::Holds } else { Ln8Verdict::Fails };
    Ok(Ln8Report { points, tail_min, verdict, horizon: top, diagnostics })
}
