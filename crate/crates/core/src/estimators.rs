//! Monte Carlo estimators of `H_W^delta`.
//!
//! Every estimator averages a bounded per-path statistic over independent
//! replications. Estimators whose target involves an infinite index set are
//! truncated at a horizon `N` that is grown geometrically until the estimate
//! at `N` and at `N / growth`, computed on the same paths, agree to within a
//! fraction of the standard error.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PickandsError, Result};
use crate::model::{GridSpec, ProcessModel, VarianceFunction};
use crate::parallel::replicate;
use crate::rng::{open_unit, stream, Purpose};
use crate::sampler::{PathCache, PathSampler};
use crate::stats::{weighted_linear_fit, Moments, Z95};

/// Estimator tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Definitional,
    Exceedance,
    Difference,
    Argmax,
    DiekerYakir,
    TimeReversed,
    ContinuousDy,
    Blocks,
    Candidate,
}

impl Method {
    /// The grid estimators compared against each other by [`crosscheck`].
    pub const GRID: [Method; 6] = [
        Method::Definitional,
        Method::Exceedance,
        Method::Difference,
        Method::Argmax,
        Method::DiekerYakir,
        Method::TimeReversed,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Definitional => "definitional",
            Method::Exceedance => "exceedance",
            Method::Difference => "difference",
            Method::Argmax => "argmax",
            Method::DiekerYakir => "dieker-yakir",
            Method::TimeReversed => "time-reversed",
            Method::ContinuousDy => "continuous-dy",
            Method::Blocks => "blocks",
            Method::Candidate => "candidate",
        }
    }

    /// Whether the statistic looks at negative times.
    pub fn needs_two_sided(self) -> bool {
        matches!(self, Method::Argmax | Method::DiekerYakir | Method::TimeReversed | Method::ContinuousDy)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = PickandsError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "definitional" | "defP" => Method::Definitional,
            "exceedance" | "albinA" => Method::Exceedance,
            "difference" | "albinB" => Method::Difference,
            "argmax" | "formulaAB" | "formulaABC" => Method::Argmax,
            "dieker-yakir" | "seb" => Method::DiekerYakir,
            "time-reversed" | "kabWang" => Method::TimeReversed,
            "continuous-dy" | "ow" => Method::ContinuousDy,
            "blocks" => Method::Blocks,
            "candidate" => Method::Candidate,
            other => return Err(PickandsError::InvalidArgument(format!("unknown method '{other}'"))),
        })
    }
}

/// Horizon growth rule for truncated index sets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruncationPolicy {
    /// First horizon, in grid steps.
    pub initial_horizon: usize,
    pub growth: usize,
    /// Stop once the change is below `tolerance * stderr`.
    pub tolerance: f64,
    /// Largest horizon tried, in grid steps.
    pub max_horizon: usize,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        TruncationPolicy { initial_horizon: 16, growth: 2, tolerance: 0.1, max_horizon: 1 << 16 }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.initial_horizon < 1 {
            return Err(PickandsError::InvalidArgument("initial horizon must be at least 1".into()));
        }
        if self.growth < 2 {
            return Err(PickandsError::InvalidArgument("growth factor must be at least 2".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(PickandsError::InvalidArgument("stability tolerance must be positive".into()));
        }
        if self.max_horizon < self.initial_horizon {
            return Err(PickandsError::InvalidArgument("max horizon is below the initial horizon".into()));
        }
        Ok(())
    }

    /// Fixed horizon `n`: a single round, reported as stable.
    pub fn fixed(n: usize) -> Self {
        TruncationPolicy { initial_horizon: n, growth: 2, tolerance: f64::INFINITY, max_horizon: n }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Final horizon in grid steps (window size for windowed estimators).
    pub horizon: usize,
    pub stable: bool,
    pub rounds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    pub method: Method,
    pub delta: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub replications: usize,
    pub truncation: Truncation,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    pub flags: Vec<String>,
}

impl EstimateResult {
    fn from_moments(method: Method, delta: f64, m: &Moments, truncation: Truncation, seed: u64) -> Self {
        EstimateResult {
            method,
            delta,
            estimate: m.mean,
            stderr: m.stderr(),
            replications: m.count as usize,
            truncation,
            seed,
            mesh: None,
            window: None,
            flags: Vec::new(),
        }
    }

    pub fn ci95(&self) -> (f64, f64) {
        (self.estimate - Z95 * self.stderr, self.estimate + Z95 * self.stderr)
    }

    pub fn covers(&self, value: f64) -> bool {
        let (lo, hi) = self.ci95();
        lo <= value && value <= hi
    }

    pub fn overlaps(&self, other: &EstimateResult) -> bool {
        let (a0, a1) = self.ci95();
        let (b0, b1) = other.ci95();
        a0 <= b1 && b0 <= a1
    }

    pub fn has_flag(&self, flag: &str) -> bool {
        self.flags.iter().any(|f| f == flag)
    }

    fn flag(&mut self, flag: &str) {
        if !self.has_flag(flag) {
            self.flags.push(flag.to_string());
        }
    }
}

/// Flag attached when a truncation horizon did not stabilize.
pub const FLAG_UNSTABLE: &str = "truncation-unstable";

fn check_common(model: &ProcessModel, delta: f64, reps: usize) -> Result<()> {
    model.validate()?;
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(PickandsError::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    if reps < 2 {
        return Err(PickandsError::InvalidArgument("at least 2 replications are needed for a standard error".into()));
    }
    Ok(())
}

fn max_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Per-path statistic of a truncated grid estimator at horizon `h`.
///
/// `w` holds the path on `[-n, n]` (or `[0, n]`) with `w[origin] = W(0)`,
/// and `e` is the unit exponential paired with the path.
pub fn grid_statistic(method: Method, w: &[f64], origin: usize, e: f64, h: usize, delta: f64) -> f64 {
    let right = &w[origin + 1..=origin + h];
    match method {
        Method::Exceedance => {
            if e + max_of(right) <= 0.0 {
                1.0 / delta
            } else {
                0.0
            }
        }
        // same event, reported as a probability
        Method::Candidate => {
            if e + max_of(right) <= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        Method::Difference => (1.0 - max_of(right).exp()).max(0.0) / delta,
        Method::Argmax => {
            let left = &w[origin - h..origin];
            if max_of(left) < 0.0 && max_of(right) <= 0.0 {
                1.0 / delta
            } else {
                0.0
            }
        }
        Method::DiekerYakir => {
            let all = &w[origin - h..=origin + h];
            let m = max_of(all);
            1.0 / (delta * all.iter().map(|&x| (x - m).exp()).sum::<f64>())
        }
        Method::TimeReversed => {
            if e + max_of(&w[origin - h..origin]) <= 0.0 {
                1.0 / delta
            } else {
                0.0
            }
        }
        Method::Definitional | Method::ContinuousDy | Method::Blocks => {
            panic!("{method} is not a truncated grid statistic")
        }
    }
}

/// Unit exponential for replication `index`.
pub(crate) fn exponential(seed: u64, index: u64) -> f64 {
    -open_unit(&mut stream(seed, Purpose::Exponential, index)).ln()
}

/// Run the truncated estimators in `methods` on shared paths.
pub(crate) fn doubling(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
    methods: &[Method],
) -> Result<Vec<EstimateResult>> {
    check_common(model, delta, reps)?;
    policy.validate()?;
    let two_sided = methods.iter().any(|m| m.needs_two_sided());
    if two_sided {
        let names: Vec<&str> = methods.iter().filter(|m| m.needs_two_sided()).map(|m| m.name()).collect();
        model.require_two_sided(&names.join(", "))?;
    }
    let k = methods.len();
    let mut n = policy.initial_horizon;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let grid = if two_sided { GridSpec::symmetric(delta, n)? } else { GridSpec::one_sided(delta, n)? };
        let sampler = PathSampler::new(model, grid)?;
        let origin = grid.origin();
        let prev = n / policy.growth;
        let moments = replicate(reps, 2 * k, PathCache::new, |cache, r, out| {
            let w = cache.path(&sampler, seed, r);
            let e = exponential(seed, r);
            for (j, &m) in methods.iter().enumerate() {
                out[2 * j] = grid_statistic(m, w, origin, e, n, delta);
                out[2 * j + 1] = if prev >= 1 { grid_statistic(m, w, origin, e, prev, delta) } else { f64::NAN };
            }
        });
        let stable = prev >= 1
            && (0..k).all(|j| {
                let (at_n, at_prev) = (&moments[2 * j], &moments[2 * j + 1]);
                (at_n.mean - at_prev.mean).abs() <= policy.tolerance * at_n.stderr()
            });
        if stable || n >= policy.max_horizon {
            let truncation = Truncation { horizon: n, stable, rounds };
            return Ok(methods
                .iter()
                .enumerate()
                .map(|(j, &m)| {
                    let mut res = EstimateResult::from_moments(m, delta, &moments[2 * j], truncation, seed);
                    if !stable {
                        res.flag(FLAG_UNSTABLE);
                    }
                    res
                })
                .collect());
        }
        n = (n * policy.growth).min(policy.max_horizon);
    }
}

fn single(
    method: Method,
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    Ok(doubling(model, delta, policy, reps, seed, &[method])?.remove(0))
}

/// `(1/delta) P(sup_{i>=1} (E + W(delta i)) <= 0)`.
pub fn est_exceedance(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    single(Method::Exceedance, model, delta, policy, reps, seed)
}

/// `(1/delta) E (1 - sup_{i>=1} e^{W(delta i)})_+`.
pub fn est_difference(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    single(Method::Difference, model, delta, policy, reps, seed)
}

/// `(1/delta) P(sup_{i<0} W < 0, sup_{i>0} W <= 0)`: the grid maximum sits at 0.
pub fn est_argmax(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    single(Method::Argmax, model, delta, policy, reps, seed)
}

/// `E [ sup e^W / (delta * sum e^W) ]` over the two-sided grid.
pub fn est_dieker_yakir(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    single(Method::DiekerYakir, model, delta, policy, reps, seed)
}

/// `(1/delta) P(sup_{i<=-1} (E + W(delta i)) <= 0)`.
pub fn est_time_reversed(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    single(Method::TimeReversed, model, delta, policy, reps, seed)
}

/// How the definitional estimator averages `sup e^W` over `[0, T]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DefinitionalSampler {
    /// Shift-tilted form for two-sided models, direct otherwise.
    #[default]
    Auto,
    /// `sup e^W` of plain paths. Unbiased but heavy tailed.
    Direct,
    /// `sum_s sup/sum` over all windows `[0,T] - s` of a two-sided path;
    /// same expectation, each term bounded by 1.
    Tilted,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DefinitionalOptions {
    /// Grid step used when `delta = 0`.
    pub mesh: Option<f64>,
    pub sampler: DefinitionalSampler,
    /// Report `(E sup_[0,2T] - E sup_[0,T]) / T`, which removes the boundary
    /// term of order `1/T` (tilted sampler only).
    pub edge_corrected: bool,
}

/// Flag on definitional estimates whose per-path statistic is unbounded.
pub const FLAG_HEAVY_TAIL: &str = "heavy-tailed";
/// Flag on definitional estimates using the two-window difference.
pub const FLAG_EDGE_CORRECTED: &str = "edge-corrected";
/// Flag on results computed on a mesh in place of the continuum.
pub const FLAG_DISCRETIZED: &str = "discretized";

/// `(1/T) E sup_{t in delta Z, 0 <= t <= T} e^{W(t)}`.
pub fn est_definitional(
    model: &ProcessModel,
    delta: f64,
    window: f64,
    reps: usize,
    seed: u64,
    opts: DefinitionalOptions,
) -> Result<EstimateResult> {
    let step = if delta > 0.0 {
        delta
    } else if delta == 0.0 {
        opts.mesh
            .filter(|&m| m > 0.0)
            .ok_or_else(|| PickandsError::InvalidArgument("delta = 0 needs a positive mesh".into()))?
    } else {
        return Err(PickandsError::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    };
    check_common(model, step, reps)?;
    if !(window > 0.0) || !window.is_finite() {
        return Err(PickandsError::InvalidArgument(format!("window T must be positive, got {window}")));
    }
    let n = (window / step * (1.0 + 1e-12)).floor() as usize;
    let tilted = match opts.sampler {
        DefinitionalSampler::Auto => model.supports_two_sided(),
        DefinitionalSampler::Direct => false,
        DefinitionalSampler::Tilted => {
            model.require_two_sided("tilted definitional sampler")?;
            true
        }
    };
    if opts.edge_corrected && !tilted {
        return Err(PickandsError::Unsupported("edge correction needs the tilted sampler".into()));
    }
    let reach = if opts.edge_corrected { 2 * n } else { n };
    let grid = if tilted { GridSpec::symmetric(step, reach)? } else { GridSpec::one_sided(step, n)? };
    let sampler = PathSampler::new(model, grid)?;
    let origin = grid.origin();
    let span = n as f64 * step;
    let moments = replicate(reps, 1, || (PathCache::new(), Vec::<f64>::new()), |(cache, right), r, out| {
        let w = cache.path(&sampler, seed, r);
        out[0] = if opts.edge_corrected {
            (tilted_window_sum(w, origin, 2 * n, right) - tilted_window_sum(w, origin, n, right)) / span
        } else if tilted {
            tilted_window_sum(w, origin, n, right) / window
        } else {
            max_of(w).exp() / window
        };
    });
    let mut res = EstimateResult::from_moments(
        Method::Definitional,
        delta,
        &moments[0],
        Truncation { horizon: n, stable: true, rounds: 1 },
        seed,
    );
    res.window = Some(window);
    if delta == 0.0 {
        res.mesh = Some(step);
        res.flag(FLAG_DISCRETIZED);
    }
    if !tilted {
        res.flag(FLAG_HEAVY_TAIL);
    }
    if opts.edge_corrected {
        res.flag(FLAG_EDGE_CORRECTED);
    }
    Ok(res)
}

/// `sum_{s=0}^{len} M_s / S_s` over the windows `[-s, len - s]` of a path
/// whose origin sits at position `origin`. Every window contains the origin,
/// so sums and maxima split into a left suffix and a right prefix and are
/// accumulated without cancellation.
fn tilted_window_sum(w: &[f64], origin: usize, len: usize, right: &mut Vec<f64>) -> f64 {
    // right[2k], right[2k+1]: sum and max of e^W over origin+1..=origin+k
    right.clear();
    right.extend([0.0, 0.0]);
    let (mut s, mut m) = (0.0f64, 0.0f64);
    for &x in &w[origin + 1..=origin + len] {
        let e = x.exp();
        s += e;
        m = m.max(e);
        right.extend([s, m]);
    }
    let (mut ls, mut lm) = (0.0f64, 0.0f64);
    let mut total = 0.0;
    for shift in 0..=len {
        let e = w[origin - shift].exp();
        ls += e;
        lm = lm.max(e);
        let k = len - shift;
        total += lm.max(right[2 * k + 1]) / (ls + right[2 * k]);
    }
    total
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContinuousOptions {
    /// Sample on `eta / refine` to tighten the supremum; sums stay on `eta Z`.
    pub refine: usize,
}

/// Flag set when the supremum is taken over a finite mesh.
pub const FLAG_DISCRETE_SUP: &str = "discrete-sup";
/// Flag set when halving the window moves the estimate by more than one
/// stderr (or 0.01% when the stderr vanishes).
pub const FLAG_WINDOW: &str = "window-sensitive";

enum SupRule {
    Grid,
    /// Independent increments: exact Brownian-bridge maxima between mesh points.
    Bridge { rate: f64 },
    /// `B(t) = t Z`: the supremum of the concave parabola is explicit.
    Parabola { curvature: f64 },
}

/// `E [ sup_{|t|<=window} e^{W(t)} / (eta * sum_{t in eta Z, |t|<=window} e^{W(t)}) ]`,
/// which targets `H_W^0` for every mesh `eta`.
pub fn est_continuous_dy(
    model: &ProcessModel,
    eta: f64,
    window: f64,
    reps: usize,
    seed: u64,
    opts: ContinuousOptions,
) -> Result<EstimateResult> {
    check_common(model, eta, reps)?;
    model.require_two_sided("continuous Dieker-Yakir estimator")?;
    if !(window >= eta) {
        return Err(PickandsError::InvalidArgument("window must be at least one mesh step".into()));
    }
    let refine = opts.refine.max(1);
    let step = eta / refine as f64;
    let n = (window / eta * (1.0 + 1e-12)).floor() as usize * refine;
    let half = n / 2 / refine * refine;
    let grid = GridSpec::symmetric(step, n)?;
    let sampler = PathSampler::new(model, grid)?;
    let rule = match model {
        ProcessModel::Gaussian(VarianceFunction::Power { alpha, scale }) if *alpha == 1.0 => SupRule::Bridge { rate: *scale },
        ProcessModel::Gaussian(VarianceFunction::Power { alpha, scale }) if *alpha == 2.0 => {
            SupRule::Parabola { curvature: *scale }
        }
        _ => SupRule::Grid,
    };
    let moments = replicate(reps, 2, PathCache::new, |cache, r, out| {
        let w = cache.path(&sampler, seed, r);
        let (inner, outer) = match rule {
            SupRule::Grid => (max_of(&w[n - half..=n + half]), max_of(w)),
            SupRule::Bridge { rate } => {
                let mut rng = stream(seed, Purpose::Bridge, r);
                let (mut inner, mut outer) = (0.0f64, 0.0f64);
                for (p, pair) in w.windows(2).enumerate() {
                    let (a, b) = (pair[0], pair[1]);
                    let ln_u = open_unit(&mut rng).ln();
                    let top = 0.5 * (a + b + ((b - a).powi(2) - 2.0 * rate * step * ln_u).sqrt());
                    outer = outer.max(top);
                    if p + half >= n && p < n + half {
                        inner = inner.max(top);
                    }
                }
                (inner, outer)
            }
            SupRule::Parabola { curvature } => {
                // W(t) = b t - curvature t^2 / 2
                let b = (w[n + 1] + 0.5 * curvature * step * step) / step;
                let sup = |h: usize| {
                    let t = (b / curvature).clamp(-(h as f64) * step, h as f64 * step);
                    b * t - 0.5 * curvature * t * t
                };
                (sup(half), sup(n))
            }
        };
        let ratio = |h: usize, m: f64| 1.0 / (eta * w[n - h..=n + h].iter().step_by(refine).map(|&x| (x - m).exp()).sum::<f64>());
        out[0] = ratio(n, outer);
        out[1] = ratio(half, inner);
    });
    let mut res = EstimateResult::from_moments(
        Method::ContinuousDy,
        0.0,
        &moments[0],
        Truncation { horizon: n, stable: true, rounds: 1 },
        seed,
    );
    res.mesh = Some(eta);
    res.window = Some(window);
    if matches!(rule, SupRule::Grid) {
        res.flag(FLAG_DISCRETE_SUP);
    }
    let shift = (moments[0].mean - moments[1].mean).abs();
    if half == 0 || shift > moments[0].stderr().max(1e-4 * moments[0].mean.abs()) {
        res.truncation.stable = false;
        res.flag(FLAG_WINDOW);
    }
    Ok(res)
}

/// Outcome of running several estimators on shared random numbers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub results: Vec<EstimateResult>,
    pub pairs: Vec<PairCheck>,
    pub concordant: bool,
    pub underpowered: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub a: Method,
    pub b: Method,
    pub overlap: bool,
}

/// Below this many replications a crosscheck is flagged as underpowered.
pub const MIN_CROSSCHECK_REPS: usize = 1_000;

impl CrossCheckReport {
    pub fn discordant(&self) -> impl Iterator<Item = &PairCheck> {
        self.pairs.iter().filter(|p| !p.overlap)
    }
}

/// Run every estimator applicable to `model` at `delta`, sharing paths and
/// exponentials between the truncated ones, and compare all pairs of 95% CIs.
pub fn crosscheck(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
    definitional_window: f64,
) -> Result<CrossCheckReport> {
    let truncated: Vec<Method> = Method::GRID
        .into_iter()
        .filter(|m| *m != Method::Definitional && (model.supports_two_sided() || !m.needs_two_sided()))
        .collect();
    let opts = DefinitionalOptions { edge_corrected: model.supports_two_sided(), ..Default::default() };
    let mut results = vec![est_definitional(model, delta, definitional_window, reps, seed, opts)?];
    results.extend(doubling(model, delta, policy, reps, seed, &truncated)?);
    let mut pairs = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            pairs.push(PairCheck { a: results[i].method, b: results[j].method, overlap: results[i].overlaps(&results[j]) });
        }
    }
    let concordant = pairs.iter().all(|p| p.overlap);
    Ok(CrossCheckReport { results, pairs, concordant, underpowered: reps < MIN_CROSSCHECK_REPS })
}

/// Straight-line extrapolation of `(delta, estimate)` pairs to `delta = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub stderr: f64,
    pub slope: f64,
    pub chi2: f64,
    pub flags: Vec<String>,
}

/// Flag noting that the `delta -> 0` limit is only established for the
/// fractional family.
pub const FLAG_FAMILY_SPECIFIC: &str = "family-specific-limit";

/// Weighted linear fit of the estimates against `delta`, reporting the intercept.
pub fn extrapolate_to_zero(results: &[EstimateResult]) -> Result<Extrapolation> {
    let x: Vec<f64> = results.iter().map(|r| r.delta).collect();
    let y: Vec<f64> = results.iter().map(|r| r.estimate).collect();
    let se: Vec<f64> = results.iter().map(|r| r.stderr).collect();
    let fit = weighted_linear_fit(&x, &y, &se)
        .ok_or_else(|| PickandsError::InvalidArgument("need at least two distinct delta values".into()))?;
    Ok(Extrapolation {
        value: fit.intercept,
        stderr: fit.intercept_se,
        slope: fit.slope,
        chi2: fit.chi2,
        flags: vec![FLAG_FAMILY_SPECIFIC.to_string()],
    })
}
