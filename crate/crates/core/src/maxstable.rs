//! The max-stable process `zeta_W(t) = max_i P_i exp(W_i(t))`, its
//! finite-dimensional laws, extremal-index estimators and the tail process.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{PickandsError, Result};
use crate::estimators::{doubling, EstimateResult, Method, Truncation, TruncationPolicy};
use crate::model::{GridSpec, ProcessModel};
use crate::parallel::{replicate, replicate_collect};
use crate::rng::{child_seed, open_unit, stream, Purpose};
use crate::sampler::{PathCache, PathSampler, PointSampler, Scratch};
use crate::stats::{ks_critical_1pct, ks_distance, log_sum_exp, Moments};

/// Standard deviations above the mean used to bound `W` in the spectral stopping rule.
pub const PLAUSIBLE_SD: f64 = 5.0;
/// Default hard cap on the number of Poisson atoms per sample.
pub const DEFAULT_MAX_ATOMS: usize = 100_000;

/// How each atom's random function is built.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Representation {
    /// `P_i exp(W_i(t))` with `P_i = 1 / Gamma_i`. Atoms stop once
    /// `P_i exp(w_max(t)) < zeta(t)` at every grid point, where `w_max(t)` is
    /// the mean of `W(t)` plus [`PLAUSIBLE_SD`] standard deviations. Works for
    /// every model; the residual bias is tiny but nonzero, and the atom count
    /// grows like `exp(max_t w_max(t))`.
    #[default]
    Spectral,
    /// `m exp(W_i(t - S_i)) / sum_{u in A} exp(W_i(u - S_i)) / Gamma_i` with
    /// `S_i` uniform on the `m` grid points `A`. Every atom is bounded by
    /// `m / Gamma_i`, so the stopping rule is exact. Needs two-sided paths.
    SumNormalized,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxStableSample {
    pub grid: GridSpec,
    pub zeta: Vec<f64>,
    pub atoms_used: usize,
    /// The hard atom cap ended the simulation before the stopping rule did.
    pub truncation_bias_flag: bool,
}

impl MaxStableSample {
    /// `(index, t, zeta)` rows for export.
    pub fn rows(&self) -> impl Iterator<Item = (i64, f64, f64)> + '_ {
        self.grid.indices().zip(&self.zeta).map(|(i, &z)| (i, self.grid.time(i), z))
    }

    pub fn max(&self) -> f64 {
        self.zeta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Reusable per-worker buffers.
#[derive(Default)]
pub struct Work {
    scratch: Scratch,
    w: Vec<f64>,
}

impl Work {
    pub fn new() -> Self {
        Self::default()
    }
}

fn unit_exponential<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -open_unit(rng).ln()
}

/// Simulator of `zeta_W` on a fixed grid.
#[derive(Clone)]
pub struct MaxStableSampler {
    grid: GridSpec,
    representation: Representation,
    max_atoms: usize,
    paths: PathSampler,
    /// Per grid point, `ln` of the largest value an atom with `Gamma = 1` can take.
    log_cap: Vec<f64>,
}

impl MaxStableSampler {
    pub fn new(model: &ProcessModel, grid: GridSpec, representation: Representation, max_atoms: usize) -> Result<Self> {
        model.validate()?;
        grid.validate()?;
        if max_atoms < 1 {
            return Err(PickandsError::InvalidArgument("at least one atom is needed".into()));
        }
        let (paths, log_cap) = match representation {
            Representation::Spectral => {
                let log_cap = grid
                    .indices()
                    .map(|i| {
                        let t = grid.time(i);
                        Ok(model.mean_w(t)? + PLAUSIBLE_SD * model.variance(t)?.sqrt())
                    })
                    .collect::<Result<Vec<_>>>()?;
                (PathSampler::new(model, grid)?, log_cap)
            }
            Representation::SumNormalized => {
                model.require_two_sided("sum-normalized max-stable representation")?;
                let span = (grid.i_max - grid.i_min) as usize;
                let paths = PathSampler::new(model, GridSpec::symmetric(grid.delta, span)?)?;
                (paths, vec![(grid.len() as f64).ln(); grid.len()])
            }
        };
        Ok(MaxStableSampler { grid, representation, max_atoms, paths, log_cap })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn m(&self) -> usize {
        self.grid.len()
    }

    /// `ln Y(p)` for every grid position of one sum-normalized atom.
    fn normalized_atom<R: Rng + ?Sized>(&self, rng: &mut R, work: &mut Work, out: &mut Vec<f64>) {
        let m = self.m();
        let shift = rng.random_range(0..m);
        self.paths.sample_into(rng, &mut work.scratch, &mut work.w);
        // grid position p maps to path position (m - 1) + p - shift
        let window = &work.w[m - 1 - shift..2 * m - 1 - shift];
        let norm = log_sum_exp(window) - (m as f64).ln();
        out.clear();
        out.extend(window.iter().map(|&x| x - norm));
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, work: &mut Work) -> MaxStableSample {
        let zeta = vec![0.0; self.m()];
        self.continue_from(rng, work, zeta, 0.0, 0)
    }

    /// Add atoms with `Gamma > gamma` to `zeta` until the stopping rule holds.
    fn continue_from<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        work: &mut Work,
        mut zeta: Vec<f64>,
        mut gamma: f64,
        mut used: usize,
    ) -> MaxStableSample {
        let mut stopped = false;
        let mut log_y = Vec::new();
        while used < self.max_atoms {
            gamma += unit_exponential(rng);
            let bound = -gamma.ln();
            if zeta.iter().zip(&self.log_cap).all(|(&z, &c)| bound + c < z.ln()) {
                stopped = true;
                break;
            }
            used += 1;
            match self.representation {
                Representation::Spectral => {
                    self.paths.sample_into(rng, &mut work.scratch, &mut work.w);
                    for (z, &x) in zeta.iter_mut().zip(&work.w) {
                        *z = z.max(x.exp() / gamma);
                    }
                }
                Representation::SumNormalized => {
                    self.normalized_atom(rng, work, &mut log_y);
                    for (z, &ly) in zeta.iter_mut().zip(&log_y) {
                        *z = z.max(ly.exp() / gamma);
                    }
                }
            }
        }
        MaxStableSample { grid: self.grid, zeta, atoms_used: used, truncation_bias_flag: !stopped }
    }

    /// Exact draw of `zeta` conditionally on `zeta(0) > threshold`.
    ///
    /// Only atoms with `Gamma < m / threshold` can exceed the threshold. Their
    /// configuration is drawn by rejection until one of them does; the
    /// remaining atoms follow unconditionally.
    pub fn sample_conditional<R: Rng + ?Sized>(&self, threshold: f64, rng: &mut R, work: &mut Work) -> Result<MaxStableSample> {
        if self.representation != Representation::SumNormalized {
            return Err(PickandsError::Unsupported("conditional sampling needs the sum-normalized representation".into()));
        }
        if !(threshold > 0.0) {
            return Err(PickandsError::InvalidArgument("threshold must be positive".into()));
        }
        let m = self.m();
        let origin = self.grid.origin();
        let g = m as f64 / threshold;
        let mut log_y = Vec::new();
        loop {
            let k = zero_truncated_poisson(g, rng);
            let mut zeta = vec![0.0f64; m];
            let mut hit = false;
            for _ in 0..k {
                let gamma = g * open_unit(rng);
                self.normalized_atom(rng, work, &mut log_y);
                hit |= log_y[origin].exp() / gamma > threshold;
                for (z, &ly) in zeta.iter_mut().zip(&log_y) {
                    *z = z.max(ly.exp() / gamma);
                }
            }
            if hit {
                return Ok(self.continue_from(rng, work, zeta, g, k));
            }
        }
    }
}

/// Poisson(`g`) conditioned to be at least 1, by inversion.
fn zero_truncated_poisson<R: Rng + ?Sized>(g: f64, rng: &mut R) -> usize {
    let u = open_unit(rng);
    let mut k = 1usize;
    // P(K = k | K >= 1) = g^k e^{-g} / (k! (1 - e^{-g}))
    let mut p = g * (-g).exp() / -(-g).exp_m1();
    let mut cum = p;
    while cum < u && p > 0.0 {
        k += 1;
        p *= g / k as f64;
        cum += p;
    }
    k
}

/// One spectral draw of `zeta_W` on `grid` with at most `n_atoms` atoms.
pub fn sample_max_stable<R: Rng + ?Sized>(
    model: &ProcessModel,
    grid: GridSpec,
    n_atoms: usize,
    rng: &mut R,
) -> Result<MaxStableSample> {
    Ok(MaxStableSampler::new(model, grid, Representation::Spectral, n_atoms)?.sample(rng, &mut Work::new()))
}

/// `count` independent samples, sample `i` driven by stream `(seed, Atoms, i)`.
pub fn sample_many(sampler: &MaxStableSampler, count: usize, seed: u64) -> Vec<MaxStableSample> {
    replicate_collect(count, Work::new, |work, i| sampler.sample(&mut stream(seed, Purpose::Atoms, i), work))
}

/// Monte Carlo value of `P(zeta(t_j) <= x_j for all j)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FddEstimate {
    pub probability: f64,
    pub stderr: f64,
    /// `E max_j exp(W(t_j)) / x_j`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub replications: usize,
}

/// `exp(-E max_j exp(W(t_j)) / x_j)` with the standard error propagated by
/// the delta method.
///
/// For two-sided models the exponent is computed from the shift identity
/// `E max_j exp(W(t_j)) / x_j = sum_k P(W(t_j - t_k) <= ln(x_j / x_k) for all j) / x_k`,
/// which averages bounded indicators. Lévy models average `max_j exp(W(t_j)) / x_j` directly.
pub fn fdd_probability(model: &ProcessModel, times: &[f64], thresholds: &[f64], reps: usize, seed: u64) -> Result<FddEstimate> {
    if times.len() != thresholds.len() || times.is_empty() {
        return Err(PickandsError::InvalidArgument("times and thresholds must be non-empty and of equal length".into()));
    }
    if thresholds.iter().any(|&x| !(x > 0.0)) {
        return Err(PickandsError::InvalidArgument("thresholds must be positive".into()));
    }
    if reps < 2 {
        return Err(PickandsError::InvalidArgument("at least 2 replications are needed".into()));
    }
    let (exponent, variance) = if model.supports_two_sided() {
        let mut total = (0.0, 0.0);
        for (k, (&tk, &xk)) in times.iter().zip(thresholds).enumerate() {
            let shifted: Vec<f64> = times.iter().map(|&t| t - tk).collect();
            let levels: Vec<f64> = thresholds.iter().map(|&x| (x / xk).ln()).collect();
            let sampler = PointSampler::new(model, &shifted)?;
            let s = child_seed(seed, k as u64);
            let m = replicate(reps, 1, || (Vec::new(), Vec::new()), |(z, w), r, out| {
                sampler.sample_into(&mut stream(s, Purpose::Path, r), z, w);
                out[0] = if w.iter().zip(&levels).enumerate().all(|(j, (&x, &l))| j == k || x <= l) { 1.0 } else { 0.0 };
            });
            total.0 += m[0].mean / xk;
            total.1 += (m[0].stderr() / xk).powi(2);
        }
        total
    } else {
        let sampler = PointSampler::new(model, times)?;
        let m = replicate(reps, 1, || (Vec::new(), Vec::new()), |(z, w), r, out| {
            sampler.sample_into(&mut stream(seed, Purpose::Path, r), z, w);
            out[0] = w.iter().zip(thresholds).map(|(&x, &t)| x.exp() / t).fold(0.0, f64::max);
        });
        (m[0].mean, m[0].stderr().powi(2))
    };
    let p = (-exponent).exp();
    Ok(FddEstimate {
        probability: p,
        stderr: p * variance.sqrt(),
        exponent,
        exponent_stderr: variance.sqrt(),
        replications: reps,
    })
}

/// Strategy for the block estimator.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockSimulation {
    /// `Exact` for two-sided models, `Spectral` otherwise.
    #[default]
    Auto,
    /// Sum-normalized atoms restricted to those able to exceed `n`
    /// (`Gamma < m / n`); distributionally identical to a full simulation.
    Exact,
    /// Full spectral simulation of every block.
    Spectral,
}

/// Flag set when fewer than 30 blocks exceeded the level.
pub const FLAG_FEW_EXCEEDANCES: &str = "few-exceedances";

/// `(n / r_n) P(max_{0 <= i <= r_n} zeta(delta i) > n)`, an estimate of `theta_W^delta`.
pub fn est_extremal_index_blocks(
    model: &ProcessModel,
    delta: f64,
    n: f64,
    r_n: usize,
    reps: usize,
    seed: u64,
    simulation: BlockSimulation,
) -> Result<EstimateResult> {
    if !(n > 0.0) || r_n < 1 {
        return Err(PickandsError::InvalidArgument("need n > 0 and r_n >= 1".into()));
    }
    if reps < 2 {
        return Err(PickandsError::InvalidArgument("at least 2 replications are needed".into()));
    }
    let grid = GridSpec::new(delta, 0, r_n as i64)?;
    let exact = match simulation {
        BlockSimulation::Auto => model.supports_two_sided(),
        BlockSimulation::Exact => true,
        BlockSimulation::Spectral => false,
    };
    let repr = if exact { Representation::SumNormalized } else { Representation::Spectral };
    let sampler = MaxStableSampler::new(model, grid, repr, DEFAULT_MAX_ATOMS)?;
    let scale = n / r_n as f64;
    let m = grid.len() as f64;
    let moments = replicate(reps, 1, || (Work::new(), Vec::new()), |(work, log_y), b, out| {
        let mut rng = stream(seed, Purpose::Atoms, b);
        let exceeded = if exact {
            // atoms with Gamma >= m / n are bounded by n
            let k = Poisson::new(m / n).map(|d| d.sample(&mut rng) as usize).unwrap_or(0);
            (0..k).any(|_| {
                let gamma = m / n * open_unit(&mut rng);
                sampler.normalized_atom(&mut rng, work, log_y);
                log_y.iter().copied().fold(f64::NEG_INFINITY, f64::max) > (n * gamma).ln()
            })
        } else {
            sampler.sample(&mut rng, work).max() > n
        };
        out[0] = if exceeded { scale } else { 0.0 };
    });
    let mut res = EstimateResult {
        method: Method::Blocks,
        delta,
        estimate: moments[0].mean,
        stderr: moments[0].stderr(),
        replications: reps,
        truncation: Truncation { horizon: r_n, stable: true, rounds: 1 },
        seed,
        mesh: None,
        window: None,
        flags: Vec::new(),
    };
    let exceedances = (moments[0].mean / scale * reps as f64).round();
    if exceedances < 30.0 {
        res.flags.push(FLAG_FEW_EXCEEDANCES.to_string());
    }
    Ok(res)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailProcessSample {
    pub grid: GridSpec,
    pub y: Vec<f64>,
    pub pareto: f64,
}

/// Tail process `Y(i) = P exp(W(delta i))` on `grid`, with `P` unit Pareto.
pub fn sample_tail_process<R: Rng + ?Sized>(model: &ProcessModel, grid: GridSpec, rng: &mut R) -> Result<TailProcessSample> {
    let sampler = PathSampler::new(model, grid)?;
    let pareto = 1.0 / open_unit(rng);
    let path = sampler.sample(rng);
    Ok(TailProcessSample { grid, y: path.w.iter().map(|&x| pareto * x.exp()).collect(), pareto })
}

/// Tail-process sampler keyed by `(seed, index)` so that replication `index`
/// shares its path and `ln P` with the grid estimators run under `seed`.
pub struct TailProcessSampler {
    paths: PathSampler,
}

impl TailProcessSampler {
    pub fn new(model: &ProcessModel, grid: GridSpec) -> Result<Self> {
        Ok(TailProcessSampler { paths: PathSampler::new(model, grid)? })
    }

    pub fn sample(&self, seed: u64, index: u64, cache: &mut PathCache) -> TailProcessSample {
        let ln_pareto = crate::estimators::exponential(seed, index);
        let w = cache.path(&self.paths, seed, index);
        TailProcessSample {
            grid: *self.paths.grid(),
            y: w.iter().map(|&x| (ln_pareto + x).exp()).collect(),
            pareto: ln_pareto.exp(),
        }
    }
}

/// `P(max_{1 <= i <= m} Y(i) <= 1)` with `m` grown by `policy`; this is the
/// exceedance event of the grid estimators, so the result equals
/// `delta * H` from the exceedance estimator under the same seed.
pub fn est_candidate_theta(
    model: &ProcessModel,
    delta: f64,
    policy: &TruncationPolicy,
    reps: usize,
    seed: u64,
) -> Result<EstimateResult> {
    Ok(doubling(model, delta, policy, reps, seed, &[Method::Candidate])?.remove(0))
}

/// One row of an fdd comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FddRow {
    pub indices: Vec<i64>,
    pub thresholds: Vec<f64>,
    pub empirical: f64,
    pub empirical_stderr: f64,
    pub oracle: f64,
    pub oracle_stderr: f64,
    pub pass: bool,
}

/// Kolmogorov-Smirnov test of one marginal against the unit Fréchet law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalRow {
    pub index: i64,
    pub ks: f64,
    pub critical: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FddReport {
    pub representation: Representation,
    pub samples: usize,
    pub fdd: Vec<FddRow>,
    pub marginals: Vec<MarginalRow>,
    pub biased_samples: usize,
    pub pass: bool,
}

/// Compare simulated `zeta` on `{0, delta, 2 delta}` with the fdd formula on
/// 1-, 2- and 3-point sets and test every marginal against unit Fréchet.
pub fn check_fdd(
    model: &ProcessModel,
    delta: f64,
    representation: Representation,
    reps: usize,
    seed: u64,
) -> Result<FddReport> {
    let grid = GridSpec::new(delta, 0, 2)?;
    let sampler = MaxStableSampler::new(model, grid, representation, DEFAULT_MAX_ATOMS)?;
    let samples = sample_many(&sampler, reps, seed);
    let sets: [(&[i64], &[f64]); 4] =
        [(&[0], &[1.0]), (&[2], &[2.0]), (&[0, 1], &[2.0, 3.0]), (&[0, 1, 2], &[1.5, 2.0, 2.5])];
    let mut fdd = Vec::new();
    for (k, (idx, x)) in sets.iter().enumerate() {
        let mut hits = Moments::default();
        for s in &samples {
            hits.push(if idx.iter().zip(*x).all(|(&i, &xi)| s.zeta[i as usize] <= xi) { 1.0 } else { 0.0 });
        }
        let times: Vec<f64> = idx.iter().map(|&i| grid.time(i)).collect();
        let oracle = fdd_probability(model, &times, x, reps, child_seed(seed, k as u64 + 1))?;
        let comb = (hits.variance() / reps as f64 + oracle.stderr.powi(2)).sqrt();
        fdd.push(FddRow {
            indices: idx.to_vec(),
            thresholds: x.to_vec(),
            empirical: hits.mean,
            empirical_stderr: hits.stderr(),
            oracle: oracle.probability,
            oracle_stderr: oracle.stderr,
            pass: (hits.mean - oracle.probability).abs() <= 3.0 * comb,
        });
    }
    let critical = ks_critical_1pct(reps);
    let marginals: Vec<MarginalRow> = grid
        .indices()
        .map(|i| {
            let mut col: Vec<f64> = samples.iter().map(|s| s.zeta[i as usize]).collect();
            let ks = ks_distance(&mut col, |x| (-1.0 / x).exp());
            MarginalRow { index: i, ks, critical, pass: ks < critical }
        })
        .collect();
    let biased_samples = samples.iter().filter(|s| s.truncation_bias_flag).count();
    let pass = fdd.iter().all(|r| r.pass) && marginals.iter().all(|r| r.pass);
    Ok(FddReport { representation, samples: reps, fdd, marginals, biased_samples, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LevyModel;
    use crate::stats::ks_two_sample;

    #[test]
    fn spectral_origin_only_is_unit_frechet() {
        let zero = ProcessModel::Levy(LevyModel::brownian(0.0));
        let grid = GridSpec::new(1.0, 0, 0).unwrap();
        let s = MaxStableSampler::new(&zero, grid, Representation::Spectral, 10).unwrap();
        let mut rng = stream(1, Purpose::Atoms, 0);
        let mut copy = rng.clone();
        let draw = s.sample(&mut rng, &mut Work::new());
        // first atom is the maximum: zeta(0) = 1 / E_1
        assert_eq!(draw.zeta[0], 1.0 / unit_exponential(&mut copy));
        assert_eq!(draw.atoms_used, 1);
        assert!(!draw.truncation_bias_flag);
    }

    #[test]
    fn marginal_probability_at_one() {
        for repr in [Representation::Spectral, Representation::SumNormalized] {
            let s = MaxStableSampler::new(&ProcessModel::fbm(1.0), GridSpec::new(1.0, 0, 1).unwrap(), repr, 10_000).unwrap();
            let draws = sample_many(&s, 40_000, 5);
            let mut m = Moments::default();
            for d in &draws {
                assert!(d.zeta.iter().all(|&z| z > 0.0));
                m.push(if d.zeta[0] <= 1.0 { 1.0 } else { 0.0 });
            }
            let target = (-1.0f64).exp();
            assert!((m.mean - target).abs() <= 3.0 * m.stderr(), "{repr:?}: {}", m.mean);
        }
    }

    #[test]
    fn fdd_single_origin_point_is_exact() {
        let f = fdd_probability(&ProcessModel::fbm(1.3), &[0.0], &[2.0], 100, 1).unwrap();
        assert_eq!(f.probability, (-0.5f64).exp());
        assert_eq!(f.stderr, 0.0);
        let far = fdd_probability(&ProcessModel::fbm(1.3), &[0.0, 1.0], &[1e12, 1e12], 100, 1).unwrap();
        assert!(1.0 - far.probability < 1e-10);
    }

    #[test]
    fn fdd_shift_identity_matches_direct_average() {
        // direct average of max exp(W) / x through the one-sided Brownian Lévy model
        let levy = ProcessModel::Levy(LevyModel::standard_brownian());
        let gauss = ProcessModel::Gaussian(crate::VarianceFunction::power(1.0, 1.0));
        let (t, x) = ([0.0, 0.5, 1.5], [1.0, 2.0, 1.5]);
        let a = fdd_probability(&levy, &t, &x, 200_000, 3).unwrap();
        let b = fdd_probability(&gauss, &t, &x, 200_000, 4).unwrap();
        assert!((a.exponent - b.exponent).abs() <= 3.0 * a.exponent_stderr.hypot(b.exponent_stderr), "{a:?} {b:?}");
        assert!(b.exponent_stderr < a.exponent_stderr);
    }

    #[test]
    fn cap_sets_bias_flag() {
        let s = MaxStableSampler::new(&ProcessModel::fbm(1.0), GridSpec::new(1.0, 0, 8).unwrap(), Representation::Spectral, 1)
            .unwrap();
        let d = s.sample(&mut stream(2, Purpose::Atoms, 0), &mut Work::new());
        assert!(d.truncation_bias_flag);
        assert_eq!(d.atoms_used, 1);
    }

    #[test]
    fn conditional_sample_exceeds_threshold() {
        let s = MaxStableSampler::new(&ProcessModel::fbm(2.0), GridSpec::new(1.0, 0, 1).unwrap(), Representation::SumNormalized, 10_000)
            .unwrap();
        let mut work = Work::new();
        for i in 0..200 {
            let d = s.sample_conditional(50.0, &mut stream(3, Purpose::Conditioning, i), &mut work).unwrap();
            assert!(d.zeta[0] > 50.0);
        }
        let spectral = MaxStableSampler::new(&ProcessModel::fbm(2.0), GridSpec::new(1.0, 0, 1).unwrap(), Representation::Spectral, 10)
            .unwrap();
        assert!(spectral.sample_conditional(5.0, &mut stream(0, Purpose::Conditioning, 0), &mut work).is_err());
    }

    #[test]
    fn zero_truncated_poisson_mean() {
        let g = 0.7;
        let mut m = Moments::default();
        for i in 0..50_000u64 {
            let k = zero_truncated_poisson(g, &mut stream(4, Purpose::Atoms, i));
            assert!(k >= 1);
            m.push(k as f64);
        }
        let mean = g / -(-g).exp_m1();
        assert!((m.mean - mean).abs() <= 3.0 * m.stderr());
    }

    #[test]
    fn tail_process_marginal_is_pareto() {
        let grid = GridSpec::new(1.0, -2, 2).unwrap();
        let mut counts = [Moments::default(), Moments::default(), Moments::default()];
        for i in 0..50_000u64 {
            let t = sample_tail_process(&ProcessModel::fbm(1.0), grid, &mut stream(6, Purpose::Path, i)).unwrap();
            assert_eq!(t.y[grid.origin()], t.pareto);
            assert!(t.pareto > 1.0);
            for (c, y) in counts.iter_mut().zip([2.0, 5.0, 10.0]) {
                c.push(if t.pareto > y { 1.0 } else { 0.0 });
            }
        }
        for (c, y) in counts.iter().zip([2.0, 5.0, 10.0]) {
            assert!((c.mean - 1.0 / y).abs() <= 3.0 * c.stderr());
        }
    }

    #[test]
    fn candidate_matches_tail_samples_exactly() {
        let model = ProcessModel::fbm(1.0);
        let (delta, h, reps, seed) = (1.0, 32usize, 2_000usize, 12u64);
        let theta = est_candidate_theta(&model, delta, &TruncationPolicy::fixed(h), reps, seed).unwrap();
        let tails = TailProcessSampler::new(&model, GridSpec::one_sided(delta, h).unwrap()).unwrap();
        let mut cache = PathCache::new();
        let hits = (0..reps as u64)
            .filter(|&r| tails.sample(seed, r, &mut cache).y[1..].iter().all(|&y| y <= 1.0))
            .count();
        assert!((theta.estimate - hits as f64 / reps as f64).abs() < 1e-12);
    }

    #[test]
    fn degenerate_block_is_marginal_tail() {
        let zero = ProcessModel::Levy(LevyModel::brownian(0.0));
        let (n, r) = (20.0, 4usize);
        let res = est_extremal_index_blocks(&zero, 1.0, n, r, 40_000, 3, BlockSimulation::Auto).unwrap();
        let expected = n / r as f64 * -(-1.0 / n).exp_m1();
        assert!((res.estimate - expected).abs() <= 3.0 * res.stderr, "{res:?} vs {expected}");
    }

    #[test]
    fn exact_and_spectral_blocks_agree() {
        let model = ProcessModel::fbm(1.5);
        let a = est_extremal_index_blocks(&model, 0.5, 10.0, 2, 20_000, 8, BlockSimulation::Exact).unwrap();
        let b = est_extremal_index_blocks(&model, 0.5, 10.0, 2, 20_000, 9, BlockSimulation::Spectral).unwrap();
        assert!(a.overlaps(&b), "{a:?} {b:?}");
    }

    #[test]
    fn conditional_law_close_to_tail_process() {
        let model = ProcessModel::fbm(1.0);
        let grid = GridSpec::new(1.0, 0, 1).unwrap();
        let s = MaxStableSampler::new(&model, grid, Representation::SumNormalized, 10_000).unwrap();
        let t = 500.0;
        let mut cond: Vec<f64> = replicate_collect(20_000, Work::new, |w, i| {
            s.sample_conditional(t, &mut stream(7, Purpose::Conditioning, i), w).unwrap().zeta[1] / t
        });
        let mut tail: Vec<f64> = replicate_collect(20_000, || (), |_, i| {
            sample_tail_process(&model, grid, &mut stream(8, Purpose::Path, i)).unwrap().y[1]
        });
        assert!(ks_two_sample(&mut cond, &mut tail) < 0.02);
    }
}
