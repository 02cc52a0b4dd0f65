//! Exact samplers for `W` on finite grids and at arbitrary time points.
//!
//! Gaussian inputs are sampled through their stationary increment sequence:
//! the increments are drawn jointly by circulant embedding and summed outwards
//! from index 0, which keeps `W(0) = 0` exact. Brownian inputs skip the FFT
//! since their increments are independent. When the embedding has a
//! significantly negative eigenvalue the sampler falls back to a dense
//! factorization of the full covariance.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{PickandsError, Result};
use crate::rng::{stream, Purpose};
use crate::model::{
    check_psd, covariance_at_times, laplace_exponent, variance_at, GridSpec, JumpLaw, LevyModel, PathSample,
    ProcessModel, VarianceFunction,
};

/// Relative size of negative embedding eigenvalues that are clipped to zero.
const EMBEDDING_CLIP: f64 = 1e-8;

#[derive(Clone)]
struct Circulant {
    fft: Arc<dyn Fft<f64>>,
    /// `sqrt(max(lambda_k, 0) / m)`.
    scale: Vec<f64>,
}

#[derive(Clone)]
enum Engine {
    /// Path is identically `W(0) = 0`.
    Origin,
    White { sd: f64 },
    /// `B(t) = t * slope_sd * Z`, the quadratic-variance family.
    Linear { slope_sd: f64 },
    Circulant(Circulant),
    /// Lower factor of the covariance of `B` at the non-origin grid points.
    Dense { factor: DMatrix<f64> },
    Levy { model: LevyModel, step: f64 },
}

/// Per-worker buffers so repeated sampling does not allocate.
#[derive(Default)]
pub struct Scratch {
    buf: Vec<Complex64>,
    fft: Vec<Complex64>,
    incr: Vec<f64>,
    z: Vec<f64>,
}

impl Scratch {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Reusable sampler for one `(model, grid)` pair.
#[derive(Clone)]
pub struct PathSampler {
    grid: GridSpec,
    /// `-ln E exp(B(t))` at every grid point.
    drift: Vec<f64>,
    engine: Engine,
}

impl PathSampler {
    pub fn new(model: &ProcessModel, grid: GridSpec) -> Result<Self> {
        model.validate()?;
        grid.validate()?;
        let drift = grid
            .indices()
            .map(|i| model.log_mean_exp(grid.time(i)).map(|v| -v))
            .collect::<Result<Vec<_>>>()?;
        let engine = match model {
            ProcessModel::Gaussian(vf) => gaussian_engine(vf, &grid)?,
            ProcessModel::Levy(m) => {
                if grid.i_min < 0 {
                    return Err(PickandsError::Unsupported(
                        "Lévy paths are defined for t >= 0 only; grid has negative indices".into(),
                    ));
                }
                Engine::Levy { model: m.clone(), step: grid.delta }
            }
        };
        Ok(PathSampler { grid, drift, engine })
    }

    /// Force the dense-factorization engine (reference sampler for tests).
    pub fn dense(model: &ProcessModel, grid: GridSpec) -> Result<Self> {
        let mut s = Self::new(model, grid)?;
        if let ProcessModel::Gaussian(vf) = model {
            s.engine = dense_engine(vf, &grid)?;
        }
        Ok(s)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn engine_name(&self) -> &'static str {
        match self.engine {
            Engine::Origin => "origin",
            Engine::White { .. } => "independent-increments",
            Engine::Linear { .. } => "linear",
            Engine::Circulant(_) => "circulant-embedding",
            Engine::Dense { .. } => "dense-factorization",
            Engine::Levy { .. } => "levy-increments",
        }
    }

    /// Fill `w` with one draw of `W` on the grid (`w[grid.origin()] == 0`).
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, scratch: &mut Scratch, w: &mut Vec<f64>) {
        let len = self.grid.len();
        w.clear();
        w.resize(len, 0.0);
        let n = len - 1;
        let origin = self.grid.origin();
        match &self.engine {
            Engine::Origin => {}
            Engine::White { sd } => {
                scratch.incr.clear();
                scratch.incr.extend((0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)));
                accumulate(&scratch.incr, origin, w);
            }
            Engine::Linear { slope_sd } => {
                let slope = slope_sd * rng.sample::<f64, _>(StandardNormal);
                for (slot, i) in w.iter_mut().zip(self.grid.indices()) {
                    *slot = slope * self.grid.time(i);
                }
            }
            Engine::Circulant(c) => {
                self.transform(c, rng, scratch);
                scratch.incr.clear();
                scratch.incr.extend(scratch.buf[..n].iter().map(|z| z.re));
                accumulate(&scratch.incr, origin, w);
            }
            Engine::Dense { factor } => {
                scratch.z.clear();
                scratch.z.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                let mut k = 0;
                for (pos, slot) in w.iter_mut().enumerate() {
                    if pos == origin {
                        continue;
                    }
                    let row = factor.row(k);
                    *slot = row.iter().zip(&scratch.z).map(|(a, b)| a * b).sum();
                    k += 1;
                }
            }
            Engine::Levy { model, step } => {
                for i in 1..len {
                    w[i] = w[i - 1] + levy_increment(model, *step, rng);
                }
            }
        }
        for (x, d) in w.iter_mut().zip(&self.drift) {
            *x += d;
        }
        w[origin] = 0.0;
    }

    /// Two independent draws. The circulant engine gets both from one
    /// transform (real and imaginary parts).
    pub fn sample_pair_into<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        scratch: &mut Scratch,
        a: &mut Vec<f64>,
        b: &mut Vec<f64>,
    ) {
        let Engine::Circulant(c) = &self.engine else {
            self.sample_into(rng, scratch, a);
            self.sample_into(rng, scratch, b);
            return;
        };
        let len = self.grid.len();
        let origin = self.grid.origin();
        self.transform(c, rng, scratch);
        for (out, part) in [(a, 0), (b, 1)] {
            out.clear();
            out.resize(len, 0.0);
            scratch.incr.clear();
            scratch.incr.extend(scratch.buf[..len - 1].iter().map(|z| if part == 0 { z.re } else { z.im }));
            accumulate(&scratch.incr, origin, out);
            for (x, d) in out.iter_mut().zip(&self.drift) {
                *x += d;
            }
            out[origin] = 0.0;
        }
    }

    fn transform<R: Rng + ?Sized>(&self, c: &Circulant, rng: &mut R, scratch: &mut Scratch) {
        scratch.buf.clear();
        scratch.buf.extend(c.scale.iter().map(|&s| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(s * re, s * im)
        }));
        let need = c.fft.get_inplace_scratch_len();
        if scratch.fft.len() < need {
            scratch.fft.resize(need, Complex64::default());
        }
        c.fft.process_with_scratch(&mut scratch.buf, &mut scratch.fft[..need]);
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> PathSample {
        let mut w = Vec::new();
        self.sample_into(rng, &mut Scratch::new(), &mut w);
        PathSample { grid: self.grid, w }
    }
}

/// Per-worker path source for replication-indexed Monte Carlo.
///
/// Replications `2k` and `2k + 1` are the two halves of the pair drawn from
/// stream `k`, so the path of a replication depends only on `(seed, index)`.
#[derive(Default)]
pub struct PathCache {
    scratch: Scratch,
    w: Vec<f64>,
    spare: Vec<f64>,
    spare_for: Option<(u64, u64)>,
}

impl PathCache {
    pub fn new() -> Self {
        Self::default()
    }

    /// Path of replication `index` under `seed`.
    pub fn path(&mut self, sampler: &PathSampler, seed: u64, index: u64) -> &[f64] {
        let pair = index / 2;
        if index % 2 == 1 && self.spare_for == Some((seed, pair)) && self.spare.len() == sampler.grid.len() {
            std::mem::swap(&mut self.w, &mut self.spare);
            self.spare_for = None;
        } else {
            let mut rng = stream(seed, Purpose::Path, pair);
            sampler.sample_pair_into(&mut rng, &mut self.scratch, &mut self.w, &mut self.spare);
            if index % 2 == 1 {
                std::mem::swap(&mut self.w, &mut self.spare);
                self.spare_for = None;
            } else {
                self.spare_for = Some((seed, pair));
            }
        }
        &self.w
    }
}

/// Turn increments `B(i+1) - B(i)` (ordered from `i_min`) into the path with `B(0) = 0`.
fn accumulate(incr: &[f64], origin: usize, w: &mut [f64]) {
    w[origin] = 0.0;
    for p in origin + 1..w.len() {
        w[p] = w[p - 1] + incr[p - 1];
    }
    for p in (0..origin).rev() {
        w[p] = w[p + 1] - incr[p];
    }
}

fn gaussian_engine(vf: &VarianceFunction, grid: &GridSpec) -> Result<Engine> {
    let n = grid.len() - 1;
    if n == 0 {
        return Ok(Engine::Origin);
    }
    if vf.has_independent_increments() {
        return Ok(Engine::White { sd: variance_at(vf, grid.delta)?.sqrt() });
    }
    if let VarianceFunction::Power { alpha, scale } = vf {
        if *alpha == 2.0 {
            return Ok(Engine::Linear { slope_sd: scale.sqrt() });
        }
    }
    match circulant(vf, grid.delta, n)? {
        Some(c) => Ok(Engine::Circulant(c)),
        None => dense_engine(vf, grid),
    }
}

/// Autocovariance of the increment sequence at lag `k`.
fn increment_autocov(vf: &VarianceFunction, delta: f64, k: usize) -> Result<f64> {
    let s = |j: f64| variance_at(vf, j * delta);
    let k = k as f64;
    Ok(0.5 * (s(k + 1.0)? - 2.0 * s(k)? + s((k - 1.0).abs())?))
}

fn circulant(vf: &VarianceFunction, delta: f64, n: usize) -> Result<Option<Circulant>> {
    let m = 2 * n;
    let gamma = (0..=n).map(|k| increment_autocov(vf, delta, k)).collect::<Result<Vec<_>>>()?;
    let mut row: Vec<Complex64> =
        (0..m).map(|j| Complex64::new(gamma[j.min(m - j)], 0.0)).collect();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    fft.process(&mut row);
    let max = row.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min = row.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        // zero covariance: every increment vanishes
        return Ok(Some(Circulant { fft, scale: vec![0.0; m] }));
    }
    if min < -EMBEDDING_CLIP * max {
        return Ok(None);
    }
    let scale = row.iter().map(|z| (z.re.max(0.0) / m as f64).sqrt()).collect();
    Ok(Some(Circulant { fft, scale }))
}

fn dense_engine(vf: &VarianceFunction, grid: &GridSpec) -> Result<Engine> {
    let origin = grid.origin();
    let times: Vec<f64> = grid
        .indices()
        .enumerate()
        .filter(|(p, _)| *p != origin)
        .map(|(_, i)| grid.time(i))
        .collect();
    let cov = covariance_at_times(vf, &times)?;
    Ok(Engine::Dense { factor: psd_factor(&cov)? })
}

/// Lower factor `L` with `L L^T = cov`: Cholesky when possible, otherwise a
/// clipped eigendecomposition for semidefinite matrices.
pub fn psd_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if cov.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    if let Some(ch) = cov.clone().cholesky() {
        return Ok(ch.l());
    }
    check_psd(cov).map_err(|e| PickandsError::Factorization(e.to_string()))?;
    let eig = SymmetricEigen::new(cov.clone());
    let mut factor = eig.eigenvectors;
    for (j, &lam) in eig.eigenvalues.iter().enumerate() {
        let s = lam.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    if factor.iter().any(|x| !x.is_finite()) {
        return Err(PickandsError::Factorization("non-finite eigendecomposition".into()));
    }
    Ok(factor)
}

fn levy_increment<R: Rng + ?Sized>(model: &LevyModel, step: f64, rng: &mut R) -> f64 {
    let mut x = 0.0;
    if model.diffusion > 0.0 {
        x += model.diffusion * step.sqrt() * rng.sample::<f64, _>(StandardNormal);
    }
    if let Some(law) = &model.jump_law {
        if model.jump_rate > 0.0 {
            let count = Poisson::new(model.jump_rate * step).expect("positive rate").sample(rng) as u64;
            if count > 0 {
                let k = count as f64;
                x += match law {
                    JumpLaw::Constant { size } => k * size,
                    JumpLaw::Normal { mean, sd } => k * mean + sd * k.sqrt() * rng.sample::<f64, _>(StandardNormal),
                    JumpLaw::Exponential { rate } => Gamma::new(k, 1.0 / rate).expect("valid gamma").sample(rng),
                };
            }
        }
    }
    x
}

/// Sampler of `W` at an arbitrary finite set of times.
#[derive(Clone)]
pub struct PointSampler {
    times: Vec<f64>,
    drift: Vec<f64>,
    kind: PointKind,
}

#[derive(Clone)]
enum PointKind {
    Gaussian { factor: DMatrix<f64> },
    Levy { model: LevyModel, order: Vec<usize> },
}

impl PointSampler {
    pub fn new(model: &ProcessModel, times: &[f64]) -> Result<Self> {
        model.validate()?;
        let drift = times.iter().map(|&t| model.log_mean_exp(t).map(|v| -v)).collect::<Result<Vec<_>>>()?;
        let kind = match model {
            ProcessModel::Gaussian(vf) => {
                let cov = covariance_at_times(vf, times)?;
                PointKind::Gaussian { factor: psd_factor(&cov)? }
            }
            ProcessModel::Levy(m) => {
                let mut order: Vec<usize> = (0..times.len()).collect();
                order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
                PointKind::Levy { model: m.clone(), order }
            }
        };
        Ok(PointSampler { times: times.to_vec(), drift, kind })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut Vec<f64>, w: &mut Vec<f64>) {
        let n = self.times.len();
        w.clear();
        w.resize(n, 0.0);
        match &self.kind {
            PointKind::Gaussian { factor } => {
                z.clear();
                z.extend((0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                for (i, slot) in w.iter_mut().enumerate() {
                    *slot = factor.row(i).iter().zip(z.iter()).map(|(a, b)| a * b).sum();
                }
            }
            PointKind::Levy { model, order } => {
                let (mut t_prev, mut b) = (0.0, 0.0);
                for &i in order {
                    let dt = self.times[i] - t_prev;
                    if dt > 0.0 {
                        b += levy_increment(model, dt, rng);
                    }
                    w[i] = b;
                    t_prev = self.times[i];
                }
            }
        }
        for ((x, d), &t) in w.iter_mut().zip(&self.drift).zip(&self.times) {
            *x = if t == 0.0 { 0.0 } else { *x + d };
        }
    }
}

/// One exact draw of `W = B - sigma^2/2` on `grid`.
pub fn sample_gaussian_path<R: Rng + ?Sized>(vf: &VarianceFunction, grid: GridSpec, rng: &mut R) -> Result<PathSample> {
    Ok(PathSampler::new(&ProcessModel::Gaussian(vf.clone()), grid)?.sample(rng))
}

/// One draw of `W(t) = B(t) - Phi(1) t` on a grid with `i_min = 0`.
pub fn sample_levy_path<R: Rng + ?Sized>(model: &LevyModel, grid: GridSpec, rng: &mut R) -> Result<PathSample> {
    Ok(PathSampler::new(&ProcessModel::Levy(model.clone()), grid)?.sample(rng))
}

/// Drift `Phi(1)` of a Lévy model, exposed for diagnostics.
pub fn levy_drift(model: &LevyModel) -> Result<f64> {
    laplace_exponent(model, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::gaussian_grid_cov;
    use crate::rng::{stream, Purpose};
    use crate::stats::Moments;

    fn sample_cov(s: &PathSampler, model: &ProcessModel, reps: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
        // returns (mean of B B^T, stderr matrix), B = W + log_mean_exp
        let g = *s.grid();
        let len = g.len();
        let shift: Vec<f64> = g.indices().map(|i| model.log_mean_exp(g.time(i)).unwrap()).collect();
        let mut acc = vec![Moments::default(); len * len];
        let mut scratch = Scratch::new();
        let mut w = Vec::new();
        for r in 0..reps {
            let mut rng = stream(seed, Purpose::Path, r as u64);
            s.sample_into(&mut rng, &mut scratch, &mut w);
            for a in 0..len {
                for b in 0..len {
                    acc[a * len + b].push((w[a] + shift[a]) * (w[b] + shift[b]));
                }
            }
        }
        let mean = DMatrix::from_fn(len, len, |a, b| acc[a * len + b].mean);
        let se = DMatrix::from_fn(len, len, |a, b| acc[a * len + b].stderr());
        (mean, se)
    }

    #[test]
    fn brownian_sample_covariance_matches_oracle() {
        let vf = VarianceFunction::power(1.0, 1.0);
        let model = ProcessModel::Gaussian(vf.clone());
        let grid = GridSpec::new(1.0, 0, 2).unwrap();
        let oracle = gaussian_grid_cov(&vf, &grid).unwrap();
        let s = PathSampler::new(&model, grid).unwrap();
        let (mean, se) = sample_cov(&s, &model, 100_000, 11);
        for a in 1..3 {
            for b in 1..3 {
                assert!((mean[(a, b)] - oracle[(a, b)]).abs() <= 3.0 * se[(a, b)], "{a},{b}: {} vs {}", mean[(a, b)], oracle[(a, b)]);
            }
        }
    }

    #[test]
    fn origin_is_exactly_zero_and_martingale_holds() {
        for model in [ProcessModel::fbm(1.0), ProcessModel::fbm(0.6), ProcessModel::fbm(2.0)] {
            let grid = GridSpec::new(1.0, -3, 5).unwrap();
            let s = PathSampler::new(&model, grid).unwrap();
            let mut m = vec![Moments::default(); grid.len()];
            let mut scratch = Scratch::new();
            let mut w = Vec::new();
            for r in 0..100_000u64 {
                let mut rng = stream(3, Purpose::Path, r);
                s.sample_into(&mut rng, &mut scratch, &mut w);
                assert_eq!(w[grid.origin()], 0.0);
                for (acc, x) in m.iter_mut().zip(&w) {
                    acc.push(x.exp());
                }
            }
            // e^{W(1)} has finite variance for every model here
            let p1 = grid.origin() + 1;
            assert!((m[p1].mean - 1.0).abs() <= 3.0 * m[p1].stderr(), "{:?}: {}", model, m[p1].mean);
            let m1 = grid.origin() - 1;
            assert!((m[m1].mean - 1.0).abs() <= 3.0 * m[m1].stderr());
        }
    }

    #[test]
    fn circulant_and_dense_agree_in_covariance() {
        let vf = VarianceFunction::fbm(1.4);
        let model = ProcessModel::Gaussian(vf.clone());
        let grid = GridSpec::new(0.5, -2, 3).unwrap();
        let fast = PathSampler::new(&model, grid).unwrap();
        assert_eq!(fast.engine_name(), "circulant-embedding");
        let slow = PathSampler::dense(&model, grid).unwrap();
        assert_eq!(slow.engine_name(), "dense-factorization");
        let (m1, s1) = sample_cov(&fast, &model, 100_000, 5);
        let (m2, s2) = sample_cov(&slow, &model, 100_000, 6);
        let oracle = gaussian_grid_cov(&vf, &grid).unwrap();
        for a in 0..grid.len() {
            for b in 0..grid.len() {
                let comb = (s1[(a, b)].powi(2) + s2[(a, b)].powi(2)).sqrt();
                assert!((m1[(a, b)] - m2[(a, b)]).abs() <= 3.0 * comb + 1e-12);
                assert!((m1[(a, b)] - oracle[(a, b)]).abs() <= 3.0 * s1[(a, b)] + 1e-12);
            }
        }
    }

    #[test]
    fn degenerate_quadratic_family_is_linear_in_time() {
        // alpha = 2: B(t) = t L, the embedding has a single positive eigenvalue
        let model = ProcessModel::fbm(2.0);
        let grid = GridSpec::new(0.25, -4, 4).unwrap();
        let fast = PathSampler::new(&model, grid).unwrap();
        assert_eq!(fast.engine_name(), "linear");
        let vf = VarianceFunction::fbm(2.0);
        let embedded = PathSampler { grid, drift: fast.drift.clone(), engine: gaussian_engine(&VarianceFunction::Tabulated {
            times: (0..=12).map(|k| 0.25 * k as f64).collect(),
            values: (0..=12).map(|k| variance_at(&vf, 0.25 * k as f64).unwrap()).collect(),
        }, &grid).unwrap() };
        assert_eq!(embedded.engine_name(), "circulant-embedding");
        for s in [&fast, &embedded] {
            let p = s.sample(&mut stream(9, Purpose::Path, 0));
            let slope = (p.at(1) + 0.25f64.powi(2)) / 0.25;
            for i in grid.indices() {
                let t = grid.time(i);
                assert!((p.at(i) - (slope * t - t * t)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn levy_mean_and_martingale() {
        let model = ProcessModel::Levy(LevyModel::standard_brownian());
        let grid = GridSpec::one_sided(1.0, 1).unwrap();
        let s = PathSampler::new(&model, grid).unwrap();
        let (mut w1, mut x1) = (Moments::default(), Moments::default());
        let mut scratch = Scratch::new();
        let mut w = Vec::new();
        for r in 0..100_000u64 {
            s.sample_into(&mut stream(21, Purpose::Path, r), &mut scratch, &mut w);
            assert_eq!(w[0], 0.0);
            w1.push(w[1]);
            x1.push(w[1].exp());
        }
        assert!((w1.mean + 0.5).abs() <= 3.0 * w1.stderr());
        assert!((x1.mean - 1.0).abs() <= 3.0 * x1.stderr());
    }

    #[test]
    fn levy_rejects_negative_grid() {
        let model = ProcessModel::Levy(LevyModel::standard_brownian());
        let err = PathSampler::new(&model, GridSpec::symmetric(1.0, 2).unwrap()).err().unwrap();
        assert!(matches!(err, PickandsError::Unsupported(_)));
    }

    #[test]
    fn compound_poisson_martingale() {
        let m = LevyModel::with_jumps(0.5, 1.0, JumpLaw::Normal { mean: -0.2, sd: 0.4 });
        let model = ProcessModel::Levy(m);
        let s = PointSampler::new(&model, &[0.0, 0.7, 1.5]).unwrap();
        let mut acc = Moments::default();
        let (mut z, mut w) = (Vec::new(), Vec::new());
        for r in 0..100_000u64 {
            s.sample_into(&mut stream(2, Purpose::Path, r), &mut z, &mut w);
            assert_eq!(w[0], 0.0);
            acc.push(w[2].exp());
        }
        assert!((acc.mean - 1.0).abs() <= 3.0 * acc.stderr());
    }

    #[test]
    fn paired_halves_are_uncorrelated_draws() {
        let model = ProcessModel::fbm(0.7);
        let grid = GridSpec::symmetric(1.0, 3).unwrap();
        let s = PathSampler::new(&model, grid).unwrap();
        let shift: Vec<f64> = grid.indices().map(|i| model.log_mean_exp(grid.time(i)).unwrap()).collect();
        let oracle = gaussian_grid_cov(&VarianceFunction::fbm(0.7), &grid).unwrap();
        let mut cache = PathCache::new();
        let (mut cross, mut even) = (Moments::default(), Moments::default());
        for k in 0..50_000u64 {
            let a: Vec<f64> = cache.path(&s, 4, 2 * k).to_vec();
            let b: Vec<f64> = cache.path(&s, 4, 2 * k + 1).to_vec();
            cross.push((a[6] + shift[6]) * (b[6] + shift[6]));
            even.push((a[6] + shift[6]).powi(2));
        }
        assert!(cross.mean.abs() <= 3.0 * cross.stderr());
        assert!((even.mean - oracle[(6, 6)]).abs() <= 3.0 * even.stderr());
    }

    #[test]
    fn cached_path_depends_only_on_index() {
        let model = ProcessModel::fbm(1.3);
        let s = PathSampler::new(&model, GridSpec::symmetric(0.5, 8).unwrap()).unwrap();
        let mut seq = PathCache::new();
        let in_order: Vec<Vec<f64>> = (0..6).map(|r| seq.path(&s, 8, r).to_vec()).collect();
        let mut fresh = PathCache::new();
        for r in [5u64, 2, 3, 0, 4, 1] {
            assert_eq!(fresh.path(&s, 8, r), &in_order[r as usize][..]);
        }
    }

    #[test]
    fn identical_seed_identical_path() {
        let model = ProcessModel::fbm(0.8);
        let s = PathSampler::new(&model, GridSpec::symmetric(1.0, 16).unwrap()).unwrap();
        let a = s.sample(&mut stream(99, Purpose::Path, 4));
        let b = s.sample(&mut stream(99, Purpose::Path, 4));
        assert_eq!(a, b);
    }
}
