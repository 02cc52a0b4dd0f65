//! Process models: Gaussian inputs with stationary increments and Lévy inputs
//! with a closed-form Laplace exponent, plus the grids they are sampled on.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{PickandsError, Result};

fn default_power_scale() -> f64 {
    2.0
}

/// Variance function `sigma^2` of a centered Gaussian input `B` with
/// stationary increments and `B(0) = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VarianceFunction {
    /// `scale * |t|^alpha`. The default scale 2 is the input `sqrt(2) B_alpha`
    /// of the classical family `W = sqrt(2) B_alpha - |t|^alpha`.
    Power {
        alpha: f64,
        #[serde(default = "default_power_scale")]
        scale: f64,
    },
    /// `scale * ln(1 + |t|)`.
    Logarithmic { scale: f64 },
    /// Piecewise-linear interpolation of `(|t|, sigma^2)` pairs starting at `(0, 0)`.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl VarianceFunction {
    /// Input of `W(t) = sqrt(2) B_alpha(t) - |t|^alpha`.
    pub fn fbm(alpha: f64) -> Self {
        VarianceFunction::Power { alpha, scale: 2.0 }
    }

    pub fn power(alpha: f64, scale: f64) -> Self {
        VarianceFunction::Power { alpha, scale }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            VarianceFunction::Power { alpha, scale } => {
                if !(*alpha > 0.0 && *alpha <= 2.0) {
                    return Err(PickandsError::InvalidModel(format!("alpha must lie in (0, 2], got {alpha}")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(PickandsError::InvalidModel(format!("scale must be positive, got {scale}")));
                }
            }
            VarianceFunction::Logarithmic { scale } => {
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(PickandsError::InvalidModel(format!("scale must be positive, got {scale}")));
                }
            }
            VarianceFunction::Tabulated { times, values } => {
                if times.len() != values.len() || times.len() < 2 {
                    return Err(PickandsError::InvalidModel("table needs at least two (t, value) pairs".into()));
                }
                if times[0] != 0.0 || values[0] != 0.0 {
                    return Err(PickandsError::InvalidModel("table must start at (0, 0)".into()));
                }
                if times.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(PickandsError::InvalidModel("table times must be strictly increasing".into()));
                }
                if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(PickandsError::InvalidModel("table values must be finite and nonnegative".into()));
                }
            }
        }
        Ok(())
    }

    /// Exponent `alpha` of the power kinds.
    pub fn alpha(&self) -> Option<f64> {
        match self {
            VarianceFunction::Power { alpha, .. } => Some(*alpha),
            _ => None,
        }
    }

    /// Increments are independent (Brownian input) for `alpha = 1`.
    pub fn has_independent_increments(&self) -> bool {
        matches!(self, VarianceFunction::Power { alpha, .. } if *alpha == 1.0)
    }

    /// Largest `|t|` at which the function can be evaluated.
    pub fn max_time(&self) -> f64 {
        match self {
            VarianceFunction::Tabulated { times, .. } => *times.last().unwrap(),
            _ => f64::INFINITY,
        }
    }
}

/// `sigma^2(|t|)`.
pub fn variance_at(vf: &VarianceFunction, t: f64) -> Result<f64> {
    let a = t.abs();
    match vf {
        VarianceFunction::Power { alpha, scale } => Ok(if a == 0.0 { 0.0 } else { scale * a.powf(*alpha) }),
        VarianceFunction::Logarithmic { scale } => Ok(scale * a.ln_1p()),
        VarianceFunction::Tabulated { times, values } => {
            let max = *times.last().unwrap();
            if a > max {
                return Err(PickandsError::InterpolationRange { t, max });
            }
            let j = times.partition_point(|&x| x <= a);
            if j >= times.len() {
                return Ok(*values.last().unwrap());
            }
            let (t0, t1) = (times[j - 1], times[j]);
            let (v0, v1) = (values[j - 1], values[j]);
            Ok(v0 + (v1 - v0) * (a - t0) / (t1 - t0))
        }
    }
}

/// Distribution of a single jump of the compound-Poisson part.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum JumpLaw {
    Constant { size: f64 },
    Normal { mean: f64, sd: f64 },
    /// Positive jumps with the given rate; the mgf is finite for `theta < rate`.
    Exponential { rate: f64 },
}

impl JumpLaw {
    pub fn mgf(&self, theta: f64) -> Result<f64> {
        match self {
            JumpLaw::Constant { size } => Ok((theta * size).exp()),
            JumpLaw::Normal { mean, sd } => Ok((theta * mean + 0.5 * theta * theta * sd * sd).exp()),
            JumpLaw::Exponential { rate } => {
                if theta >= *rate {
                    Err(PickandsError::Domain(format!(
                        "exponential jump mgf is infinite at theta = {theta} >= rate {rate}"
                    )))
                } else {
                    Ok(rate / (rate - theta))
                }
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            JumpLaw::Constant { size } => *size,
            JumpLaw::Normal { mean, .. } => *mean,
            JumpLaw::Exponential { rate } => 1.0 / rate,
        }
    }

    /// Second moment `E J^2`.
    pub fn second_moment(&self) -> f64 {
        match self {
            JumpLaw::Constant { size } => size * size,
            JumpLaw::Normal { mean, sd } => mean * mean + sd * sd,
            JumpLaw::Exponential { rate } => 2.0 / (rate * rate),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            JumpLaw::Constant { size } => size.is_finite(),
            JumpLaw::Normal { mean, sd } => mean.is_finite() && *sd >= 0.0 && sd.is_finite(),
            JumpLaw::Exponential { rate } => *rate > 0.0 && rate.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(PickandsError::InvalidModel(format!("invalid jump law {self:?}")))
        }
    }
}

/// Brownian motion with diffusion coefficient `diffusion`, plus an optional
/// compound-Poisson part with intensity `jump_rate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevyModel {
    pub diffusion: f64,
    #[serde(default)]
    pub jump_rate: f64,
    #[serde(default)]
    pub jump_law: Option<JumpLaw>,
}

impl LevyModel {
    pub fn brownian(diffusion: f64) -> Self {
        LevyModel { diffusion, jump_rate: 0.0, jump_law: None }
    }

    pub fn standard_brownian() -> Self {
        Self::brownian(1.0)
    }

    pub fn with_jumps(diffusion: f64, jump_rate: f64, jump_law: JumpLaw) -> Self {
        LevyModel { diffusion, jump_rate, jump_law: Some(jump_law) }
    }

    pub fn is_brownian(&self) -> bool {
        self.jump_rate == 0.0 || self.jump_law.is_none()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(PickandsError::InvalidModel("diffusion must be nonnegative".into()));
        }
        if !(self.jump_rate >= 0.0 && self.jump_rate.is_finite()) {
            return Err(PickandsError::InvalidModel("jump rate must be nonnegative".into()));
        }
        if self.jump_rate > 0.0 && self.jump_law.is_none() {
            return Err(PickandsError::InvalidModel("positive jump rate needs a jump law".into()));
        }
        if let Some(law) = &self.jump_law {
            law.validate()?;
        }
        laplace_exponent(self, 1.0).map(|_| ())
    }

    /// `lambda = Phi(1)/2 - Phi(1/2)`, nonnegative by convexity of `Phi`.
    pub fn lambda(&self) -> Result<f64> {
        Ok(0.5 * laplace_exponent(self, 1.0)? - laplace_exponent(self, 0.5)?)
    }

    /// Variance of `B(1)`.
    pub fn unit_variance(&self) -> f64 {
        let jumps = match &self.jump_law {
            Some(law) if self.jump_rate > 0.0 => self.jump_rate * law.second_moment(),
            _ => 0.0,
        };
        self.diffusion * self.diffusion + jumps
    }
}

/// `Phi(theta) = ln E exp(theta B(1)) = diffusion^2 theta^2 / 2 + rate (E exp(theta J) - 1)`.
pub fn laplace_exponent(model: &LevyModel, theta: f64) -> Result<f64> {
    let gaussian = 0.5 * model.diffusion * model.diffusion * theta * theta;
    let jumps = match &model.jump_law {
        Some(law) if model.jump_rate > 0.0 => model.jump_rate * (law.mgf(theta)? - 1.0),
        _ => 0.0,
    };
    Ok(gaussian + jumps)
}

/// Input process of `W(t) = B(t) - ln E exp(B(t))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ProcessModel {
    Gaussian(VarianceFunction),
    Levy(LevyModel),
}

impl ProcessModel {
    /// `W = sqrt(2) B_alpha - |t|^alpha`.
    pub fn fbm(alpha: f64) -> Self {
        ProcessModel::Gaussian(VarianceFunction::fbm(alpha))
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ProcessModel::Gaussian(vf) => vf.validate(),
            ProcessModel::Levy(m) => m.validate(),
        }
    }

    /// The Lévy construction is only defined for `t >= 0`.
    pub fn supports_two_sided(&self) -> bool {
        matches!(self, ProcessModel::Gaussian(_))
    }

    pub fn require_two_sided(&self, what: &str) -> Result<()> {
        if self.supports_two_sided() {
            Ok(())
        } else {
            Err(PickandsError::Unsupported(format!(
                "{what} needs negative times; the Lévy model is defined for t >= 0 only"
            )))
        }
    }

    /// `ln E exp(B(t))`, the drift correction.
    pub fn log_mean_exp(&self, t: f64) -> Result<f64> {
        match self {
            ProcessModel::Gaussian(vf) => Ok(0.5 * variance_at(vf, t)?),
            ProcessModel::Levy(m) => {
                if t < 0.0 {
                    return Err(PickandsError::Unsupported("Lévy model at negative time".into()));
                }
                Ok(laplace_exponent(m, 1.0)? * t)
            }
        }
    }

    /// `E W(t)`.
    pub fn mean_w(&self, t: f64) -> Result<f64> {
        match self {
            ProcessModel::Gaussian(vf) => Ok(-0.5 * variance_at(vf, t)?),
            ProcessModel::Levy(m) => {
                let jumps = match &m.jump_law {
                    Some(law) if m.jump_rate > 0.0 => m.jump_rate * law.mean(),
                    _ => 0.0,
                };
                Ok(t * jumps - self.log_mean_exp(t)?)
            }
        }
    }

    /// `Var B(t)`.
    pub fn variance(&self, t: f64) -> Result<f64> {
        match self {
            ProcessModel::Gaussian(vf) => variance_at(vf, t),
            ProcessModel::Levy(m) => Ok(m.unit_variance() * t.abs()),
        }
    }
}

/// Grid `{delta * i : i_min <= i <= i_max}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub delta: f64,
    pub i_min: i64,
    pub i_max: i64,
}

impl GridSpec {
    pub fn new(delta: f64, i_min: i64, i_max: i64) -> Result<Self> {
        let g = GridSpec { delta, i_min, i_max };
        g.validate()?;
        Ok(g)
    }

    /// `{0, delta, ..., n delta}`.
    pub fn one_sided(delta: f64, n: usize) -> Result<Self> {
        Self::new(delta, 0, n as i64)
    }

    /// `{-n delta, ..., n delta}`.
    pub fn symmetric(delta: f64, n: usize) -> Result<Self> {
        Self::new(delta, -(n as i64), n as i64)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(PickandsError::InvalidArgument(format!("grid step must be positive, got {}", self.delta)));
        }
        if self.i_min > 0 || self.i_max < 0 {
            return Err(PickandsError::InvalidArgument(format!(
                "grid index range [{}, {}] must contain 0",
                self.i_min, self.i_max
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        (self.i_max - self.i_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Array position of grid index 0.
    pub fn origin(&self) -> usize {
        (-self.i_min) as usize
    }

    pub fn time(&self, i: i64) -> f64 {
        self.delta * i as f64
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.i_min..=self.i_max
    }
}

/// Values of `W(delta i)` on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSample {
    pub grid: GridSpec,
    pub w: Vec<f64>,
}

impl PathSample {
    pub fn at(&self, i: i64) -> f64 {
        self.w[(i - self.grid.i_min) as usize]
    }

    /// `X(delta i) = exp(W(delta i))`.
    pub fn x_at(&self, i: i64) -> f64 {
        self.at(i).exp()
    }
}

/// Covariance of `(B(delta i))` over the grid, from
/// `Cov(B(s), B(t)) = (sigma^2(s) + sigma^2(t) - sigma^2(s - t)) / 2`.
pub fn gaussian_grid_cov(vf: &VarianceFunction, grid: &GridSpec) -> Result<DMatrix<f64>> {
    vf.validate()?;
    grid.validate()?;
    let times: Vec<f64> = grid.indices().map(|i| grid.time(i)).collect();
    let cov = covariance_at_times(vf, &times)?;
    check_psd(&cov)?;
    Ok(cov)
}

pub(crate) fn covariance_at_times(vf: &VarianceFunction, times: &[f64]) -> Result<DMatrix<f64>> {
    let n = times.len();
    let var: Vec<f64> = times.iter().map(|&t| variance_at(vf, t)).collect::<Result<_>>()?;
    let mut cov = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let c = 0.5 * (var[a] + var[b] - variance_at(vf, times[a] - times[b])?);
            cov[(a, b)] = c;
            cov[(b, a)] = c;
        }
    }
    Ok(cov)
}

/// Smallest eigenvalue must be at least `-1e-8 * trace`.
pub(crate) fn check_psd(cov: &DMatrix<f64>) -> Result<()> {
    if cov.nrows() == 0 {
        return Ok(());
    }
    let trace = cov.trace().abs();
    let eig = SymmetricEigen::new(cov.clone());
    let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-8 * trace.max(f64::MIN_POSITIVE) {
        return Err(PickandsError::InvalidModel(format!(
            "covariance is not positive semidefinite (smallest eigenvalue {min:e}, trace {trace:e})"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn variance_examples() {
        assert_eq!(variance_at(&VarianceFunction::power(1.0, 2.0), 3.0).unwrap(), 6.0);
        assert_eq!(variance_at(&VarianceFunction::power(1.3, 5.0), 0.0).unwrap(), 0.0);
        assert_relative_eq!(variance_at(&VarianceFunction::power(2.0, 2.0), 1.5).unwrap(), 4.5);
        assert_relative_eq!(variance_at(&VarianceFunction::power(2.0, 2.0), -1.5).unwrap(), 4.5);
    }

    #[test]
    fn tabulated_interpolates_and_rejects_out_of_range() {
        let vf = VarianceFunction::Tabulated { times: vec![0.0, 1.0, 3.0], values: vec![0.0, 2.0, 4.0] };
        vf.validate().unwrap();
        assert_relative_eq!(variance_at(&vf, 0.5).unwrap(), 1.0);
        assert_relative_eq!(variance_at(&vf, -2.0).unwrap(), 3.0);
        assert_relative_eq!(variance_at(&vf, 3.0).unwrap(), 4.0);
        assert!(matches!(variance_at(&vf, 3.5), Err(PickandsError::InterpolationRange { .. })));
    }

    #[test]
    fn brownian_covariance_is_min() {
        let vf = VarianceFunction::power(1.0, 1.0);
        let cov = gaussian_grid_cov(&vf, &GridSpec::new(1.0, 0, 2).unwrap()).unwrap();
        // index 0 row is B(0) = 0
        assert_eq!(cov[(0, 0)], 0.0);
        assert_eq!(cov[(1, 1)], 1.0);
        assert_eq!(cov[(1, 2)], 1.0);
        assert_eq!(cov[(2, 2)], 2.0);
        let only_origin = gaussian_grid_cov(&vf, &GridSpec::new(1.0, 0, 0).unwrap()).unwrap();
        assert_eq!(only_origin.shape(), (1, 1));
        assert_eq!(only_origin[(0, 0)], 0.0);
    }

    #[test]
    fn fractional_covariance_entry() {
        let vf = VarianceFunction::power(1.5, 2.0);
        let cov = gaussian_grid_cov(&vf, &GridSpec::new(1.0, 0, 2).unwrap()).unwrap();
        let s2 = 2.0 * 2f64.powf(1.5);
        assert_relative_eq!(cov[(1, 1)], 2.0);
        assert_relative_eq!(cov[(1, 2)], (2.0 + s2 - 2.0) / 2.0, epsilon = 1e-12);
        assert_relative_eq!(cov[(2, 2)], s2, epsilon = 1e-12);
    }

    #[test]
    fn invalid_variogram_is_rejected() {
        // sigma^2 = |t|^3 is not a variogram
        let bad = VarianceFunction::Tabulated {
            times: (0..=8).map(f64::from).collect(),
            values: (0..=8).map(|t| f64::from(t).powi(3)).collect(),
        };
        let err = gaussian_grid_cov(&bad, &GridSpec::new(1.0, 0, 8).unwrap()).unwrap_err();
        assert!(matches!(err, PickandsError::InvalidModel(_)));
    }

    #[test]
    fn laplace_exponent_examples() {
        let bm = LevyModel::standard_brownian();
        assert_relative_eq!(laplace_exponent(&bm, 1.0).unwrap(), 0.5);
        assert_eq!(laplace_exponent(&bm, 0.0).unwrap(), 0.0);
        let cp = LevyModel::with_jumps(0.0, 1.0, JumpLaw::Constant { size: 1.0 });
        assert_relative_eq!(laplace_exponent(&cp, 1.0).unwrap(), std::f64::consts::E - 1.0, epsilon = 1e-15);
        assert_eq!(laplace_exponent(&cp, 0.0).unwrap(), 0.0);
        let ex = LevyModel::with_jumps(1.0, 2.0, JumpLaw::Exponential { rate: 0.8 });
        assert!(matches!(laplace_exponent(&ex, 1.0), Err(PickandsError::Domain(_))));
        assert!(ex.validate().is_err());
    }

    #[test]
    fn grid_must_contain_origin() {
        assert!(GridSpec::new(1.0, 1, 4).is_err());
        assert!(GridSpec::new(0.0, 0, 4).is_err());
        let g = GridSpec::symmetric(0.5, 3).unwrap();
        assert_eq!(g.len(), 7);
        assert_eq!(g.origin(), 3);
        assert_eq!(g.time(-3), -1.5);
    }

    proptest! {
        #[test]
        fn power_covariance_is_psd(alpha in 0.05f64..=2.0, scale in 0.1f64..5.0, n in 1i64..12, neg in 0i64..12, delta in 0.05f64..3.0) {
            let vf = VarianceFunction::power(alpha, scale);
            let g = GridSpec::new(delta, -neg, n).unwrap();
            prop_assert!(gaussian_grid_cov(&vf, &g).is_ok());
        }

        #[test]
        fn variance_is_even_and_vanishes_at_zero(alpha in 0.05f64..=2.0, t in -50.0f64..50.0) {
            let vf = VarianceFunction::fbm(alpha);
            prop_assert_eq!(variance_at(&vf, t).unwrap(), variance_at(&vf, -t).unwrap());
            prop_assert!(variance_at(&vf, t).unwrap() >= 0.0);
            prop_assert_eq!(variance_at(&vf, 0.0).unwrap(), 0.0);
        }

        #[test]
        fn levy_lambda_nonnegative(diff in 0.0f64..3.0, rate in 0.0f64..3.0, mu in -1.0f64..1.0, sd in 0.0f64..1.0) {
            let m = LevyModel::with_jumps(diff, rate, JumpLaw::Normal { mean: mu, sd });
            prop_assert!(m.lambda().unwrap() >= -1e-12);
        }
    }
}
