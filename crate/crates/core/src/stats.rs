//! Small numerical helpers: streaming moments, normal distribution functions,
//! confidence-interval overlap and Kolmogorov–Smirnov distances.

use serde::{Deserialize, Serialize};
use libm::erfc;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Running mean and centered second moment (Welford), mergeable (Chan et al.).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n1 = self.count as f64;
        let n2 = other.count as f64;
        let n = n1 + n2;
        let d = other.mean - self.mean;
        self.mean += d * n2 / n;
        self.m2 += other.m2 + d * d * n1 * n2 / n;
        self.count += other.count;
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            return f64::NAN;
        }
        (self.m2 / (self.count - 1) as f64).max(0.0)
    }

    /// Sample standard deviation over `sqrt(count)`.
    pub fn stderr(&self) -> f64 {
        (self.variance() / self.count as f64).sqrt()
    }

    pub fn from_slice(xs: &[f64]) -> Self {
        let mut m = Moments::default();
        for &x in xs {
            m.push(x);
        }
        m
    }
}

/// Standard normal CDF.
pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Closed form of the constant for `W(t) = sqrt(2) t L - t^2`, `L ~ N(0,1)`:
/// `(Phi(delta/sqrt 2) - Phi(-delta/sqrt 2)) / delta`, with limit `1/sqrt(pi)` at zero.
pub fn linear_family_constant(delta: f64) -> f64 {
    if delta == 0.0 {
        return 1.0 / std::f64::consts::PI.sqrt();
    }
    let a = delta / std::f64::consts::SQRT_2;
    (norm_cdf(a) - norm_cdf(-a)) / delta
}

/// Do the 95% normal confidence intervals of two estimates intersect?
pub fn ci_overlap(a: f64, se_a: f64, b: f64, se_b: f64) -> bool {
    (a - b).abs() <= Z95 * (se_a + se_b)
}

/// Is `b` within `k` combined standard errors of `a`?
pub fn within_se(a: f64, se_a: f64, b: f64, se_b: f64, k: f64) -> bool {
    (a - b).abs() <= k * (se_a * se_a + se_b * se_b).sqrt()
}

/// One-sample KS distance of `samples` against a continuous CDF. Sorts in place.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &mut [f64], cdf: F) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    d
}

/// Two-sample KS distance. Sorts both inputs in place.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic one-sample KS critical value at level 1%.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.627_6 / (n as f64).sqrt()
}

/// `ln(sum(exp(xs)))` without overflow.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Weighted least-squares line `y = intercept + slope * x`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LinearFit {
    pub intercept: f64,
    pub intercept_se: f64,
    pub slope: f64,
    pub slope_se: f64,
    /// Weighted residual sum of squares.
    pub chi2: f64,
}

/// Fit a line by inverse-variance weighting; returns `None` for fewer than two
/// points or a degenerate design.
pub fn weighted_linear_fit(x: &[f64], y: &[f64], se: &[f64]) -> Option<LinearFit> {
    if x.len() < 2 || x.len() != y.len() || x.len() != se.len() {
        return None;
    }
    // zero errors would give infinite weight; floor them at a tiny value
    let floor = se.iter().copied().filter(|&s| s > 0.0).fold(f64::INFINITY, f64::min);
    let floor = if floor.is_finite() { floor * 1e-3 } else { 1.0 };
    let w: Vec<f64> = se.iter().map(|&s| 1.0 / s.max(floor).powi(2)).collect();
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for ((&xi, &yi), &wi) in x.iter().zip(y).zip(&w) {
        sw += wi;
        sx += wi * xi;
        sy += wi * yi;
        sxx += wi * xi * xi;
        sxy += wi * xi * yi;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() <= 1e-14 * sw * sxx {
        return None;
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let chi2 = x
        .iter()
        .zip(y)
        .zip(&w)
        .map(|((&xi, &yi), &wi)| wi * (yi - intercept - slope * xi).powi(2))
        .sum();
    Some(LinearFit { intercept, intercept_se: (sxx / det).sqrt(), slope, slope_se: (sw / det).sqrt(), chi2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn normal_cdf_reference_points() {
        assert_relative_eq!(norm_cdf(0.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(norm_cdf(1.959_963_984_540_054), 0.975, epsilon = 1e-10);
        assert_relative_eq!(norm_cdf(-3.0), 0.001_349_898_031_630_094_6, epsilon = 1e-15);
    }

    #[test]
    fn exact_line_is_recovered() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 3.0 * v).collect();
        let fit = weighted_linear_fit(&x, &y, &[0.1, 0.05, 0.2]).unwrap();
        assert_relative_eq!(fit.intercept, 2.0, epsilon = 1e-12);
        assert_relative_eq!(fit.slope, -3.0, epsilon = 1e-12);
        assert!(fit.chi2 < 1e-20);
        // equal weights: intercept variance is sigma^2 * sxx / det
        let eq = weighted_linear_fit(&[0.0, 1.0], &[1.0, 2.0], &[1.0, 1.0]).unwrap();
        assert_relative_eq!(eq.intercept_se, 1.0, epsilon = 1e-12);
        assert!(weighted_linear_fit(&[1.0, 1.0], &[0.0, 1.0], &[1.0, 1.0]).is_none());
    }

    #[test]
    fn linear_family_reference_values() {
        // Values from an independent arbitrary-precision evaluation.
        assert_relative_eq!(linear_family_constant(1.0), 0.520_499_877_813_046_5, epsilon = 1e-12);
        assert_relative_eq!(linear_family_constant(4.0), 0.248_830_566_254_738_2, epsilon = 1e-12);
        assert_relative_eq!(linear_family_constant(0.1), 0.563_719_777_970_166_2, epsilon = 1e-12);
        assert_relative_eq!(linear_family_constant(0.0), 0.564_189_583_547_756_3, epsilon = 1e-15);
    }

    #[test]
    fn ks_of_exact_quantiles_is_small() {
        let n = 1000;
        let mut xs: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_distance(&mut xs, |x| x.clamp(0.0, 1.0));
        assert!(d <= 0.5 / n as f64 + 1e-12);
    }

    #[test]
    fn lse_matches_naive() {
        let xs = [0.1, -2.0, 3.5, 1.0];
        let naive = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(log_sum_exp(&xs), naive, epsilon = 1e-14);
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln(), epsilon = 1e-12);
    }

    proptest! {
        #[test]
        fn merged_moments_match_single_pass(xs in proptest::collection::vec(-1e3f64..1e3, 2..200), cut in 0usize..200) {
            let cut = cut.min(xs.len());
            let whole = Moments::from_slice(&xs);
            let mut left = Moments::from_slice(&xs[..cut]);
            left.merge(&Moments::from_slice(&xs[cut..]));
            prop_assert_eq!(left.count, whole.count);
            prop_assert!((left.mean - whole.mean).abs() <= 1e-9 * (1.0 + whole.mean.abs()));
            prop_assert!((left.m2 - whole.m2).abs() <= 1e-7 * (1.0 + whole.m2.abs()));
        }
    }
}
