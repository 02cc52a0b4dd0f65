use pickands::bounds::*;
use pickands::estimators::{est_exceedance, TruncationPolicy};
use pickands::{LevyModel, ProcessModel, VarianceFunction};

#[test]
fn reference_values_to_six_decimals() {
    let g = gaussian_lower_bound(&VarianceFunction::fbm(1.0), 10.0).unwrap();
    assert!((g.value - 0.091_057_5).abs() < 5e-7);
    let l = levy_lower_bound(&LevyModel::standard_brownian(), 16.0).unwrap();
    assert!((l.value - 0.052_718).abs() < 5e-7);
}

#[test]
fn gaussian_bound_below_monte_carlo() {
    for (alpha, delta) in [(1.0, 2.0), (1.5, 1.0), (2.0, 0.5), (0.5, 2.0)] {
        let b = gaussian_lower_bound(&VarianceFunction::fbm(alpha), delta).unwrap();
        let mc = est_exceedance(&ProcessModel::fbm(alpha), delta, &TruncationPolicy::default(), 20_000, 3).unwrap();
        assert!(b.value <= mc.estimate + 3.0 * mc.stderr, "alpha {alpha} delta {delta}: {} vs {mc:?}", b.value);
    }
}

#[test]
fn levy_bound_below_monte_carlo() {
    let model = LevyModel::standard_brownian();
    for delta in [8.0, 16.0, 32.0] {
        let b = levy_lower_bound(&model, delta).unwrap();
        let mc = est_exceedance(&ProcessModel::Levy(model.clone()), delta, &TruncationPolicy::default(), 20_000, 4).unwrap();
        assert!(b.value <= mc.estimate + 3.0 * mc.stderr, "delta {delta}: {} vs {mc:?}", b.value);
    }
}
