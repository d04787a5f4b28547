mod common;

use common::{alpha2_interval_functional, alpha2_strip_functional, beta_oracle};
use supfield::constants::{
    functional_expectation, gen_pickands_rate, pickands, piterbarg, DriftSpec, RegionSpec, DEFAULT_STEP,
};

const REPS: usize = 100_000;

fn within(est: f64, se: f64, oracle: f64, k: f64) -> bool {
    (est - oracle).abs() <= k * se
}

#[test]
fn oracle_self_checks() {
    let s = 1.5;
    let exact = 1.0 + s / std::f64::consts::PI.sqrt();
    assert!((alpha2_interval_functional(0.0, s, 0.0) - exact).abs() < 1e-9);
    let g: f64 = 0.5;
    let two_sided_limit = ((1.0 + g) / g).sqrt();
    let v = alpha2_interval_functional(-30.0, 30.0, g);
    assert!((v - two_sided_limit).abs() < 1e-8, "{v} vs {two_sided_limit}");
    let sep = alpha2_interval_functional(-1.0, 1.0, 0.5) * alpha2_interval_functional(0.0, 1.0, 0.0);
    let strip = alpha2_strip_functional(1.0, 0.0, 0.5, false);
    assert!((strip - sep).abs() < 1e-7, "{strip} vs {sep}");
    assert!((beta_oracle(0.5, 2.0) - 1.0 / 3.0).abs() < 1e-12);
    assert!((beta_oracle(1.0, 0.5) - 2.0).abs() < 1e-12);
    assert!((beta_oracle(2.0, 0.5) - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn alpha2_interval_functionals_match_oracle() {
    let cases = [
        (RegionSpec::Interval { lo: 0.0, hi: 2.0 }, DriftSpec::Pickands),
        (RegionSpec::Interval { lo: -1.0, hi: 1.5 }, DriftSpec::Pickands),
        (RegionSpec::Interval { lo: 0.0, hi: 3.0 }, DriftSpec::Piterbarg { gamma: 0.5 }),
        (RegionSpec::Interval { lo: -3.0, hi: 3.0 }, DriftSpec::Piterbarg { gamma: 2.0 }),
    ];
    for (k, (region, drift)) in cases.into_iter().enumerate() {
        let est = functional_expectation(2.0, 2.0, region, drift, DEFAULT_STEP, REPS, 40 + k as u64).unwrap();
        let RegionSpec::Interval { lo, hi } = region else { unreachable!() };
        let oracle = alpha2_interval_functional(lo, hi, drift.gamma());
        assert!(within(est.value, est.stderr, oracle, 3.0), "{region:?} {drift:?}: {est:?} vs {oracle}");
    }
}

#[test]
fn alpha2_strip_functionals_match_oracle() {
    for (k, (b, gamma, half)) in [(-1.0, 1.0, false), (0.5, 2.0, true)].into_iter().enumerate() {
        let region = if half { RegionSpec::HalfStrip { s: 1.0, b } } else { RegionSpec::Strip { s: 1.0, b } };
        let drift = DriftSpec::Generalized { gamma, b, beta: 2.0 };
        let est = functional_expectation(2.0, 2.0, region, drift, DEFAULT_STEP, REPS, 60 + k as u64).unwrap();
        let oracle = alpha2_strip_functional(1.0, b, gamma, half);
        assert!(within(est.value, est.stderr, oracle, 3.0), "{region:?}: {est:?} vs {oracle}");
    }
}

#[test]
fn alpha2_piterbarg_matches_oracle() {
    let gamma = 1.0;
    for (k, one_sided) in [false, true].into_iter().enumerate() {
        let est = piterbarg(2.0, gamma, 4.0, one_sided, DEFAULT_STEP, REPS, 70 + k as u64).unwrap();
        let oracle = alpha2_interval_functional(if one_sided { 0.0 } else { -est.s }, est.s, gamma);
        assert!(within(est.value, est.stderr, oracle, 3.0), "{one_sided}: {est:?} vs {oracle}");
    }
}

#[test]
fn pickands_rate_at_alpha2_is_the_oracle_slope() {
    let est = pickands(2.0, &[0.5, 1.0], DEFAULT_STEP, REPS, 80).unwrap();
    let oracle = 1.0 / std::f64::consts::PI.sqrt();
    assert!(within(est.value, est.stderr, oracle, 3.0), "{est:?}");
}

#[test]
fn infinite_gamma_strip_rate_is_scaled_pickands() {
    let (alpha, b) = (1.0, -0.5);
    let ladder = [1.0, 2.0];
    let h = pickands(alpha, &ladder, 0.1, 2000, 5).unwrap();
    let g = gen_pickands_rate(alpha, f64::INFINITY, b, false, &ladder, 0.1, 2000, 5).unwrap();
    assert!((g.value - 1.5 * h.value).abs() < 1e-12 * g.value);
}
