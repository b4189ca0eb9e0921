use std::f64::consts::{PI, SQRT_2};

use ob_bell::bounds::{
    anticorrelation_defect_bound, combined_bound, combined_bound_gamma_form, detection_bound,
    ob_bounds, violation_feasible,
};
use ob_bell::lhv::random::{random_epsilon_model, random_perfect_model, with_random_detection};
use ob_bell::lhv::{conditional_triple, correlation_triple, lhv_correlation};
use ob_bell::quantum::{chsh_singlet, delta_q, delta_q_parametrized, ChshSettings, ObAngles};
use ob_bell::{
    make_setting, HiddenVariableModel, Label, MeasurementSetting, NoiseParameters, SettingTriple,
    StatisticPattern,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: usize = 10_000;
const TOL: f64 = 1e-9;

fn axis() -> impl Strategy<Value = MeasurementSetting> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0]
        .prop_filter("away from zero", |v| {
            v.iter().map(|x| x * x).sum::<f64>() > 1e-6
        })
        .prop_map(|v| make_setting(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn quantum_statistic_never_exceeds_three_halves(a in axis(), b in axis(), c in axis()) {
        let t = SettingTriple { a, b, c };
        prop_assert!(delta_q(&t) <= 1.5 + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20_000))]

    #[test]
    fn parametrized_statistic_range_and_agreement(phi1 in 0.0..PI, phi2 in 0.0..PI, theta in 0.0..2.0 * PI) {
        let angles = ObAngles { phi1, phi2, theta };
        let v = delta_q_parametrized(&angles);
        prop_assert!((-1.0 - 1e-12..=1.5 + 1e-12).contains(&v));
        prop_assert!((delta_q(&angles.to_settings()) - v).abs() < 1e-12);
    }

    #[test]
    fn chsh_never_exceeds_tsirelson(a in axis(), a2 in axis(), b in axis(), b2 in axis()) {
        let s = ChshSettings { a, a_prime: a2, b, b_prime: b2 };
        prop_assert!(chsh_singlet(&s) <= 2.0 * SQRT_2 + 1e-12);
    }

    #[test]
    fn model_json_round_trip(seed in any::<u64>(), atoms in 1usize..10, eps in 0.0..0.5f64, eta in 0.3..1.0f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_epsilon_model(&mut rng, atoms, eps, false);
        let m = with_random_detection(&mut rng, &m, eta, false);
        let text = serde_json::to_string(&m).unwrap();
        let back: HiddenVariableModel = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn global_flip_leaves_correlations(seed in any::<u64>(), atoms in 1usize..10, eps in 0.0..0.5f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_epsilon_model(&mut rng, atoms, eps, false);
        let flipped_atoms: Vec<_> = m.weights().iter().zip(m.strategies()).map(|(&w, s)| (w, s.global_flip())).collect();
        let flipped = HiddenVariableModel::from_strategies(&flipped_atoms);
        for s in Label::ALL {
            for t in Label::ALL {
                prop_assert!((lhv_correlation(&m, s, t).unwrap() - lhv_correlation(&flipped, s, t).unwrap()).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn reduction_identities(eps in 0.0..=1.0f64, eta in 0.01..=1.0f64) {
        let p = NoiseParameters::new(eps, eta).unwrap();
        prop_assert!((combined_bound(&p) - combined_bound_gamma_form(&p)).abs() < 1e-12 * combined_bound(&p).max(1.0));
        let no_defect = NoiseParameters::new(0.0, eta).unwrap();
        prop_assert!((combined_bound(&no_defect) - detection_bound(eta).unwrap()).abs() < 1e-12);
        let full = NoiseParameters::new(eps, 1.0).unwrap();
        prop_assert!((combined_bound(&full) - anticorrelation_defect_bound(eps).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bounds_are_monotone(e1 in 0.0..=1.0f64, e2 in 0.0..=1.0f64, h1 in 0.01..=1.0f64, h2 in 0.01..=1.0f64) {
        let (elo, ehi) = (e1.min(e2), e1.max(e2));
        let (hlo, hhi) = (h1.min(h2), h1.max(h2));
        prop_assert!(anticorrelation_defect_bound(elo).unwrap() <= anticorrelation_defect_bound(ehi).unwrap());
        prop_assert!(detection_bound(hlo).unwrap() >= detection_bound(hhi).unwrap());
        let b = |e, h| combined_bound(&NoiseParameters::new(e, h).unwrap());
        prop_assert!(b(e1, hlo) >= b(e1, hhi));
        prop_assert!(b(elo, h1) <= b(ehi, h1));
    }
}

#[test]
fn feasibility_matches_bound_below_quantum_maximum() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let q = ob_bounds().quantum_bound;
    for _ in 0..MODELS {
        let p = NoiseParameters::from_gamma(rng.random(), 1.0 - rng.random::<f64>()).unwrap();
        assert_eq!(violation_feasible(&p), combined_bound(&p) < q, "{p:?}");
    }
}

fn assert_below(model: &HiddenVariableModel, conditional: bool, bound: f64, what: &str) {
    let t = if conditional {
        conditional_triple(model)
    } else {
        correlation_triple(model)
    }
    .unwrap();
    for pattern in StatisticPattern::ALL {
        let v = pattern.evaluate(&t);
        assert!(
            v <= bound + TOL,
            "{what} {pattern:?}: {v} > {bound}\n{}",
            serde_json::to_string(model).unwrap()
        );
    }
}

#[test]
fn perfect_models_never_exceed_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..MODELS {
        let m = random_perfect_model(&mut rng, 1 + i % 12);
        assert_below(&m, false, 1.0, "perfect");
    }
}

#[test]
fn defect_models_respect_one_plus_two_epsilon() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..MODELS {
        let eps = 0.05 * (i % 11) as f64;
        let m = random_epsilon_model(&mut rng, 1 + i % 16, eps, i % 2 == 0);
        assert_below(
            &m,
            false,
            anticorrelation_defect_bound(eps).unwrap(),
            "defect",
        );
    }
}

#[test]
fn detection_models_respect_detection_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..MODELS {
        let eta = rng.random_range(0.5..=1.0);
        let base = random_perfect_model(&mut rng, 1 + i % 16);
        let m = with_random_detection(&mut rng, &base, eta, i % 2 == 0);
        assert_below(&m, true, detection_bound(eta).unwrap(), "detection");
    }
}

#[test]
fn combined_models_respect_combined_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..MODELS {
        let eps = rng.random_range(0.0..=0.5);
        let eta = rng.random_range(0.5..=1.0);
        let base = random_epsilon_model(&mut rng, 1 + i % 16, eps, i % 2 == 0);
        let m = with_random_detection(&mut rng, &base, eta, i % 3 == 0);
        let bound = combined_bound(&NoiseParameters::new(eps, eta).unwrap());
        assert_below(&m, true, bound, "combined");
    }
}
