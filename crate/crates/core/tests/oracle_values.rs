//! Exact maxima of the exhaustive oracles, frozen. The small cases were
//! reproduced by a plain enumeration over strategies, flip subsets and
//! detection subsets; the larger ones by the tally search alone.

use num_rational::Ratio;
use ob_bell::lhv::oracle::flip_counts;
use ob_bell::lhv::{
    classical_ob_maximum, combined_ob_maximum, conditional_triple, correlation_triple,
    detection_ob_maximum, epsilon_ob_maximum,
};
use ob_bell::{Label, Pair, StatisticPattern};

fn r(n: i64, d: i64) -> Ratio<i64> {
    Ratio::new(n, d)
}

fn check_witness(o: &ob_bell::lhv::OracleOutcome) {
    let w = &o.witness;
    assert!(w.validate().is_empty());
    assert_eq!(w.atoms(), o.atoms);
    let flips = flip_counts(w);
    assert!(flips.b <= o.max_flips && flips.c <= o.max_flips);
    for p in [Pair::AB, Pair::AC, Pair::BC] {
        assert!((w.detection_mass(p) - o.detections as f64 / o.atoms as f64).abs() < 1e-12);
    }
    let t = conditional_triple(w).unwrap();
    let value = *o.value.numer() as f64 / *o.value.denom() as f64;
    assert!((o.pattern.evaluate(&t) - value).abs() < 1e-12);
    for l in Label::ALL {
        assert!(w.defect_mass(l) <= o.max_flips as f64 / o.atoms as f64 + 1e-12);
    }
}

#[test]
fn classical_enumeration() {
    for pattern in StatisticPattern::ALL {
        let perfect = classical_ob_maximum(true, pattern);
        assert_eq!(perfect.strategies, 8);
        assert_eq!(perfect.value, r(1, 1));
        assert!(perfect.values.iter().all(|&v| v == 1));
        let free = classical_ob_maximum(false, pattern);
        assert_eq!(free.strategies, 64);
        assert_eq!(free.value, r(3, 1));
    }
}

#[test]
fn epsilon_oracle_small_cases_match_plain_enumeration() {
    for pattern in StatisticPattern::ALL {
        for (eps, atoms, value) in [
            (0.0, 4, r(1, 1)),
            (0.25, 4, r(3, 2)),
            (0.5, 4, r(2, 1)),
            (0.2, 5, r(7, 5)),
        ] {
            let o = epsilon_ob_maximum(eps, atoms, pattern).unwrap();
            assert_eq!(o.value, value, "{pattern:?} eps {eps} n {atoms}");
            assert_eq!(o.bound, value);
            check_witness(&o);
        }
    }
}

#[test]
fn epsilon_oracle_larger_grids() {
    for pattern in StatisticPattern::ALL {
        for (eps, atoms, value) in [
            (0.0, 8, r(1, 1)),
            (0.125, 8, r(5, 4)),
            (0.25, 8, r(3, 2)),
            (0.5, 8, r(2, 1)),
            (1.0 / 12.0, 12, r(7, 6)),
            (0.25, 12, r(3, 2)),
        ] {
            let o = epsilon_ob_maximum(eps, atoms, pattern).unwrap();
            assert_eq!(o.value, value, "{pattern:?} eps {eps} n {atoms}");
            assert!(o.within_bound());
            check_witness(&o);
        }
    }
}

#[test]
fn detection_oracle_small_cases_match_plain_enumeration() {
    for pattern in StatisticPattern::ALL {
        for (eta, atoms, value, bound) in [
            (0.75, 4, r(7, 3), r(7, 3)),
            (0.5, 4, r(3, 1), r(5, 1)),
            (0.8, 5, r(2, 1), r(2, 1)),
            (5.0 / 6.0, 6, r(9, 5), r(9, 5)),
        ] {
            let o = detection_ob_maximum(eta, atoms, pattern).unwrap();
            assert_eq!(
                (o.value, o.bound),
                (value, bound),
                "{pattern:?} eta {eta} n {atoms}"
            );
            check_witness(&o);
        }
    }
}

#[test]
fn detection_oracle_larger_grids() {
    for pattern in StatisticPattern::ALL {
        for (eta, atoms, value) in [
            (1.0, 9, r(1, 1)),
            (8.0 / 9.0, 9, r(3, 2)),
            (0.9, 10, r(13, 9)),
            (0.8, 10, r(2, 1)),
            (0.7, 10, r(19, 7)),
        ] {
            let o = detection_ob_maximum(eta, atoms, pattern).unwrap();
            assert_eq!(o.value, value, "{pattern:?} eta {eta} n {atoms}");
            assert!(o.within_bound());
            check_witness(&o);
        }
    }
}

#[test]
fn combined_oracle() {
    for pattern in StatisticPattern::ALL {
        for (eps, eta, atoms, value) in [
            (0.25, 0.75, 4, r(3, 1)),
            (0.2, 0.8, 5, r(5, 2)),
            (0.0, 0.875, 8, r(11, 7)),
            (0.125, 0.875, 8, r(13, 7)),
            (0.125, 0.75, 8, r(8, 3)),
        ] {
            let o = combined_ob_maximum(eps, eta, atoms, pattern).unwrap();
            assert_eq!(o.value, value, "{pattern:?} eps {eps} eta {eta} n {atoms}");
            assert!(o.within_bound());
            check_witness(&o);
        }
    }
}

#[test]
fn perfect_witness_uses_plain_correlations() {
    let o = epsilon_ob_maximum(0.0, 6, StatisticPattern::AbAcBc).unwrap();
    let t = correlation_triple(&o.witness).unwrap();
    assert!((StatisticPattern::AbAcBc.evaluate(&t) - 1.0).abs() < 1e-12);
}

#[test]
fn off_grid_and_oversized_requests_fail() {
    assert!(epsilon_ob_maximum(0.3, 8, StatisticPattern::AbAcBc).is_err());
    assert!(epsilon_ob_maximum(0.25, 13, StatisticPattern::AbAcBc).is_err());
    assert!(detection_ob_maximum(0.0, 8, StatisticPattern::AbAcBc).is_err());
    assert!(detection_ob_maximum(0.85, 10, StatisticPattern::AbAcBc).is_err());
}
