//! Local hidden-variable models: exact correlations, deterministic strategy
//! enumeration, and constructors for models with an anti-correlation defect
//! or setting-independent detection loss.

pub mod oracle;
pub mod random;

use std::collections::BTreeSet;

use num_rational::Ratio;
use serde::Serialize;

use crate::domain::{
    CorrelationTriple, DeterministicStrategy, HiddenVariableModel, Label, LabelMap, LabelSets,
    Outcome, Pair, PairMap, PairSets, StatisticPattern, NORM_TOLERANCE,
};
use crate::error::{Error, Result};

pub use oracle::{
    combined_ob_maximum, detection_ob_maximum, epsilon_ob_maximum, OracleOutcome,
    MAX_COMBINED_ATOMS, MAX_DETECTION_ATOMS, MAX_EPSILON_ATOMS,
};

/// `P(s,t) = Σ_λ w(λ) A_s(λ) B_t(λ)`.
pub fn lhv_correlation(model: &HiddenVariableModel, s: Label, t: Label) -> Result<f64> {
    model.ensure_valid()?;
    Ok(raw_correlation(model, Pair::new(s, t)))
}

/// Correlation conditioned on joint detection of the pair:
/// `Σ_{λ∈Γ_st} w(λ) A_s B_t / Σ_{λ∈Γ_st} w(λ)`.
pub fn lhv_conditional_correlation(model: &HiddenVariableModel, s: Label, t: Label) -> Result<f64> {
    model.ensure_valid()?;
    raw_conditional(model, Pair::new(s, t))
}

/// P(a,b), P(a,c), P(b,c) of a valid model.
pub fn correlation_triple(model: &HiddenVariableModel) -> Result<CorrelationTriple> {
    model.ensure_valid()?;
    CorrelationTriple::new(
        raw_correlation(model, Pair::AB),
        raw_correlation(model, Pair::AC),
        raw_correlation(model, Pair::BC),
    )
}

/// Detection-conditioned P̃(a,b), P̃(a,c), P̃(b,c) of a valid model.
pub fn conditional_triple(model: &HiddenVariableModel) -> Result<CorrelationTriple> {
    model.ensure_valid()?;
    CorrelationTriple::new(
        raw_conditional(model, Pair::AB)?,
        raw_conditional(model, Pair::AC)?,
        raw_conditional(model, Pair::BC)?,
    )
}

fn raw_correlation(model: &HiddenVariableModel, pair: Pair) -> f64 {
    let sum: f64 = model
        .weights()
        .iter()
        .zip(model.strategies())
        .map(|(w, s)| w * f64::from(s.product(pair)))
        .sum();
    sum.clamp(-1.0, 1.0)
}

fn raw_conditional(model: &HiddenVariableModel, pair: Pair) -> Result<f64> {
    let (mut mass, mut sum) = (0.0, 0.0);
    for (i, (w, s)) in model.weights().iter().zip(model.strategies()).enumerate() {
        if model.is_detected(i, pair) {
            mass += w;
            sum += w * f64::from(s.product(pair));
        }
    }
    if mass <= 0.0 {
        return Err(Error::NullConditioning(pair));
    }
    Ok((sum / mass).clamp(-1.0, 1.0))
}

/// All deterministic strategies in lexicographic order of
/// `(A_a, A_b, A_c, B_a, B_b, B_c)` with `+1` before `−1`.
///
/// With `perfect_anticorrelation` Bob's outcomes are forced to `B_s = −A_s`
/// and only the 8 assignments of Alice's outcomes remain; otherwise all 64.
pub fn enumerate_strategies(perfect_anticorrelation: bool) -> Vec<DeterministicStrategy> {
    let bit = |code: usize, pos: usize| Outcome::from_sign(code >> pos & 1 == 0);
    if perfect_anticorrelation {
        (0..8)
            .map(|code| {
                DeterministicStrategy::anticorrelated(LabelMap {
                    a: bit(code, 2),
                    b: bit(code, 1),
                    c: bit(code, 0),
                })
            })
            .collect()
    } else {
        (0..64)
            .map(|code| DeterministicStrategy {
                a_out: LabelMap {
                    a: bit(code, 5),
                    b: bit(code, 4),
                    c: bit(code, 3),
                },
                b_out: LabelMap {
                    a: bit(code, 2),
                    b: bit(code, 1),
                    c: bit(code, 0),
                },
            })
            .collect()
    }
}

/// Statistic value of a single deterministic strategy (an integer).
pub fn strategy_statistic(strategy: &DeterministicStrategy, pattern: StatisticPattern) -> i64 {
    let p = |pair| i64::from(strategy.product(pair));
    pattern.apply(p(Pair::AB), p(Pair::AC), p(Pair::BC))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassicalMaximum {
    pub value: Ratio<i64>,
    pub strategies: usize,
    /// First strategy (in enumeration order) attaining the maximum.
    pub witness: DeterministicStrategy,
    /// Statistic value of every enumerated strategy, in enumeration order.
    pub values: Vec<i64>,
}

/// Maximum of the statistic over all LHV models, computed on the vertices.
///
/// A mixed model's correlations are the weight-averages of its atoms'
/// products, so the statistic is `|L₁(w)| − L₂(w)` with `L₁`, `L₂` linear
/// in the weight vector `w`. That is convex in `w`, and a convex function
/// on the probability simplex attains its maximum at a vertex, i.e. at a
/// single deterministic strategy. Enumerating the strategies is therefore
/// exact for all mixtures.
pub fn classical_ob_maximum(
    perfect_anticorrelation: bool,
    pattern: StatisticPattern,
) -> ClassicalMaximum {
    let strategies = enumerate_strategies(perfect_anticorrelation);
    let values: Vec<i64> = strategies
        .iter()
        .map(|s| strategy_statistic(s, pattern))
        .collect();
    let (best, &value) = values
        .iter()
        .enumerate()
        .rev()
        .max_by_key(|(_, v)| **v)
        .expect("strategy list is never empty");
    ClassicalMaximum {
        value: Ratio::from_integer(value),
        strategies: strategies.len(),
        witness: strategies[best],
        values,
    }
}

/// Builds a model with an anti-correlation defect.
///
/// Every base strategy must satisfy `B_s = −A_s`. For atoms listed in
/// `flip_sets[s]` Bob's outcome at `s` is flipped to `B_s = A_s`; elsewhere
/// anti-correlation is kept. Each flip set's mass must not exceed `epsilon`.
pub fn make_epsilon_model(
    base: &[(f64, DeterministicStrategy)],
    flip_sets: &LabelSets,
    epsilon: f64,
) -> Result<HiddenVariableModel> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let n = base.len();
    for (i, (_, s)) in base.iter().enumerate() {
        if !Label::ALL.iter().all(|&l| s.is_anticorrelated_at(l)) {
            return Err(Error::BaseNotAntiCorrelated(i));
        }
    }
    for (label, set) in flip_sets.iter() {
        check_indices(set, n)?;
        let mass: f64 = set.iter().map(|&i| base[i].0).sum();
        if mass > epsilon + NORM_TOLERANCE {
            return Err(Error::FlipMassExceeded {
                label: label.as_char(),
                mass,
                epsilon,
            });
        }
    }
    let atoms: Vec<_> = base
        .iter()
        .enumerate()
        .map(|(i, (w, s))| {
            let b_out = LabelMap::from_fn(|l| {
                if flip_sets[l].contains(&i) {
                    s.a_out[l]
                } else {
                    -s.a_out[l]
                }
            });
            (
                *w,
                DeterministicStrategy {
                    a_out: s.a_out,
                    b_out,
                },
            )
        })
        .collect();
    let model = HiddenVariableModel::from_strategies(&atoms);
    model.ensure_valid()?;
    Ok(model)
}

/// Attaches detection sets to a model. All nine pairs must carry the same
/// detected mass (within 1e-12).
pub fn make_detection_model(
    base: &HiddenVariableModel,
    detect_sets: &PairSets,
) -> Result<HiddenVariableModel> {
    base.ensure_valid()?;
    let n = base.atoms();
    let mut reference: Option<(Pair, f64)> = None;
    for (pair, set) in detect_sets.iter() {
        check_indices(set, n)?;
        let mass: f64 = set.iter().map(|&i| base.weights()[i]).sum();
        match reference {
            None => reference = Some((pair, mass)),
            Some((ref_pair, expected)) if (mass - expected).abs() > NORM_TOLERANCE => {
                return Err(Error::UnequalDetection {
                    pair,
                    mass,
                    reference: ref_pair,
                    expected,
                });
            }
            Some(_) => {}
        }
    }
    let flags = (0..n)
        .map(|i| PairMap::from_fn(|p| detect_sets[p].contains(&i)))
        .collect();
    let model = HiddenVariableModel::from_parts(
        base.weights().to_vec(),
        base.strategies().to_vec(),
        base.anticorr_flags().to_vec(),
        flags,
    );
    model.ensure_valid()?;
    Ok(model)
}

fn check_indices(set: &BTreeSet<usize>, atoms: usize) -> Result<()> {
    match set.iter().next_back() {
        Some(&index) if index >= atoms => Err(Error::AtomOutOfRange { index, atoms }),
        _ => Ok(()),
    }
}
