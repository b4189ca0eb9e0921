//! Exhaustive search for the largest statistic reachable by a
//! hidden-variable model on a uniform grid of `n` atoms, with flip sets of
//! at most `k` atoms per label and/or detection sets of exactly `m` atoms
//! per setting pair.
//!
//! Only three pairs enter the statistic: (a,b), (a,c), (b,c). Bob never
//! measures `a`, so a flip at `a` is irrelevant, and the detection sets of
//! the six other pairs can be filled independently. Up to a global sign
//! flip (which leaves every product unchanged) an atom is then described by
//! `x = A_a A_b`, `y = A_a A_c`, whether it is flipped at `b` and at `c`, and
//! whether each of the three pairs is detected on it. Atoms have equal
//! weight, so a model is a multiset of such kinds and the correlations
//! depend only on the per-kind counts.
//!
//! Rather than listing multisets, the search adds one atom at a time and
//! keeps the set of reachable tallies (product sums over detected atoms,
//! detection counts, flip counts). After `n` steps this set is exactly the
//! set of tallies of all admissible models, and the statistic is maximized
//! over it in exact rational arithmetic. A witness model is rebuilt from
//! recorded predecessors.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::BuildHasherDefault;

use num_rational::Ratio;
use serde::Serialize;

use crate::domain::{
    DeterministicStrategy, HiddenVariableModel, Label, LabelMap, Outcome, Pair, PairMap,
    StatisticPattern,
};
use crate::error::{Error, Result};

pub const MAX_EPSILON_ATOMS: usize = 12;
pub const MAX_DETECTION_ATOMS: usize = 10;
pub const MAX_COMBINED_ATOMS: usize = 8;

/// Pair slots inside a tally, in statistic order.
const PAIRS: [Pair; 3] = [Pair::AB, Pair::AC, Pair::BC];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct AtomKind {
    /// `A_b` and `A_c` with `A_a = +1`.
    alice: [Outcome; 2],
    /// Flipped (`B_s = A_s`) at `b`, at `c`.
    flipped: [bool; 2],
    detected: [bool; 3],
}

impl AtomKind {
    fn strategy(&self) -> DeterministicStrategy {
        let a_out = LabelMap {
            a: Outcome::Plus,
            b: self.alice[0],
            c: self.alice[1],
        };
        let b_out = LabelMap {
            a: -a_out.a,
            b: if self.flipped[0] { a_out.b } else { -a_out.b },
            c: if self.flipped[1] { a_out.c } else { -a_out.c },
        };
        DeterministicStrategy { a_out, b_out }
    }

    fn products(&self) -> [i8; 3] {
        let s = self.strategy();
        PAIRS.map(|p| s.product(p) as i8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Tally {
    sums: [i8; 3],
    detected: [u8; 3],
    flips: [u8; 2],
}

#[derive(Debug, Clone, Copy)]
struct Limits {
    atoms: usize,
    max_flips: usize,
    detections: usize,
}

type Layer = HashMap<Tally, (Tally, u8), BuildHasherDefault<DefaultHasher>>;

/// Result of an exhaustive search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleOutcome {
    pub pattern: StatisticPattern,
    pub atoms: usize,
    /// Atoms per flip set (`epsilon · atoms`).
    pub max_flips: usize,
    /// Atoms per detection set (`eta · atoms`).
    pub detections: usize,
    /// Largest reachable statistic.
    pub value: Ratio<i64>,
    /// Closed-form bound at the same parameters.
    pub bound: Ratio<i64>,
    /// Number of distinct reachable tallies.
    pub reachable: usize,
    /// A model attaining `value`.
    pub witness: HiddenVariableModel,
}

impl OracleOutcome {
    pub fn within_bound(&self) -> bool {
        self.value <= self.bound
    }
}

/// Largest statistic over all models with perfect detection and flip sets
/// of mass at most `epsilon` per label. `epsilon` must be a multiple of
/// `1/atoms`. The bound reported is `1 + 2ε`.
pub fn epsilon_ob_maximum(
    epsilon: f64,
    atoms: usize,
    pattern: StatisticPattern,
) -> Result<OracleOutcome> {
    check_atoms(atoms, MAX_EPSILON_ATOMS)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let k = grid_count("epsilon", epsilon, atoms)?;
    search(
        Limits {
            atoms,
            max_flips: k,
            detections: atoms,
        },
        pattern,
    )
}

/// Largest conditional statistic over all perfectly anti-correlated models
/// whose detection sets all have mass `eta` (a positive multiple of
/// `1/atoms`). The bound reported is `(4 − 3η)/η`.
pub fn detection_ob_maximum(
    eta: f64,
    atoms: usize,
    pattern: StatisticPattern,
) -> Result<OracleOutcome> {
    check_atoms(atoms, MAX_DETECTION_ATOMS)?;
    let m = eta_count(eta, atoms)?;
    search(
        Limits {
            atoms,
            max_flips: 0,
            detections: m,
        },
        pattern,
    )
}

/// Both defects at once. The bound reported is `(4 + 2ε − 3η)/η`.
pub fn combined_ob_maximum(
    epsilon: f64,
    eta: f64,
    atoms: usize,
    pattern: StatisticPattern,
) -> Result<OracleOutcome> {
    check_atoms(atoms, MAX_COMBINED_ATOMS)?;
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    let k = grid_count("epsilon", epsilon, atoms)?;
    let m = eta_count(eta, atoms)?;
    search(
        Limits {
            atoms,
            max_flips: k,
            detections: m,
        },
        pattern,
    )
}

fn check_atoms(atoms: usize, max: usize) -> Result<()> {
    if atoms == 0 || atoms > max {
        Err(Error::TooManyAtoms { atoms, max })
    } else {
        Ok(())
    }
}

fn eta_count(eta: f64, atoms: usize) -> Result<usize> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    grid_count("eta", eta, atoms)
}

fn grid_count(name: &'static str, value: f64, atoms: usize) -> Result<usize> {
    let count = (value * atoms as f64).round();
    if (count / atoms as f64 - value).abs() > 1e-9 {
        return Err(Error::OffAtomGrid { name, value, atoms });
    }
    Ok(count as usize)
}

fn kinds(limits: &Limits) -> Vec<AtomKind> {
    let signs = [Outcome::Plus, Outcome::Minus];
    let flips: &[bool] = if limits.max_flips > 0 {
        &[false, true]
    } else {
        &[false]
    };
    let detects: &[bool] = if limits.detections < limits.atoms {
        &[true, false]
    } else {
        &[true]
    };
    let mut out = Vec::new();
    for &ab in &signs {
        for &ac in &signs {
            for &fb in flips {
                for &fc in flips {
                    for &d0 in detects {
                        for &d1 in detects {
                            for &d2 in detects {
                                out.push(AtomKind {
                                    alice: [ab, ac],
                                    flipped: [fb, fc],
                                    detected: [d0, d1, d2],
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

fn search(limits: Limits, pattern: StatisticPattern) -> Result<OracleOutcome> {
    let kinds = kinds(&limits);
    let products: Vec<[i8; 3]> = kinds.iter().map(AtomKind::products).collect();
    let start = Tally {
        sums: [0; 3],
        detected: [0; 3],
        flips: [0; 2],
    };
    let mut layers: Vec<Layer> = Vec::with_capacity(limits.atoms);
    let mut frontier = vec![start];

    for step in 0..limits.atoms {
        let remaining = limits.atoms - step - 1;
        let mut next = Layer::default();
        for tally in &frontier {
            for (index, kind) in kinds.iter().enumerate() {
                let mut t = *tally;
                for (slot, &product) in products[index].iter().enumerate() {
                    if kind.detected[slot] {
                        t.sums[slot] += product;
                        t.detected[slot] += 1;
                    }
                }
                for slot in 0..2 {
                    t.flips[slot] += u8::from(kind.flipped[slot]);
                }
                let detections_ok = t.detected.iter().all(|&d| {
                    usize::from(d) <= limits.detections
                        && usize::from(d) + remaining >= limits.detections
                });
                let flips_ok = t.flips.iter().all(|&f| usize::from(f) <= limits.max_flips);
                if detections_ok && flips_ok {
                    next.entry(t).or_insert((*tally, index as u8));
                }
            }
        }
        frontier = next.keys().copied().collect();
        frontier.sort_unstable();
        layers.push(next);
    }

    let m = limits.detections as i64;
    let value_of = |t: &Tally| {
        let [ab, ac, bc] = t.sums.map(|s| Ratio::new(i64::from(s), m));
        pattern.apply(ab, ac, bc)
    };
    // frontier is sorted, so ties resolve to the smallest tally
    let best = frontier
        .iter()
        .copied()
        .reduce(|acc, t| {
            if value_of(&t) > value_of(&acc) {
                t
            } else {
                acc
            }
        })
        .expect("the all-detected assignment is always admissible");
    let value = value_of(&best);

    let mut chosen = Vec::with_capacity(limits.atoms);
    let mut cursor = best;
    for layer in layers.iter().rev() {
        let (prev, index) = layer[&cursor];
        chosen.push(kinds[usize::from(index)]);
        cursor = prev;
    }
    chosen.reverse();

    let n = limits.atoms as i64;
    let (k, m_) = (limits.max_flips as i64, limits.detections as i64);
    let bound = Ratio::new(4 * n + 2 * k - 3 * m_, m_);

    Ok(OracleOutcome {
        pattern,
        atoms: limits.atoms,
        max_flips: limits.max_flips,
        detections: limits.detections,
        value,
        bound,
        reachable: frontier.len(),
        witness: witness_model(&chosen, limits.detections),
    })
}

/// Uniform-weight model realizing the chosen kinds. Pairs outside the
/// statistic are detected on the first `detections` atoms.
fn witness_model(chosen: &[AtomKind], detections: usize) -> HiddenVariableModel {
    let n = chosen.len();
    let weight = 1.0 / n as f64;
    let atoms: Vec<_> = chosen.iter().map(|k| (weight, k.strategy())).collect();
    let base = HiddenVariableModel::from_strategies(&atoms);
    let detect = chosen
        .iter()
        .enumerate()
        .map(|(i, kind)| {
            PairMap::from_fn(|pair| match PAIRS.iter().position(|&p| p == pair) {
                Some(slot) => kind.detected[slot],
                None => i < detections,
            })
        })
        .collect();
    HiddenVariableModel::from_parts(
        base.weights().to_vec(),
        base.strategies().to_vec(),
        base.anticorr_flags().to_vec(),
        detect,
    )
}

/// Exact per-label flip counts of a uniform witness, for reporting.
pub fn flip_counts(model: &HiddenVariableModel) -> LabelMap<usize> {
    LabelMap::from_fn(|l: Label| model.anticorr_flags().iter().filter(|f| !f[l]).count())
}
