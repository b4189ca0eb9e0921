//! Random finite LHV models with a prescribed anti-correlation defect and
//! detection mass, for randomized bound checks beyond the exhaustive range.
//!
//! Exact masses are reached by splitting the atom that straddles the target
//! into two copies with the same strategy and flags.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::domain::{DeterministicStrategy, HiddenVariableModel, Label, LabelMap, Pair, PairMap};

use super::enumerate_strategies;

#[derive(Debug, Clone)]
struct Atom {
    weight: f64,
    strategy: DeterministicStrategy,
    detect: PairMap<bool>,
}

fn into_model(atoms: Vec<Atom>) -> HiddenVariableModel {
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    let pairs: Vec<_> = atoms
        .iter()
        .map(|a| (a.weight / total, a.strategy))
        .collect();
    let base = HiddenVariableModel::from_strategies(&pairs);
    HiddenVariableModel::from_parts(
        base.weights().to_vec(),
        base.strategies().to_vec(),
        base.anticorr_flags().to_vec(),
        atoms.iter().map(|a| a.detect).collect(),
    )
}

fn random_atoms<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> Vec<Atom> {
    let strategies = enumerate_strategies(true);
    // Exponential spacings give uniform weights on the simplex.
    let raw: Vec<f64> = (0..atoms)
        .map(|_| -(1.0 - rng.random::<f64>()).ln())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter()
        .map(|w| Atom {
            weight: w / total,
            strategy: strategies[rng.random_range(0..strategies.len())],
            detect: PairMap::from_fn(|_| true),
        })
        .collect()
}

/// Perfectly anti-correlated model with `atoms` random atoms.
pub fn random_perfect_model<R: Rng + ?Sized>(rng: &mut R, atoms: usize) -> HiddenVariableModel {
    into_model(random_atoms(rng, atoms))
}

/// Marks a subset of mass exactly `target` (splitting one atom if needed)
/// by calling `mark` on each chosen atom. `order` is the preference order.
fn take_mass(
    atoms: &mut Vec<Atom>,
    order: &[usize],
    target: f64,
    mut mark: impl FnMut(&mut Atom, bool),
) {
    let mut taken = 0.0;
    let mut split: Option<(usize, f64)> = None;
    let mut chosen = vec![false; atoms.len()];
    for &i in order {
        if taken >= target {
            break;
        }
        let w = atoms[i].weight;
        if taken + w <= target {
            taken += w;
            chosen[i] = true;
        } else {
            split = Some((i, target - taken));
            taken = target;
        }
    }
    if let Some((i, inside)) = split {
        let mut copy = atoms[i].clone();
        copy.weight = atoms[i].weight - inside;
        atoms[i].weight = inside;
        chosen[i] = true;
        atoms.push(copy);
        chosen.push(false);
    }
    for (atom, &c) in atoms.iter_mut().zip(&chosen) {
        mark(atom, c);
    }
}

fn flip_at(atom: &mut Atom, label: Label) {
    let s = &mut atom.strategy;
    let flipped = -s.b_out[label];
    s.b_out = LabelMap::from_fn(|l| if l == label { flipped } else { s.b_out[l] });
}

/// Random model whose defect set at each label has mass `epsilon` (exactly,
/// up to rounding). With `adversarial` the flips go preferentially to atoms
/// where they raise `|P(a,b) − P(a,c)| − P(b,c)`.
pub fn random_epsilon_model<R: Rng + ?Sized>(
    rng: &mut R,
    atoms: usize,
    epsilon: f64,
    adversarial: bool,
) -> HiddenVariableModel {
    let mut list = random_atoms(rng, atoms);
    for label in [Label::B, Label::C, Label::A] {
        let mut order: Vec<usize> = (0..list.len()).collect();
        order.shuffle(rng);
        if adversarial && label != Label::A {
            // A flip at b turns the (a,b) product from −1 to +1; a flip at c
            // turns the (b,c) product from +1 to −1.
            match label {
                Label::B => order.sort_by_key(|&i| list[i].strategy.product(Pair::AB) > 0),
                _ => order.sort_by_key(|&i| list[i].strategy.product(Pair::BC) < 0),
            }
        }
        take_mass(&mut list, &order, epsilon, |atom, chosen| {
            if chosen {
                flip_at(atom, label)
            }
        });
    }
    into_model(list)
}

/// Adds detection sets of mass exactly `eta` on every pair to `model`.
/// With `adversarial` the detected atoms are chosen to push the
/// `AbBcAc` conditional statistic up.
pub fn with_random_detection<R: Rng + ?Sized>(
    rng: &mut R,
    model: &HiddenVariableModel,
    eta: f64,
    adversarial: bool,
) -> HiddenVariableModel {
    let mut list: Vec<Atom> = model
        .weights()
        .iter()
        .zip(model.strategies())
        .map(|(&weight, &strategy)| Atom {
            weight,
            strategy,
            detect: PairMap::from_fn(|_| true),
        })
        .collect();
    let sign = if rng.random::<bool>() { 1 } else { -1 };
    for pair in Pair::ALL {
        let mut order: Vec<usize> = (0..list.len()).collect();
        order.shuffle(rng);
        if adversarial {
            // Keep atoms whose product helps: sign·P̃(a,b) up, sign·P̃(b,c) down, P̃(a,c) down.
            let wanted = match pair {
                Pair::AB => sign,
                Pair::BC => -sign,
                _ => -1,
            };
            order.sort_by_key(|&i| list[i].strategy.product(pair) != wanted);
        }
        take_mass(&mut list, &order, eta, |atom, chosen| {
            let mut flags = atom.detect;
            set_pair(&mut flags, pair, chosen);
            atom.detect = flags;
        });
    }
    into_model(list)
}

fn set_pair(flags: &mut PairMap<bool>, pair: Pair, value: bool) {
    let slot = match pair.index() {
        0 => &mut flags.aa,
        1 => &mut flags.ab,
        2 => &mut flags.ac,
        3 => &mut flags.ba,
        4 => &mut flags.bb,
        5 => &mut flags.bc,
        6 => &mut flags.ca,
        7 => &mut flags.cb,
        _ => &mut flags.cc,
    };
    *slot = value;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_models_are_valid_with_exact_masses() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for trial in 0..200 {
            let eps = 0.05 * (trial % 11) as f64;
            let eta = 0.5 + 0.05 * (trial % 11) as f64;
            let m = random_epsilon_model(&mut rng, 1 + trial % 12, eps, trial % 2 == 0);
            assert!(m.validate().is_empty());
            for l in Label::ALL {
                assert!(
                    (m.defect_mass(l) - eps).abs() < 1e-12,
                    "{} vs {eps}",
                    m.defect_mass(l)
                );
            }
            let d = with_random_detection(&mut rng, &m, eta, trial % 3 == 0);
            assert!(d.validate().is_empty());
            for p in Pair::ALL {
                assert!((d.detection_mass(p) - eta).abs() < 1e-12);
            }
            for l in Label::ALL {
                assert!((d.defect_mass(l) - eps).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn perfect_model_is_anticorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_perfect_model(&mut rng, 7);
        assert!(m.validate().is_empty());
        assert!(m.anticorr_flags().iter().all(|f| f.a && f.b && f.c));
    }
}
