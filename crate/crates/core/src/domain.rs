//! Shared domain types: measurement settings, correlation triples, noise
//! parameters, deterministic strategies and finite hidden-variable models.
//!
//! Everything here is plain data. Values are validated on construction
//! (and on deserialization) and never mutated afterwards, so they can be
//! shared freely between threads.

use std::fmt;
use std::ops::{Index, Neg};
use std::str::FromStr;

use num_traits::Signed;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used for normalization checks on axes and atom weights.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Setting label on either side of the experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    A,
    B,
    C,
}

impl Label {
    pub const ALL: [Label; 3] = [Label::A, Label::B, Label::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_char(self) -> char {
        match self {
            Label::A => 'a',
            Label::B => 'b',
            Label::C => 'c',
        }
    }

    fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(Label::A),
            'b' => Some(Label::B),
            'c' => Some(Label::C),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// An ordered setting pair: Alice measures along `alice`, Bob along `bob`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub alice: Label,
    pub bob: Label,
}

impl Pair {
    pub const AB: Pair = Pair::new(Label::A, Label::B);
    pub const AC: Pair = Pair::new(Label::A, Label::C);
    pub const BC: Pair = Pair::new(Label::B, Label::C);

    /// All nine pairs, Alice's label major.
    pub const ALL: [Pair; 9] = {
        let mut out = [Pair::AB; 9];
        let mut i = 0;
        while i < 9 {
            out[i] = Pair::new(Label::ALL[i / 3], Label::ALL[i % 3]);
            i += 1;
        }
        out
    };

    pub const fn new(alice: Label, bob: Label) -> Self {
        Pair { alice, bob }
    }

    pub fn index(self) -> usize {
        3 * self.alice.index() + self.bob.index()
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.alice, self.bob)
    }
}

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let mut chars = s.chars();
        match (
            chars.next().and_then(Label::from_char),
            chars.next().and_then(Label::from_char),
            chars.next(),
        ) {
            (Some(alice), Some(bob), None) => Ok(Pair::new(alice, bob)),
            _ => Err(format!("`{s}` is not a setting pair such as `ab`")),
        }
    }
}

impl Serialize for Pair {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Pair {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One value per setting label, serialized as `{"a": .., "b": .., "c": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelMap<T> {
    pub a: T,
    pub b: T,
    pub c: T,
}

impl<T> LabelMap<T> {
    pub fn from_fn(mut f: impl FnMut(Label) -> T) -> Self {
        LabelMap {
            a: f(Label::A),
            b: f(Label::B),
            c: f(Label::C),
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> LabelMap<U> {
        LabelMap {
            a: f(&self.a),
            b: f(&self.b),
            c: f(&self.c),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Label, &T)> {
        Label::ALL.into_iter().map(move |l| (l, &self[l]))
    }
}

impl<T> Index<Label> for LabelMap<T> {
    type Output = T;

    fn index(&self, label: Label) -> &T {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
            Label::C => &self.c,
        }
    }
}

/// One value per ordered setting pair, serialized with keys `aa`..`cc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairMap<T> {
    pub aa: T,
    pub ab: T,
    pub ac: T,
    pub ba: T,
    pub bb: T,
    pub bc: T,
    pub ca: T,
    pub cb: T,
    pub cc: T,
}

impl<T> PairMap<T> {
    pub fn from_fn(mut f: impl FnMut(Pair) -> T) -> Self {
        let [aa, ab, ac, ba, bb, bc, ca, cb, cc] = Pair::ALL;
        PairMap {
            aa: f(aa),
            ab: f(ab),
            ac: f(ac),
            ba: f(ba),
            bb: f(bb),
            bc: f(bc),
            ca: f(ca),
            cb: f(cb),
            cc: f(cc),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (Pair, &T)> {
        Pair::ALL.into_iter().map(move |p| (p, &self[p]))
    }
}

impl<T> Index<Pair> for PairMap<T> {
    type Output = T;

    fn index(&self, pair: Pair) -> &T {
        match pair.index() {
            0 => &self.aa,
            1 => &self.ab,
            2 => &self.ac,
            3 => &self.ba,
            4 => &self.bb,
            5 => &self.bc,
            6 => &self.ca,
            7 => &self.cb,
            _ => &self.cc,
        }
    }
}

/// A dichotomic measurement outcome, serialized as `1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub fn value(self) -> i32 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn from_sign(positive: bool) -> Self {
        if positive {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl Neg for Outcome {
    type Output = Outcome;

    fn neg(self) -> Outcome {
        match self {
            Outcome::Plus => Outcome::Minus,
            Outcome::Minus => Outcome::Plus,
        }
    }
}

impl Serialize for Outcome {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.value() as i8)
    }
}

impl<'de> Deserialize<'de> for Outcome {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        match i8::deserialize(deserializer)? {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            other => Err(serde::de::Error::custom(format!(
                "outcome must be 1 or -1, got {other}"
            ))),
        }
    }
}

/// A spin-projection axis: a unit vector in R³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSetting")]
pub struct MeasurementSetting {
    axis: [f64; 3],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetting {
    axis: [f64; 3],
}

impl TryFrom<RawSetting> for MeasurementSetting {
    type Error = Error;

    fn try_from(raw: RawSetting) -> Result<Self> {
        make_setting(raw.axis)
    }
}

/// Normalizes `v` into a measurement axis.
pub fn make_setting(v: [f64; 3]) -> Result<MeasurementSetting> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteAxis);
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroAxis);
    }
    // Leave near-unit input untouched so that exact literals survive.
    if (norm - 1.0).abs() <= NORM_TOLERANCE {
        return Ok(MeasurementSetting { axis: v });
    }
    Ok(MeasurementSetting {
        axis: v.map(|x| x / norm),
    })
}

impl MeasurementSetting {
    /// Axis at angle `phi` (radians) from x in the z = 0 plane.
    pub fn planar(phi: f64) -> Self {
        MeasurementSetting {
            axis: [phi.cos(), phi.sin(), 0.0],
        }
    }

    pub fn axis(&self) -> [f64; 3] {
        self.axis
    }

    pub fn dot(&self, other: &MeasurementSetting) -> f64 {
        self.axis
            .iter()
            .zip(other.axis.iter())
            .map(|(x, y)| x * y)
            .sum()
    }
}

/// The three settings entering the statistic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettingTriple {
    pub a: MeasurementSetting,
    pub b: MeasurementSetting,
    pub c: MeasurementSetting,
}

impl SettingTriple {
    /// Coplanar triple a=(1,0,0), b=(1/2,−√3/2,0), c=(−1/2,−√3/2,0), which
    /// attains the quantum maximum 3/2.
    pub fn coplanar_optimum() -> Self {
        let h = 3f64.sqrt() / 2.0;
        SettingTriple {
            a: MeasurementSetting {
                axis: [1.0, 0.0, 0.0],
            },
            b: MeasurementSetting {
                axis: [0.5, -h, 0.0],
            },
            c: MeasurementSetting {
                axis: [-0.5, -h, 0.0],
            },
        }
    }

    pub fn get(&self, label: Label) -> &MeasurementSetting {
        match label {
            Label::A => &self.a,
            Label::B => &self.b,
            Label::C => &self.c,
        }
    }
}

/// Which three pair correlations enter the statistic and in which roles.
///
/// `AbAcBc` is `|P(a,b) − P(a,c)| − P(b,c)`, the form in which the bound 1
/// is derived under perfect anti-correlation. `AbBcAc` is
/// `|P(a,b) − P(b,c)| − P(a,c)`, the form in which the detection-efficiency
/// bounds are stated. Both are exposed and checked independently.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum StatisticPattern {
    #[default]
    #[serde(rename = "ab-ac-bc")]
    AbAcBc,
    #[serde(rename = "ab-bc-ac")]
    AbBcAc,
}

impl StatisticPattern {
    pub const ALL: [StatisticPattern; 2] = [StatisticPattern::AbAcBc, StatisticPattern::AbBcAc];

    /// Evaluates the statistic from the three correlations, exact for
    /// rational inputs.
    pub fn apply<T: Signed + Copy>(self, p_ab: T, p_ac: T, p_bc: T) -> T {
        match self {
            StatisticPattern::AbAcBc => (p_ab - p_ac).abs() - p_bc,
            StatisticPattern::AbBcAc => (p_ab - p_bc).abs() - p_ac,
        }
    }

    pub fn evaluate(self, t: &CorrelationTriple) -> f64 {
        self.apply(t.p_ab, t.p_ac, t.p_bc)
    }

    pub fn name(self) -> &'static str {
        match self {
            StatisticPattern::AbAcBc => "ab-ac-bc",
            StatisticPattern::AbBcAc => "ab-bc-ac",
        }
    }
}

impl FromStr for StatisticPattern {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ab-ac-bc" => Ok(StatisticPattern::AbAcBc),
            "ab-bc-ac" => Ok(StatisticPattern::AbBcAc),
            _ => Err(format!(
                "unknown statistic pattern `{s}` (expected ab-ac-bc or ab-bc-ac)"
            )),
        }
    }
}

/// Pair correlations P(a,b), P(a,c), P(b,c), each in [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTriple")]
pub struct CorrelationTriple {
    p_ab: f64,
    p_ac: f64,
    p_bc: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTriple {
    p_ab: f64,
    p_ac: f64,
    p_bc: f64,
}

impl TryFrom<RawTriple> for CorrelationTriple {
    type Error = Error;

    fn try_from(raw: RawTriple) -> Result<Self> {
        CorrelationTriple::new(raw.p_ab, raw.p_ac, raw.p_bc)
    }
}

impl CorrelationTriple {
    pub fn new(p_ab: f64, p_ac: f64, p_bc: f64) -> Result<Self> {
        for (name, value) in [("p_ab", p_ab), ("p_ac", p_ac), ("p_bc", p_bc)] {
            if !(-1.0..=1.0).contains(&value) {
                return Err(Error::CorrelationOutOfRange { name, value });
            }
        }
        Ok(CorrelationTriple { p_ab, p_ac, p_bc })
    }

    pub fn p_ab(&self) -> f64 {
        self.p_ab
    }

    pub fn p_ac(&self) -> f64 {
        self.p_ac
    }

    pub fn p_bc(&self) -> f64 {
        self.p_bc
    }
}

/// Anti-correlation defect `epsilon` and joint detection probability `eta`.
///
/// `gamma = 1 − epsilon` is the fraction of the ensemble that is perfectly
/// anti-correlated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNoise")]
pub struct NoiseParameters {
    epsilon: f64,
    eta: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    epsilon: f64,
    eta: f64,
}

impl TryFrom<RawNoise> for NoiseParameters {
    type Error = Error;

    fn try_from(raw: RawNoise) -> Result<Self> {
        NoiseParameters::new(raw.epsilon, raw.eta)
    }
}

impl NoiseParameters {
    pub fn new(epsilon: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::EpsilonOutOfRange(epsilon));
        }
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::EtaOutOfRange(eta));
        }
        Ok(NoiseParameters { epsilon, eta })
    }

    pub fn from_gamma(gamma: f64, eta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::GammaOutOfRange(gamma));
        }
        NoiseParameters::new(1.0 - gamma, eta)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn gamma(&self) -> f64 {
        1.0 - self.epsilon
    }
}

/// A ±1 assignment to Alice's `A_s` and Bob's `B_s` for every label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeterministicStrategy {
    pub a_out: LabelMap<Outcome>,
    pub b_out: LabelMap<Outcome>,
}

impl DeterministicStrategy {
    /// Strategy with `B_s = −A_s` for every label.
    pub fn anticorrelated(a_out: LabelMap<Outcome>) -> Self {
        DeterministicStrategy {
            a_out,
            b_out: a_out.map(|&o| -o),
        }
    }

    pub fn product(&self, pair: Pair) -> i32 {
        self.a_out[pair.alice].value() * self.b_out[pair.bob].value()
    }

    pub fn is_anticorrelated_at(&self, label: Label) -> bool {
        self.b_out[label] == -self.a_out[label]
    }

    /// Flips every outcome on both sides; all products are unchanged.
    pub fn global_flip(&self) -> Self {
        DeterministicStrategy {
            a_out: self.a_out.map(|&o| -o),
            b_out: self.b_out.map(|&o| -o),
        }
    }
}

/// A finite hidden-variable model: weighted atoms, each carrying a
/// deterministic strategy, per-label anti-correlation flags and per-pair
/// detection flags.
///
/// Construction does not validate; run [`HiddenVariableModel::validate`]
/// (the lhv functions do so on every call). An empty `detect_flag` means
/// every pair is detected on every atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiddenVariableModel {
    weights: Vec<f64>,
    strategy_at: Vec<DeterministicStrategy>,
    anticorr_flag: Vec<LabelMap<bool>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    detect_flag: Vec<PairMap<bool>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Empty,
    LengthMismatch,
    InvalidWeight,
    Normalization,
    AntiCorrelation,
}

/// One failed model invariant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelViolation {
    pub kind: ViolationKind,
    pub atom: Option<usize>,
    pub field: String,
    pub message: String,
}

impl fmt::Display for ModelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.atom {
            Some(atom) => write!(f, "atom {atom}, {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

impl HiddenVariableModel {
    pub fn from_parts(
        weights: Vec<f64>,
        strategy_at: Vec<DeterministicStrategy>,
        anticorr_flag: Vec<LabelMap<bool>>,
        detect_flag: Vec<PairMap<bool>>,
    ) -> Self {
        HiddenVariableModel {
            weights,
            strategy_at,
            anticorr_flag,
            detect_flag,
        }
    }

    /// Model with every atom detected on every pair and anti-correlation
    /// flags read off the strategies.
    pub fn from_strategies(atoms: &[(f64, DeterministicStrategy)]) -> Self {
        HiddenVariableModel {
            weights: atoms.iter().map(|(w, _)| *w).collect(),
            strategy_at: atoms.iter().map(|(_, s)| *s).collect(),
            anticorr_flag: atoms
                .iter()
                .map(|(_, s)| LabelMap::from_fn(|l| s.is_anticorrelated_at(l)))
                .collect(),
            detect_flag: Vec::new(),
        }
    }

    pub fn atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn strategies(&self) -> &[DeterministicStrategy] {
        &self.strategy_at
    }

    pub fn anticorr_flags(&self) -> &[LabelMap<bool>] {
        &self.anticorr_flag
    }

    pub fn detect_flags(&self) -> &[PairMap<bool>] {
        &self.detect_flag
    }

    pub fn is_detected(&self, atom: usize, pair: Pair) -> bool {
        self.detect_flag.get(atom).is_none_or(|flags| flags[pair])
    }

    /// Mass of atoms that are not anti-correlated at `label`.
    pub fn defect_mass(&self, label: Label) -> f64 {
        self.weights
            .iter()
            .zip(&self.anticorr_flag)
            .filter(|(_, flags)| !flags[label])
            .map(|(w, _)| w)
            .sum()
    }

    /// Mass of atoms on which `pair` is jointly detected.
    pub fn detection_mass(&self, pair: Pair) -> f64 {
        (0..self.atoms())
            .filter(|&i| self.is_detected(i, pair))
            .map(|i| self.weights[i])
            .sum()
    }

    /// Every failed invariant; empty iff the model is valid.
    pub fn validate(&self) -> Vec<ModelViolation> {
        let mut out = Vec::new();
        let n = self.weights.len();
        if n == 0 {
            out.push(violation(
                ViolationKind::Empty,
                None,
                "weights",
                "model has no atoms".into(),
            ));
            return out;
        }
        let mut lengths_ok = true;
        for (field, len) in [
            ("strategy_at", self.strategy_at.len()),
            ("anticorr_flag", self.anticorr_flag.len()),
        ] {
            if len != n {
                lengths_ok = false;
                out.push(violation(
                    ViolationKind::LengthMismatch,
                    None,
                    field,
                    format!("has {len} entries but weights has {n}"),
                ));
            }
        }
        if !self.detect_flag.is_empty() && self.detect_flag.len() != n {
            out.push(violation(
                ViolationKind::LengthMismatch,
                None,
                "detect_flag",
                format!("has {} entries but weights has {n}", self.detect_flag.len()),
            ));
        }
        for (i, &w) in self.weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                out.push(violation(
                    ViolationKind::InvalidWeight,
                    Some(i),
                    "weights",
                    format!("weight {w} is not a nonnegative number"),
                ));
            }
        }
        let total: f64 = self.weights.iter().sum();
        if total.is_finite() && (total - 1.0).abs() > NORM_TOLERANCE {
            out.push(violation(
                ViolationKind::Normalization,
                None,
                "weights",
                format!("weights sum to {total}, not 1"),
            ));
        }
        if lengths_ok {
            for (i, (strategy, flags)) in
                self.strategy_at.iter().zip(&self.anticorr_flag).enumerate()
            {
                for label in Label::ALL {
                    let anti = strategy.is_anticorrelated_at(label);
                    if flags[label] != anti {
                        let message = if flags[label] {
                            format!("flagged anti-correlated at {label} but B_{label} = A_{label}")
                        } else {
                            format!("flagged equal at {label} but B_{label} = -A_{label}")
                        };
                        out.push(violation(
                            ViolationKind::AntiCorrelation,
                            Some(i),
                            &format!("anticorr_flag.{label}"),
                            message,
                        ));
                    }
                }
            }
        }
        out
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        let violations = self.validate();
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(violations))
        }
    }
}

fn violation(
    kind: ViolationKind,
    atom: Option<usize>,
    field: &str,
    message: String,
) -> ModelViolation {
    ModelViolation {
        kind,
        atom,
        field: field.to_string(),
        message,
    }
}

/// Free-function form of [`HiddenVariableModel::validate`].
pub fn validate_model(model: &HiddenVariableModel) -> Vec<ModelViolation> {
    model.validate()
}

/// One simulated event. Outcomes exist even when `detected` is false;
/// undetected events are only excluded from conditional estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord<P = Pair> {
    pub setting_pair: P,
    pub outcome_alice: Outcome,
    pub outcome_bob: Outcome,
    pub detected: bool,
}

impl<P> TrialRecord<P> {
    pub fn product(&self) -> i32 {
        self.outcome_alice.value() * self.outcome_bob.value()
    }
}

/// Per-label atom index sets, e.g. flip sets.
pub type LabelSets = LabelMap<std::collections::BTreeSet<usize>>;
/// Per-pair atom index sets, e.g. detection sets.
pub type PairSets = PairMap<std::collections::BTreeSet<usize>>;
