//! Seeded Monte Carlo simulation of finite-statistics tests of the
//! three-setting inequality (and CHSH) with a quantum, white-noise or
//! hidden-variable source and lossy joint detection.
//!
//! Each measured setting pair gets `trials_per_pair` trials, split into
//! blocks of [`seed::BLOCK_TRIALS`]; every block draws from its own
//! stream (see [`seed::block_rng`]) and reduces to integer counts, so the
//! result is bit-identical for a given spec whatever the thread count.

pub mod seed;

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::combined_bound;
use crate::domain::{
    HiddenVariableModel, Label, MeasurementSetting, NoiseParameters, Pair, SettingTriple,
    StatisticPattern, TrialRecord,
};
use crate::error::{Error, Result};
use crate::quantum::{
    chsh_statistic, sample_correlated_outcomes, singlet_correlation, ChshSettings,
};

/// Where the outcome pairs come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Source {
    /// Ideal singlet.
    Quantum,
    /// Singlet mixed with white noise: every correlation scaled by `gamma`.
    QuantumWhiteNoise { gamma: f64 },
    /// A finite hidden-variable model over labels a, b, c.
    Lhv { model: HiddenVariableModel },
}

/// Either the three settings of the OB statistic or four CHSH settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Settings {
    Chsh(ChshSettings),
    Ob(SettingTriple),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub source: Source,
    /// Joint detection probability η.
    #[serde(default = "one")]
    pub detection: f64,
    #[serde(default = "coplanar")]
    pub settings: Settings,
    pub trials_per_pair: u64,
    #[serde(default)]
    pub seed: u64,
    /// Detection independent of hidden variable and outcomes. Without it a
    /// hidden-variable source uses its model's detection flags.
    #[serde(default = "yes")]
    pub fair_sampling: bool,
    #[serde(default)]
    pub pattern: StatisticPattern,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn coplanar() -> Settings {
    Settings::Ob(SettingTriple::coplanar_optimum())
}

/// A spec problem, located by its key path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpecIssue {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for SpecIssue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

impl ExperimentSpec {
    /// The worked-example settings with an ideal singlet source.
    pub fn quantum(trials_per_pair: u64, seed: u64) -> Self {
        ExperimentSpec {
            source: Source::Quantum,
            detection: 1.0,
            settings: coplanar(),
            trials_per_pair,
            seed,
            fair_sampling: true,
            pattern: StatisticPattern::AbAcBc,
        }
    }

    pub fn validate(&self) -> Vec<SpecIssue> {
        let mut issues = Vec::new();
        let mut issue = |path: &str, message: String| {
            issues.push(SpecIssue {
                path: path.into(),
                message,
            })
        };
        if self.trials_per_pair == 0 {
            issue("trials_per_pair", "must be at least 1".into());
        }
        if !(self.detection > 0.0 && self.detection <= 1.0) {
            issue(
                "detection",
                format!("must lie in (0, 1], got {}", self.detection),
            );
        }
        match &self.source {
            Source::Quantum => {}
            Source::QuantumWhiteNoise { gamma } => {
                if !(0.0..=1.0).contains(gamma) {
                    issue("source.gamma", format!("must lie in [0, 1], got {gamma}"));
                }
            }
            Source::Lhv { model } => {
                for v in model.validate() {
                    let message = match v.atom {
                        Some(atom) => format!("atom {atom}: {}", v.message),
                        None => v.message,
                    };
                    issue(&format!("source.model.{}", v.field), message);
                }
                if matches!(self.settings, Settings::Chsh(_)) {
                    issue(
                        "settings",
                        "hidden-variable models define outcomes for labels a, b, c only".into(),
                    );
                }
            }
        }
        if !self.fair_sampling && !matches!(self.source, Source::Lhv { .. }) {
            issue("fair_sampling", Error::UnfairQuantumDetection.to_string());
        }
        issues
    }
}

/// Estimate for one measured setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub pair: String,
    pub trials: u64,
    pub detected: u64,
    pub product_sum: i64,
    pub correlation: f64,
    pub standard_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    Ob,
    Chsh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub kind: StatisticKind,
    pub pattern: StatisticPattern,
    pub pairs: Vec<PairEstimate>,
    pub statistic: f64,
    pub statistic_se: f64,
    pub bound_used: f64,
    /// `(statistic − bound_used) / statistic_se`; ±inf when the standard
    /// error is zero.
    #[serde(with = "extended_float")]
    pub violation_sigma: f64,
    /// Anti-correlated fraction assumed for the bound.
    pub gamma: f64,
    /// Joint detection probability assumed for the bound.
    pub eta: f64,
    /// `"ideal"`, `"white_noise"` or `"hidden_variable"`. The white-noise
    /// identification of γ with a visibility is a modeling choice.
    pub noise_model: String,
    /// Exact expectation of the statistic for quantum sources.
    pub quantum_prediction: Option<f64>,
    pub seed: u64,
    pub trials_per_pair: u64,
}

/// Serializes non-finite floats as the strings `"inf"`, `"-inf"`, `"nan"`.
mod extended_float {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&super::format_float(*x))
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => match t.as_str() {
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                "nan" => Ok(f64::NAN),
                _ => Err(serde::de::Error::custom(format!("not a number: {t}"))),
            },
        }
    }
}

/// Shortest round-trip decimal, with `inf`, `-inf`, `nan` spelled out.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

/// Applies lossy joint detection to one trial.
///
/// With `fair_sampling` the detected flag is a fresh Bernoulli(η) draw,
/// independent of everything else (η = 1 consumes no draw). Without it the
/// flag is the hidden-variable model's own detection flag for the atom,
/// `model_flag`; a quantum source has none and is rejected.
pub fn detection_censor<P, R: Rng + ?Sized>(
    record: TrialRecord<P>,
    eta: f64,
    rng: &mut R,
    fair_sampling: bool,
    model_flag: Option<bool>,
) -> Result<TrialRecord<P>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    let detected = if fair_sampling {
        eta >= 1.0 || rng.random::<f64>() < eta
    } else {
        model_flag.ok_or(Error::UnfairQuantumDetection)?
    };
    Ok(TrialRecord { detected, ..record })
}

/// What a measured pair needs to draw outcomes.
#[derive(Debug, Clone, Copy)]
enum PairSource<'a> {
    Correlated {
        rho: f64,
    },
    Lhv {
        model: &'a HiddenVariableModel,
        cumulative: &'a [f64],
        pair: Pair,
    },
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    trials: u64,
    detected: u64,
    product_sum: i64,
}

impl Tally {
    fn merge(self, other: Tally) -> Tally {
        Tally {
            trials: self.trials + other.trials,
            detected: self.detected + other.detected,
            product_sum: self.product_sum + other.product_sum,
        }
    }
}

fn run_block(
    spec: &ExperimentSpec,
    source: PairSource<'_>,
    pair_index: usize,
    block: u64,
    trials: u64,
) -> Result<Tally> {
    let mut rng = seed::block_rng(spec.seed, pair_index, block);
    let mut tally = Tally::default();
    for _ in 0..trials {
        let (record, flag) = match source {
            PairSource::Correlated { rho } => {
                let (alice, bob) = sample_correlated_outcomes(rho, &mut rng);
                (
                    TrialRecord {
                        setting_pair: (),
                        outcome_alice: alice,
                        outcome_bob: bob,
                        detected: true,
                    },
                    None,
                )
            }
            PairSource::Lhv {
                model,
                cumulative,
                pair,
            } => {
                let u: f64 = rng.random();
                let atom = cumulative
                    .partition_point(|&c| c <= u)
                    .min(cumulative.len() - 1);
                let s = &model.strategies()[atom];
                let record = TrialRecord {
                    setting_pair: (),
                    outcome_alice: s.a_out[pair.alice],
                    outcome_bob: s.b_out[pair.bob],
                    detected: true,
                };
                (record, Some(model.is_detected(atom, pair)))
            }
        };
        let record = detection_censor(record, spec.detection, &mut rng, spec.fair_sampling, flag)?;
        tally.trials += 1;
        if record.detected {
            tally.detected += 1;
            tally.product_sum += i64::from(record.product());
        }
    }
    Ok(tally)
}

fn run_pair(spec: &ExperimentSpec, source: PairSource<'_>, pair_index: usize) -> Result<Tally> {
    let blocks = spec.trials_per_pair.div_ceil(seed::BLOCK_TRIALS);
    (0..blocks)
        .into_par_iter()
        .map(|block| {
            let start = block * seed::BLOCK_TRIALS;
            let len = seed::BLOCK_TRIALS.min(spec.trials_per_pair - start);
            run_block(spec, source, pair_index, block, len)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

fn estimate(name: String, t: Tally) -> Result<PairEstimate> {
    if t.detected == 0 {
        return Err(Error::NoDetectedTrials(name));
    }
    let correlation = t.product_sum as f64 / t.detected as f64;
    let standard_error = ((1.0 - correlation * correlation).max(0.0) / t.detected as f64).sqrt();
    Ok(PairEstimate {
        pair: name,
        trials: t.trials,
        detected: t.detected,
        product_sum: t.product_sum,
        correlation,
        standard_error,
    })
}

/// Simulates the experiment described by `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let issues = spec.validate();
    if !issues.is_empty() {
        return Err(Error::InvalidSpec(
            issues.iter().map(ToString::to_string).collect(),
        ));
    }

    let cumulative: Vec<f64> = match &spec.source {
        Source::Lhv { model } => model
            .weights()
            .iter()
            .scan(0.0, |acc, w| {
                *acc += w;
                Some(*acc)
            })
            .collect(),
        _ => Vec::new(),
    };
    let scale = match spec.source {
        Source::QuantumWhiteNoise { gamma } => gamma,
        _ => 1.0,
    };

    let measured: Vec<(String, PairSource<'_>)> = match (&spec.settings, &spec.source) {
        (Settings::Ob(_), Source::Lhv { model }) => [Pair::AB, Pair::AC, Pair::BC]
            .into_iter()
            .map(|pair| {
                (
                    pair.to_string(),
                    PairSource::Lhv {
                        model,
                        cumulative: &cumulative,
                        pair,
                    },
                )
            })
            .collect(),
        (Settings::Ob(t), _) => [
            (Label::A, Label::B),
            (Label::A, Label::C),
            (Label::B, Label::C),
        ]
        .into_iter()
        .map(|(x, y)| {
            let rho = scale * singlet_correlation(t.get(x), t.get(y));
            (format!("{x}{y}"), PairSource::Correlated { rho })
        })
        .collect(),
        (Settings::Chsh(c), _) => {
            let names = ["ab", "ab'", "a'b", "a'b'"];
            names
                .into_iter()
                .zip(c.pairs())
                .map(
                    |(name, (x, y)): (&str, (MeasurementSetting, MeasurementSetting))| {
                        (
                            name.to_string(),
                            PairSource::Correlated {
                                rho: scale * singlet_correlation(&x, &y),
                            },
                        )
                    },
                )
                .collect()
        }
    };

    let mut pairs = Vec::with_capacity(measured.len());
    for (index, (name, source)) in measured.iter().enumerate() {
        let tally = run_pair(spec, *source, index)?;
        pairs.push(estimate(name.clone(), tally)?);
    }

    let rho: Vec<f64> = pairs.iter().map(|p| p.correlation).collect();
    let exact: Vec<Option<f64>> = measured
        .iter()
        .map(|(_, s)| match s {
            PairSource::Correlated { rho } => Some(*rho),
            PairSource::Lhv { .. } => None,
        })
        .collect();
    let (kind, statistic, quantum_prediction) = match spec.settings {
        Settings::Ob(_) => {
            let prediction = match exact[..] {
                [Some(x), Some(y), Some(z)] => Some(spec.pattern.apply(x, y, z)),
                _ => None,
            };
            (
                StatisticKind::Ob,
                spec.pattern.apply(rho[0], rho[1], rho[2]),
                prediction,
            )
        }
        Settings::Chsh(_) => {
            let prediction = match exact[..] {
                [Some(a), Some(b), Some(c), Some(d)] => Some(chsh_statistic(a, b, c, d)),
                _ => None,
            };
            (
                StatisticKind::Chsh,
                chsh_statistic(rho[0], rho[1], rho[2], rho[3]),
                prediction,
            )
        }
    };
    let statistic_se = pairs
        .iter()
        .map(|p| p.standard_error.powi(2))
        .sum::<f64>()
        .sqrt();

    let (gamma, eta, noise_model) = match &spec.source {
        Source::Quantum => (1.0, spec.detection, "ideal"),
        Source::QuantumWhiteNoise { gamma } => (*gamma, spec.detection, "white_noise"),
        Source::Lhv { model } => {
            let defect = Label::ALL
                .iter()
                .map(|&l| model.defect_mass(l))
                .fold(0.0, f64::max);
            let eta = if spec.fair_sampling {
                spec.detection
            } else {
                [Pair::AB, Pair::AC, Pair::BC]
                    .iter()
                    .map(|&p| model.detection_mass(p))
                    .fold(1.0, f64::min)
            };
            ((1.0 - defect).clamp(0.0, 1.0), eta, "hidden_variable")
        }
    };
    let bound_used = match kind {
        StatisticKind::Ob => combined_bound(&NoiseParameters::from_gamma(gamma, eta)?),
        StatisticKind::Chsh => 2.0,
    };
    let excess = statistic - bound_used;
    let violation_sigma = if statistic_se > 0.0 {
        excess / statistic_se
    } else if excess > 0.0 {
        f64::INFINITY
    } else if excess < 0.0 {
        f64::NEG_INFINITY
    } else {
        0.0
    };

    Ok(ExperimentResult {
        kind,
        pattern: spec.pattern,
        pairs,
        statistic,
        statistic_se,
        bound_used,
        violation_sigma,
        gamma,
        eta,
        noise_model: noise_model.into(),
        quantum_prediction,
        seed: spec.seed,
        trials_per_pair: spec.trials_per_pair,
    })
}

pub const SUMMARY_HEADER: &str = "gamma,eta,statistic,se,bound,violation_sigma";

impl ExperimentResult {
    /// CSV row matching [`SUMMARY_HEADER`].
    pub fn summary_row(&self) -> String {
        [
            self.gamma,
            self.eta,
            self.statistic,
            self.statistic_se,
            self.bound_used,
            self.violation_sigma,
        ]
        .map(format_float)
        .join(",")
    }
}

/// One cell of a (γ, η) sweep. Exactly one of `result` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub gamma: f64,
    pub eta: f64,
    pub seed: u64,
    pub result: Option<ExperimentResult>,
    pub error: Option<String>,
}

/// Runs the template once per (γ, η) with a white-noise singlet source of
/// visibility γ and detection η, row-major with γ outer. The cell seed is
/// [`seed::cell_seed`] of the template seed and the cell coordinates. A
/// failing cell is recorded in place.
pub fn sweep(
    template: &ExperimentSpec,
    gamma_values: &[f64],
    eta_values: &[f64],
) -> Result<Vec<SweepCell>> {
    if gamma_values.is_empty() || eta_values.is_empty() {
        return Err(Error::InvalidSpec(vec![
            "sweep needs at least one gamma and one eta value".into(),
        ]));
    }
    if matches!(template.source, Source::Lhv { .. }) {
        return Err(Error::InvalidSpec(vec![
            "source: sweeps vary the white-noise visibility and need a quantum source".into(),
        ]));
    }
    let cells: Vec<(f64, f64)> = gamma_values
        .iter()
        .flat_map(|&g| eta_values.iter().map(move |&e| (g, e)))
        .collect();
    Ok(cells
        .into_par_iter()
        .map(|(gamma, eta)| {
            let spec = sweep_cell_spec(template, gamma, eta);
            let outcome = run_experiment(&spec);
            SweepCell {
                gamma,
                eta,
                seed: spec.seed,
                error: outcome.as_ref().err().map(ToString::to_string),
                result: outcome.ok(),
            }
        })
        .collect())
}

/// The spec that [`sweep`] runs for one cell.
pub fn sweep_cell_spec(template: &ExperimentSpec, gamma: f64, eta: f64) -> ExperimentSpec {
    ExperimentSpec {
        source: Source::QuantumWhiteNoise { gamma },
        detection: eta,
        seed: seed::cell_seed(template.seed, gamma, eta),
        ..template.clone()
    }
}

/// Summary CSV of a sweep; failed cells keep their coordinates and leave
/// the other columns empty.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for cell in cells {
        match &cell.result {
            Some(r) => writeln!(out, "{}", r.summary_row()).unwrap(),
            None => writeln!(
                out,
                "{},{},,,,",
                format_float(cell.gamma),
                format_float(cell.eta)
            )
            .unwrap(),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{make_setting, Outcome};
    use crate::lhv::{enumerate_strategies, make_detection_model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn record() -> TrialRecord {
        TrialRecord {
            setting_pair: Pair::AB,
            outcome_alice: Outcome::Plus,
            outcome_bob: Outcome::Minus,
            detected: false,
        }
    }

    #[test]
    fn censor_full_efficiency_always_detects() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..1000 {
            assert!(
                detection_censor(record(), 1.0, &mut rng, true, None)
                    .unwrap()
                    .detected
            );
        }
    }

    #[test]
    fn censor_bernoulli_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let hits = (0..n)
            .filter(|_| {
                detection_censor(record(), 0.9, &mut rng, true, None)
                    .unwrap()
                    .detected
            })
            .count();
        // sd = sqrt(0.09/1e6) = 3e-4
        assert!((hits as f64 / n as f64 - 0.9).abs() < 1e-3);
    }

    #[test]
    fn censor_model_flag_and_quantum_rejection() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = detection_censor(record(), 0.5, &mut rng, false, Some(false)).unwrap();
        assert!(!r.detected);
        assert_eq!(r.outcome_alice, Outcome::Plus);
        assert_eq!(
            detection_censor(record(), 0.5, &mut rng, false, None),
            Err(Error::UnfairQuantumDetection)
        );
        assert_eq!(
            detection_censor(record(), 0.0, &mut rng, true, None),
            Err(Error::EtaOutOfRange(0.0))
        );
    }

    #[test]
    fn quantum_run_near_three_halves() {
        let r = run_experiment(&ExperimentSpec::quantum(200_000, 1)).unwrap();
        assert_eq!(r.pairs.len(), 3);
        assert_eq!(r.quantum_prediction, Some(1.5));
        assert!((r.statistic - 1.5).abs() < 4.0 * r.statistic_se, "{r:?}");
        assert!(r.violation_sigma > 5.0);
        for p in &r.pairs {
            assert_eq!(p.detected, 200_000);
            assert!(
                (p.standard_error - ((1.0 - p.correlation.powi(2)) / p.detected as f64).sqrt())
                    .abs()
                    < 1e-15
            );
        }
    }

    #[test]
    fn identical_specs_identical_results() {
        let mut spec = ExperimentSpec::quantum(100_000, 9);
        spec.detection = 0.8;
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
        spec.seed = 10;
        assert_ne!(run_experiment(&spec).unwrap().statistic, a.statistic);
    }

    #[test]
    fn invalid_specs_are_listed() {
        let mut spec = ExperimentSpec::quantum(0, 1);
        spec.detection = 1.5;
        spec.fair_sampling = false;
        let paths: Vec<_> = spec.validate().into_iter().map(|i| i.path).collect();
        assert_eq!(paths, ["trials_per_pair", "detection", "fair_sampling"]);
        assert!(matches!(run_experiment(&spec), Err(Error::InvalidSpec(v)) if v.len() == 3));
    }

    #[test]
    fn lhv_run_with_model_detection() {
        let strategies = enumerate_strategies(true);
        let atoms: Vec<_> = (0..10).map(|i| (0.1, strategies[i % 8])).collect();
        let base = HiddenVariableModel::from_strategies(&atoms);
        let nine: BTreeSet<usize> = (0..9).collect();
        let model = make_detection_model(&base, &crate::domain::PairMap::from_fn(|_| nine.clone()))
            .unwrap();
        let spec = ExperimentSpec {
            source: Source::Lhv { model },
            detection: 1.0,
            settings: coplanar(),
            trials_per_pair: 50_000,
            seed: 3,
            fair_sampling: false,
            pattern: StatisticPattern::AbBcAc,
        };
        let r = run_experiment(&spec).unwrap();
        assert!((r.eta - 0.9).abs() < 1e-12);
        assert!((r.bound_used - (4.0 - 2.7) / 0.9).abs() < 1e-12);
        for p in &r.pairs {
            assert!(p.detected < p.trials);
        }
        assert!(r.violation_sigma < 5.0);
        assert_eq!(r.noise_model, "hidden_variable");
    }

    #[test]
    fn no_detected_trials_is_an_error() {
        let s = enumerate_strategies(true)[0];
        let base = HiddenVariableModel::from_strategies(&[(1.0, s)]);
        let model =
            make_detection_model(&base, &crate::domain::PairMap::from_fn(|_| BTreeSet::new()))
                .unwrap();
        let spec = ExperimentSpec {
            source: Source::Lhv { model },
            detection: 1.0,
            settings: coplanar(),
            trials_per_pair: 10,
            seed: 0,
            fair_sampling: false,
            pattern: StatisticPattern::AbAcBc,
        };
        assert_eq!(
            run_experiment(&spec).unwrap_err(),
            Error::NoDetectedTrials("ab".into())
        );
    }

    #[test]
    fn chsh_run() {
        let spec = ExperimentSpec {
            settings: Settings::Chsh(ChshSettings::tsirelson()),
            ..ExperimentSpec::quantum(100_000, 4)
        };
        let r = run_experiment(&spec).unwrap();
        assert_eq!(r.kind, StatisticKind::Chsh);
        assert_eq!(r.bound_used, 2.0);
        assert!((r.statistic - 2.0 * 2f64.sqrt()).abs() < 5.0 * r.statistic_se);
        let lhv = ExperimentSpec {
            source: Source::Lhv {
                model: HiddenVariableModel::from_strategies(&[(
                    1.0,
                    enumerate_strategies(true)[0],
                )]),
            },
            ..spec
        };
        assert_eq!(lhv.validate()[0].path, "settings");
    }

    #[test]
    fn sweep_cell_equals_direct_run() {
        let template = ExperimentSpec::quantum(20_000, 77);
        let cells = sweep(&template, &[0.9], &[0.95]).unwrap();
        assert_eq!(cells.len(), 1);
        let direct = run_experiment(&sweep_cell_spec(&template, 0.9, 0.95)).unwrap();
        assert_eq!(cells[0].result.as_ref().unwrap(), &direct);
    }

    #[test]
    fn sweep_is_order_independent_and_records_failures() {
        let template = ExperimentSpec::quantum(5_000, 1);
        let forward = sweep(&template, &[0.8, 1.0], &[0.9, 1.0]).unwrap();
        let backward = sweep(&template, &[1.0, 0.8], &[1.0, 0.9]).unwrap();
        for cell in &forward {
            let twin = backward
                .iter()
                .find(|c| c.gamma == cell.gamma && c.eta == cell.eta)
                .unwrap();
            assert_eq!(cell, twin);
        }
        let with_bad = sweep(&template, &[1.0, 1.5], &[1.0]).unwrap();
        assert!(with_bad[0].result.is_some());
        assert!(with_bad[1]
            .error
            .as_deref()
            .unwrap()
            .contains("source.gamma"));
        let csv = sweep_csv(&with_bad);
        assert!(csv.starts_with("gamma,eta,statistic,se,bound,violation_sigma\n"));
        assert!(csv.ends_with("1.5,1,,,,\n"));
    }

    #[test]
    fn spec_json_shapes() {
        let text = r#"{"source":{"type":"quantum_white_noise","gamma":0.98},"detection":0.9,"trials_per_pair":10}"#;
        let spec: ExperimentSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.source, Source::QuantumWhiteNoise { gamma: 0.98 });
        assert!(spec.fair_sampling);
        assert_eq!(spec.settings, coplanar());
        let chsh = r#"{"source":{"type":"quantum"},"trials_per_pair":10,
            "settings":{"a":{"axis":[1,0,0]},"a_prime":{"axis":[0,1,0]},"b":{"axis":[1,1,0]},"b_prime":{"axis":[1,-1,0]}}}"#;
        let spec: ExperimentSpec = serde_json::from_str(chsh).unwrap();
        assert!(matches!(spec.settings, Settings::Chsh(_)));
        let ob = r#"{"source":{"type":"quantum"},"trials_per_pair":10,
            "settings":{"a":{"axis":[1,0,0]},"b":{"axis":[0,1,0]},"c":{"axis":[0,0,1]}}}"#;
        let spec: ExperimentSpec = serde_json::from_str(ob).unwrap();
        match spec.settings {
            Settings::Ob(t) => assert_eq!(t.c, make_setting([0.0, 0.0, 1.0]).unwrap()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn result_json_round_trip_with_infinite_sigma() {
        let s = enumerate_strategies(true)[0];
        let spec = ExperimentSpec {
            source: Source::Lhv {
                model: HiddenVariableModel::from_strategies(&[(1.0, s)]),
            },
            ..ExperimentSpec::quantum(100, 0)
        };
        let r = run_experiment(&spec).unwrap();
        assert_eq!(r.statistic_se, 0.0);
        assert_eq!(r.violation_sigma, 0.0);
        let mut shifted = r.clone();
        shifted.violation_sigma = f64::NEG_INFINITY;
        let text = serde_json::to_string(&shifted).unwrap();
        assert!(text.contains(r#""violation_sigma":"-inf""#));
        let back: ExperimentResult = serde_json::from_str(&text).unwrap();
        assert_eq!(back, shifted);
    }
}
