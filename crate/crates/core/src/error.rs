use thiserror::Error;

use crate::domain::{ModelViolation, Pair};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("measurement axis must have nonzero norm")]
    ZeroAxis,
    #[error("measurement axis has a non-finite component")]
    NonFiniteAxis,
    #[error("correlation {name} = {value} lies outside [-1, 1]")]
    CorrelationOutOfRange { name: &'static str, value: f64 },
    #[error("epsilon must lie in [0, 1], got {0}")]
    EpsilonOutOfRange(f64),
    #[error("gamma must lie in [0, 1], got {0}")]
    GammaOutOfRange(f64),
    #[error("eta must lie in (0, 1], got {0}")]
    EtaOutOfRange(f64),
    #[error("invalid hidden-variable model: {}", summarize(.0))]
    InvalidModel(Vec<ModelViolation>),
    #[error("conditioning on a null event: no detected mass for setting pair {0}")]
    NullConditioning(Pair),
    #[error("atom index {index} out of range for a model with {atoms} atoms")]
    AtomOutOfRange { index: usize, atoms: usize },
    #[error("base strategy at atom {0} is not perfectly anti-correlated")]
    BaseNotAntiCorrelated(usize),
    #[error(
        "flip set for setting {label} has mass {mass}, exceeding the declared epsilon {epsilon}"
    )]
    FlipMassExceeded {
        label: char,
        mass: f64,
        epsilon: f64,
    },
    #[error("detection mass {mass} for setting pair {pair} differs from {expected} (setting pair {reference})")]
    UnequalDetection {
        pair: Pair,
        mass: f64,
        reference: Pair,
        expected: f64,
    },
    #[error("{name} = {value} is not a multiple of 1/{atoms}")]
    OffAtomGrid {
        name: &'static str,
        value: f64,
        atoms: usize,
    },
    #[error("{atoms} atoms requested, at most {max} supported by exhaustive search")]
    TooManyAtoms { atoms: usize, max: usize },
    #[error("tolerance must be positive, got {0}")]
    NonPositiveTolerance(f64),
    #[error("optimizer reached {achieved}, short of the analytic target {target} by more than {tolerance}")]
    OptimizerShortfall {
        achieved: f64,
        target: f64,
        tolerance: f64,
    },
    #[error("{name} range is empty ({lo} > {hi})")]
    EmptyRange {
        name: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("{name} range [{lo}, {hi}] is outside {allowed}")]
    RangeOutOfBounds {
        name: &'static str,
        lo: f64,
        hi: f64,
        allowed: &'static str,
    },
    #[error("grid step must be positive, got {0}")]
    NonPositiveStep(f64),
    #[error("no detected trials for setting pair {0}")]
    NoDetectedTrials(String),
    #[error("detection without fair sampling needs a hidden-variable source; a quantum source has no hidden variable to condition on")]
    UnfairQuantumDetection,
    #[error("invalid experiment spec: {}", .0.join("; "))]
    InvalidSpec(Vec<String>),
}

fn summarize(violations: &[ModelViolation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
