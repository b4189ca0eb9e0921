//! Bell's original three-setting inequality `|P(a,b) − P(a,c)| − P(b,c) ≤ 1`
//! for the singlet, its relaxations under imperfect anti-correlation and
//! finite detection efficiency, and the CHSH counterpart.
//!
//! - [`domain`]: settings, outcomes, correlation triples, hidden-variable models.
//! - [`quantum`]: singlet correlations, statistic maximization, outcome sampling.
//! - [`lhv`]: classical correlations, exhaustive exact-rational maxima.
//! - [`bounds`]: closed-form bounds and the feasible (γ, η) region.
//! - [`experiment`]: seeded Monte Carlo runs and sweeps.

pub mod bounds;
pub mod domain;
pub mod error;
pub mod experiment;
pub mod lhv;
pub mod quantum;

pub use domain::{
    make_setting, CorrelationTriple, DeterministicStrategy, HiddenVariableModel, Label, LabelMap,
    MeasurementSetting, NoiseParameters, Outcome, Pair, PairMap, SettingTriple, StatisticPattern,
    TrialRecord,
};
pub use error::{Error, Result};
