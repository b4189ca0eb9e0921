//! Singlet-state predictions: pair correlations, the three-setting
//! statistic and its quantum maximum, the CHSH statistic and its Tsirelson
//! maximum, and an exact outcome sampler.

pub mod search;

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    CorrelationTriple, MeasurementSetting, Outcome, SettingTriple, StatisticPattern,
};
use crate::error::{Error, Result};
pub use search::SearchConfig;

/// Quantum maximum of `|P(a,b) − P(a,c)| − P(b,c)` for the singlet.
pub const OB_QUANTUM_MAX: f64 = 1.5;
/// Tsirelson bound 2√2.
pub const CHSH_QUANTUM_MAX: f64 = 2.0 * SQRT_2;

/// The two-spin singlet (|+−⟩ − |−+⟩)/√2. Stateless: all of its
/// measurement statistics follow from [`singlet_correlation`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SingletState;

impl SingletState {
    pub fn correlation(&self, a: &MeasurementSetting, b: &MeasurementSetting) -> f64 {
        singlet_correlation(a, b)
    }
}

/// `E(a,b) = −a·b`, clamped against rounding to [−1, 1].
pub fn singlet_correlation(a: &MeasurementSetting, b: &MeasurementSetting) -> f64 {
    (-a.dot(b)).clamp(-1.0, 1.0)
}

/// `|P(a,b) − P(a,c)| − P(b,c)`.
pub fn ob_statistic(t: &CorrelationTriple) -> f64 {
    StatisticPattern::AbAcBc.evaluate(t)
}

pub fn singlet_triple(settings: &SettingTriple) -> CorrelationTriple {
    CorrelationTriple::new(
        singlet_correlation(&settings.a, &settings.b),
        singlet_correlation(&settings.a, &settings.c),
        singlet_correlation(&settings.b, &settings.c),
    )
    .expect("clamped correlations are in range")
}

/// The statistic evaluated on singlet correlations; equals
/// `|a·b − a·c| + b·c`.
pub fn delta_q(settings: &SettingTriple) -> f64 {
    ob_statistic(&singlet_triple(settings))
}

/// Angles `(φ₁, φ₂, θ)` of the three-setting family used by the optimizer.
///
/// The settings are `b = (cos φ₁, sin φ₁, 0)`, `c = (cos φ₁, −sin φ₁, 0)` and
/// `a = (sin φ₂ cos θ, sin φ₂ sin θ, cos φ₂)`. Then `b·c = 1 − 2 sin²φ₁` and
/// `a·b − a·c = 2 sin φ₁ sin φ₂ sin θ`, which gives
/// [`delta_q_parametrized`] exactly.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObAngles {
    pub phi1: f64,
    pub phi2: f64,
    pub theta: f64,
}

impl ObAngles {
    pub fn to_settings(&self) -> SettingTriple {
        let (s1, c1) = self.phi1.sin_cos();
        let (s2, c2) = self.phi2.sin_cos();
        let (st, ct) = self.theta.sin_cos();
        // Components are unit-norm up to rounding; renormalize via make_setting.
        let unit = |v| crate::domain::make_setting(v).expect("unit vector");
        SettingTriple {
            a: unit([s2 * ct, s2 * st, c2]),
            b: unit([c1, s1, 0.0]),
            c: unit([c1, -s1, 0.0]),
        }
    }
}

/// `2|sin φ₁ sin φ₂ sin θ| + 1 − 2 sin²φ₁`.
pub fn delta_q_parametrized(angles: &ObAngles) -> f64 {
    let s1 = angles.phi1.sin();
    2.0 * (s1 * angles.phi2.sin() * angles.theta.sin()).abs() + 1.0 - 2.0 * s1 * s1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObMaximum {
    pub settings: SettingTriple,
    pub angles: ObAngles,
    pub value: f64,
    pub grid_value: f64,
    pub evaluations: usize,
}

pub fn maximize_delta_q(tolerance: f64) -> Result<ObMaximum> {
    maximize_delta_q_with(tolerance, &SearchConfig::default())
}

/// Grid search plus simplex refinement over [`ObAngles`]; the returned
/// value is recomputed from the vectors with [`delta_q`]. Falls short of
/// 3/2 − `tolerance` only if something is broken, and then errors.
pub fn maximize_delta_q_with(tolerance: f64, config: &SearchConfig) -> Result<ObMaximum> {
    check_tolerance(tolerance)?;
    let objective = |x: &[f64]| {
        delta_q_parametrized(&ObAngles {
            phi1: x[0],
            phi2: x[1],
            theta: x[2],
        })
    };
    let found = search::maximize(objective, &[0.0; 3], &[PI; 3], config);
    let angles = ObAngles {
        phi1: found.point[0],
        phi2: found.point[1],
        theta: found.point[2],
    };
    let settings = angles.to_settings();
    let value = delta_q(&settings);
    if value < OB_QUANTUM_MAX - tolerance {
        return Err(Error::OptimizerShortfall {
            achieved: value,
            target: OB_QUANTUM_MAX,
            tolerance,
        });
    }
    Ok(ObMaximum {
        settings,
        angles,
        value,
        grid_value: found.grid_value,
        evaluations: found.evaluations,
    })
}

/// Alice's settings `a`, `a_prime` and Bob's `b`, `b_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChshSettings {
    pub a: MeasurementSetting,
    pub a_prime: MeasurementSetting,
    pub b: MeasurementSetting,
    pub b_prime: MeasurementSetting,
}

impl ChshSettings {
    /// Planar settings at the given angles (radians) from the x axis.
    pub fn planar(a: f64, a_prime: f64, b: f64, b_prime: f64) -> Self {
        ChshSettings {
            a: MeasurementSetting::planar(a),
            a_prime: MeasurementSetting::planar(a_prime),
            b: MeasurementSetting::planar(b),
            b_prime: MeasurementSetting::planar(b_prime),
        }
    }

    /// a = 0°, a′ = 90°, b = 135°, b′ = 45°.
    pub fn tsirelson() -> Self {
        ChshSettings::planar(0.0, PI / 2.0, 3.0 * PI / 4.0, PI / 4.0)
    }

    /// The four measured pairs in statistic order: (a,b), (a,b′), (a′,b), (a′,b′).
    pub fn pairs(&self) -> [(MeasurementSetting, MeasurementSetting); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// `S = |E(a,b) − E(a,b′)| + |E(a′,b) + E(a′,b′)|`.
pub fn chsh_statistic(e_ab: f64, e_ab2: f64, e_a2b: f64, e_a2b2: f64) -> f64 {
    (e_ab - e_ab2).abs() + (e_a2b + e_a2b2).abs()
}

pub fn chsh_singlet(settings: &ChshSettings) -> f64 {
    let [e1, e2, e3, e4] = settings.pairs().map(|(x, y)| singlet_correlation(&x, &y));
    chsh_statistic(e1, e2, e3, e4)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshMaximum {
    pub settings: ChshSettings,
    pub value: f64,
    pub grid_value: f64,
    pub evaluations: usize,
}

pub fn maximize_chsh(tolerance: f64) -> Result<ChshMaximum> {
    maximize_chsh_with(tolerance, &SearchConfig::default())
}

/// Same scheme as [`maximize_delta_q_with`] over planar settings with
/// `a` fixed at angle 0 (the statistic depends only on relative angles).
pub fn maximize_chsh_with(tolerance: f64, config: &SearchConfig) -> Result<ChshMaximum> {
    check_tolerance(tolerance)?;
    let objective = |x: &[f64]| chsh_singlet(&ChshSettings::planar(0.0, x[0], x[1], x[2]));
    let found = search::maximize(objective, &[0.0; 3], &[2.0 * PI; 3], config);
    let settings = ChshSettings::planar(0.0, found.point[0], found.point[1], found.point[2]);
    let value = chsh_singlet(&settings);
    if value < CHSH_QUANTUM_MAX - tolerance {
        return Err(Error::OptimizerShortfall {
            achieved: value,
            target: CHSH_QUANTUM_MAX,
            tolerance,
        });
    }
    Ok(ChshMaximum {
        settings,
        value,
        grid_value: found.grid_value,
        evaluations: found.evaluations,
    })
}

fn check_tolerance(tolerance: f64) -> Result<()> {
    if tolerance > 0.0 && tolerance.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveTolerance(tolerance))
    }
}

/// Draws one outcome pair from the two-outcome law with uniform marginals
/// and product expectation `rho`: `P(α,β) = (1 + αβ·rho)/4`.
///
/// Inverse CDF over the order (+,+), (+,−), (−,+), (−,−) using a single
/// uniform draw.
pub fn sample_correlated_outcomes<R: Rng + ?Sized>(rho: f64, rng: &mut R) -> (Outcome, Outcome) {
    let u: f64 = rng.random();
    let same = (1.0 + rho) / 4.0;
    if u < same {
        (Outcome::Plus, Outcome::Plus)
    } else if u < 0.5 {
        (Outcome::Plus, Outcome::Minus)
    } else if u < 1.0 - same {
        (Outcome::Minus, Outcome::Plus)
    } else {
        (Outcome::Minus, Outcome::Minus)
    }
}

/// Singlet outcomes for settings `a`, `b`: product expectation `−a·b`.
pub fn sample_singlet_outcomes<R: Rng + ?Sized>(
    a: &MeasurementSetting,
    b: &MeasurementSetting,
    rng: &mut R,
) -> (Outcome, Outcome) {
    sample_correlated_outcomes(singlet_correlation(a, b), rng)
}
