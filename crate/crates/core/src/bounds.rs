//! Closed-form classical and quantum bounds, the noise-dependent classical
//! bounds, and the (γ, η) region where a quantum violation is possible.

use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

use serde::Serialize;

use crate::domain::NoiseParameters;
use crate::error::{Error, Result};
use crate::quantum::OB_QUANTUM_MAX;

/// Points closer than this to the line `4γ + 9η = 12` count as on it.
pub const FEASIBILITY_MARGIN: f64 = 1e-12;

/// Classical bound, quantum bound and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub classical_bound: f64,
    pub quantum_bound: f64,
    pub fraction: f64,
}

impl BoundReport {
    fn new(classical_bound: f64, quantum_bound: f64) -> Self {
        BoundReport {
            classical_bound,
            quantum_bound,
            fraction: quantum_bound / classical_bound,
        }
    }
}

/// Three-setting statistic: classical 1, quantum 3/2, fraction 3/2.
pub fn ob_bounds() -> BoundReport {
    BoundReport::new(1.0, OB_QUANTUM_MAX)
}

/// CHSH: classical 2, quantum 2√2, fraction √2.
pub fn chsh_bounds() -> BoundReport {
    BoundReport::new(2.0, 2.0 * SQRT_2)
}

/// Classical bound `1 + 2ε` when a mass of at most ε per setting is not
/// anti-correlated (equivalently `3 − 2γ`).
pub fn anticorrelation_defect_bound(epsilon: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    Ok(1.0 + 2.0 * epsilon)
}

/// Classical bound `(4 − 3η)/η` on detection-conditioned correlations.
pub fn detection_bound(eta: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::EtaOutOfRange(eta));
    }
    Ok((4.0 - 3.0 * eta) / eta)
}

/// Both defects: `(4 + 2ε − 3η)/η`.
pub fn combined_bound(params: &NoiseParameters) -> f64 {
    (4.0 + 2.0 * params.epsilon() - 3.0 * params.eta()) / params.eta()
}

/// The same bound written with γ: `(6 − 2γ − 3η)/η`.
pub fn combined_bound_gamma_form(params: &NoiseParameters) -> f64 {
    (6.0 - 2.0 * params.gamma() - 3.0 * params.eta()) / params.eta()
}

/// `4γ + 9η > 12`, i.e. the combined bound is below the quantum maximum.
/// Strict: points on the line (within [`FEASIBILITY_MARGIN`]) are
/// infeasible.
pub fn violation_feasible(params: &NoiseParameters) -> bool {
    4.0 * params.gamma() + 9.0 * params.eta() - 12.0 > FEASIBILITY_MARGIN
}

/// Value of the statistic under white-noise mixing, where every
/// correlation is scaled by γ: `1.5 γ`. Specific to that noise model.
pub fn white_noise_quantum_value(gamma: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::GammaOutOfRange(gamma));
    }
    Ok(OB_QUANTUM_MAX * gamma)
}

/// γ above which the white-noise value `1.5 γ` beats `3 − 2γ`: 6/7.
pub const WHITE_NOISE_CROSSING: f64 = 6.0 / 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityRow {
    pub gamma: f64,
    pub eta: f64,
    pub bound: f64,
    pub feasible: bool,
}

/// Evenly spaced points from `lo` to `hi` inclusive, snapped to 12 decimal
/// places so that values such as 0.75 come out exact.
pub fn grid_values(name: &'static str, lo: f64, hi: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::NonPositiveStep(step));
    }
    if lo > hi || lo.is_nan() || hi.is_nan() {
        return Err(Error::EmptyRange { name, lo, hi });
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|i| ((lo + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

/// Row-major (γ outer, η inner) table of the combined bound and
/// feasibility. γ must lie in [0, 1] and η in (0, 1].
pub fn feasibility_grid(
    gamma_range: (f64, f64),
    eta_range: (f64, f64),
    step: f64,
) -> Result<Vec<FeasibilityRow>> {
    let gammas = grid_values("gamma", gamma_range.0, gamma_range.1, step)?;
    let etas = grid_values("eta", eta_range.0, eta_range.1, step)?;
    if gamma_range.0 < 0.0 || gamma_range.1 > 1.0 {
        return Err(Error::RangeOutOfBounds {
            name: "gamma",
            lo: gamma_range.0,
            hi: gamma_range.1,
            allowed: "[0, 1]",
        });
    }
    if eta_range.0 <= 0.0 || eta_range.1 > 1.0 {
        return Err(Error::RangeOutOfBounds {
            name: "eta",
            lo: eta_range.0,
            hi: eta_range.1,
            allowed: "(0, 1]",
        });
    }
    let mut rows = Vec::with_capacity(gammas.len() * etas.len());
    for &gamma in &gammas {
        for &eta in &etas {
            let params = NoiseParameters::from_gamma(gamma, eta)?;
            rows.push(FeasibilityRow {
                gamma,
                eta,
                bound: combined_bound_gamma_form(&params),
                feasible: violation_feasible(&params),
            });
        }
    }
    Ok(rows)
}

/// CSV with header `gamma,eta,bound,feasible`, six decimals.
pub fn feasibility_csv(rows: &[FeasibilityRow]) -> String {
    let mut out = String::from("gamma,eta,bound,feasible\n");
    for r in rows {
        writeln!(
            out,
            "{:.6},{:.6},{:.6},{}",
            r.gamma, r.eta, r.bound, r.feasible
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(gamma: f64, eta: f64) -> NoiseParameters {
        NoiseParameters::from_gamma(gamma, eta).unwrap()
    }

    #[test]
    fn fixed_reports() {
        let ob = ob_bounds();
        assert_eq!(
            (ob.classical_bound, ob.quantum_bound, ob.fraction),
            (1.0, 1.5, 1.5)
        );
        let chsh = chsh_bounds();
        assert_eq!(chsh.classical_bound, 2.0);
        assert_eq!(chsh.quantum_bound, 2.0 * SQRT_2);
        assert_eq!(chsh.fraction, SQRT_2);
        assert!(ob.fraction > chsh.fraction);
    }

    #[test]
    fn defect_bound_examples() {
        assert_eq!(anticorrelation_defect_bound(0.0).unwrap(), 1.0);
        assert_eq!(anticorrelation_defect_bound(0.25).unwrap(), 1.5);
        assert!((anticorrelation_defect_bound(1.0 - 0.98).unwrap() - 1.04).abs() < 1e-15);
        assert!(anticorrelation_defect_bound(1.5).is_err());
    }

    #[test]
    fn detection_bound_examples() {
        assert_eq!(detection_bound(1.0).unwrap(), 1.0);
        assert!((detection_bound(8.0 / 9.0).unwrap() - 1.5).abs() < 1e-15);
        assert!((detection_bound(0.9).unwrap() - 1.4444444444444444).abs() < 1e-15);
        assert_eq!(detection_bound(0.0), Err(Error::EtaOutOfRange(0.0)));
    }

    #[test]
    fn combined_bound_examples() {
        assert_eq!(combined_bound(&p(1.0, 1.0)), 1.0);
        let v = combined_bound_gamma_form(&p(0.98, 0.9));
        assert!((v - (6.0 - 1.96 - 2.7) / 0.9).abs() < 1e-14);
        assert!((v - 1.488888888888889).abs() < 1e-12);
        for gamma in [0.75, 0.8, 0.9, 1.0] {
            let eta = (12.0 - 4.0 * gamma) / 9.0;
            assert!((combined_bound_gamma_form(&p(gamma, eta)) - 1.5).abs() < 1e-12);
            assert!((combined_bound(&p(gamma, eta)) - 1.5).abs() < 1e-12);
        }
    }

    #[test]
    fn feasibility_examples() {
        assert!(violation_feasible(&p(1.0, 1.0)));
        assert!(violation_feasible(&p(0.98, 0.9)));
        assert!(!violation_feasible(&p(0.75, 1.0)));
    }

    #[test]
    fn white_noise_crossing() {
        assert_eq!(white_noise_quantum_value(1.0).unwrap(), 1.5);
        assert_eq!(white_noise_quantum_value(0.0).unwrap(), 0.0);
        let g = WHITE_NOISE_CROSSING;
        assert!(
            (white_noise_quantum_value(g).unwrap()
                - anticorrelation_defect_bound(1.0 - g).unwrap())
            .abs()
                < 1e-15
        );
        let above = g + 1e-6;
        assert!(
            white_noise_quantum_value(above).unwrap()
                > anticorrelation_defect_bound(1.0 - above).unwrap()
        );
        let below = g - 1e-6;
        assert!(
            white_noise_quantum_value(below).unwrap()
                < anticorrelation_defect_bound(1.0 - below).unwrap()
        );
    }

    #[test]
    fn grid_single_cell_and_errors() {
        let rows = feasibility_grid((1.0, 1.0), (1.0, 1.0), 0.1).unwrap();
        assert_eq!(
            rows,
            vec![FeasibilityRow {
                gamma: 1.0,
                eta: 1.0,
                bound: 1.0,
                feasible: true
            }]
        );
        assert!(matches!(
            feasibility_grid((0.9, 0.8), (1.0, 1.0), 0.1),
            Err(Error::EmptyRange { name: "gamma", .. })
        ));
        assert!(matches!(
            feasibility_grid((0.9, 0.9), (0.0, 1.0), 0.1),
            Err(Error::RangeOutOfBounds { .. })
        ));
        assert!(matches!(
            feasibility_grid((0.9, 0.9), (0.5, 1.0), 0.0),
            Err(Error::NonPositiveStep(_))
        ));
    }

    #[test]
    fn grid_row_gamma_one_crosses_at_eight_ninths() {
        let rows = feasibility_grid((1.0, 1.0), (0.85, 0.95), 0.001).unwrap();
        let at = |eta: f64| rows.iter().find(|r| (r.eta - eta).abs() < 1e-9).unwrap();
        assert!(!at(0.888).feasible);
        assert!(at(0.889).feasible);
        for r in &rows {
            if r.feasible {
                assert!(r.bound < 1.5);
            } else {
                assert!(r.bound >= 1.5 - 1e-12);
            }
        }
    }

    #[test]
    fn grid_row_eta_one_crosses_at_three_quarters() {
        let rows = feasibility_grid((0.0, 1.0), (1.0, 1.0), 0.01).unwrap();
        assert_eq!(rows.len(), 101);
        let first = rows.iter().position(|r| r.feasible).unwrap();
        assert!((rows[first].gamma - 0.76).abs() < 1e-12);
        assert_eq!(rows[first - 1].gamma, 0.75);
        assert_eq!(rows[first - 1].bound, 1.5);
    }

    #[test]
    fn csv_format() {
        let rows = feasibility_grid((0.98, 0.98), (0.9, 0.9), 0.01).unwrap();
        assert_eq!(
            feasibility_csv(&rows),
            "gamma,eta,bound,feasible\n0.980000,0.900000,1.488889,true\n"
        );
    }
}
