use std::fmt::Write as _;

use ob_bell::bounds::{
    chsh_bounds, combined_bound, ob_bounds, violation_feasible, BoundReport, WHITE_NOISE_CROSSING,
};
use ob_bell::NoiseParameters;
use serde_json::json;

use crate::output::sig;
use crate::{CliError, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Anti-correlated fraction γ; evaluates the combined bound at (γ, η).
    #[arg(long, conflicts_with = "epsilon")]
    gamma: Option<f64>,
    /// Defect mass ε = 1 − γ.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Joint detection probability η.
    #[arg(long)]
    eta: Option<f64>,
}

pub const GAMMA_THRESHOLD: f64 = 0.75;
pub const ETA_THRESHOLD: f64 = 8.0 / 9.0;
pub const FEASIBILITY_LAW: &str = "4*gamma + 9*eta > 12";

fn report_json(r: &BoundReport) -> serde_json::Value {
    json!({
        "classical_bound": r.classical_bound,
        "quantum_bound": r.quantum_bound,
        "fraction": r.fraction,
    })
}

pub fn run(args: &Args) -> Result<Report, CliError> {
    let ob = ob_bounds();
    let chsh = chsh_bounds();
    let point = match (args.gamma, args.epsilon, args.eta) {
        (None, None, None) => None,
        (gamma, epsilon, eta) => {
            let eta = eta.unwrap_or(1.0);
            let params = match epsilon {
                Some(e) => NoiseParameters::new(e, eta),
                None => NoiseParameters::from_gamma(gamma.unwrap_or(1.0), eta),
            }
            .map_err(|e| CliError::Usage(e.to_string()))?;
            Some(params)
        }
    };

    let mut text = String::new();
    writeln!(
        text,
        "{:<10}{:>12}{:>14}{:>14}",
        "statistic", "classical", "quantum", "fraction"
    )
    .unwrap();
    for (name, r) in [("OB", &ob), ("CHSH", &chsh)] {
        writeln!(
            text,
            "{name:<10}{:>12}{:>14}{:>14}",
            sig(r.classical_bound),
            sig(r.quantum_bound),
            sig(r.fraction)
        )
        .unwrap();
    }
    writeln!(
        text,
        "OB fraction {} > CHSH fraction {}",
        sig(ob.fraction),
        sig(chsh.fraction)
    )
    .unwrap();
    writeln!(text).unwrap();
    writeln!(text, "violation possible only if").unwrap();
    writeln!(text, "  gamma > {} (at eta = 1)", sig(GAMMA_THRESHOLD)).unwrap();
    writeln!(text, "  eta > {} (at gamma = 1)", sig(ETA_THRESHOLD)).unwrap();
    writeln!(text, "  {FEASIBILITY_LAW}").unwrap();
    writeln!(
        text,
        "white-noise model only: 1.5*gamma exceeds 3 - 2*gamma for gamma > {}",
        sig(WHITE_NOISE_CROSSING)
    )
    .unwrap();

    let point_json = point.map(|p| {
        let bound = combined_bound(&p);
        let feasible = violation_feasible(&p);
        writeln!(text).unwrap();
        writeln!(
            text,
            "gamma {}, eta {}: bound {}, feasible {feasible}",
            sig(p.gamma()),
            sig(p.eta()),
            sig(bound)
        )
        .unwrap();
        json!({
            "gamma": p.gamma(),
            "epsilon": p.epsilon(),
            "eta": p.eta(),
            "bound": bound,
            "feasible": feasible,
        })
    });

    let json = json!({
        "ob": report_json(&ob),
        "chsh": report_json(&chsh),
        "ob_fraction_exceeds_chsh": ob.fraction > chsh.fraction,
        "thresholds": {
            "gamma": GAMMA_THRESHOLD,
            "eta": ETA_THRESHOLD,
            "feasibility_law": FEASIBILITY_LAW,
            "white_noise_gamma": WHITE_NOISE_CROSSING,
            "white_noise_note": "crossing of 1.5*gamma with 3 - 2*gamma; holds only when gamma is read as a white-noise visibility",
        },
        "point": point_json,
    });
    let mut report = Report::new(text, json);
    report.files.push((
        "bounds.json".into(),
        serde_json::to_string_pretty(&report.json).unwrap(),
    ));
    Ok(report)
}
