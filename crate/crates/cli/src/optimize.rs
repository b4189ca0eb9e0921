use std::fmt::Write as _;

use ob_bell::quantum::{
    maximize_chsh_with, maximize_delta_q_with, ObAngles, SearchConfig, CHSH_QUANTUM_MAX,
    OB_QUANTUM_MAX,
};
use ob_bell::Error;
use serde_json::json;

use crate::output::{sig, vector};
use crate::{CliError, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Ob,
    Chsh,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    #[arg(value_enum)]
    target: Target,
    /// Allowed shortfall from the analytic maximum.
    #[arg(long, default_value_t = 1e-6)]
    tolerance: f64,
    /// Grid points per angle before the simplex refinement.
    #[arg(long, default_value_t = 64)]
    grid_points: usize,
    /// Simplex refinement budget.
    #[arg(long, default_value_t = SearchConfig::default().max_iterations)]
    max_iterations: usize,
}

struct Found {
    value: f64,
    evaluations: usize,
    axes: Vec<(&'static str, [f64; 3])>,
    angles: Option<ObAngles>,
}

pub fn run(args: &Args) -> Result<Report, CliError> {
    if !(args.tolerance > 0.0 && args.tolerance.is_finite()) {
        return Err(CliError::Usage(format!(
            "tolerance must be positive, got {}",
            args.tolerance
        )));
    }
    if args.grid_points < 2 {
        return Err(CliError::Usage("grid-points must be at least 2".into()));
    }
    let config = SearchConfig {
        grid_points: args.grid_points,
        max_iterations: args.max_iterations,
        ..SearchConfig::default()
    };
    let (name, analytic) = match args.target {
        Target::Ob => ("ob", OB_QUANTUM_MAX),
        Target::Chsh => ("chsh", CHSH_QUANTUM_MAX),
    };

    let found = match args.target {
        Target::Ob => maximize_delta_q_with(args.tolerance, &config).map(|m| {
            let s = m.settings;
            Found {
                value: m.value,
                evaluations: m.evaluations,
                axes: vec![("a", s.a.axis()), ("b", s.b.axis()), ("c", s.c.axis())],
                angles: Some(m.angles),
            }
        }),
        Target::Chsh => maximize_chsh_with(args.tolerance, &config).map(|m| {
            let s = m.settings;
            Found {
                value: m.value,
                evaluations: m.evaluations,
                axes: vec![
                    ("a", s.a.axis()),
                    ("a_prime", s.a_prime.axis()),
                    ("b", s.b.axis()),
                    ("b_prime", s.b_prime.axis()),
                ],
                angles: None,
            }
        }),
    };

    match found {
        Ok(Found {
            value,
            evaluations,
            axes,
            angles,
        }) => {
            let gap = (value - analytic).abs();
            let mut text = String::new();
            writeln!(
                text,
                "{name}: maximum {} (analytic {}, gap {}, tolerance {})",
                sig(value),
                sig(analytic),
                sig(gap),
                sig(args.tolerance)
            )
            .unwrap();
            for (label, axis) in &axes {
                writeln!(text, "  {label} = {}", vector(*axis)).unwrap();
            }
            writeln!(text, "  {evaluations} evaluations").unwrap();
            let settings: serde_json::Map<String, serde_json::Value> = axes
                .iter()
                .map(|(l, a)| (l.to_string(), json!(a)))
                .collect();
            let mut json = json!({
                "target": name,
                "value": value,
                "analytic": analytic,
                "gap": gap,
                "tolerance": args.tolerance,
                "within_tolerance": gap <= args.tolerance,
                "settings": settings,
                "evaluations": evaluations,
            });
            if let Some(angles) = angles {
                json["angles"] = json!(angles);
            }
            let mut report = Report::new(text, json);
            report.files.push((
                "optimize.json".into(),
                serde_json::to_string_pretty(&report.json).unwrap(),
            ));
            // A maximum above the analytic one would mean a broken objective.
            if gap > args.tolerance {
                report.failure = Some(format!(
                    "value {} differs from {} by more than the tolerance",
                    value, analytic
                ));
            }
            Ok(report)
        }
        Err(Error::OptimizerShortfall {
            achieved,
            target,
            tolerance,
        }) => {
            let text = format!(
                "{name}: shortfall, reached {} of {}\n",
                sig(achieved),
                sig(target)
            );
            let json = json!({
                "target": name,
                "value": achieved,
                "analytic": target,
                "tolerance": tolerance,
                "within_tolerance": false,
            });
            let mut report = Report::new(text, json);
            report.failure = Some(format!(
                "optimizer reached {achieved}, target {target} within {tolerance}"
            ));
            Ok(report)
        }
        Err(e) => Err(CliError::Usage(e.to_string())),
    }
}
