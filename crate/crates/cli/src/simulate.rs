use std::path::PathBuf;

use ob_bell::experiment::{run_experiment, ExperimentResult, StatisticKind, SUMMARY_HEADER};

use crate::config::load_spec;
use crate::output::sig;
use crate::{CliError, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Experiment config, JSON or (with a .toml extension) TOML.
    config: PathBuf,
    /// Override trials_per_pair from the config.
    #[arg(long)]
    trials: Option<u64>,
}

pub fn summary_line(r: &ExperimentResult) -> String {
    let kind = match r.kind {
        StatisticKind::Ob => format!("ob {}", r.pattern.name()),
        StatisticKind::Chsh => "chsh".into(),
    };
    format!(
        "{kind}: statistic {} se {}, bound {}, violation_sigma {}, source {}, gamma {}, eta {}, seed {}",
        sig(r.statistic),
        sig(r.statistic_se),
        sig(r.bound_used),
        sig(r.violation_sigma),
        r.noise_model,
        sig(r.gamma),
        sig(r.eta),
        r.seed
    )
}

pub fn run(args: &Args, seed: Option<u64>) -> Result<Report, CliError> {
    let mut spec = load_spec(&args.config)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    if let Some(trials) = args.trials {
        if trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        spec.trials_per_pair = trials;
    }
    let result = run_experiment(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let csv = format!("{SUMMARY_HEADER}\n{}\n", result.summary_row());
    let json = serde_json::to_value(&result).expect("result serializes");
    let mut report = Report::new(format!("{}\n", summary_line(&result)), json);
    report.files.push((
        "result.json".into(),
        serde_json::to_string_pretty(&result).unwrap(),
    ));
    report.files.push(("summary.csv".into(), csv));
    Ok(report)
}
