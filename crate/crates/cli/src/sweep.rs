use std::fmt::Write as _;
use std::path::PathBuf;

use ob_bell::bounds::{feasibility_csv, feasibility_grid, grid_values, FeasibilityRow};
use ob_bell::experiment::{format_float, sweep, sweep_csv, ExperimentSpec, SweepCell};
use serde_json::json;

use crate::config::load_spec;
use crate::{CliError, Report};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Template experiment config for --simulate; an ideal singlet at the
    /// coplanar optimum when omitted.
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_range, default_value = "0.7:1")]
    gamma_range: (f64, f64),
    #[arg(long, value_parser = parse_range, default_value = "0.8:1")]
    eta_range: (f64, f64),
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Also run the Monte Carlo experiment in every cell.
    #[arg(long)]
    simulate: bool,
    /// Trials per setting pair for --simulate (overrides the config).
    #[arg(long)]
    trials: Option<u64>,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((num(lo)?, num(hi)?))
}

/// Where feasibility switches on along γ at fixed η.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
struct Crossing {
    eta: f64,
    gamma_infeasible: f64,
    gamma_feasible: f64,
    /// Midpoint of the bracket, within half a step (in γ) of the boundary.
    gamma_mid: f64,
}

/// One crossing per η column that contains both an infeasible and a
/// feasible cell. Scanning along γ keeps brackets tight: adjacent cells
/// differ by `4·step` in `4γ + 9η − 12`, against `9·step` along η.
fn frontier(rows: &[FeasibilityRow]) -> Vec<Crossing> {
    let mut etas: Vec<f64> = rows.iter().map(|r| r.eta).collect();
    etas.sort_by(f64::total_cmp);
    etas.dedup();
    etas.into_iter()
        .filter_map(|eta| {
            let column: Vec<&FeasibilityRow> = rows.iter().filter(|r| r.eta == eta).collect();
            column
                .windows(2)
                .find(|w| !w[0].feasible && w[1].feasible)
                .map(|w| Crossing {
                    eta,
                    gamma_infeasible: w[0].gamma,
                    gamma_feasible: w[1].gamma,
                    gamma_mid: 0.5 * (w[0].gamma + w[1].gamma),
                })
        })
        .collect()
}

fn merged_csv(rows: &[FeasibilityRow], cells: &[SweepCell]) -> String {
    let mut out = String::from("gamma,eta,bound,feasible,statistic,se,violation_sigma\n");
    for (r, cell) in rows.iter().zip(cells) {
        write!(
            out,
            "{:.6},{:.6},{:.6},{}",
            r.gamma, r.eta, r.bound, r.feasible
        )
        .unwrap();
        match &cell.result {
            Some(x) => writeln!(
                out,
                ",{},{},{}",
                format_float(x.statistic),
                format_float(x.statistic_se),
                format_float(x.violation_sigma)
            ),
            None => writeln!(out, ",,,"),
        }
        .unwrap();
    }
    out
}

pub fn run(args: &Args, seed: Option<u64>) -> Result<Report, CliError> {
    let usage = |e: ob_bell::Error| CliError::Usage(e.to_string());
    let rows = feasibility_grid(args.gamma_range, args.eta_range, args.step).map_err(usage)?;
    let edge = frontier(&rows);
    let feasible = rows.iter().filter(|r| r.feasible).count();

    let mut json = json!({
        "step": args.step,
        "cells": rows.len(),
        "feasible_cells": feasible,
        "rows": rows,
        "frontier": edge,
    });
    let mut files = Vec::new();
    let csv = if args.simulate {
        let mut template = match &args.config {
            Some(path) => load_spec(path)?,
            None => ExperimentSpec::quantum(100_000, 0),
        };
        if let Some(seed) = seed {
            template.seed = seed;
        }
        if let Some(trials) = args.trials {
            if trials == 0 {
                return Err(CliError::Usage("trials must be at least 1".into()));
            }
            template.trials_per_pair = trials;
        }
        let gammas = grid_values("gamma", args.gamma_range.0, args.gamma_range.1, args.step)
            .map_err(usage)?;
        let etas =
            grid_values("eta", args.eta_range.0, args.eta_range.1, args.step).map_err(usage)?;
        let cells = sweep(&template, &gammas, &etas).map_err(usage)?;
        json["failed_cells"] = json!(cells.iter().filter(|c| c.error.is_some()).count());
        json["simulation"] = json!(cells);
        files.push(("sweep_summary.csv".into(), sweep_csv(&cells)));
        merged_csv(&rows, &cells)
    } else {
        feasibility_csv(&rows)
    };
    files.push(("sweep.csv".into(), csv.clone()));
    files.push((
        "sweep.json".into(),
        serde_json::to_string_pretty(&json).unwrap(),
    ));

    let mut report = Report::new(csv, json);
    report.files = files;
    Ok(report)
}
