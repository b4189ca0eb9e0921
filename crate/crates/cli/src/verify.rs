use std::fmt::Write as _;
use std::path::PathBuf;

use ob_bell::bounds::combined_bound;
use ob_bell::lhv::random::{random_epsilon_model, random_perfect_model, with_random_detection};
use ob_bell::lhv::{
    classical_ob_maximum, combined_ob_maximum, conditional_triple, detection_ob_maximum,
    epsilon_ob_maximum, OracleOutcome, MAX_COMBINED_ATOMS, MAX_DETECTION_ATOMS, MAX_EPSILON_ATOMS,
};
use ob_bell::{HiddenVariableModel, Label, NoiseParameters, Pair, StatisticPattern};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::load_model;
use crate::output::sig;
use crate::{CliError, Report};

/// Inputs within this distance of a fraction m/d are treated as equal to it.
const SNAP_TOLERANCE: f64 = 1e-5;
/// Slack for floating-point bound checks on randomized models.
const RANDOM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum PatternArg {
    #[value(name = "ab-ac-bc")]
    AbAcBc,
    #[value(name = "ab-bc-ac")]
    AbBcAc,
}

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Enumerate the 8 perfectly anti-correlated strategies.
    #[arg(long)]
    perfect: bool,
    /// Enumerate all 64 strategies (control, no bound asserted).
    #[arg(long)]
    unconstrained: bool,
    /// Anti-correlation defect masses, each a fraction k/n with n ≤ 12.
    #[arg(long, value_delimiter = ',')]
    epsilon: Vec<f64>,
    /// Detection masses, each a fraction m/n with n ≤ 10.
    #[arg(long, value_delimiter = ',')]
    eta: Vec<f64>,
    /// Also check every (epsilon, eta) combination (n ≤ 8).
    #[arg(long)]
    combined: bool,
    /// Grid size; defaults to the largest multiple of the denominator the
    /// oracle allows.
    #[arg(long)]
    atoms: Option<usize>,
    /// Statistic ordering; both when omitted.
    #[arg(long, value_enum)]
    pattern: Option<PatternArg>,
    /// Random models per configuration checked in floating point.
    #[arg(long, default_value_t = 0)]
    random: usize,
    /// Model file (JSON, or TOML by extension) checked against the bound at
    /// its own defect and detection masses. Repeatable.
    #[arg(long)]
    model: Vec<PathBuf>,
}

/// Closest fraction `m/d` with `d ≤ max_den` within [`SNAP_TOLERANCE`].
fn snap(x: f64, max_den: usize) -> Option<(usize, usize)> {
    (1..=max_den).find_map(|d| {
        let m = (x * d as f64).round();
        ((x - m / d as f64).abs() <= SNAP_TOLERANCE && m >= 0.0).then_some((m as usize, d))
    })
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn frac(m: usize, d: usize) -> String {
    let g = gcd(m, d).max(1);
    if d / g == 1 {
        format!("{}", m / g)
    } else {
        format!("{}/{}", m / g, d / g)
    }
}

/// Grid size for denominators `dens`: a multiple of their lcm, at most
/// `requested` (or `max`).
fn grid_atoms(
    dens: &[usize],
    requested: Option<usize>,
    max: usize,
    what: &str,
) -> Result<usize, CliError> {
    let lcm = dens.iter().fold(1, |acc, &d| acc / gcd(acc, d) * d);
    let limit = requested.unwrap_or(max);
    if limit > max {
        return Err(CliError::Usage(format!(
            "{what} oracle supports at most {max} atoms, got {limit}"
        )));
    }
    match limit / lcm * lcm {
        0 => Err(CliError::Usage(format!(
            "{what}: no grid of at most {limit} atoms is a multiple of {lcm}"
        ))),
        n => Ok(n),
    }
}

fn snap_all(
    values: &[f64],
    max_den: usize,
    name: &str,
    lo_open: bool,
) -> Result<Vec<(usize, usize)>, CliError> {
    values
        .iter()
        .map(|&x| {
            let ok = x <= 1.0 && if lo_open { x > 0.0 } else { x >= 0.0 };
            match snap(x, max_den) {
                Some(f) if ok => Ok(f),
                _ => Err(CliError::Usage(format!(
                    "{name} {x} must lie in {} and be a fraction with denominator at most {max_den}",
                    if lo_open { "(0, 1]" } else { "[0, 1]" }
                ))),
            }
        })
        .collect()
}

struct Collector {
    text: String,
    cases: Vec<Value>,
    files: Vec<(String, String)>,
    failures: Vec<String>,
}

impl Collector {
    fn line(&mut self, label: &str, pattern: StatisticPattern, detail: &str, verdict: &str) {
        writeln!(
            self.text,
            "{label:<22}{:<10}{detail:<34}{verdict}",
            pattern.name()
        )
        .unwrap();
    }

    fn witness(
        &mut self,
        label: &str,
        pattern: StatisticPattern,
        model: &HiddenVariableModel,
    ) -> String {
        let name = format!("witness_{}.json", self.files.len() + 1);
        let text = serde_json::to_string_pretty(model).unwrap();
        eprintln!(
            "{label} ({}) exceeds its bound; witness:\n{text}",
            pattern.name()
        );
        self.files.push((name.clone(), text));
        self.failures
            .push(format!("{label} ({}) exceeds its bound", pattern.name()));
        name
    }

    fn oracle(&mut self, kind: &str, label: &str, o: &OracleOutcome, epsilon: String, eta: String) {
        let pass = o.within_bound();
        self.line(
            label,
            o.pattern,
            &format!("{} atoms  max {}  bound {}", o.atoms, o.value, o.bound),
            if pass { "pass" } else { "FAIL" },
        );
        let mut case = json!({
            "kind": kind,
            "pattern": o.pattern,
            "atoms": o.atoms,
            "epsilon": epsilon,
            "eta": eta,
            "max": o.value.to_string(),
            "max_value": ratio_f64(o),
            "bound": o.bound.to_string(),
            "bound_value": *o.bound.numer() as f64 / *o.bound.denom() as f64,
            "reachable_tallies": o.reachable,
            "pass": pass,
        });
        if !pass {
            case["witness"] = json!(self.witness(label, o.pattern, &o.witness));
        }
        self.cases.push(case);
    }
}

fn ratio_f64(o: &OracleOutcome) -> f64 {
    *o.value.numer() as f64 / *o.value.denom() as f64
}

pub fn run(args: &Args, seed: u64) -> Result<Report, CliError> {
    let patterns: Vec<StatisticPattern> = match args.pattern {
        None => StatisticPattern::ALL.to_vec(),
        Some(PatternArg::AbAcBc) => vec![StatisticPattern::AbAcBc],
        Some(PatternArg::AbBcAc) => vec![StatisticPattern::AbBcAc],
    };
    let models = args
        .model
        .iter()
        .map(|p| load_model(p).map(|m| (p, m)))
        .collect::<Result<Vec<_>, _>>()?;
    let any_case = args.perfect
        || args.unconstrained
        || !args.epsilon.is_empty()
        || !args.eta.is_empty()
        || !models.is_empty();
    let (perfect, unconstrained, epsilon, eta) = if any_case {
        (
            args.perfect,
            args.unconstrained,
            args.epsilon.clone(),
            args.eta.clone(),
        )
    } else {
        (true, true, vec![0.25, 0.5], vec![8.0 / 9.0, 0.8])
    };
    if args.combined && (epsilon.is_empty() || eta.is_empty()) {
        return Err(CliError::Usage(
            "--combined needs both --epsilon and --eta".into(),
        ));
    }
    let eps_fracs = snap_all(&epsilon, MAX_EPSILON_ATOMS, "epsilon", false)?;
    let eta_fracs = snap_all(&eta, MAX_DETECTION_ATOMS, "eta", true)?;

    let mut c = Collector {
        text: String::new(),
        cases: Vec::new(),
        files: Vec::new(),
        failures: Vec::new(),
    };

    for &pattern in &patterns {
        if perfect {
            let m = classical_ob_maximum(true, pattern);
            let pass = m.value <= 1.into();
            c.line(
                "perfect",
                pattern,
                &format!("{} strategies  max {}  bound 1", m.strategies, m.value),
                if pass { "pass" } else { "FAIL" },
            );
            if !pass {
                let model = HiddenVariableModel::from_strategies(&[(1.0, m.witness)]);
                c.witness("perfect", pattern, &model);
            }
            c.cases.push(json!({
                "kind": "perfect", "pattern": pattern, "strategies": m.strategies,
                "max": m.value.to_string(), "bound": "1", "pass": pass,
            }));
        }
        if unconstrained {
            let m = classical_ob_maximum(false, pattern);
            c.line(
                "unconstrained",
                pattern,
                &format!("{} strategies  max {}", m.strategies, m.value),
                "control",
            );
            c.cases.push(json!({
                "kind": "unconstrained", "pattern": pattern, "strategies": m.strategies,
                "max": m.value.to_string(), "witness_strategy": m.witness,
            }));
        }
        for &(k, d) in &eps_fracs {
            let atoms = grid_atoms(&[d], args.atoms, MAX_EPSILON_ATOMS, "epsilon")?;
            let o = epsilon_ob_maximum((k * atoms / d) as f64 / atoms as f64, atoms, pattern)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            c.oracle(
                "epsilon",
                &format!("epsilon {}", frac(k, d)),
                &o,
                frac(k, d),
                "1".into(),
            );
        }
        for &(m, d) in &eta_fracs {
            let atoms = grid_atoms(&[d], args.atoms, MAX_DETECTION_ATOMS, "eta")?;
            let o = detection_ob_maximum((m * atoms / d) as f64 / atoms as f64, atoms, pattern)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            c.oracle(
                "detection",
                &format!("eta {}", frac(m, d)),
                &o,
                "0".into(),
                frac(m, d),
            );
        }
        if args.combined {
            for &(k, dk) in &eps_fracs {
                for &(m, dm) in &eta_fracs {
                    let atoms = grid_atoms(&[dk, dm], args.atoms, MAX_COMBINED_ATOMS, "combined")?;
                    let eps = (k * atoms / dk) as f64 / atoms as f64;
                    let eta = (m * atoms / dm) as f64 / atoms as f64;
                    let o = combined_ob_maximum(eps, eta, atoms, pattern)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    let label = format!("eps {} eta {}", frac(k, dk), frac(m, dm));
                    c.oracle("combined", &label, &o, frac(k, dk), frac(m, dm));
                }
            }
        }
    }

    if args.random > 0 {
        let eps_values: Vec<f64> = if epsilon.is_empty() {
            vec![0.0]
        } else {
            epsilon.clone()
        };
        let eta_values: Vec<f64> = if eta.is_empty() {
            vec![1.0]
        } else {
            eta.clone()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for &eps in &eps_values {
            for &eta in &eta_values {
                let bound = combined_bound(
                    &NoiseParameters::new(eps, eta).map_err(|e| CliError::Usage(e.to_string()))?,
                );
                let mut worst = f64::NEG_INFINITY;
                let mut failed = false;
                for i in 0..args.random {
                    let atoms = 1 + i % 16;
                    let base = if eps == 0.0 {
                        random_perfect_model(&mut rng, atoms)
                    } else {
                        random_epsilon_model(&mut rng, atoms, eps, i % 2 == 0)
                    };
                    let model = if eta < 1.0 {
                        with_random_detection(&mut rng, &base, eta, i % 3 == 0)
                    } else {
                        base
                    };
                    let t =
                        conditional_triple(&model).map_err(|e| CliError::Usage(e.to_string()))?;
                    for &pattern in &patterns {
                        let v = pattern.evaluate(&t);
                        worst = worst.max(v);
                        if v > bound + RANDOM_TOLERANCE && !failed {
                            failed = true;
                            c.witness(&format!("random eps {eps} eta {eta}"), pattern, &model);
                        }
                    }
                }
                let label = format!("random eps {} eta {}", sig(eps), sig(eta));
                writeln!(
                    c.text,
                    "{label:<32}{:<34}{}",
                    format!(
                        "{} models  max {}  bound {}",
                        args.random,
                        sig(worst),
                        sig(bound)
                    ),
                    if failed { "FAIL" } else { "pass" }
                )
                .unwrap();
                c.cases.push(json!({
                    "kind": "random", "epsilon": eps, "eta": eta, "models": args.random,
                    "max_value": worst, "bound_value": bound, "pass": !failed,
                }));
            }
        }
    }

    for (path, model) in &models {
        check_model(&mut c, &path.display().to_string(), model, &patterns)?;
    }

    let pass = c.failures.is_empty();
    let json = json!({ "cases": c.cases, "pass": pass });
    let mut report = Report::new(c.text, json);
    report.files = c.files;
    report.files.push((
        "verify.json".into(),
        serde_json::to_string_pretty(&report.json).unwrap(),
    ));
    if !pass {
        report.failure = Some(c.failures.join("; "));
    }
    Ok(report)
}

/// Largest per-label defect and smallest per-pair detection mass.
fn model_noise(model: &HiddenVariableModel) -> (f64, f64) {
    let epsilon = Label::ALL
        .iter()
        .map(|&l| model.defect_mass(l))
        .fold(0.0, f64::max);
    let eta = [Pair::AB, Pair::AC, Pair::BC]
        .iter()
        .map(|&p| model.detection_mass(p))
        .fold(1.0, f64::min);
    (epsilon.min(1.0), eta)
}

fn check_model(
    c: &mut Collector,
    name: &str,
    model: &HiddenVariableModel,
    patterns: &[StatisticPattern],
) -> Result<(), CliError> {
    let (epsilon, eta) = model_noise(model);
    let params =
        NoiseParameters::new(epsilon, eta).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
    let bound = combined_bound(&params);
    let t = conditional_triple(model).map_err(|e| CliError::Usage(format!("{name}: {e}")))?;
    for &pattern in patterns {
        let value = pattern.evaluate(&t);
        let pass = value <= bound + RANDOM_TOLERANCE;
        let label = format!("model {name}");
        writeln!(
            c.text,
            "{label:<32}{:<10}{:<34}{}",
            pattern.name(),
            format!(
                "eps {} eta {}  value {}  bound {}",
                sig(epsilon),
                sig(eta),
                sig(value),
                sig(bound)
            ),
            if pass { "pass" } else { "FAIL" }
        )
        .unwrap();
        if !pass {
            c.failures
                .push(format!("{label} ({}) exceeds its bound", pattern.name()));
        }
        c.cases.push(json!({
            "kind": "model", "file": name, "pattern": pattern, "atoms": model.atoms(),
            "epsilon": epsilon, "eta": eta, "value": value, "bound_value": bound, "pass": pass,
        }));
    }
    Ok(())
}
