//! Experiment configs: JSON (canonical) or TOML, chosen by file extension.

use std::path::Path;

use ob_bell::experiment::ExperimentSpec;
use ob_bell::HiddenVariableModel;

use crate::CliError;

pub fn load_spec(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let spec = parse_spec(&text, is_toml(path))
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let issues = spec.validate();
    if issues.is_empty() {
        Ok(spec)
    } else {
        let list: Vec<String> = issues.iter().map(|i| format!("  {i}")).collect();
        Err(CliError::Usage(format!(
            "{}: invalid config\n{}",
            path.display(),
            list.join("\n")
        )))
    }
}

/// Reads a hidden-variable model file and rejects invalid models.
pub fn load_model(path: &Path) -> Result<HiddenVariableModel, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let model: HiddenVariableModel = parse_value(&text, is_toml(path))
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let issues = model.validate();
    if issues.is_empty() {
        Ok(model)
    } else {
        let list: Vec<String> = issues.iter().map(|i| format!("  {i}")).collect();
        Err(CliError::Usage(format!(
            "{}: invalid model\n{}",
            path.display(),
            list.join("\n")
        )))
    }
}

fn is_toml(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("toml"))
}

/// Parses a spec, reporting the key path of the first offending field.
pub fn parse_spec(text: &str, toml_syntax: bool) -> Result<ExperimentSpec, String> {
    parse_value(text, toml_syntax)
}

fn parse_value<T: serde::de::DeserializeOwned>(text: &str, toml_syntax: bool) -> Result<T, String> {
    let value: serde_json::Value = if toml_syntax {
        let table: toml::Table = toml::from_str(text).map_err(|e| e.to_string())?;
        serde_json::to_value(table).map_err(|e| e.to_string())?
    } else {
        serde_json::from_str(text).map_err(|e| e.to_string())?
    };
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            e.inner().to_string()
        } else {
            format!("{path}: {}", e.inner())
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ob_bell::experiment::Source;

    #[test]
    fn toml_and_json_agree() {
        let json = r#"{"source":{"type":"quantum_white_noise","gamma":0.98},"detection":0.9,"trials_per_pair":1000,"seed":5}"#;
        let toml = "trials_per_pair = 1000\nseed = 5\ndetection = 0.9\n[source]\ntype = \"quantum_white_noise\"\ngamma = 0.98\n";
        assert_eq!(
            parse_spec(json, false).unwrap(),
            parse_spec(toml, true).unwrap()
        );
    }

    #[test]
    fn errors_carry_key_paths() {
        let err = parse_spec(
            r#"{"source":{"type":"quantum"},"trials_per_pair":"many"}"#,
            false,
        )
        .unwrap_err();
        assert!(err.starts_with("trials_per_pair:"), "{err}");
        let err = parse_spec(
            r#"{"source":{"type":"quantum"},"trials_per_pair":1,"seeed":3}"#,
            false,
        )
        .unwrap_err();
        assert!(err.contains("seeed"), "{err}");
        let err = parse_spec(
            "[source]\ntype = \"quantum_white_noise\"\ngamma = \"high\"\ntrials_per_pair = 1",
            true,
        )
        .unwrap_err();
        assert!(err.contains("gamma") || err.contains("source"), "{err}");
    }

    #[test]
    fn lhv_source_parses() {
        let text = r#"{"source":{"type":"lhv","model":{"weights":[1.0],
            "strategy_at":[{"a_out":{"a":1,"b":1,"c":-1},"b_out":{"a":-1,"b":-1,"c":1}}],
            "anticorr_flag":[{"a":true,"b":true,"c":true}]}},"trials_per_pair":10}"#;
        let spec = parse_spec(text, false).unwrap();
        assert!(matches!(spec.source, Source::Lhv { .. }));
    }
}
