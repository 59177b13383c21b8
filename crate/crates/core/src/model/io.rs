use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ProblemSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: &str = "1";

#[derive(Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
struct ProblemFile<S> {
    format_version: String,
    #[serde(flatten)]
    spec: ProblemSpec<S>,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: Option<serde_json::Value>,
}

/// Parses and validates a problem document.
pub fn parse_problem<S: Scalar>(text: &str) -> Result<ProblemSpec<S>> {
    let probe: VersionProbe = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    match probe.format_version {
        Some(serde_json::Value::String(v)) if v == FORMAT_VERSION => {}
        Some(v) => return Err(Error::Parse(format!("unsupported format_version {v}, expected \"{FORMAT_VERSION}\""))),
        None => return Err(Error::Parse("missing format_version".into())),
    }
    let file: ProblemFile<S> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let diags = file.spec.validate();
    if !diags.is_empty() {
        return Err(Error::Validation(diags));
    }
    Ok(file.spec)
}

pub fn load_problem<S: Scalar>(path: impl AsRef<Path>) -> Result<ProblemSpec<S>> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

pub fn to_json<S: Scalar>(spec: &ProblemSpec<S>) -> Result<String> {
    let file = ProblemFile {
        format_version: FORMAT_VERSION.to_string(),
        spec: spec.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn save_problem<S: Scalar>(spec: &ProblemSpec<S>, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json(spec)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::minimal;
    use super::*;

    #[test]
    fn round_trip() {
        let spec = minimal();
        let text = to_json(&spec).unwrap();
        let back: ProblemSpec<f64> = parse_problem(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_wrong_version_and_garbage() {
        let text = to_json(&minimal()).unwrap().replace("\"format_version\":\"1\"", "\"format_version\":\"2\"");
        assert!(matches!(parse_problem::<f64>(&text), Err(Error::Parse(_))));
        assert!(matches!(parse_problem::<f64>("{"), Err(Error::Parse(_))));
        assert!(matches!(parse_problem::<f64>("{\"horizon\": 1}"), Err(Error::Parse(_))));
    }

    #[test]
    fn validation_errors_surface() {
        let mut spec = minimal();
        spec.noise = vec![vec![0.9]];
        let text = to_json(&spec).unwrap();
        match parse_problem::<f64>(&text) {
            Err(Error::Validation(d)) => assert_eq!(d[0].field, "Q_1"),
            other => panic!("{other:?}"),
        }
    }
}
