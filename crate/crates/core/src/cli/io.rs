use std::collections::BTreeMap;
use std::fs;
use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use super::CliError;
use crate::tensorio::{decode_tensor, encode_tensor, Tensor};

/// Provenance block attached to every JSON output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: &'static str,
    pub config: BTreeMap<String, Value>,
    /// Flag name to FNV-1a 64 digest of the file bytes.
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(subcommand: &'static str) -> Self {
        Self {
            subcommand,
            config: BTreeMap::new(),
            inputs: BTreeMap::new(),
            seed: None,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("config values serialize");
        self.config.insert(key.to_string(), value);
    }

    /// Reads a file and records its digest under `flag`.
    pub fn read(&mut self, flag: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.inputs.insert(flag.to_string(), fnv1a_hex(&bytes));
        Ok(bytes)
    }

    pub fn read_tensor(&mut self, flag: &str, path: &Path) -> Result<Tensor, CliError> {
        let bytes = self.read(flag, path)?;
        decode_tensor(&bytes).map_err(|e| CliError::Validation(format!("--{flag} {}: {e}", path.display())))
    }
}

pub fn fnv1a_hex(bytes: &[u8]) -> String {
    let mut h = FnvHasher::default();
    h.write(bytes);
    format!("{:016x}", h.finish())
}

/// JSON number, or "inf" / "-inf" for infinities.
pub fn serialize_scores<S: Serializer>(scores: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(scores.iter().map(|&v| ScoreValue(v)))
}

struct ScoreValue(f64);

impl Serialize for ScoreValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            v if v == f64::INFINITY => s.serialize_str("inf"),
            v if v == f64::NEG_INFINITY => s.serialize_str("-inf"),
            v => s.serialize_f64(v),
        }
    }
}

/// Reads a score vector from either a bare JSON array or any object with a
/// `scores` array (the output of the scoring subcommands).
pub fn parse_scores(text: &str) -> Result<Vec<f64>, CliError> {
    let value: Value =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("score JSON: {e}")))?;
    let array = match &value {
        Value::Array(a) => a,
        Value::Object(o) => match o.get("scores") {
            Some(Value::Array(a)) => a,
            _ => return Err(CliError::Validation("score JSON object has no \"scores\" array".into())),
        },
        _ => return Err(CliError::Validation("score JSON must be an array or object".into())),
    };
    array
        .iter()
        .enumerate()
        .map(|(i, v)| match v {
            Value::Number(n) => n.as_f64().ok_or(()),
            Value::String(s) if s == "inf" => Ok(f64::INFINITY),
            Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            _ => Err(()),
        }
        .map_err(|_| CliError::Validation(format!("score {i} is not a number: {v}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CheckpointEntry {
    pub features: PathBuf,
    pub probs: PathBuf,
}

/// Parses a checkpoint list: `[{"features": "...", "probs": "..."}, ...]`.
/// Relative paths resolve against `base`.
pub fn parse_checkpoint_manifest(text: &str, base: &Path) -> Result<Vec<CheckpointEntry>, CliError> {
    let entries: Vec<CheckpointEntry> =
        serde_json::from_str(text).map_err(|e| CliError::Validation(format!("checkpoint manifest: {e}")))?;
    if entries.is_empty() {
        return Err(CliError::Validation("checkpoint manifest lists no checkpoints".into()));
    }
    Ok(entries
        .into_iter()
        .map(|e| CheckpointEntry {
            features: base.join(e.features),
            probs: base.join(e.probs),
        })
        .collect())
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_tensor(path: &Path, tensor: &Tensor) -> Result<(), CliError> {
    fs::write(path, encode_tensor(tensor)).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a_hex(b""), "cbf29ce484222325");
        assert_eq!(fnv1a_hex(b"a"), "af63dc4c8601ec8c");
    }

    #[test]
    fn scores_round_trip_with_infinity() {
        #[derive(Serialize)]
        struct S {
            #[serde(serialize_with = "serialize_scores")]
            scores: Vec<f64>,
        }
        let text = serde_json::to_string(&S {
            scores: vec![0.5, f64::INFINITY, -2.0],
        })
        .unwrap();
        assert_eq!(text, r#"{"scores":[0.5,"inf",-2.0]}"#);
        assert_eq!(parse_scores(&text).unwrap(), vec![0.5, f64::INFINITY, -2.0]);
        assert!(parse_scores("[1, -inf]").is_err());
        assert_eq!(parse_scores(r#"[1, "-inf"]"#).unwrap(), vec![1.0, f64::NEG_INFINITY]);
        assert!(parse_scores(r#"{"x": []}"#).is_err());
        assert!(parse_scores("3").is_err());
    }

    #[test]
    fn checkpoint_paths_resolve_against_base() {
        let got = parse_checkpoint_manifest(r#"[{"features": "a.rgt", "probs": "/abs/b.rgt"}]"#, Path::new("/data")).unwrap();
        assert_eq!(got[0].features, PathBuf::from("/data/a.rgt"));
        assert_eq!(got[0].probs, PathBuf::from("/abs/b.rgt"));
        assert!(parse_checkpoint_manifest("[]", Path::new(".")).is_err());
        assert!(parse_checkpoint_manifest(r#"[{"features": "a"}]"#, Path::new(".")).is_err());
    }
}
