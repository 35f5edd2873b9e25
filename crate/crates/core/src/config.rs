//! Experiment configuration files: strict JSON, dotted-path overrides and
//! the `TEMPSEC_SEED` environment override.

use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;

/// Environment variable that replaces the configured master seed.
pub const SEED_ENV: &str = "TEMPSEC_SEED";

/// A parsed configuration and the directory relative paths resolve against.
#[derive(Clone, Debug)]
pub struct LoadedConfig {
    pub config: ExperimentConfig,
    pub base_dir: PathBuf,
}

/// Splits `key=value`; the value is read as JSON when it parses, else as a
/// string.
pub fn parse_override(s: &str) -> Result<(Vec<String>, Value)> {
    let (key, raw) = s
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {s:?} is not key=value")))?;
    let path: Vec<String> = key.split('.').map(str::to_string).collect();
    if path.iter().any(String::is_empty) {
        return Err(Error::Config(format!("override key {key:?} has an empty segment")));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((path, value))
}

/// Sets `root[path] = value`, creating intermediate objects.
pub fn apply_override(root: &mut Value, path: &[String], value: Value) -> Result<()> {
    let mut node = root;
    for (depth, key) in path.iter().enumerate() {
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
        let obj = node.as_object_mut().ok_or_else(|| {
            Error::Config(format!(
                "override path {} crosses a non-object",
                path[..depth].join(".")
            ))
        })?;
        if depth + 1 == path.len() {
            obj.insert(key.clone(), value);
            return Ok(());
        }
        node = obj.entry(key.clone()).or_insert(Value::Null);
    }
    Err(Error::Config("empty override path".into()))
}

fn anchored(origin: &str, e: serde_json::Error) -> Error {
    Error::Config(format!("{origin}:{}:{}: {e}", e.line(), e.column()))
}

/// Parses `text` (named `origin` in messages), applies the seed from the
/// environment value `env_seed`, then `overrides` in order.
pub fn parse_config(
    text: &str,
    origin: &str,
    overrides: &[String],
    env_seed: Option<&str>,
) -> Result<ExperimentConfig> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| anchored(origin, e))?;
    if overrides.is_empty() && env_seed.is_none() {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| anchored(origin, e))?;
        return Ok(config);
    }
    // Schema errors present in the file itself still get file positions.
    if let Err(e) = serde_json::from_str::<ExperimentConfig>(text) {
        if !e.to_string().starts_with("missing field") {
            return Err(anchored(origin, e));
        }
    }
    if let Some(s) = env_seed {
        let seed: u64 = s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
        apply_override(&mut value, &["seed".to_string()], Value::from(seed))?;
    }
    for o in overrides {
        let (path, v) = parse_override(o)?;
        apply_override(&mut value, &path, v)?;
    }
    serde_json::from_value(value).map_err(|e| Error::Config(format!("{origin} (after overrides): {e}")))
}

/// Reads a config file, honouring `TEMPSEC_SEED` and `overrides`.
pub fn load_config(path: &Path, overrides: &[String]) -> Result<LoadedConfig> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let env = std::env::var(SEED_ENV).ok();
    let config = parse_config(&text, &path.display().to_string(), overrides, env.as_deref())?;
    config.validate()?;
    Ok(LoadedConfig {
        config,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::OracleChoice;

    const MINIMAL: &str = r#"{
  "instance": {"generator": {"n": 10, "gamma": 0.1, "capacity": 1,
                             "values": {"kind": "uniform-values"}}},
  "algorithm": {"variant": "cardinality"},
  "trials": 3,
  "seed": 5,
  "oracle": "opt-star"
}"#;

    #[test]
    fn minimal_config_parses() {
        let c = parse_config(MINIMAL, "c.json", &[], None).unwrap();
        assert_eq!(c.trials, 3);
        assert_eq!(c.algorithm.alpha, 0.5);
        assert_eq!(c.oracle, OracleChoice::OptStar);
    }

    #[test]
    fn unknown_key_is_rejected_with_position() {
        let text = MINIMAL.replace("\"trials\": 3,", "\"trials\": 3,\n  \"trails\": 4,");
        let err = parse_config(&text, "c.json", &[], None).unwrap_err().to_string();
        assert!(err.contains("c.json:6:"), "{err}");
        assert!(err.contains("trails"), "{err}");
    }

    #[test]
    fn syntax_error_is_line_anchored() {
        let err = parse_config("{\n  \"trials\": ,\n}", "x.json", &[], None)
            .unwrap_err()
            .to_string();
        assert!(err.contains("x.json:2:"), "{err}");
    }

    #[test]
    fn overrides_and_env_seed() {
        let o = vec!["trials=1".to_string(), "instance.generator.n=4".to_string()];
        let c = parse_config(MINIMAL, "c", &o, Some("77")).unwrap();
        assert_eq!(c.trials, 1);
        assert_eq!(c.seed, 77);
        assert_eq!(c.instance.generator.unwrap().n, 4);

        let c = parse_config(MINIMAL, "c", &["seed=9".to_string()], Some("77")).unwrap();
        assert_eq!(c.seed, 9);
        assert!(parse_config(MINIMAL, "c", &[], Some("x")).is_err());
        assert!(parse_config(MINIMAL, "c", &["nokey".to_string()], None).is_err());
        assert!(parse_config(MINIMAL, "c", &["trials.x=1".to_string()], None).is_err());
    }

    #[test]
    fn override_values_fall_back_to_strings() {
        let (path, v) = parse_override("algorithm.variant=lengths").unwrap();
        assert_eq!(path, vec!["algorithm", "variant"]);
        assert_eq!(v, Value::String("lengths".into()));
        let (_, v) = parse_override("x=0.25").unwrap();
        assert_eq!(v, Value::from(0.25));
    }
}
