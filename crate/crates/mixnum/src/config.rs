//! Scenario files, `key=value` overrides and the seed environment variable.

use std::path::{Path, PathBuf};

use mixnum_core::metrics::EmissionMask;
use mixnum_core::scenario::ScenarioSpec;
use serde_json::Value;

use crate::error::{io_err, CliError, CliResult};

pub const SEED_ENV: &str = "MIXNUM_SEED";

/// A validated scenario plus the directory relative paths resolve against.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub spec: ScenarioSpec,
    pub base_dir: PathBuf,
}

impl LoadedScenario {
    pub fn mask_path(&self) -> Option<PathBuf> {
        self.spec.measurement.mask_file.as_ref().map(|m| self.base_dir.join(m))
    }

    pub fn load_mask(&self) -> CliResult<Option<EmissionMask>> {
        self.mask_path().map(|p| load_mask_csv(&p)).transpose()
    }
}

/// Reads a JSON scenario, applies `MIXNUM_SEED` (if set) and then every
/// `key=value` override, and validates the result.
pub fn load_scenario(path: &Path, overrides: &[String]) -> CliResult<LoadedScenario> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let mut value: Value = serde_json::from_str(&text).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    if let Ok(seed) = std::env::var(SEED_ENV) {
        let seed: u64 = seed
            .trim()
            .parse()
            .map_err(|e| CliError::Env(SEED_ENV, format!("{e}")))?;
        set_path(&mut value, "seed", Value::from(seed)).map_err(|e| CliError::Override("seed".into(), e))?;
    }
    for ov in overrides {
        apply_override(&mut value, ov)?;
    }
    let spec: ScenarioSpec = serde_json::from_value(value).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    spec.validate()?;
    Ok(LoadedScenario {
        spec,
        base_dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    })
}

/// `a.b.0.c=value`; the value is parsed as JSON, falling back to a string.
pub fn apply_override(root: &mut Value, assignment: &str) -> CliResult<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Override(assignment.into(), "expected key=value".into()))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Override(assignment.into(), "empty key".into()));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    set_path(root, key, value).map_err(|e| CliError::Override(assignment.into(), e))
}

fn set_path(root: &mut Value, key: &str, value: Value) -> Result<(), String> {
    let mut cur = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    map.insert((*part).to_string(), value);
                    return Ok(());
                }
                map.entry(*part).or_insert_with(|| Value::Object(Default::default()))
            }
            Value::Array(items) => {
                let idx: usize = part.parse().map_err(|_| format!("`{part}` is not an array index"))?;
                let len = items.len();
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| format!("index {idx} out of range for array of {len}"))?;
                if last {
                    *slot = value;
                    return Ok(());
                }
                slot
            }
            _ => return Err(format!("`{part}` indexes into a scalar")),
        };
    }
    Err("empty key".into())
}

/// Mask CSV with header `offset_hz,limit_db`; `inf` limits are allowed.
pub fn load_mask_csv(path: &Path) -> CliResult<EmissionMask> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let mut points = Vec::new();
    for rec in rdr.deserialize::<(f64, f64)>() {
        points.push(rec.map_err(csv_err)?);
    }
    Ok(EmissionMask::new(points)?)
}
