//! Named field presentations used by the CLI, the self-test and the
//! acceptance suite. Every preset runs at `M = 12`.

use std::path::PathBuf;

use crate::field::{Field, FieldError, FieldSpecJson, LocalFieldSpec};

pub const DEFAULT_PRECISION: u32 = 12;

/// Built-in preset names in report order.
pub const NAMES: [&str; 4] = ["q2", "q3", "q2-ramified", "q4-unramified"];

/// Environment variable naming a directory of `<name>.json` field specs.
pub const PRESET_DIR_VAR: &str = "PITYPICAL_PRESET_DIR";

pub fn json(name: &str) -> Option<FieldSpecJson> {
    let (p, g, e_poly) = match name {
        // Q_2: E = x - 2
        "q2" => (2, vec![0, 1], vec![vec![-2], vec![1]]),
        // Q_3: E = x - 3
        "q3" => (3, vec![0, 1], vec![vec![-3], vec![1]]),
        // Q_2(√2): E = x^2 - 2
        "q2-ramified" => (2, vec![0, 1], vec![vec![-2], vec![0], vec![1]]),
        // Q_4 = W(F_4)[1/2]: g = y^2 + y + 1, E = x - 2
        "q4-unramified" => (2, vec![1, 1, 1], vec![vec![-2, 0], vec![1, 0]]),
        _ => return None,
    };
    Some(FieldSpecJson { p, g, e_poly, m: DEFAULT_PRECISION })
}

/// Resolves a preset: built-ins first, then `$PITYPICAL_PRESET_DIR/<name>.json`.
pub fn lookup(name: &str) -> Result<Field, PresetError> {
    if let Some(repr) = json(name) {
        return Ok(LocalFieldSpec::from_json(&repr)?);
    }
    let dir = std::env::var_os(PRESET_DIR_VAR).ok_or_else(|| PresetError::Unknown(name.to_string()))?;
    let path = PathBuf::from(dir).join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path).map_err(|_| PresetError::Unknown(name.to_string()))?;
    let repr: FieldSpecJson = serde_json::from_str(&text).map_err(|e| PresetError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    Ok(LocalFieldSpec::from_json(&repr)?)
}

#[derive(Debug, thiserror::Error)]
pub enum PresetError {
    #[error("unknown preset {0:?}")]
    Unknown(String),
    #[error("{path}:{line}:{column}: {message}")]
    Parse { path: String, line: usize, column: usize, message: String },
    #[error(transparent)]
    Field(#[from] FieldError),
}

fn builtin(name: &str) -> Field {
    LocalFieldSpec::from_json(&json(name).unwrap()).expect("built-in presets are valid")
}

pub fn q2() -> Field {
    builtin("q2")
}

pub fn q3() -> Field {
    builtin("q3")
}

/// `Q_2(√2)`, π² = 2.
pub fn q2_ramified() -> Field {
    builtin("q2-ramified")
}

/// Unramified quadratic extension of `Q_2`, residue field `F_4`.
pub fn q4_unramified() -> Field {
    builtin("q4-unramified")
}

pub fn all() -> Vec<(&'static str, Field)> {
    NAMES.iter().map(|&n| (n, builtin(n))).collect()
}
