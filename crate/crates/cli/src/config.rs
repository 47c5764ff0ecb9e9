//! Config files, flag merging and the scalar types that accept `1e6`-style
//! counts.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

/// A nonnegative integer that also parses from `1e6` or `2.5e3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Count(pub u64);

impl FromStr for Count {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if let Ok(v) = s.parse::<u64>() {
            return Ok(Count(v));
        }
        let v: f64 = s.parse().map_err(|_| format!("not a count: {s}"))?;
        Count::from_f64(v)
    }
}

impl Count {
    fn from_f64(v: f64) -> Result<Self, String> {
        if v >= 0.0 && v.fract() == 0.0 && v <= 9_007_199_254_740_992.0 {
            Ok(Count(v as u64))
        } else {
            Err(format!("not a nonnegative integer count: {v}"))
        }
    }
}

impl Serialize for Count {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Count {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Count(v)),
            Raw::Float(v) => Count::from_f64(v).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `auto` or a fixed number of decomposition terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MMaxArg {
    Auto,
    Fixed(u64),
}

impl FromStr for MMaxArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            Ok(MMaxArg::Auto)
        } else {
            s.parse::<Count>().map(|c| MMaxArg::Fixed(c.0))
        }
    }
}

impl fmt::Display for MMaxArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MMaxArg::Auto => f.write_str("auto"),
            MMaxArg::Fixed(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for MMaxArg {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            MMaxArg::Auto => s.serialize_str("auto"),
            MMaxArg::Fixed(k) => s.serialize_u64(*k),
        }
    }
}

impl<'de> Deserialize<'de> for MMaxArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(Count),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(c) => Ok(MMaxArg::Fixed(c.0)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

impl From<MMaxArg> for semiexp::MMax {
    fn from(m: MMaxArg) -> Self {
        match m {
            MMaxArg::Auto => semiexp::MMax::Auto,
            MMaxArg::Fixed(k) => semiexp::MMax::Fixed(k),
        }
    }
}

/// Keys of a config file that are not command parameters.
pub const GLOBAL_KEYS: [&str; 5] = ["command", "seed", "format", "output", "threads"];

/// A config file split into global settings and command parameters.
#[derive(Debug, Default)]
pub struct FileConfig {
    pub globals: Map<String, Value>,
    pub params: Map<String, Value>,
}

/// Reads a JSON or TOML config file, chosen by extension (`.toml` is TOML,
/// anything else JSON).
pub fn load_file(path: &Path) -> CliResult<FileConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let value: Value = if path.extension().is_some_and(|e| e == "toml") {
        let t: toml::Table = toml::from_str(&text)
            .map_err(|e| CliError::domain(format!("invalid TOML in {}: {e}", path.display())))?;
        serde_json::to_value(t).map_err(|e| CliError::domain(e.to_string()))?
    } else {
        serde_json::from_str(&text)
            .map_err(|e| CliError::domain(format!("invalid JSON in {}: {e}", path.display())))?
    };
    let Value::Object(map) = value else {
        return Err(CliError::domain("config file must hold a single table/object"));
    };
    let mut out = FileConfig::default();
    for (k, v) in map {
        if v.is_null() {
            continue;
        }
        if GLOBAL_KEYS.contains(&k.as_str()) {
            out.globals.insert(k, v);
        } else {
            out.params.insert(k, v);
        }
    }
    Ok(out)
}

/// Non-null fields of `value` as a map.
pub fn present_fields<T: Serialize>(value: &T) -> Map<String, Value> {
    match serde_json::to_value(value) {
        Ok(Value::Object(map)) => map.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

/// File parameters overlaid by flag values.
pub fn overlay(file: &Map<String, Value>, flags: Map<String, Value>) -> Map<String, Value> {
    let mut out = file.clone();
    out.extend(flags);
    out
}

/// Rejects keys outside `allowed`, naming the context.
pub fn check_allowed(map: &Map<String, Value>, allowed: &[&str], context: &str) -> CliResult<()> {
    let bad: Vec<&str> = map
        .keys()
        .map(String::as_str)
        .filter(|k| !allowed.contains(k))
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(CliError::domain(format!("parameter(s) not used by {context}: {}", bad.join(", "))))
    }
}

pub fn decode<T: DeserializeOwned>(map: Map<String, Value>) -> CliResult<T> {
    serde_json::from_value(Value::Object(map)).map_err(|e| CliError::domain(format!("invalid configuration: {e}")))
}
