//! Instance files: strict JSON schemas for the five instance kinds, plus
//! the catalog override hook.

use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use towerlab_core::abgroup::SymbolicAbGroup;
use towerlab_core::eqsolve::EquationSystem;
use towerlab_core::group::GroupObject;
use towerlab_core::tower::Tower;

use crate::RunError;

#[derive(Debug)]
pub struct LoadedInstance {
    pub digest: String,
    pub instance: Instance,
}

#[derive(Debug)]
pub enum Instance {
    Group(GroupInstance),
    Tower(TowerInstance),
    System(SystemInstance),
    Product(ProductInstance),
    WitnessRequest(WitnessRequestInstance),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Group(_) => "group",
            Instance::Tower(_) => "tower",
            Instance::System(_) => "system",
            Instance::Product(_) => "product",
            Instance::WitnessRequest(_) => "witness-request",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupInstance {
    #[allow(dead_code)]
    kind: String,
    #[serde(default)]
    pub group: Option<GroupObject>,
    /// symbolic direct sum of classified atoms, for the divisibility theory
    #[serde(default)]
    pub symbolic: Option<SymbolicAbGroup>,
    /// element index, for commutator-length queries on finite groups
    #[serde(default)]
    pub element: Option<usize>,
    /// divisibility witness-tree request
    #[serde(default)]
    pub witness: Option<WitnessSpec>,
    /// division-chain check request
    #[serde(default)]
    pub thread: Option<ThreadSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessSpec {
    pub element: Vec<i64>,
    pub p: u64,
    pub k: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThreadSpec {
    pub p: u64,
    pub values: Vec<Vec<i64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TowerInstance {
    #[allow(dead_code)]
    kind: String,
    pub tower: Tower,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemInstance {
    #[allow(dead_code)]
    kind: String,
    pub system: EquationSystem,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductInstance {
    #[allow(dead_code)]
    kind: String,
    pub components: Vec<GroupObject>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRequestInstance {
    #[allow(dead_code)]
    kind: String,
    /// word whose commutator length is queried
    #[serde(default)]
    pub word: Option<String>,
    #[serde(default)]
    pub rank: Option<usize>,
    /// base word for the witness family (odd powers)
    #[serde(default)]
    pub base: Option<String>,
    #[serde(default)]
    pub levels: Option<usize>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Replace catalog references with tables from the override file, leaving
/// unmatched names for the builtin catalog.
fn apply_catalog_override(value: &mut Value, overrides: &[Value]) {
    match value {
        Value::Object(map) => {
            let is_catalog = map.get("kind").and_then(Value::as_str) == Some("catalog");
            if is_catalog {
                if let Some(name) = map.get("name").and_then(Value::as_str) {
                    if let Some(repl) = overrides.iter().find(|o| {
                        o.get("name").and_then(Value::as_str) == Some(name)
                    }) {
                        let mut table = repl.clone();
                        if let Value::Object(m) = &mut table {
                            m.insert("kind".into(), Value::String("finite".into()));
                        }
                        *value = table;
                        return;
                    }
                }
            }
            for v in map.values_mut() {
                apply_catalog_override(v, overrides);
            }
        }
        Value::Array(items) => {
            for v in items {
                apply_catalog_override(v, overrides);
            }
        }
        _ => {}
    }
}

fn load_catalog_overrides() -> Result<Vec<Value>, RunError> {
    let Ok(path) = std::env::var("TOWERLAB_CATALOG") else {
        return Ok(vec![]);
    };
    let bytes = std::fs::read(&path)
        .map_err(|e| RunError::Schema(format!("catalog override {path}: {e}")))?;
    let value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| RunError::Schema(format!("catalog override {path}: {e}")))?;
    match value {
        Value::Array(items) => Ok(items),
        _ => Err(RunError::Schema("catalog override must be a JSON array".into())),
    }
}

pub fn load(path: &Path) -> Result<LoadedInstance, RunError> {
    let bytes = std::fs::read(path)
        .map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?;
    let digest = sha256_hex(&bytes);
    let mut value: Value = serde_json::from_slice(&bytes)
        .map_err(|e| RunError::Schema(format!("{}: {e}", path.display())))?;
    let overrides = load_catalog_overrides()?;
    if !overrides.is_empty() {
        apply_catalog_override(&mut value, &overrides);
    }
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| RunError::Schema(format!("{}: missing \"kind\"", path.display())))?
        .to_string();
    let schema = |e: serde_json::Error| RunError::Schema(format!("{}: {e}", path.display()));
    let instance = match kind.as_str() {
        "group" => {
            let parsed: GroupInstance = serde_json::from_value(value).map_err(schema)?;
            if parsed.group.is_none() == parsed.symbolic.is_none() {
                return Err(RunError::Schema(format!(
                    "{}: group instances carry exactly one of \"group\" or \"symbolic\"",
                    path.display()
                )));
            }
            Instance::Group(parsed)
        }
        "tower" => Instance::Tower(serde_json::from_value(value).map_err(schema)?),
        "system" => Instance::System(serde_json::from_value(value).map_err(schema)?),
        "product" => Instance::Product(serde_json::from_value(value).map_err(schema)?),
        "witness-request" => {
            Instance::WitnessRequest(serde_json::from_value(value).map_err(schema)?)
        }
        other => {
            return Err(RunError::Unsupported(format!(
                "{}: unknown instance kind {other:?}",
                path.display()
            )))
        }
    };
    Ok(LoadedInstance { digest, instance })
}
