//! Run configuration.
//!
//! A run is resolved in layers, later layers winning:
//!
//! 1. the base: a mission preset, a TOML file, or the `config` block of an
//!    earlier `metrics.json`;
//! 2. the `--controller`, `--trials` and `--seed` flags;
//! 3. `--set key=value` overrides, applied in order.
//!
//! Keys under `controller.` apply to every selected controller; every other
//! key addresses the resolved document directly (`mission.v_set`, `trials`).
//!
//! ```toml
//! trials = 30
//! seed = 7
//! controllers = ["vanilla", "log", "dbas-log"]
//!
//! [mission]
//! preset = "mission2"
//! v_set = 6.0
//!
//! [controller]
//! lambda = 5.0
//!
//! [controller.barrier]
//! r_barrier = 2.0
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::{Table, Value};

use crate::controller::{ControllerConfig, Variant};
use crate::error::{Error, Result};
use crate::sim::{MissionSpec, PRESETS};

/// Everything a run needs, with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub trials: usize,
    pub seed: u64,
    pub mission: MissionSpec,
    pub controllers: Vec<ControllerConfig>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::config("trials must be >= 1"));
        }
        if self.controllers.is_empty() {
            return Err(Error::config("at least one controller is required"));
        }
        self.mission.validate()?;
        for (i, c) in self.controllers.iter().enumerate() {
            if self.controllers[..i].iter().any(|o| o.variant == c.variant) {
                return Err(Error::config(format!("controller `{}` selected twice", c.variant.name())));
            }
            c.validate(&self.mission.model)?;
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("run configuration serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::config(format!("cannot encode configuration: {e}")))
    }
}

/// What the command line asks for.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Selection {
    /// Preset name, TOML file or `metrics.json`.
    pub mission: String,
    pub controllers: Option<Vec<Variant>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    /// `key=value` strings.
    pub overrides: Vec<String>,
}

pub fn resolve(selection: &Selection) -> Result<RunConfig> {
    let base = load_base(&selection.mission)?;
    let mut doc = base.doc;

    let mission: MissionSpec = decode(Value::Table(table_at(&doc, "mission")?.clone()), "mission")?;
    if let Some(variants) = &selection.controllers {
        let existing = match doc.get("controllers") {
            Some(Value::Array(a)) => a.clone(),
            _ => Vec::new(),
        };
        let mut chosen = Vec::with_capacity(variants.len());
        for v in variants {
            let found = existing
                .iter()
                .find(|c| c.get("variant").and_then(Value::as_str) == Some(v.name()))
                .cloned();
            match found {
                Some(c) => chosen.push(c),
                None => chosen.push(controller_preset(*v, &mission, &base.controller_overrides)?),
            }
        }
        doc.insert("controllers".into(), Value::Array(chosen));
    }
    if let Some(t) = selection.trials {
        doc.insert("trials".into(), Value::Integer(to_i64(t as u64, "trials")?));
    }
    if let Some(s) = selection.seed {
        doc.insert("seed".into(), Value::Integer(to_i64(s, "seed")?));
    }
    for o in &selection.overrides {
        apply_override(&mut doc, o)?;
    }

    let config: RunConfig = decode(Value::Table(doc), "configuration")?;
    config.validate()?;
    Ok(config)
}

struct Base {
    doc: Table,
    /// `[controller]` table of a TOML file, reused for controllers added by
    /// `--controller`.
    controller_overrides: Table,
}

fn load_base(mission: &str) -> Result<Base> {
    if PRESETS.contains(&mission) {
        let spec = MissionSpec::preset(mission)?;
        return base_from_parts(Table::new(), spec, None, Table::new());
    }
    let path = Path::new(mission);
    if !path.is_file() {
        return Err(Error::config(format!(
            "`{mission}` is neither a mission preset ({}) nor an existing file",
            PRESETS.join(", ")
        )));
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e == "json") {
        return base_from_metrics(&text, path);
    }
    let mut file: Table = text
        .parse()
        .map_err(|e| Error::config(format!("{}: {e}", path.display())))?;

    let mut mission_table = match file.remove("mission") {
        Some(Value::Table(t)) => t,
        Some(_) => return Err(Error::config("`mission` must be a table")),
        None => Table::new(),
    };
    let mut mission_doc = match mission_table.remove("preset") {
        Some(Value::String(name)) => to_table(&MissionSpec::preset(&name)?)?,
        Some(_) => return Err(Error::config("`mission.preset` must be a string")),
        None => Table::new(),
    };
    merge(&mut mission_doc, &mission_table);
    let spec: MissionSpec = decode(Value::Table(mission_doc), "mission")?;

    let overrides = match file.remove("controller") {
        Some(Value::Table(t)) => t,
        Some(_) => return Err(Error::config("`controller` must be a table")),
        None => Table::new(),
    };
    let names = match file.remove("controllers") {
        Some(Value::Array(a)) => Some(
            a.iter()
                .map(|v| {
                    v.as_str()
                        .ok_or_else(|| Error::config("`controllers` must list controller names"))?
                        .parse::<Variant>()
                })
                .collect::<Result<Vec<_>>>()?,
        ),
        Some(_) => return Err(Error::config("`controllers` must be an array")),
        None => None,
    };
    base_from_parts(file, spec, names, overrides)
}

fn base_from_parts(
    mut doc: Table,
    mission: MissionSpec,
    variants: Option<Vec<Variant>>,
    controller_overrides: Table,
) -> Result<Base> {
    let controllers = variants
        .unwrap_or_else(|| Variant::ALL.to_vec())
        .into_iter()
        .map(|v| controller_preset(v, &mission, &controller_overrides))
        .collect::<Result<Vec<_>>>()?;
    doc.entry("trials").or_insert(Value::Integer(1));
    doc.entry("seed").or_insert(Value::Integer(0));
    doc.insert("mission".into(), Value::Table(to_table(&mission)?));
    doc.insert("controllers".into(), Value::Array(controllers));
    Ok(Base {
        doc,
        controller_overrides,
    })
}

fn base_from_metrics(text: &str, path: &Path) -> Result<Base> {
    let mut json: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    let config = json
        .get_mut("config")
        .map(serde_json::Value::take)
        .ok_or_else(|| Error::config(format!("{} has no `config` block", path.display())))?;
    let config: RunConfig =
        serde_json::from_value(config).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    Ok(Base {
        doc: to_table(&config)?,
        controller_overrides: Table::new(),
    })
}

fn controller_preset(variant: Variant, mission: &MissionSpec, overrides: &Table) -> Result<Value> {
    let mut t = to_table(&ControllerConfig::preset(variant, &mission.model))?;
    merge(&mut t, overrides);
    Ok(Value::Table(t))
}

fn apply_override(doc: &mut Table, text: &str) -> Result<()> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| Error::config(format!("override `{text}` is not of the form key=value")))?;
    let path: Vec<&str> = key.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("override `{text}` has an empty key segment")));
    }
    let value = parse_value(raw.trim());
    if path[0] == "controller" {
        if path.len() == 1 {
            return Err(Error::config("`controller` override needs a field name"));
        }
        let Some(Value::Array(list)) = doc.get_mut("controllers") else {
            return Err(Error::config("no controllers selected"));
        };
        for c in list.iter_mut() {
            let Value::Table(t) = c else {
                return Err(Error::config("controller entries must be tables"));
            };
            set_path(t, &path[1..], value.clone(), key)?;
        }
        Ok(())
    } else {
        set_path(doc, &path, value, key)
    }
}

/// Parses a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn set_path(table: &mut Table, path: &[&str], value: Value, key: &str) -> Result<()> {
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut t = table;
    for p in parents {
        let entry = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        t = match entry {
            Value::Table(inner) => inner,
            _ => return Err(Error::config(format!("`{key}`: `{p}` is not a table"))),
        };
    }
    t.insert(last.to_string(), value);
    Ok(())
}

fn merge(base: &mut Table, over: &Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn table_at<'a>(doc: &'a Table, key: &str) -> Result<&'a Table> {
    match doc.get(key) {
        Some(Value::Table(t)) => Ok(t),
        _ => Err(Error::config(format!("`{key}` must be a table"))),
    }
}

fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    match Value::try_from(value) {
        Ok(Value::Table(t)) => Ok(t),
        Ok(_) => Err(Error::config("expected a table")),
        Err(e) => Err(Error::config(format!("cannot encode configuration: {e}"))),
    }
}

fn decode<T: serde::de::DeserializeOwned>(value: Value, what: &str) -> Result<T> {
    value
        .try_into()
        .map_err(|e: toml::de::Error| Error::config(format!("invalid {what}: {}", e.message())))
}

fn to_i64(v: u64, what: &str) -> Result<i64> {
    i64::try_from(v).map_err(|_| Error::config(format!("{what} must be below 2^63")))
}
