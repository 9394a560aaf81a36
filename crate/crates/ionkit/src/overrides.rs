//! `key=value` overrides applied to a resolved configuration.
//!
//! Keys are dotted paths into the configuration's JSON form; array
//! elements are addressed by index (`beams.0.saturation`). Only keys that
//! already exist can be set, so typos are caught. Values are read as JSON
//! and fall back to a bare string.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub fn apply<T: Serialize + DeserializeOwned>(config: T, overrides: &[String]) -> Result<T> {
    if overrides.is_empty() {
        return Ok(config);
    }
    let mut doc = serde_json::to_value(&config).expect("configs serialise");
    for item in overrides {
        set(&mut doc, item)?;
    }
    serde_json::from_value(doc).map_err(|e| Error::Usage(format!("override rejected: {e}")))
}

pub fn set(doc: &mut Value, item: &str) -> Result<()> {
    let (key, raw) = item
        .split_once('=')
        .ok_or_else(|| Error::Usage(format!("override `{item}` is not key=value")))?;
    let key = key.trim();
    let unknown = || Error::Usage(format!("unknown configuration key `{key}`"));
    let mut slot = &mut *doc;
    for part in key.split('.') {
        slot = match slot {
            Value::Object(map) => map.get_mut(part).ok_or_else(unknown)?,
            Value::Array(items) => {
                let i: usize = part.parse().map_err(|_| unknown())?;
                items.get_mut(i).ok_or_else(unknown)?
            }
            _ => return Err(unknown()),
        };
    }
    *slot = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    Ok(())
}
