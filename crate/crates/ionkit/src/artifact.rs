//! The envelope shared by every artifact.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const TOOLKIT: &str = "ionkit";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{"toolkit": .., "command": .., "config": .., "result": ..}`.
pub fn envelope(command: &str, config: &impl Serialize, result: Value) -> Value {
    json!({
        "toolkit": { "name": TOOLKIT, "version": VERSION },
        "command": command,
        "config": config,
        "result": result,
    })
}

/// Comment lines placed ahead of the header of CSV artifacts.
pub fn csv_preamble(command: &str, config: &impl Serialize) -> String {
    let cfg = serde_json::to_string(config).expect("configs serialise");
    format!("# {TOOLKIT} {VERSION} {command}\n# config {cfg}\n")
}

/// Pull the config block back out of an artifact written by `command`.
/// Returns `None` when `doc` is not an artifact.
pub fn config_of(doc: &Value, command: &str) -> Option<Result<Value>> {
    let obj = doc.as_object()?;
    if !obj.contains_key("toolkit") || !obj.contains_key("config") {
        return None;
    }
    let found = obj.get("command").and_then(Value::as_str).unwrap_or("");
    if found != command {
        return Some(Err(Error::Usage(format!(
            "artifact was written by `{found}`, not `{command}`"
        ))));
    }
    Some(Ok(obj["config"].clone()))
}

pub fn write_json(path: &Path, doc: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(doc).expect("values serialise");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path.display(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path.display(), e))
}
