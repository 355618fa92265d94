//! `--config` files and the metadata line written into every output.
//!
//! A config file is a JSON object whose keys are long flag names of the
//! subcommand being run (`t-max` and `t_max` both work). A key only takes
//! effect when the flag was not given on the command line.

use std::path::Path;

use clap::parser::ValueSource;
use clap::ArgMatches;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::CliError;

/// Flags that name outputs or tune scheduling and so never change results.
const NOT_RECORDED: [&str; 6] = ["output", "summary", "strategies", "cumulative", "workers", "config"];

pub fn load(path: &Path) -> Result<Map<String, Value>, CliError> {
    let value: Value = popmw::io::read_json(path).map_err(CliError::input)?;
    match value {
        Value::Object(map) => Ok(map),
        _ => Err(CliError::Input(format!(
            "{}: config must be a JSON object",
            path.display()
        ))),
    }
}

/// Overlays config values onto `args` for every flag not set on the
/// command line.
pub fn merge<T: Serialize + DeserializeOwned>(
    args: T,
    matches: &ArgMatches,
    config: &Map<String, Value>,
) -> Result<T, CliError> {
    let mut fields = match serde_json::to_value(&args).map_err(|e| CliError::Input(e.to_string()))? {
        Value::Object(m) => m,
        _ => unreachable!("argument structs serialize to objects"),
    };
    for (key, value) in config {
        let id = key.replace('-', "_");
        if !fields.contains_key(&id) {
            return Err(CliError::Input(format!(
                "config: unknown key `{key}` for this subcommand"
            )));
        }
        if matches.value_source(&id) != Some(ValueSource::CommandLine) {
            fields.insert(id, value.clone());
        }
    }
    serde_json::from_value(Value::Object(fields)).map_err(|e| CliError::Input(format!("config: {e}")))
}

/// `popmw <version> <command> key=value ...` over the effective settings,
/// sorted by key.
pub fn metadata<T: Serialize>(command: &str, args: &T) -> String {
    let mut out = format!("popmw {} {command}", env!("CARGO_PKG_VERSION"));
    if let Ok(Value::Object(fields)) = serde_json::to_value(args) {
        for (key, value) in fields {
            if NOT_RECORDED.contains(&key.as_str()) || value.is_null() {
                continue;
            }
            let shown = match value {
                Value::String(s) => s,
                other => other.to_string(),
            };
            out.push_str(&format!(" {}={shown}", key.replace('_', "-")));
        }
    }
    out
}
