//! Flat `key = value` configuration files merged under command-line flags.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::path::Path;

use super::CliError;

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", lineno + 1))
        })?;
        let key = key.trim().trim_start_matches("--").to_string();
        if key.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", lineno + 1)));
        }
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::Usage(format!(
                "config line {}: duplicate key {key:?}",
                lineno + 1
            )));
        }
    }
    Ok(out)
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Long flags given explicitly on the command line.
fn flags_present(args: &[OsString]) -> BTreeSet<String> {
    args.iter()
        .filter_map(|a| a.to_str())
        .filter_map(|a| a.strip_prefix("--"))
        .map(|a| a.split('=').next().unwrap_or(a).to_string())
        .collect()
}

/// Removes `--config <path>` from `args` and splices the file's keys in
/// after the subcommand, skipping keys the command line already sets.
///
/// `known` maps each accepted long flag to whether it takes a value.
pub fn merge_config(
    mut args: Vec<OsString>,
    known: impl Fn(&str, &str) -> Option<bool>,
) -> Result<Vec<OsString>, CliError> {
    let mut config_path = None;
    let mut i = 1;
    while i < args.len() {
        let arg = args[i].to_string_lossy().into_owned();
        if arg == "--config" {
            if i + 1 >= args.len() {
                return Err(CliError::Usage("--config needs a path".into()));
            }
            config_path = Some(args.remove(i + 1));
            args.remove(i);
        } else if let Some(p) = arg.strip_prefix("--config=") {
            config_path = Some(OsString::from(p));
            args.remove(i);
        } else {
            i += 1;
        }
    }
    let Some(path) = config_path else {
        return Ok(args);
    };
    let entries = read_config(Path::new(&path))?;
    let Some(sub_pos) = args
        .iter()
        .skip(1)
        .position(|a| !a.to_string_lossy().starts_with('-'))
        .map(|p| p + 1)
    else {
        return Err(CliError::Usage("a subcommand is required".into()));
    };
    let sub = args[sub_pos].to_string_lossy().into_owned();
    let explicit = flags_present(&args[sub_pos + 1..]);
    let mut injected = Vec::new();
    for (key, value) in entries {
        let takes_value = known(&sub, &key).ok_or_else(|| {
            CliError::Usage(format!("unknown config key {key:?} for {sub}"))
        })?;
        if explicit.contains(&key) {
            continue;
        }
        if takes_value {
            injected.push(OsString::from(format!("--{key}={value}")));
        } else {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => {
                    return Err(CliError::Usage(format!(
                        "config key {key:?} expects true or false, got {other:?}"
                    )))
                }
            }
        }
    }
    args.splice(sub_pos + 1..sub_pos + 1, injected);
    Ok(args)
}
