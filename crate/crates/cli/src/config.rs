//! Plain-text `key = value` config files.
//!
//! Each key names a long flag without its dashes. The file's entries are
//! spliced in right after the subcommand, so flags given on the command line
//! (which come later) override them.

use std::ffi::OsString;
use std::path::Path;

use crate::error::{CliError, Result};

/// Flags that take no value; `key = true` enables them.
const SWITCHES: &[&str] = &["paired"];

pub fn parse_config(text: &str) -> Result<Vec<OsString>> {
    let mut out = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::usage(format!("config line {}: expected key = value", k + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || key.starts_with('-') || key == "config" {
            return Err(CliError::usage(format!("config line {}: bad key `{key}`", k + 1)));
        }
        if SWITCHES.contains(&key) {
            match value {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => return Err(CliError::usage(format!("config line {}: `{key}` takes true or false", k + 1))),
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(value.into());
        }
    }
    Ok(out)
}

/// Position of the `--config` value in `argv`, if any.
fn find_config(argv: &[OsString]) -> Result<Option<(usize, usize, OsString)>> {
    for (i, a) in argv.iter().enumerate() {
        let s = a.to_string_lossy();
        if s == "--config" {
            let v = argv.get(i + 1).ok_or_else(|| CliError::usage("--config needs a path"))?;
            return Ok(Some((i, 2, v.clone())));
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Ok(Some((i, 1, v.into())));
        }
    }
    Ok(None)
}

/// Replace a `--config FILE` argument with the file's entries, placed right
/// after the subcommand (index 1).
pub fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some((at, width, path)) = find_config(&argv)? else {
        return Ok(argv);
    };
    if at < 2 {
        return Err(CliError::usage("--config goes after the subcommand"));
    }
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", Path::new(&path).display())))?;
    let entries = parse_config(&text)?;
    argv.drain(at..at + width);
    let tail = argv.split_off(2);
    argv.extend(entries);
    argv.extend(tail);
    Ok(argv)
}
