//! Artifact writers. Floats go out as `{:.16e}` so identical runs give identical bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use stripes_core::Profile;

use crate::error::CliError;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn profile_csv(profile: &Profile) -> String {
    let mut s = String::from("x,value\n");
    for (x, y) in profile.grid().nodes().iter().zip(profile.values()) {
        let _ = writeln!(s, "{},{}", format_float(*x), format_float(*y));
    }
    s
}

pub fn write_profile(dir: &Path, name: &str, profile: &Profile) -> Result<(), CliError> {
    write_text(dir, name, &profile_csv(profile))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(dir, name, &text)
}

pub fn write_text(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("out: cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// JSON has no infinities; a non-finite scalar is stored as absent.
pub fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}
