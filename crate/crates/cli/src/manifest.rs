//! Run manifests: one flat JSON object per `segment` run.
//!
//! Keys are sorted, so equal runs produce equal files apart from the
//! measured `wall_ms`.

use std::fmt::Write as _;
use std::path::Path;

use levelseg::{write_atomic, LevelSet};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::fail::{CliResult, Failure};

/// SHA-256 of the field's samples as little-endian `f64` bytes, row-major.
pub fn phi_sha256(phi: &LevelSet) -> String {
    let mut h = Sha256::new();
    for v in phi.data() {
        h.update(v.to_le_bytes());
    }
    h.finalize()
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").unwrap();
            s
        })
}

pub fn write(path: &Path, doc: &Map<String, Value>) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc).map_err(Failure::input)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

pub fn read(path: &Path) -> CliResult<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::input(anyhow::anyhow!("{}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Failure::input(anyhow::anyhow!(
            "{}: manifest is not a JSON object",
            path.display()
        ))),
        Err(e) => Err(Failure::input(anyhow::anyhow!("{}: {e}", path.display()))),
    }
}
