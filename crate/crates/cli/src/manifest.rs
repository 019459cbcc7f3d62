//! Run manifests: what was run, against which cache state, with what result.

use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};
use wpvol_core::{VolumeTable, ENGINE_VERSION};

#[derive(Debug, Serialize)]
pub struct Manifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub engine_version: &'static str,
    pub cache_state: String,
    pub results: BTreeMap<String, serde_json::Value>,
}

/// SHA-256 of the canonical table contents.
pub fn cache_state(table: &VolumeTable) -> wpvol_core::Result<String> {
    let digest = Sha256::digest(table.to_canonical_json()?.as_bytes());
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

impl Manifest {
    pub fn new(command: &str, table: &VolumeTable) -> wpvol_core::Result<Self> {
        Ok(Manifest {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            engine_version: ENGINE_VERSION,
            cache_state: cache_state(table)?,
            results: BTreeMap::new(),
        })
    }

    pub fn param(mut self, name: &str, value: impl Serialize) -> Self {
        self.parameters
            .insert(name.to_string(), serde_json::to_value(value).unwrap_or_default());
        self
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) {
        self.results
            .insert(name.to_string(), serde_json::to_value(value).unwrap_or_default());
    }
}
