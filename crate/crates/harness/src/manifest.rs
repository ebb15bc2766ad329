//! Stimulus manifests.
//!
//! A manifest is a TOML file:
//!
//! ```toml
//! format_version = 1
//! root = "stimuli"          # relative to the manifest's directory
//!
//! [[stimulus]]
//! id = "kitchen-photo"
//! kind = "real"             # or "synthetic"
//! image_path = "kitchen.png"  # relative to root
//! provenance = "Canon 5D, f/8, 2024-03-02"
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use gts_core::protocol::{check_stimulus, Kind, Stimulus};
use serde::{Deserialize, Serialize};

use crate::HarnessError;

pub const MANIFEST_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusManifest {
    pub format_version: u32,
    #[serde(default)]
    pub root: PathBuf,
    #[serde(rename = "stimulus", default)]
    pub entries: Vec<Stimulus>,
}

impl StimulusManifest {
    pub fn new(root: impl Into<PathBuf>, entries: Vec<Stimulus>) -> Self {
        Self { format_version: MANIFEST_FORMAT_VERSION, root: root.into(), entries }
    }

    /// Parses and validates a manifest, resolving `root` against the
    /// manifest's own directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::User(format!("manifest {}: {e}", path.display())))?;
        let mut manifest: StimulusManifest =
            toml::from_str(&text).map_err(|e| HarnessError::User(format!("manifest {}: {e}", path.display())))?;
        if manifest.root.is_relative() {
            let dir = path.parent().unwrap_or(Path::new("."));
            manifest.root = dir.join(&manifest.root);
        }
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    /// Version, both kinds present, unique ids, and every image decodable.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.format_version != MANIFEST_FORMAT_VERSION {
            return Err(HarnessError::User(format!("unsupported manifest format_version {}", self.format_version)));
        }
        if self.entries.is_empty() {
            return Err(HarnessError::User("manifest lists no stimuli".into()));
        }
        for kind in [Kind::Real, Kind::Synthetic] {
            if !self.entries.iter().any(|s| s.kind == kind) {
                return Err(HarnessError::User(format!("manifest lists no {kind:?} stimulus").to_lowercase()));
            }
        }
        let mut seen = HashSet::new();
        for s in &self.entries {
            if !seen.insert(s.id.as_str()) {
                return Err(HarnessError::User(format!("duplicate stimulus id {:?}", s.id)));
            }
        }
        for s in self.pool() {
            check_stimulus(&s)?;
        }
        Ok(())
    }

    /// Entries with image paths resolved against `root`.
    pub fn pool(&self) -> Vec<Stimulus> {
        self.entries.iter().map(|s| Stimulus { image_path: self.root.join(&s.image_path), ..s.clone() }).collect()
    }
}
