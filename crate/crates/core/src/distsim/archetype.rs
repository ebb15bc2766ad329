use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::scale::MachineRating;

use super::SimError;

/// Archetype catalog shipped with the crate.
pub const BUILTIN_CATALOG: &str = include_str!("../../data/archetypes.toml");
pub const CATALOG_FORMAT_VERSION: u32 = 1;

/// Relative tolerance between a catalog's published peak and
/// `node_count * gflops_per_node`.
pub const CATALOG_PEAK_TOLERANCE: f64 = 0.002;

/// A parallel machine as seen by the frame simulator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemArchetype {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub node_count: u64,
    pub gflops_per_node: f64,
    #[serde(default = "one")]
    pub gpu_render_speedup: f64,
    /// Per-message latency in seconds.
    pub link_latency_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub all_to_all_latency_s: Option<f64>,
    pub bandwidth_bytes_per_s: f64,
    pub interactive: bool,
    /// GPU physics speedup range; not used by the render model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub physics_speedup: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_peak_tflops: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog_sustained_tflops: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub network: Option<String>,
    /// Fields whose values are placeholders rather than published figures.
    #[serde(default)]
    pub assumed: Vec<String>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub notes: String,
}

fn one() -> f64 {
    1.0
}

impl SystemArchetype {
    /// A machine of `node_count` identical nodes on an ideal network.
    pub fn ideal(name: impl Into<String>, node_count: u64, gflops_per_node: f64) -> Self {
        Self {
            name: name.into(),
            description: String::new(),
            node_count,
            gflops_per_node,
            gpu_render_speedup: 1.0,
            link_latency_s: 0.0,
            all_to_all_latency_s: None,
            bandwidth_bytes_per_s: f64::INFINITY,
            interactive: true,
            physics_speedup: None,
            catalog_peak_tflops: None,
            catalog_sustained_tflops: None,
            network: None,
            assumed: Vec::new(),
            notes: String::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::InvalidArgument(format!("archetype {}: {what}", self.name)));
        if self.node_count == 0 {
            return bad("node_count must be >= 1");
        }
        if !(self.gflops_per_node.is_finite() && self.gflops_per_node > 0.0) {
            return bad("gflops_per_node must be finite and > 0");
        }
        if !(self.gpu_render_speedup.is_finite() && self.gpu_render_speedup >= 1.0) {
            return bad("gpu_render_speedup must be >= 1");
        }
        if !(self.link_latency_s.is_finite() && self.link_latency_s >= 0.0) {
            return bad("link_latency_s must be finite and >= 0");
        }
        if self.bandwidth_bytes_per_s.is_nan() || self.bandwidth_bytes_per_s <= 0.0 {
            return bad("bandwidth_bytes_per_s must be > 0");
        }
        if let Some(peak) = self.catalog_peak_tflops {
            if peak.is_nan() || peak <= 0.0 {
                return bad("catalog_peak_tflops must be > 0");
            }
            let computed = self.nominal_peak_tflops();
            if ((computed - peak) / peak).abs() > CATALOG_PEAK_TOLERANCE {
                return bad(&format!(
                    "node_count x gflops_per_node = {computed} TFlops disagrees with catalog peak {peak}"
                ));
            }
        }
        if let Some(sustained) = self.catalog_sustained_tflops {
            if sustained.is_nan() || sustained <= 0.0 || self.catalog_peak_tflops.is_some_and(|p| sustained > p) {
                return bad("catalog_sustained_tflops must lie in (0, catalog_peak_tflops]");
            }
        }
        Ok(())
    }

    /// `node_count * gflops_per_node` in TFlops.
    pub fn nominal_peak_tflops(&self) -> f64 {
        self.node_count as f64 * self.gflops_per_node / 1000.0
    }

    /// Peak in reference-CPU-equivalent TFlops: includes the GPU render speedup.
    pub fn effective_peak_tflops(&self) -> f64 {
        self.nominal_peak_tflops() * self.gpu_render_speedup
    }

    /// Published sustained / published peak, when both exist.
    pub fn catalog_efficiency(&self) -> Option<f64> {
        Some(self.catalog_sustained_tflops? / self.catalog_peak_tflops?)
    }

    /// Published (or nominal) peak and a sustained figure, using
    /// `fallback_efficiency` when no sustained figure is published.
    pub fn rating(&self, fallback_efficiency: f64) -> MachineRating {
        let peak = self.catalog_peak_tflops.unwrap_or_else(|| self.nominal_peak_tflops());
        let sustained = self.catalog_sustained_tflops.unwrap_or(peak * fallback_efficiency);
        MachineRating { peak_tflops: peak, sustained_tflops: sustained }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeCatalog {
    pub format_version: u32,
    #[serde(rename = "archetype")]
    pub archetypes: Vec<SystemArchetype>,
}

impl ArchetypeCatalog {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_CATALOG).expect("built-in catalog is valid")
    }

    pub fn parse(text: &str) -> Result<Self, SimError> {
        let catalog: ArchetypeCatalog = toml::from_str(text).map_err(|e| SimError::Parse(e.to_string()))?;
        if catalog.format_version != CATALOG_FORMAT_VERSION {
            return Err(SimError::Parse(format!("unsupported catalog format_version {}", catalog.format_version)));
        }
        for a in &catalog.archetypes {
            a.validate()?;
        }
        Ok(catalog)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path).map_err(|e| SimError::Parse(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Case-insensitive lookup, ignoring `-`, `_` and `/`.
    pub fn get(&self, name: &str) -> Option<&SystemArchetype> {
        let key = normalize(name);
        self.archetypes.iter().find(|a| normalize(&a.name) == key)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.archetypes.iter().map(|a| a.name.as_str())
    }
}

fn normalize(s: &str) -> String {
    s.chars().filter(|c| !matches!(c, '-' | '_' | '/' | ' ')).flat_map(char::to_lowercase).collect()
}
