//! The configuration document: one JSON object with the sections `world`,
//! `weights`, `cost_constants`, `mca_model`, `product` and `presets`. Every
//! section except `world` falls back to a default when absent.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::capability::{CostConstants, IndustryPreset};
use crate::error::{Error, Result};
use crate::mca::McaModel;
use crate::siteselect::WeightProfile;
use crate::topology::ProductSpec;
use crate::world::World;

const INDUSTRIES: &str = include_str!("../presets/industries.json");

/// Bundled configuration documents, by name.
pub const BUNDLED_DOCUMENTS: [(&str, &str); 4] = [
    ("default", include_str!("../presets/default.json")),
    ("two-metro", include_str!("../presets/two-metro.json")),
    ("mca-demo", include_str!("../presets/mca-demo.json")),
    ("ab-sites", include_str!("../presets/ab-sites.json")),
];

pub const DEFAULT_PRESET: &str = "food";

pub fn bundled_document(name: &str) -> Option<&'static str> {
    BUNDLED_DOCUMENTS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, doc)| *doc)
}

/// The industry presets shipped with the crate.
pub fn bundled_presets() -> Vec<IndustryPreset> {
    serde_json::from_str(INDUSTRIES).expect("bundled industries.json is valid")
}

/// Raw text of the bundled industry preset file.
pub fn bundled_presets_source() -> &'static str {
    INDUSTRIES
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub world: World,
    #[serde(default)]
    pub weights: WeightProfile,
    #[serde(default)]
    pub cost_constants: CostConstants,
    #[serde(default)]
    pub mca_model: McaModel,
    #[serde(default)]
    pub product: ProductSpec,
    #[serde(default = "bundled_presets")]
    pub presets: Vec<IndustryPreset>,
}

impl Config {
    pub fn from_json_str(document: &str) -> Result<Self> {
        let config: Config = serde_json::from_str(document)?;
        config.validate()?;
        Ok(config)
    }

    /// Parses `document`, applies dotted-path overrides (`product.price=12`,
    /// `world.regions.0.demand=500`) and validates the result.
    pub fn from_json_with_overrides(document: &str, overrides: &[(String, String)]) -> Result<Self> {
        let parsed: Config = serde_json::from_str(document)?;
        if overrides.is_empty() {
            parsed.validate()?;
            return Ok(parsed);
        }
        // Round through a Value so defaulted sections are addressable too.
        let mut value = serde_json::to_value(&parsed)?;
        for (key, raw) in overrides {
            apply_override(&mut value, key, raw)?;
        }
        let config: Config = serde_json::from_value(value)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    pub fn validate(&self) -> Result<()> {
        let report = crate::world::validate_world(&self.world);
        if !report.is_empty() {
            return Err(Error::Validation(report));
        }
        self.weights.validate()?;
        self.cost_constants.validate()?;
        self.mca_model.validate()?;
        self.product.validate()?;
        let mut names: Vec<&str> = self.presets.iter().map(|p| p.name.as_str()).collect();
        names.sort_unstable();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("duplicate preset name '{}'", w[0])));
        }
        for p in &self.presets {
            p.thresholds
                .validate()
                .map_err(|e| Error::Config(format!("preset '{}': {e}", p.name)))?;
        }
        Ok(())
    }

    pub fn preset(&self, name: &str) -> Result<&IndustryPreset> {
        self.presets.iter().find(|p| p.name == name).ok_or_else(|| {
            let known: Vec<_> = self.presets.iter().map(|p| p.name.as_str()).collect();
            Error::Config(format!(
                "unknown preset '{name}' (available: {})",
                known.join(", ")
            ))
        })
    }
}

/// Sets the existing key at `path` to `raw`, parsed as JSON when possible and
/// as a string otherwise.
pub fn apply_override(root: &mut Value, path: &str, raw: &str) -> Result<()> {
    let mut node = root;
    for segment in path.split('.') {
        node = match node {
            Value::Object(map) => map.get_mut(segment),
            Value::Array(items) => segment.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        }
        .ok_or_else(|| Error::Config(format!("override key '{path}' does not exist")))?;
    }
    *node = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_owned()));
    Ok(())
}
