use serde::{Deserialize, Serialize};

use crate::capability::{CostConstants, SurfaceThresholds};
use crate::config::Config;
use crate::error::Result;
use crate::mca::McaModel;
use crate::siteselect::WeightProfile;
use crate::topology::ProductSpec;
use crate::world::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMethod {
    /// Exact enumeration up to [`crate::topology::EXACT_LIMIT`] candidates, local search above.
    #[default]
    Auto,
    Exact,
    LocalSearch,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AllocationOptions {
    pub method: AllocationMethod,
    /// Use the locally degraded reliability `rho * phi(x)` in each facility's
    /// supervision cost.
    pub couple_reliability: bool,
}

/// Everything the allocation and phase machinery needs besides the capability state.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelBundle {
    pub world: World,
    pub weights: WeightProfile,
    pub costs: CostConstants,
    pub product: ProductSpec,
    pub thresholds: SurfaceThresholds,
    pub mca: McaModel,
    pub options: AllocationOptions,
}

impl ModelBundle {
    /// Bundle from a configuration, taking thresholds from the named industry preset.
    pub fn from_config(config: &Config, preset: &str) -> Result<Self> {
        let thresholds = config.preset(preset)?.thresholds;
        Ok(ModelBundle {
            world: config.world.clone(),
            weights: config.weights,
            costs: config.cost_constants,
            product: config.product,
            thresholds,
            mca: config.mca_model.clone(),
            options: AllocationOptions::default(),
        })
    }

    pub fn with_method(mut self, method: AllocationMethod) -> Self {
        self.options.method = method;
        self
    }
}
