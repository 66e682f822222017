//! Capability space: the four indices describing what embodied systems can do,
//! the threshold surfaces defined over them, and the cost components that
//! depend on them.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) fn check_unit(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {value} is outside [0, 1]")))
    }
}

/// A point `(delta, gamma, rho, tau)` in the unit hypercube.
///
/// * `delta`: dexterity: fraction of manipulation tasks performed at human level.
/// * `gamma`: generalization: ability to switch tasks without retooling.
/// * `rho`: per-operation reliability.
/// * `tau`: tactile-vision fusion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCapability")]
pub struct CapabilityVector {
    delta: f64,
    gamma: f64,
    rho: f64,
    tau: f64,
}

#[derive(Deserialize)]
struct RawCapability {
    delta: f64,
    gamma: f64,
    rho: f64,
    tau: f64,
}

impl TryFrom<RawCapability> for CapabilityVector {
    type Error = Error;

    fn try_from(raw: RawCapability) -> Result<Self> {
        CapabilityVector::new(raw.delta, raw.gamma, raw.rho, raw.tau)
    }
}

impl CapabilityVector {
    pub const ZERO: CapabilityVector = CapabilityVector {
        delta: 0.0,
        gamma: 0.0,
        rho: 0.0,
        tau: 0.0,
    };

    pub const ONE: CapabilityVector = CapabilityVector {
        delta: 1.0,
        gamma: 1.0,
        rho: 1.0,
        tau: 1.0,
    };

    pub fn new(delta: f64, gamma: f64, rho: f64, tau: f64) -> Result<Self> {
        check_unit("delta", delta)?;
        check_unit("gamma", gamma)?;
        check_unit("rho", rho)?;
        check_unit("tau", tau)?;
        Ok(CapabilityVector {
            delta,
            gamma,
            rho,
            tau,
        })
    }

    /// All four indices equal to `t`.
    pub fn uniform(t: f64) -> Result<Self> {
        Self::new(t, t, t, t)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.delta, self.gamma, self.rho, self.tau]
    }

    /// Componentwise `self >= other`.
    pub fn dominates(&self, other: &CapabilityVector) -> bool {
        self.to_array()
            .iter()
            .zip(other.to_array())
            .all(|(a, b)| *a >= b)
    }

    /// Copy of `self` with reliability replaced, used when the local
    /// environment degrades the base reliability.
    pub fn with_rho(&self, rho: f64) -> Result<Self> {
        Self::new(self.delta, self.gamma, rho, self.tau)
    }
}

impl fmt::Display for CapabilityVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {}, {})",
            self.delta, self.gamma, self.rho, self.tau
        )
    }
}

/// Minimum index values describing a weight-inversion or batch-collapse surface.
/// Only reported; phase labels are derived from the computed weights and MEBS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityMinimums {
    pub delta_min: f64,
    pub gamma_min: f64,
    pub rho_min: f64,
}

/// Decoupling surface: `delta * rho > theta_h`, `gamma > theta_g`, `tau >= tau_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecouplingThresholds {
    pub theta_h: f64,
    pub theta_g: f64,
    pub tau_min: f64,
}

impl Default for DecouplingThresholds {
    fn default() -> Self {
        DecouplingThresholds {
            theta_h: 0.90,
            theta_g: 0.60,
            tau_min: 0.70,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SurfaceThresholds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_w: Option<CapabilityMinimums>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_n: Option<CapabilityMinimums>,
    pub sigma_h: DecouplingThresholds,
}

impl SurfaceThresholds {
    pub fn validate(&self) -> Result<()> {
        for (label, mins) in [("sigma_w", self.sigma_w), ("sigma_n", self.sigma_n)] {
            if let Some(m) = mins {
                check_unit(&format!("{label}.delta_min"), m.delta_min)?;
                check_unit(&format!("{label}.gamma_min"), m.gamma_min)?;
                check_unit(&format!("{label}.rho_min"), m.rho_min)?;
            }
        }
        check_unit("sigma_h.theta_h", self.sigma_h.theta_h)?;
        check_unit("sigma_h.theta_g", self.sigma_h.theta_g)?;
        check_unit("sigma_h.tau_min", self.sigma_h.tau_min)?;
        Ok(())
    }
}

/// A named industry with its present capability state and critical thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndustryPreset {
    pub name: String,
    pub current: CapabilityVector,
    pub thresholds: SurfaceThresholds,
    /// Free-text notes (market size, timeline, ...). Never used in computation.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

/// Constants of the capability-dependent cost components.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostConstants {
    /// Switching cost at zero generalization.
    pub c_switch_0: f64,
    /// Curvature of the switching-cost decay.
    pub switch_exponent: f64,
    /// Labor cost per batch at zero dexterity.
    pub labor_baseline: f64,
    /// Supervision cost per batch when every cycle fails.
    pub supervision_baseline: f64,
    /// Stations on the line.
    pub stations: u32,
}

impl Default for CostConstants {
    fn default() -> Self {
        CostConstants {
            c_switch_0: 40_000.0,
            switch_exponent: 2.0,
            labor_baseline: 20_000.0,
            supervision_baseline: 10_000.0,
            stations: 50,
        }
    }
}

impl CostConstants {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("c_switch_0", self.c_switch_0),
            ("labor_baseline", self.labor_baseline),
            ("supervision_baseline", self.supervision_baseline),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Config(format!("cost_constants.{name} = {v} must be >= 0")));
            }
        }
        if !(self.switch_exponent.is_finite() && self.switch_exponent > 0.0) {
            return Err(Error::Config(format!(
                "cost_constants.switch_exponent = {} must be > 0",
                self.switch_exponent
            )));
        }
        if self.stations == 0 {
            return Err(Error::Config("cost_constants.stations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Exponents `(a, b)` of the fusion factor `gamma^a * tau^b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionExponents {
    pub gamma: f64,
    pub tau: f64,
}

impl Default for FusionExponents {
    fn default() -> Self {
        FusionExponents {
            gamma: 0.5,
            tau: 0.5,
        }
    }
}

impl FusionExponents {
    pub fn validate(&self) -> Result<()> {
        if self.gamma.is_finite() && self.tau.is_finite() && self.gamma > 0.0 && self.tau > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "fusion exponents must be > 0, got ({}, {})",
                self.gamma, self.tau
            )))
        }
    }
}

/// Joint contribution of generalization and tactile fusion, `sqrt(gamma * tau)`.
pub fn fusion_factor(gamma: f64, tau: f64) -> Result<f64> {
    fusion_factor_with(gamma, tau, &FusionExponents::default())
}

pub fn fusion_factor_with(gamma: f64, tau: f64, exps: &FusionExponents) -> Result<f64> {
    check_unit("gamma", gamma)?;
    check_unit("tau", tau)?;
    exps.validate().map_err(|e| Error::domain(e.to_string()))?;
    Ok(gamma.powf(exps.gamma) * tau.powf(exps.tau))
}

/// `C_switch(gamma) = c_switch_0 * (1 - gamma)^q`.
pub fn switching_cost(gamma: f64, k: &CostConstants) -> Result<f64> {
    check_unit("gamma", gamma)?;
    Ok(k.c_switch_0 * (1.0 - gamma).powf(k.switch_exponent))
}

/// Per-station reliability compounded over `n` stations.
pub fn line_yield(rho: f64, n: u32) -> Result<f64> {
    check_unit("rho", rho)?;
    if n == 0 {
        return Err(Error::domain("a line needs at least one station"));
    }
    Ok(rho.powi(n as i32))
}

/// `L0 * (1 - delta) + S0 * (1 - rho^n)`: the residual manual work plus the
/// supervision needed to recover failed cycles.
pub fn labor_cost(c: &CapabilityVector, k: &CostConstants) -> Result<f64> {
    let failure = 1.0 - line_yield(c.rho(), k.stations)?;
    Ok(k.labor_baseline * (1.0 - c.delta()) + k.supervision_baseline * failure)
}

/// Whether `c` lies beyond the decoupling surface. The product and
/// generalization tests are strict, the tactile test is inclusive.
pub fn crossed_sigma_h(c: &CapabilityVector, t: &SurfaceThresholds) -> bool {
    let h = &t.sigma_h;
    c.delta() * c.rho() > h.theta_h && c.gamma() > h.theta_g && c.tau() >= h.tau_min
}
