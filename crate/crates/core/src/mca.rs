//! Machine climate: per-parameter environmental responses, the multiplicative
//! adaptation factor, effective reliability, MCA ranking and the feasibility
//! set before and after human-infrastructure decoupling.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::capability::{check_unit, crossed_sigma_h, CapabilityVector, SurfaceThresholds};
use crate::error::{Error, Result};
use crate::siteselect::{by_value_then_id, traditional_score, WeightProfile};
use crate::world::{EnvironmentReading, Region, World};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvParameter {
    Humidity,
    Dust,
    ThermalCycling,
    Irradiance,
    PrecipitationDays,
}

impl EnvParameter {
    pub const ALL: [EnvParameter; 5] = [
        EnvParameter::Humidity,
        EnvParameter::Dust,
        EnvParameter::ThermalCycling,
        EnvParameter::Irradiance,
        EnvParameter::PrecipitationDays,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvParameter::Humidity => "humidity",
            EnvParameter::Dust => "dust",
            EnvParameter::ThermalCycling => "thermal_cycling",
            EnvParameter::Irradiance => "irradiance",
            EnvParameter::PrecipitationDays => "precipitation_days",
        }
    }

    /// Valid reading range.
    pub fn range(self) -> (f64, f64) {
        match self {
            EnvParameter::Humidity => (0.0, 100.0),
            EnvParameter::PrecipitationDays => (0.0, 366.0),
            _ => (0.0, f64::INFINITY),
        }
    }

    pub fn read(self, e: &EnvironmentReading) -> f64 {
        match self {
            EnvParameter::Humidity => e.humidity,
            EnvParameter::Dust => e.dust,
            EnvParameter::ThermalCycling => e.thermal_cycling,
            EnvParameter::Irradiance => e.irradiance,
            EnvParameter::PrecipitationDays => e.precipitation_days,
        }
    }
}

impl fmt::Display for EnvParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    PenalizeAbove,
    PenalizeBelow,
    TwoSided,
}

/// Exponential response `exp(-k * excess / s)` around a machine-optimal value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvResponseSpec {
    pub parameter: EnvParameter,
    pub optimum: f64,
    pub scale: f64,
    pub sensitivity: f64,
    pub sidedness: Sidedness,
}

impl EnvResponseSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.optimum.is_finite() && self.scale.is_finite() && self.scale > 0.0) {
            return Err(Error::Config(format!(
                "{}: optimum must be finite and scale > 0",
                self.parameter
            )));
        }
        if !(self.sensitivity.is_finite() && self.sensitivity >= 0.0) {
            return Err(Error::Config(format!("{}: sensitivity must be >= 0", self.parameter)));
        }
        Ok(())
    }
}

/// One response per environmental parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McaModel {
    pub responses: Vec<EnvResponseSpec>,
}

impl Default for McaModel {
    fn default() -> Self {
        let spec = |parameter, optimum, scale, sensitivity, sidedness| EnvResponseSpec {
            parameter,
            optimum,
            scale,
            sensitivity,
            sidedness,
        };
        use EnvParameter::*;
        use Sidedness::*;
        McaModel {
            responses: vec![
                spec(Humidity, 25.0, 30.0, 1.0, PenalizeAbove),
                spec(Dust, 0.0, 2.0, 0.5, PenalizeAbove),
                spec(ThermalCycling, 0.0, 2.0, 0.5, PenalizeAbove),
                spec(Irradiance, 2500.0, 1000.0, 1.0, PenalizeBelow),
                spec(PrecipitationDays, 20.0, 60.0, 0.5, PenalizeAbove),
            ],
        }
    }
}

impl McaModel {
    pub fn validate(&self) -> Result<()> {
        for p in EnvParameter::ALL {
            let n = self.responses.iter().filter(|s| s.parameter == p).count();
            if n != 1 {
                return Err(Error::Config(format!(
                    "mca_model needs exactly one response for {p}, found {n}"
                )));
            }
        }
        self.responses.iter().try_for_each(EnvResponseSpec::validate)
    }

    pub fn spec(&self, p: EnvParameter) -> Result<&EnvResponseSpec> {
        self.responses
            .iter()
            .find(|s| s.parameter == p)
            .ok_or_else(|| Error::Config(format!("mca_model has no response for {p}")))
    }
}

/// Response in `(0, 1]`, equal to 1 at the optimum and on the unpenalized side.
pub fn env_response(e: f64, spec: &EnvResponseSpec) -> Result<f64> {
    let (lo, hi) = spec.parameter.range();
    if !(e.is_finite() && e >= lo && e <= hi) {
        return Err(Error::domain(format!(
            "{} reading {e} outside [{lo}, {hi}]",
            spec.parameter
        )));
    }
    let excess = match spec.sidedness {
        Sidedness::PenalizeAbove => (e - spec.optimum).max(0.0),
        Sidedness::PenalizeBelow => (spec.optimum - e).max(0.0),
        Sidedness::TwoSided => (e - spec.optimum).abs(),
    } / spec.scale;
    // exp underflows to 0 for extreme excess; the response must stay positive
    Ok((-spec.sensitivity * excess).exp().max(f64::MIN_POSITIVE))
}

/// Per-parameter responses of a region, in [`EnvParameter::ALL`] order.
pub fn responses(r: &Region, m: &McaModel) -> Result<Vec<(EnvParameter, f64)>> {
    EnvParameter::ALL
        .iter()
        .map(|&p| Ok((p, env_response(p.read(&r.environment), m.spec(p)?)?)))
        .collect()
}

/// `phi(x)`: product of the per-parameter responses.
pub fn adaptation_factor(r: &Region, m: &McaModel) -> Result<f64> {
    let phi: f64 = responses(r, m)?.iter().map(|(_, v)| v).product();
    Ok(phi.max(f64::MIN_POSITIVE))
}

/// `rho_base * phi(x)`.
pub fn effective_reliability(rho_base: f64, r: &Region, m: &McaModel) -> Result<f64> {
    check_unit("rho_base", rho_base)?;
    Ok(rho_base * adaptation_factor(r, m)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct McaRanking {
    pub region_id: String,
    pub phi: f64,
    pub responses: Vec<(EnvParameter, f64)>,
}

/// Regions by adaptation factor, best first; ties by id.
pub fn mca_rank(w: &World, m: &McaModel) -> Result<Vec<McaRanking>> {
    if w.regions.is_empty() {
        return Err(Error::domain("cannot rank an empty world"));
    }
    let mut ranked = w
        .regions
        .iter()
        .map(|r| {
            let responses = responses(r, m)?;
            Ok(McaRanking {
                region_id: r.id.clone(),
                phi: adaptation_factor(r, m)?,
                responses,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ranked.sort_by(|a, b| by_value_then_id((-a.phi, &a.region_id), (-b.phi, &b.region_id)));
    Ok(ranked)
}

/// True when `x` beats `x_ref` on machine climate while losing on traditional
/// attractiveness.
pub fn has_mca(x: &Region, x_ref: &Region, m: &McaModel, p: &WeightProfile) -> Result<bool> {
    Ok(adaptation_factor(x, m)? > adaptation_factor(x_ref, m)?
        && traditional_score(x, p) < traditional_score(x_ref, p))
}

/// Ids (world order) where manufacturing is possible at capability `c`:
/// habitable and energized regions below the decoupling surface, all energized
/// regions beyond it.
pub fn feasible_set(w: &World, c: &CapabilityVector, t: &SurfaceThresholds) -> Vec<String> {
    let decoupled = crossed_sigma_h(c, t);
    w.regions
        .iter()
        .filter(|r| r.energy_access && (decoupled || r.habitable))
        .map(|r| r.id.clone())
        .collect()
}
