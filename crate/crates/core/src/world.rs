//! Candidate locations: factor costs, environment readings, demand and
//! infrastructure flags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::{Error, Result};

/// Siting factors, in the fixed order labor, logistics, land, energy,
/// market distance, regulatory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Factor {
    Labor,
    Logistics,
    Land,
    Energy,
    MarketDistance,
    Regulatory,
}

impl Factor {
    pub const ALL: [Factor; 6] = [
        Factor::Labor,
        Factor::Logistics,
        Factor::Land,
        Factor::Energy,
        Factor::MarketDistance,
        Factor::Regulatory,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Factor::Labor => "labor",
            Factor::Logistics => "logistics",
            Factor::Land => "land",
            Factor::Energy => "energy",
            Factor::MarketDistance => "market_distance",
            Factor::Regulatory => "regulatory",
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Factor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Factor::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::domain(format!("unknown factor '{s}'")))
    }
}

/// Dimensionless cost scores per factor; higher is worse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorCosts {
    pub labor: f64,
    pub logistics: f64,
    pub land: f64,
    pub energy: f64,
    pub market_distance: f64,
    pub regulatory: f64,
}

impl FactorCosts {
    pub fn from_array(v: [f64; 6]) -> Self {
        FactorCosts {
            labor: v[0],
            logistics: v[1],
            land: v[2],
            energy: v[3],
            market_distance: v[4],
            regulatory: v[5],
        }
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.labor,
            self.logistics,
            self.land,
            self.energy,
            self.market_distance,
            self.regulatory,
        ]
    }

    pub fn get(&self, factor: Factor) -> f64 {
        self.to_array()[factor.index()]
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self::from_array(self.to_array().map(|v| v * lambda))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentReading {
    /// Relative humidity, percent.
    pub humidity: f64,
    pub dust: f64,
    /// Severity of diurnal variation.
    pub thermal_cycling: f64,
    /// kWh/m²/yr.
    pub irradiance: f64,
    /// Days per year with precipitation.
    pub precipitation_days: f64,
}

/// Planar coordinates in km.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub id: String,
    pub name: String,
    pub position: Position,
    pub factors: FactorCosts,
    pub environment: EnvironmentReading,
    pub habitable: bool,
    pub energy_access: bool,
    /// Units per year.
    pub demand: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct World {
    pub regions: Vec<Region>,
    /// Money per unit per km.
    pub transport_rate: f64,
}

impl World {
    pub fn region(&self, id: &str) -> Option<&Region> {
        self.regions.iter().find(|r| r.id == id)
    }

    pub fn total_demand(&self) -> f64 {
        self.regions.iter().map(|r| r.demand).sum()
    }

    /// Regions with positive demand (the metropolitan markets).
    pub fn demand_regions(&self) -> impl Iterator<Item = &Region> {
        self.regions.iter().filter(|r| r.demand > 0.0)
    }

    pub fn index_of(&self) -> BTreeMap<&str, usize> {
        self.regions
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.as_str(), i))
            .collect()
    }
}

/// Euclidean distance between region positions, km.
pub fn distance(a: &Region, b: &Region) -> f64 {
    (a.position.x - b.position.x).hypot(a.position.y - b.position.y)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationIssue {
    /// `None` for world-level problems.
    pub region_id: Option<String>,
    pub field: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn len(&self) -> usize {
        self.issues.len()
    }

    fn push(&mut self, region_id: Option<&str>, field: &str, reason: impl Into<String>) {
        self.issues.push(ValidationIssue {
            region_id: region_id.map(str::to_owned),
            field: field.to_owned(),
            reason: reason.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for issue in &self.issues {
            match &issue.region_id {
                Some(id) => writeln!(f, "region '{}': {}: {}", id, issue.field, issue.reason)?,
                None => writeln!(f, "world: {}: {}", issue.field, issue.reason)?,
            }
        }
        Ok(())
    }
}

fn check_range(
    report: &mut ValidationReport,
    id: &str,
    field: &str,
    value: f64,
    lo: f64,
    hi: f64,
) {
    if !value.is_finite() || value < lo || value > hi {
        let reason = if hi.is_infinite() {
            format!("{value} outside range [{lo}, inf)")
        } else {
            format!("{value} outside range [{lo}, {hi}]")
        };
        report.push(Some(id), field, reason);
    }
}

/// Checks every region and world invariant, collecting one issue per violation.
pub fn validate_world(w: &World) -> ValidationReport {
    let mut report = ValidationReport::default();
    if w.regions.is_empty() {
        report.push(None, "regions", "at least one region is required");
    }
    if !(w.transport_rate.is_finite() && w.transport_rate >= 0.0) {
        report.push(
            None,
            "transport_rate",
            format!("{} outside range [0, inf)", w.transport_rate),
        );
    }

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &w.regions {
        *seen.entry(r.id.as_str()).or_default() += 1;
    }
    for (id, count) in &seen {
        if *count > 1 {
            report.push(Some(id), "id", format!("not unique ({count} regions share it)"));
        }
    }

    let inf = f64::INFINITY;
    for r in &w.regions {
        let id = r.id.as_str();
        if id.is_empty() {
            report.push(Some(id), "id", "must not be empty");
        }
        if !(r.position.x.is_finite() && r.position.y.is_finite()) {
            report.push(Some(id), "position", "coordinates must be finite");
        }
        for factor in Factor::ALL {
            check_range(&mut report, id, factor.name(), r.factors.get(factor), 0.0, inf);
        }
        let e = &r.environment;
        check_range(&mut report, id, "humidity", e.humidity, 0.0, 100.0);
        check_range(&mut report, id, "dust", e.dust, 0.0, inf);
        check_range(&mut report, id, "thermal_cycling", e.thermal_cycling, 0.0, inf);
        check_range(&mut report, id, "irradiance", e.irradiance, 0.0, inf);
        check_range(&mut report, id, "precipitation_days", e.precipitation_days, 0.0, 366.0);
        check_range(&mut report, id, "demand", r.demand, 0.0, inf);
    }
    report
}

/// Parses a configuration document and returns its validated world, regions in
/// document order.
pub fn load_world(document: &str) -> Result<World> {
    Ok(Config::from_json_str(document)?.world)
}

impl World {
    pub fn validated(self) -> Result<Self> {
        let report = validate_world(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(Error::Validation(report))
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{
        "world": {
            "transport_rate": 0.01,
            "regions": [{
                "id": "solo", "name": "Solo", "position": {"x": 0, "y": 0},
                "factors": {"labor": 1, "logistics": 1, "land": 1, "energy": 1,
                            "market_distance": 1, "regulatory": 1},
                "environment": {"humidity": 40, "dust": 0.2, "thermal_cycling": 0.3,
                                "irradiance": 1800, "precipitation_days": 60},
                "habitable": true, "energy_access": true, "demand": 100
            }]
        }
    }"#;

    #[test]
    fn loads_minimal_document() {
        let w = load_world(MINIMAL).unwrap();
        assert_eq!(w.regions.len(), 1);
        assert_eq!(w.regions[0].id, "solo");
    }

    #[test]
    fn duplicate_id_is_reported_by_name() {
        let mut doc: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
        let mut twin = doc["world"]["regions"][0].clone();
        twin["id"] = "A".into();
        doc["world"]["regions"][0]["id"] = "A".into();
        doc["world"]["regions"].as_array_mut().unwrap().push(twin);
        let err = load_world(&doc.to_string()).unwrap_err();
        match err {
            Error::Validation(report) => {
                assert_eq!(report.len(), 1);
                assert_eq!(report.issues[0].region_id.as_deref(), Some("A"));
                assert_eq!(report.issues[0].field, "id");
            }
            other => panic!("expected validation error, got {other}"),
        }
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(load_world("{ not json"), Err(Error::Parse(_))));
        assert!(matches!(
            load_world(r#"{"world": {"regions": [], "transport_rate": NaN}}"#),
            Err(Error::Parse(_))
        ));
    }

    #[test]
    fn distance_examples() {
        let a = region("a", 0.0, 0.0, [1.0; 6], 0.0);
        let b = region("b", 3.0, 4.0, [1.0; 6], 0.0);
        let c = region("c", 1.0, 1.0, [1.0; 6], 0.0);
        let d = region("d", 4.0, 5.0, [1.0; 6], 0.0);
        assert_eq!(distance(&a, &a), 0.0);
        assert_eq!(distance(&a, &b), 5.0);
        assert_eq!(distance(&c, &d), 5.0);
    }

    #[test]
    fn validation_reports_range_violation() {
        let mut r = region("hot", 0.0, 0.0, [1.0; 6], 1.0);
        r.environment.humidity = 150.0;
        let report = validate_world(&world(vec![r], 0.0));
        assert_eq!(report.len(), 1);
        assert_eq!(report.issues[0].region_id.as_deref(), Some("hot"));
        assert_eq!(report.issues[0].field, "humidity");
        assert!(report.issues[0].reason.contains("range"));
    }

    #[test]
    fn validation_accepts_valid_world() {
        let w = world(
            vec![
                region("a", 0.0, 0.0, [1.0; 6], 1.0),
                region("b", 1.0, 0.0, [2.0; 6], 0.0),
            ],
            0.5,
        );
        assert!(validate_world(&w).is_empty());
    }

    #[test]
    fn validation_flags_empty_world_and_negative_values() {
        let report = validate_world(&world(vec![], -1.0));
        assert_eq!(report.len(), 2);
        let mut r = region("neg", 0.0, 0.0, [1.0, -1.0, 1.0, 1.0, 1.0, 1.0], -5.0);
        r.environment.precipitation_days = 400.0;
        let report = validate_world(&world(vec![r], 0.0));
        let fields: Vec<_> = report.issues.iter().map(|i| i.field.as_str()).collect();
        assert_eq!(fields, ["logistics", "precipitation_days", "demand"]);
    }

    #[test]
    fn factor_names_parse() {
        for f in Factor::ALL {
            assert_eq!(f.name().parse::<Factor>().unwrap(), f);
        }
        assert!("wages".parse::<Factor>().is_err());
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(
            p in prop::array::uniform6(-1e4..1e4f64)
        ) {
            let a = region("a", p[0], p[1], [0.0; 6], 0.0);
            let b = region("b", p[2], p[3], [0.0; 6], 0.0);
            let c = region("c", p[4], p[5], [0.0; 6], 0.0);
            prop_assert!(distance(&a, &b) >= 0.0);
            prop_assert_eq!(distance(&a, &b), distance(&b, &a));
            prop_assert!(distance(&a, &c) <= distance(&a, &b) + distance(&b, &c) + 1e-9);
        }
    }
}
