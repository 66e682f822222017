//! Batch economics and production topology: minimum economic batch size, the
//! centralized/distributed regime test, logistics cost and the facility
//! allocation that yields the regional output distribution.

mod oracle;
mod solver;

pub mod instances;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::capability::{labor_cost, switching_cost, CapabilityVector, CostConstants};
use crate::error::{Error, Result};
use crate::world::{distance, World};

pub use oracle::{brute_force_allocate, ORACLE_LIMIT};
pub use solver::{allocate, EXACT_LIMIT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamedNStar {
    /// Smallest positive regional demand.
    MinMetroDemand,
}

/// Single-market demand threshold: an explicit unit count or a rule over the world.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NStarRule {
    Explicit(f64),
    Named(NamedNStar),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProductSpec {
    /// Price per unit.
    pub price: f64,
    /// Variable (marginal) cost per unit.
    pub variable_cost: f64,
    pub facility_fixed: f64,
    pub equipment_fixed: f64,
    pub n_star_rule: NStarRule,
}

impl Default for ProductSpec {
    fn default() -> Self {
        ProductSpec {
            price: 10.0,
            variable_cost: 6.0,
            facility_fixed: 15_000.0,
            equipment_fixed: 5_000.0,
            n_star_rule: NStarRule::Named(NamedNStar::MinMetroDemand),
        }
    }
}

impl ProductSpec {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.price, self.variable_cost, self.facility_fixed, self.equipment_fixed]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Config("product values must be finite".into()));
        }
        if self.price <= self.variable_cost {
            return Err(Error::Config(format!(
                "product.price ({}) must exceed product.variable_cost ({})",
                self.price, self.variable_cost
            )));
        }
        if self.facility_fixed < 0.0 || self.equipment_fixed < 0.0 {
            return Err(Error::Config("product fixed costs must be >= 0".into()));
        }
        if let NStarRule::Explicit(n) = self.n_star_rule {
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::Config(format!("product.n_star_rule = {n} must be > 0")));
            }
        }
        Ok(())
    }

    pub fn margin(&self) -> f64 {
        self.price - self.variable_cost
    }
}

/// Cost terms of one facility at capability `c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FacilityCost {
    pub facility: f64,
    pub equipment: f64,
    pub switching: f64,
    pub labor: f64,
}

impl FacilityCost {
    pub fn at(c: &CapabilityVector, k: &CostConstants, prod: &ProductSpec) -> Result<Self> {
        Ok(FacilityCost {
            facility: prod.facility_fixed,
            equipment: prod.equipment_fixed,
            switching: switching_cost(c.gamma(), k)?,
            labor: labor_cost(c, k)?,
        })
    }

    pub fn total(&self) -> f64 {
        self.facility + self.equipment + self.switching + self.labor
    }
}

/// Smallest run whose contribution margin covers the facility's fixed and
/// capability-dependent costs.
pub fn mebs(c: &CapabilityVector, k: &CostConstants, prod: &ProductSpec) -> Result<f64> {
    if prod.price <= prod.variable_cost {
        return Err(Error::domain(format!(
            "price {} does not exceed variable cost {}",
            prod.price, prod.variable_cost
        )));
    }
    Ok(FacilityCost::at(c, k, prod)?.total() / prod.margin())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Centralized,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegimeVerdict {
    pub regime: Regime,
    /// MEBS exactly equals N*.
    pub boundary: bool,
}

/// Distributed when the batch floor is below single-market demand; equality
/// counts as centralized and is flagged.
pub fn regime(mebs_value: f64, n_star: f64) -> Result<RegimeVerdict> {
    if !(n_star.is_finite() && n_star > 0.0) {
        return Err(Error::domain(format!("N* = {n_star} must be > 0")));
    }
    Ok(if mebs_value < n_star {
        RegimeVerdict {
            regime: Regime::Distributed,
            boundary: false,
        }
    } else {
        RegimeVerdict {
            regime: Regime::Centralized,
            boundary: mebs_value == n_star,
        }
    })
}

/// Resolves the N* rule against a world.
pub fn n_star(w: &World, prod: &ProductSpec) -> Result<f64> {
    match prod.n_star_rule {
        NStarRule::Explicit(n) => Ok(n),
        NStarRule::Named(NamedNStar::MinMetroDemand) => w
            .demand_regions()
            .map(|r| r.demand)
            .min_by(f64::total_cmp)
            .ok_or_else(|| Error::domain("no region has positive demand; N* is undefined")),
    }
}

/// `sum demand(d) * rate * distance(facility(d), d)` over assigned demand regions.
pub fn logistics_cost(w: &World, assignment: &BTreeMap<String, String>) -> Result<f64> {
    let lookup = |id: &str| {
        w.region(id)
            .ok_or_else(|| Error::domain(format!("assignment references unknown region '{id}'")))
    };
    for r in w.demand_regions() {
        if !assignment.contains_key(&r.id) {
            return Err(Error::domain(format!("demand region '{}' is unassigned", r.id)));
        }
    }
    let mut total = 0.0;
    for (demand_id, facility_id) in assignment {
        let d = lookup(demand_id)?;
        let f = lookup(facility_id)?;
        total += d.demand * w.transport_rate * distance(f, d);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FacilityVolume {
    pub region_id: String,
    pub volume: f64,
}

/// Chosen facilities, demand assignment and resulting regional output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Allocation {
    /// In world order.
    pub facilities: Vec<FacilityVolume>,
    /// Demand region id to facility region id.
    pub assignment: BTreeMap<String, String>,
    pub total_cost: f64,
    pub fixed_cost: f64,
    pub variable_cost: f64,
    pub logistics_cost: f64,
    /// Output per region, world order; zero where no facility stands.
    pub outputs: Vec<(String, f64)>,
}

impl Allocation {
    pub fn facility_ids(&self) -> Vec<&str> {
        self.facilities.iter().map(|f| f.region_id.as_str()).collect()
    }

    pub fn facility_count(&self) -> usize {
        self.facilities.len()
    }

    pub fn output_values(&self) -> Vec<f64> {
        self.outputs.iter().map(|(_, m)| *m).collect()
    }

    /// One row per region: `region_id,is_facility,volume,assigned_to,distance_km`.
    pub fn to_csv(&self, w: &World) -> Result<String> {
        let mut out = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::domain(format!("csv: {e}"));
        out.write_record(["region_id", "is_facility", "volume", "assigned_to", "distance_km"])
            .map_err(io)?;
        for (r, (_, volume)) in w.regions.iter().zip(&self.outputs) {
            let is_facility = self.facilities.iter().any(|f| f.region_id == r.id);
            let (assigned, dist) = match self.assignment.get(&r.id) {
                Some(f) => {
                    let fr = w.region(f).ok_or_else(|| Error::domain(format!("unknown facility '{f}'")))?;
                    (f.clone(), format!("{:.6}", distance(fr, r)))
                }
                None => (String::new(), String::new()),
            };
            out.write_record([
                r.id.clone(),
                is_facility.to_string(),
                format!("{volume:.6}"),
                assigned,
                dist,
            ])
            .map_err(io)?;
        }
        let bytes = out.into_inner().map_err(|e| Error::domain(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Fixed cost and MEBS floor for a facility in each candidate region.
pub(crate) fn facility_terms(
    bundle: &crate::model::ModelBundle,
    c: &CapabilityVector,
    region: &crate::world::Region,
) -> Result<(f64, f64)> {
    let local = if bundle.options.couple_reliability {
        c.with_rho(crate::mca::effective_reliability(c.rho(), region, &bundle.mca)?)?
    } else {
        *c
    };
    let cost = FacilityCost::at(&local, &bundle.costs, &bundle.product)?.total();
    Ok((cost, mebs(&local, &bundle.costs, &bundle.product)?))
}

/// Relative tolerance under which two total costs count as tied.
pub(crate) fn costs_tie(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::fixtures::{region, world};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn worked_costs() -> CostConstants {
        CostConstants {
            c_switch_0: 100.0,
            switch_exponent: 2.0,
            labor_baseline: 1000.0,
            supervision_baseline: 200.0,
            stations: 50,
        }
    }

    fn worked_product() -> ProductSpec {
        ProductSpec {
            price: 10.0,
            variable_cost: 6.0,
            facility_fixed: 5000.0,
            equipment_fixed: 2000.0,
            n_star_rule: NStarRule::Explicit(5000.0),
        }
    }

    #[test]
    fn mebs_examples() {
        let k = worked_costs();
        let prod = worked_product();
        let c = CapabilityVector::new(0.70, 0.5, 0.99, 0.40).unwrap();
        assert_abs_diff_eq!(mebs(&c, &k, &prod).unwrap(), 1851.0, epsilon = 0.5);
        assert_abs_diff_eq!(mebs(&CapabilityVector::ONE, &k, &prod).unwrap(), 1750.0, epsilon = 1e-9);

        let free = ProductSpec {
            facility_fixed: 0.0,
            equipment_fixed: 0.0,
            ..prod
        };
        let zero_k = CostConstants {
            c_switch_0: 0.0,
            labor_baseline: 0.0,
            supervision_baseline: 0.0,
            ..k
        };
        assert_eq!(mebs(&c, &zero_k, &free).unwrap(), 0.0);

        let loss = ProductSpec { price: 6.0, ..prod };
        assert!(mebs(&c, &k, &loss).is_err());
    }

    #[test]
    fn regime_examples() {
        assert_eq!(regime(1851.0, 5000.0).unwrap().regime, Regime::Distributed);
        assert_eq!(regime(10_000.0, 5000.0).unwrap().regime, Regime::Centralized);
        let edge = regime(5000.0, 5000.0).unwrap();
        assert_eq!(edge.regime, Regime::Centralized);
        assert!(edge.boundary);
        assert!(regime(1.0, 0.0).is_err());
    }

    #[test]
    fn logistics_examples() {
        let w = world(
            vec![
                region("plant", 0.0, 0.0, [1.0; 6], 0.0),
                region("city", 100.0, 0.0, [1.0; 6], 1000.0),
            ],
            0.01,
        );
        let mut a = BTreeMap::new();
        a.insert("city".to_owned(), "plant".to_owned());
        assert_abs_diff_eq!(logistics_cost(&w, &a).unwrap(), 1000.0, epsilon = 1e-9);

        let doubled = World {
            transport_rate: 0.02,
            ..w.clone()
        };
        assert_abs_diff_eq!(logistics_cost(&doubled, &a).unwrap(), 2000.0, epsilon = 1e-9);

        let mut own = BTreeMap::new();
        own.insert("city".to_owned(), "city".to_owned());
        assert_eq!(logistics_cost(&w, &own).unwrap(), 0.0);

        let mut bad = BTreeMap::new();
        bad.insert("city".to_owned(), "nowhere".to_owned());
        assert!(logistics_cost(&w, &bad).is_err());
        assert!(logistics_cost(&w, &BTreeMap::new()).is_err());
    }

    #[test]
    fn n_star_rules() {
        let w = world(
            vec![
                region("a", 0.0, 0.0, [1.0; 6], 300.0),
                region("b", 0.0, 0.0, [1.0; 6], 0.0),
                region("c", 0.0, 0.0, [1.0; 6], 200.0),
            ],
            0.0,
        );
        assert_eq!(n_star(&w, &ProductSpec::default()).unwrap(), 200.0);
        assert_eq!(n_star(&w, &worked_product()).unwrap(), 5000.0);
    }

    #[test]
    fn n_star_rule_serializes_both_forms() {
        let named: ProductSpec = serde_json::from_str(
            r#"{"price":10,"variable_cost":6,"facility_fixed":1,"equipment_fixed":1,"n_star_rule":"min_metro_demand"}"#,
        )
        .unwrap();
        assert_eq!(named.n_star_rule, NStarRule::Named(NamedNStar::MinMetroDemand));
        let explicit: ProductSpec = serde_json::from_str(
            r#"{"price":10,"variable_cost":6,"facility_fixed":1,"equipment_fixed":1,"n_star_rule":2500}"#,
        )
        .unwrap();
        assert_eq!(explicit.n_star_rule, NStarRule::Explicit(2500.0));
    }

    proptest! {
        #[test]
        fn mebs_falls_with_capability(a in prop::array::uniform4(0.0..=1.0f64), b in prop::array::uniform4(0.0..=1.0f64)) {
            let lo: [f64; 4] = std::array::from_fn(|i| a[i].min(b[i]));
            let hi: [f64; 4] = std::array::from_fn(|i| a[i].max(b[i]));
            let lo = CapabilityVector::new(lo[0], lo[1], lo[2], lo[3]).unwrap();
            let hi = CapabilityVector::new(hi[0], hi[1], hi[2], hi[3]).unwrap();
            let k = worked_costs();
            let prod = worked_product();
            prop_assert!(mebs(&hi, &k, &prod).unwrap() <= mebs(&lo, &k, &prod).unwrap());
        }
    }
}
