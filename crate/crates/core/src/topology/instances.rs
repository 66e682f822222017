//! Seeded random allocation instances for solver-versus-oracle comparisons.

use rand::Rng;

use crate::capability::{CapabilityVector, CostConstants, SurfaceThresholds};
use crate::mca::McaModel;
use crate::model::{AllocationOptions, ModelBundle};
use crate::siteselect::WeightProfile;
use crate::world::{EnvironmentReading, FactorCosts, Position, Region, World};

use super::{mebs, NStarRule, NamedNStar, ProductSpec};

/// A random feasible instance with between 1 and `max_regions` regions. Demand
/// is rescaled so that total demand lies between one and five MEBS floors,
/// which keeps the batch constraint binding on a fair share of subsets.
pub fn random_instance<R: Rng>(rng: &mut R, max_regions: usize) -> (ModelBundle, CapabilityVector) {
    let n = rng.gen_range(1..=max_regions.max(1));
    let mut regions: Vec<Region> = (0..n)
        .map(|i| Region {
            id: format!("r{i:02}"),
            name: format!("Region {i}"),
            position: Position {
                x: rng.gen_range(0.0..1000.0),
                y: rng.gen_range(0.0..1000.0),
            },
            factors: FactorCosts::from_array(std::array::from_fn(|_| rng.gen_range(0.0..10.0))),
            environment: EnvironmentReading {
                humidity: rng.gen_range(0.0..100.0),
                dust: rng.gen_range(0.0..3.0),
                thermal_cycling: rng.gen_range(0.0..3.0),
                irradiance: rng.gen_range(800.0..2800.0),
                precipitation_days: rng.gen_range(0.0..250.0),
            },
            habitable: rng.gen_bool(0.8),
            energy_access: rng.gen_bool(0.85),
            demand: if rng.gen_bool(0.25) {
                0.0
            } else {
                rng.gen_range(100.0..5000.0)
            },
        })
        .collect();
    let anchor = rng.gen_range(0..n);
    regions[anchor].habitable = true;
    regions[anchor].energy_access = true;
    if regions.iter().all(|r| r.demand == 0.0) {
        regions[rng.gen_range(0..n)].demand = rng.gen_range(100.0..5000.0);
    }

    let c = CapabilityVector::new(
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..=1.0),
        rng.gen_range(0.0..=1.0),
    )
    .expect("sampled inside the unit cube");
    let costs = CostConstants {
        c_switch_0: rng.gen_range(0.0..20_000.0),
        switch_exponent: rng.gen_range(0.5..3.0),
        labor_baseline: rng.gen_range(0.0..20_000.0),
        supervision_baseline: rng.gen_range(0.0..10_000.0),
        stations: rng.gen_range(1..100),
    };
    let product = ProductSpec {
        price: 10.0,
        variable_cost: rng.gen_range(2.0..8.0),
        facility_fixed: rng.gen_range(0.0..20_000.0),
        equipment_fixed: rng.gen_range(0.0..10_000.0),
        n_star_rule: NStarRule::Named(NamedNStar::MinMetroDemand),
    };
    let floor = mebs(&c, &costs, &product).expect("price exceeds variable cost");
    let total: f64 = regions.iter().map(|r| r.demand).sum();
    let target = floor.max(1.0) * rng.gen_range(1.0..5.0);
    for r in &mut regions {
        r.demand *= target / total;
    }

    let world = World {
        regions,
        transport_rate: rng.gen_range(0.0..0.05),
    };
    let bundle = ModelBundle {
        world,
        weights: WeightProfile::default(),
        costs,
        product,
        thresholds: SurfaceThresholds::default(),
        mca: McaModel::default(),
        options: AllocationOptions::default(),
    };
    (bundle, c)
}
