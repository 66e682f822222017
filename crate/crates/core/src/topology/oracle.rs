//! Reference allocation by plain enumeration, used to check [`super::allocate`].

use std::collections::BTreeMap;

use crate::capability::CapabilityVector;
use crate::error::{Error, Result};
use crate::mca::feasible_set;
use crate::model::ModelBundle;
use crate::world::{distance, Region};

use super::{costs_tie, facility_terms, Allocation, FacilityVolume};

/// Candidate-count guard against exponential blowup.
pub const ORACLE_LIMIT: usize = 15;

/// Exact optimum over every nonempty subset of feasible sites.
pub fn brute_force_allocate(bundle: &ModelBundle, c: &CapabilityVector) -> Result<Allocation> {
    let w = &bundle.world;
    let mut sites: Vec<&Region> = feasible_set(w, c, &bundle.thresholds)
        .iter()
        .map(|id| w.region(id).expect("feasible ids come from the world"))
        .collect();
    if sites.len() > ORACLE_LIMIT {
        return Err(Error::Size(format!(
            "{} candidate sites exceed the oracle limit of {ORACLE_LIMIT}",
            sites.len()
        )));
    }
    if w.total_demand().is_nan() || w.total_demand() <= 0.0 {
        return Err(Error::domain("total demand must be positive to allocate"));
    }
    sites.sort_by(|a, b| a.id.cmp(&b.id));
    let terms = sites
        .iter()
        .map(|r| facility_terms(bundle, c, r))
        .collect::<Result<Vec<_>>>()?;

    let mut best: Option<(f64, Vec<String>, Allocation)> = None;
    for mask in 1u32..(1u32 << sites.len()) {
        let open: Vec<usize> = (0..sites.len()).filter(|i| mask >> i & 1 == 1).collect();
        let ids: Vec<String> = open.iter().map(|&i| sites[i].id.clone()).collect();

        let mut assignment = BTreeMap::new();
        let mut volumes = vec![0.0; sites.len()];
        let mut logistics = 0.0;
        for d in w.regions.iter().filter(|r| r.demand > 0.0) {
            let nearest = open
                .iter()
                .copied()
                .min_by(|&a, &b| {
                    distance(sites[a], d)
                        .total_cmp(&distance(sites[b], d))
                        .then_with(|| sites[a].id.cmp(&sites[b].id))
                })
                .expect("open is nonempty");
            volumes[nearest] += d.demand;
            logistics += d.demand * w.transport_rate * distance(sites[nearest], d);
            assignment.insert(d.id.clone(), sites[nearest].id.clone());
        }
        if open.iter().any(|&i| volumes[i] < terms[i].1) {
            continue;
        }
        let fixed: f64 = open.iter().map(|&i| terms[i].0).sum();
        let variable = bundle.product.variable_cost * w.total_demand();
        let total = fixed + variable + logistics;

        let improves = match &best {
            None => true,
            Some((cost, best_ids, _)) => {
                if costs_tie(total, *cost) {
                    ids < *best_ids
                } else {
                    total < *cost
                }
            }
        };
        if improves {
            let volume_of = |id: &str| {
                sites
                    .iter()
                    .position(|s| s.id == id)
                    .map_or(0.0, |i| if open.contains(&i) { volumes[i] } else { 0.0 })
            };
            let allocation = Allocation {
                facilities: w
                    .regions
                    .iter()
                    .filter(|r| ids.contains(&r.id))
                    .map(|r| FacilityVolume {
                        region_id: r.id.clone(),
                        volume: volume_of(&r.id),
                    })
                    .collect(),
                assignment,
                total_cost: total,
                fixed_cost: fixed,
                variable_cost: variable,
                logistics_cost: logistics,
                outputs: w.regions.iter().map(|r| (r.id.clone(), volume_of(&r.id))).collect(),
            };
            best = Some((total, ids, allocation));
        }
    }
    best.map(|(_, _, a)| a).ok_or_else(|| {
        if sites.is_empty() {
            Error::Infeasible(format!("no feasible facility site at c = {c}"))
        } else {
            Error::Infeasible("no facility set meets the MEBS floor at every facility".into())
        }
    })
}
