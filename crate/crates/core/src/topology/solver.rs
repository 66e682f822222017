use std::collections::BTreeMap;

use crate::capability::CapabilityVector;
use crate::error::{Error, Result};
use crate::mca::feasible_set;
use crate::model::{AllocationMethod, ModelBundle};
use crate::world::distance;

use super::{costs_tie, facility_terms, Allocation, FacilityVolume};

/// Largest candidate count solved by exact enumeration under [`AllocationMethod::Auto`].
pub const EXACT_LIMIT: usize = 12;

/// Hard ceiling for [`AllocationMethod::Exact`].
const EXACT_CEILING: usize = 22;

struct Candidate {
    id: String,
    fixed: f64,
    floor: f64,
}

/// Precomputed instance; candidates are sorted by id so index order is id order.
struct Instance {
    candidates: Vec<Candidate>,
    /// (region id, demand) for regions with positive demand.
    demands: Vec<(String, f64)>,
    /// `dist[d][f]` from demand region `d` to candidate `f`.
    dist: Vec<Vec<f64>>,
    rate: f64,
    variable_total: f64,
}

struct Evaluation {
    open: Vec<usize>,
    total: f64,
    fixed: f64,
    logistics: f64,
    /// Candidate index serving each demand region.
    served_by: Vec<usize>,
}

impl Evaluation {
    fn beats(&self, other: &Evaluation) -> bool {
        if costs_tie(self.total, other.total) {
            self.open < other.open
        } else {
            self.total < other.total
        }
    }
}

impl Instance {
    fn build(bundle: &ModelBundle, c: &CapabilityVector) -> Result<Self> {
        let w = &bundle.world;
        let total_demand = w.total_demand();
        if total_demand.is_nan() || total_demand <= 0.0 {
            return Err(Error::domain("total demand must be positive to allocate"));
        }
        let feasible = feasible_set(w, c, &bundle.thresholds);
        if feasible.is_empty() {
            return Err(Error::Infeasible(format!(
                "no feasible facility site at c = {c}: no region has energy access{}",
                if crate::capability::crossed_sigma_h(c, &bundle.thresholds) {
                    ""
                } else {
                    " and habitable infrastructure"
                }
            )));
        }
        let mut candidates = feasible
            .iter()
            .map(|id| {
                let r = w.region(id).expect("feasible ids come from the world");
                let (fixed, floor) = facility_terms(bundle, c, r)?;
                Ok(Candidate {
                    id: id.clone(),
                    fixed,
                    floor,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        candidates.sort_by(|a, b| a.id.cmp(&b.id));

        if candidates.iter().all(|f| f.floor > total_demand) {
            let lowest = candidates.iter().map(|f| f.floor).fold(f64::INFINITY, f64::min);
            return Err(Error::Infeasible(format!(
                "MEBS floor {lowest:.6} exceeds total demand {total_demand:.6}; no facility can reach its minimum economic batch"
            )));
        }

        let demand_regions: Vec<_> = w.demand_regions().collect();
        let dist = demand_regions
            .iter()
            .map(|d| {
                candidates
                    .iter()
                    .map(|f| distance(w.region(&f.id).expect("candidate exists"), d))
                    .collect()
            })
            .collect();
        Ok(Instance {
            candidates,
            demands: demand_regions.iter().map(|r| (r.id.clone(), r.demand)).collect(),
            dist,
            rate: w.transport_rate,
            variable_total: bundle.product.variable_cost * total_demand,
        })
    }

    /// Cost of opening `open` (sorted candidate indices) with nearest-facility
    /// assignment; `None` when a facility misses its MEBS floor.
    fn evaluate(&self, open: &[usize]) -> Option<Evaluation> {
        if open.is_empty() {
            return None;
        }
        let mut volume = vec![0.0; self.candidates.len()];
        let mut served_by = Vec::with_capacity(self.demands.len());
        let mut logistics = 0.0;
        for (d, (_, demand)) in self.demands.iter().enumerate() {
            // strict < keeps the lowest index (smallest id) on distance ties
            let mut best = open[0];
            for &f in &open[1..] {
                if self.dist[d][f] < self.dist[d][best] {
                    best = f;
                }
            }
            volume[best] += demand;
            logistics += demand * self.rate * self.dist[d][best];
            served_by.push(best);
        }
        if open.iter().any(|&f| volume[f] < self.candidates[f].floor) {
            return None;
        }
        let fixed: f64 = open.iter().map(|&f| self.candidates[f].fixed).sum();
        Some(Evaluation {
            open: open.to_vec(),
            total: fixed + self.variable_total + logistics,
            fixed,
            logistics,
            served_by,
        })
    }

    fn keep_better(best: &mut Option<Evaluation>, candidate: Option<Evaluation>) {
        if let Some(e) = candidate {
            if best.as_ref().is_none_or(|b| e.beats(b)) {
                *best = Some(e);
            }
        }
    }

    fn exact(&self) -> Option<Evaluation> {
        let n = self.candidates.len();
        let mut best = None;
        let mut open = Vec::with_capacity(n);
        for mask in 1u64..(1u64 << n) {
            open.clear();
            open.extend((0..n).filter(|i| mask & (1 << i) != 0));
            Self::keep_better(&mut best, self.evaluate(&open));
        }
        best
    }

    fn neighbours(&self, open: &[usize]) -> Vec<Vec<usize>> {
        let n = self.candidates.len();
        let closed: Vec<usize> = (0..n).filter(|i| !open.contains(i)).collect();
        let mut moves = Vec::new();
        for &j in &closed {
            let mut s = open.to_vec();
            s.push(j);
            s.sort_unstable();
            moves.push(s);
        }
        if open.len() > 1 {
            for &i in open {
                moves.push(open.iter().copied().filter(|&f| f != i).collect());
            }
        }
        for &i in open {
            for &j in &closed {
                let mut s: Vec<usize> = open.iter().map(|&f| if f == i { j } else { f }).collect();
                s.sort_unstable();
                moves.push(s);
            }
        }
        moves
    }

    /// Best-improvement add/drop/swap descent from `start`.
    fn descend(&self, mut current: Evaluation) -> Evaluation {
        loop {
            let mut best_move: Option<Evaluation> = None;
            for s in self.neighbours(&current.open) {
                Self::keep_better(&mut best_move, self.evaluate(&s));
            }
            match best_move {
                Some(e) if e.beats(&current) => current = e,
                _ => return current,
            }
        }
    }

    /// Greedy additions from the best single site, then add/drop/swap descent.
    /// The descent is restarted from every feasible single site as well and the
    /// best local optimum wins.
    fn local_search(&self) -> Option<Evaluation> {
        let n = self.candidates.len();
        let singles: Vec<Evaluation> = (0..n).filter_map(|f| self.evaluate(&[f])).collect();
        let mut greedy = None;
        for e in &singles {
            if greedy.as_ref().is_none_or(|g: &Evaluation| e.beats(g)) {
                greedy = self.evaluate(&e.open);
            }
        }
        let mut greedy = greedy?;
        loop {
            let mut best_add: Option<Evaluation> = None;
            for j in (0..n).filter(|j| !greedy.open.contains(j)) {
                let mut s = greedy.open.clone();
                s.push(j);
                s.sort_unstable();
                Self::keep_better(&mut best_add, self.evaluate(&s));
            }
            match best_add {
                Some(e) if e.total < greedy.total && !costs_tie(e.total, greedy.total) => greedy = e,
                _ => break,
            }
        }

        let mut best = Some(self.descend(greedy));
        for start in singles {
            Self::keep_better(&mut best, Some(self.descend(start)));
        }
        best
    }

    fn into_allocation(self, bundle: &ModelBundle, e: Evaluation) -> Allocation {
        let mut volume: BTreeMap<&str, f64> = BTreeMap::new();
        let mut assignment = BTreeMap::new();
        for (d, &f) in e.served_by.iter().enumerate() {
            let (demand_id, demand) = &self.demands[d];
            let facility = self.candidates[f].id.as_str();
            *volume.entry(facility).or_default() += demand;
            assignment.insert(demand_id.clone(), facility.to_owned());
        }
        let w = &bundle.world;
        let facilities = w
            .regions
            .iter()
            .filter(|r| e.open.iter().any(|&f| self.candidates[f].id == r.id))
            .map(|r| FacilityVolume {
                region_id: r.id.clone(),
                volume: volume.get(r.id.as_str()).copied().unwrap_or(0.0),
            })
            .collect();
        let outputs = w
            .regions
            .iter()
            .map(|r| (r.id.clone(), volume.get(r.id.as_str()).copied().unwrap_or(0.0)))
            .collect();
        Allocation {
            facilities,
            assignment,
            total_cost: e.total,
            fixed_cost: e.fixed,
            variable_cost: self.variable_total,
            logistics_cost: e.logistics,
            outputs,
        }
    }
}

/// Cost-minimizing facility set over the feasible regions at capability `c`,
/// each facility meeting its minimum economic batch. Exact enumeration for
/// small candidate sets, greedy plus add/drop/swap local search otherwise.
pub fn allocate(bundle: &ModelBundle, c: &CapabilityVector) -> Result<Allocation> {
    let instance = Instance::build(bundle, c)?;
    let n = instance.candidates.len();
    let best = match bundle.options.method {
        AllocationMethod::Auto if n <= EXACT_LIMIT => instance.exact(),
        AllocationMethod::Exact if n <= EXACT_CEILING => instance.exact(),
        AllocationMethod::Exact => {
            return Err(Error::Size(format!(
                "{n} candidate sites exceed the exact-enumeration ceiling of {EXACT_CEILING}"
            )))
        }
        AllocationMethod::Auto | AllocationMethod::LocalSearch => instance.local_search(),
    };
    let best = best.ok_or_else(|| {
        Error::Infeasible("no facility set meets the MEBS floor at every facility".into())
    })?;
    Ok(instance.into_allocation(bundle, best))
}
