//! Capability-dependent site selection: labor weight decay, redistribution of
//! the freed weight, weighted-sum objectives with and without the machine
//! climate penalty, Pareto sets and the weight-inversion search.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::capability::{fusion_factor_with, CapabilityVector, FusionExponents};
use crate::error::{Error, Result};
use crate::mca::{adaptation_factor, McaModel};
use crate::path::{find_flip, sample_monotone, CapabilityPath};
use crate::world::{Factor, Region, World};

const WEIGHT_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorWeights {
    pub labor: f64,
    pub logistics: f64,
    pub land: f64,
    pub energy: f64,
    pub market_distance: f64,
    pub regulatory: f64,
}

impl FactorWeights {
    pub fn from_array(v: [f64; 6]) -> Self {
        FactorWeights {
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
}

impl Default for FactorWeights {
    fn default() -> Self {
        FactorWeights::from_array([0.40, 0.15, 0.05, 0.10, 0.20, 0.10])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightProfile {
    /// Weights at zero capability; nonnegative, summing to one.
    pub baseline: FactorWeights,
    /// Weight of the machine-climate penalty.
    pub w_phi: f64,
    #[serde(default)]
    pub fusion: FusionExponents,
}

impl Default for WeightProfile {
    fn default() -> Self {
        WeightProfile {
            baseline: FactorWeights::default(),
            w_phi: 1.0,
            fusion: FusionExponents::default(),
        }
    }
}

impl WeightProfile {
    pub fn validate(&self) -> Result<()> {
        let w = self.baseline.to_array();
        if let Some((i, v)) = w.iter().enumerate().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::Config(format!(
                "weights.baseline.{} = {v} must be >= 0",
                Factor::ALL[i]
            )));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::Config(format!("weights.baseline sums to {sum}, expected 1")));
        }
        if !(self.w_phi.is_finite() && self.w_phi >= 0.0) {
            return Err(Error::Config(format!("weights.w_phi = {} must be >= 0", self.w_phi)));
        }
        self.fusion.validate()
    }

    fn baseline_of(&self, f: Factor) -> f64 {
        self.baseline.to_array()[f.index()]
    }
}

/// Weights in effect at a given capability state. Nonnegative and summing to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveWeights([f64; 6]);

impl EffectiveWeights {
    /// The baseline weights, unchanged.
    pub fn baseline(p: &WeightProfile) -> Self {
        EffectiveWeights(p.baseline.to_array())
    }

    pub fn get(&self, f: Factor) -> f64 {
        self.0[f.index()]
    }

    pub fn as_array(&self) -> &[f64; 6] {
        &self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `w_L(c) = w_L0 * (1 - delta * rho * h(gamma, tau))`.
pub fn labor_weight(c: &CapabilityVector, p: &WeightProfile) -> Result<f64> {
    let h = fusion_factor_with(c.gamma(), c.tau(), &p.fusion)?;
    Ok(p.baseline_of(Factor::Labor) * (1.0 - c.delta() * c.rho() * h))
}

/// Labor weight from [`labor_weight`]; the mass it frees is spread over the
/// other five factors in proportion to their baselines.
pub fn effective_weights(c: &CapabilityVector, p: &WeightProfile) -> Result<EffectiveWeights> {
    let base = p.baseline.to_array();
    let w_l = labor_weight(c, p)?;
    let freed = base[0] - w_l;
    let others: f64 = base[1..].iter().sum();
    if others <= 0.0 {
        if freed > 0.0 {
            return Err(Error::Config(
                "all non-labor baseline weights are zero; freed labor weight has nowhere to go".into(),
            ));
        }
        return Ok(EffectiveWeights(base));
    }
    let mut w = base;
    w[0] = w_l;
    for wi in &mut w[1..] {
        *wi += freed * *wi / others;
    }
    Ok(EffectiveWeights(w))
}

/// `w_L(c) - w_M(c)`: positive while labor dominates market proximity.
pub fn weight_gap(c: &CapabilityVector, p: &WeightProfile) -> Result<f64> {
    let w = effective_weights(c, p)?;
    Ok(w.get(Factor::Labor) - w.get(Factor::MarketDistance))
}

/// Weighted sum of factor costs.
pub fn site_objective(r: &Region, w: &EffectiveWeights) -> f64 {
    r.factors
        .to_array()
        .iter()
        .zip(w.as_array())
        .map(|(f, w)| f * w)
        .sum()
}

/// [`site_objective`] plus `w_phi * (1 - phi)`.
pub fn site_objective_mca(r: &Region, w: &EffectiveWeights, phi: f64, p: &WeightProfile) -> Result<f64> {
    if !(phi > 0.0 && phi <= 1.0) {
        return Err(Error::domain(format!("phi = {phi} outside (0, 1]")));
    }
    Ok(site_objective(r, w) + p.w_phi * (1.0 - phi))
}

/// Attractiveness under baseline (labor-dominated) weights; higher is better.
pub fn traditional_score(r: &Region, p: &WeightProfile) -> f64 {
    -site_objective(r, &EffectiveWeights::baseline(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMode {
    Classic,
    Mca,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SiteScore {
    pub region_id: String,
    pub score: f64,
    /// Adaptation factor, present in mca mode.
    pub phi: Option<f64>,
}

pub(crate) fn by_value_then_id(a: (f64, &str), b: (f64, &str)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

/// Scores every region and sorts ascending (best first), ties by region id.
pub fn select_site(
    world: &World,
    c: &CapabilityVector,
    p: &WeightProfile,
    mode: SelectionMode,
    mca_model: Option<&McaModel>,
) -> Result<Vec<SiteScore>> {
    if world.regions.is_empty() {
        return Err(Error::domain("cannot select a site in an empty world"));
    }
    let w = effective_weights(c, p)?;
    let mut scores = world
        .regions
        .iter()
        .map(|r| match mode {
            SelectionMode::Classic => Ok(SiteScore {
                region_id: r.id.clone(),
                score: site_objective(r, &w),
                phi: None,
            }),
            SelectionMode::Mca => {
                let m = mca_model.ok_or_else(|| Error::domain("mca mode requires an mca model"))?;
                let phi = adaptation_factor(r, m)?;
                Ok(SiteScore {
                    region_id: r.id.clone(),
                    score: site_objective_mca(r, &w, phi, p)?,
                    phi: Some(phi),
                })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    scores.sort_by(|a, b| by_value_then_id((a.score, &a.region_id), (b.score, &b.region_id)));
    Ok(scores)
}

/// Ids (in world order) of regions no other region dominates on `factors`.
pub fn pareto_set(world: &World, factors: &[Factor]) -> Result<Vec<String>> {
    if factors.is_empty() {
        return Err(Error::domain("pareto_set needs at least one factor"));
    }
    let costs: Vec<Vec<f64>> = world
        .regions
        .iter()
        .map(|r| factors.iter().map(|f| r.factors.get(*f)).collect())
        .collect();
    let dominates = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
    };
    Ok(world
        .regions
        .iter()
        .enumerate()
        .filter(|(i, _)| !costs.iter().any(|other| dominates(other, &costs[*i])))
        .map(|(_, r)| r.id.clone())
        .collect())
}

/// Same as [`pareto_set`] with factors given by name.
pub fn pareto_set_by_names(world: &World, names: &[&str]) -> Result<Vec<String>> {
    let factors = names.iter().map(|n| n.parse()).collect::<Result<Vec<Factor>>>()?;
    pareto_set(world, &factors)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub samples: usize,
    pub tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples: 64,
            tol: 1e-6,
        }
    }
}

/// Parameter at which `w_L - w_M` changes sign along `path`, or `None` when it
/// keeps one sign on `[0, 1]`. Rejects paths that decrease anywhere on the scan.
pub fn find_weight_inversion(
    path: &dyn CapabilityPath,
    p: &WeightProfile,
    opts: &ScanOptions,
) -> Result<Option<f64>> {
    sample_monotone(path, opts.samples)?;
    // equality counts as labor-dominated
    find_flip(opts.samples, opts.tol, |t| Ok(weight_gap(&path.at(t)?, p)? < 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::LinearPath;
    use crate::world::fixtures::{region, world};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn profile() -> WeightProfile {
        WeightProfile::default()
    }

    fn ab_world() -> World {
        world(
            vec![
                region("A", 0.0, 0.0, [1.0, 2.0, 2.0, 2.0, 8.0, 2.0], 1.0),
                region("B", 1.0, 0.0, [8.0, 2.0, 2.0, 2.0, 1.0, 2.0], 1.0),
            ],
            0.0,
        )
    }

    fn electronics() -> CapabilityVector {
        CapabilityVector::new(0.70, 0.30, 0.99, 0.40).unwrap()
    }

    #[test]
    fn labor_weight_examples() {
        let p = profile();
        let zero_h = CapabilityVector::new(1.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(labor_weight(&CapabilityVector::ZERO, &p).unwrap(), 0.40);
        assert_eq!(labor_weight(&zero_h, &p).unwrap(), 0.40);
        assert_eq!(labor_weight(&CapabilityVector::ONE, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(labor_weight(&electronics(), &p).unwrap(), 0.30398, epsilon = 1e-5);
    }

    #[test]
    fn effective_weight_examples() {
        let p = profile();
        let base = effective_weights(&CapabilityVector::ZERO, &p).unwrap();
        assert_eq!(base, EffectiveWeights::baseline(&p));

        let w = effective_weights(&electronics(), &p).unwrap();
        assert_abs_diff_eq!(w.get(Factor::Labor), 0.30398, epsilon = 1e-5);
        assert_abs_diff_eq!(w.get(Factor::MarketDistance), 0.23201, epsilon = 1e-5);

        let w = effective_weights(&CapabilityVector::ONE, &p).unwrap();
        assert_eq!(w.get(Factor::Labor), 0.0);
        assert_abs_diff_eq!(w.get(Factor::MarketDistance), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(w.sum(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_profile_is_a_config_error() {
        let p = WeightProfile {
            baseline: FactorWeights::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            ..profile()
        };
        assert!(matches!(
            effective_weights(&CapabilityVector::ONE, &p),
            Err(Error::Config(_))
        ));
        // nothing freed, nothing to redistribute
        assert!(effective_weights(&CapabilityVector::ZERO, &p).is_ok());
    }

    #[test]
    fn site_objective_examples() {
        let w = EffectiveWeights::baseline(&profile());
        let ab = ab_world();
        let constant = region("k", 0.0, 0.0, [3.5; 6], 0.0);
        assert_abs_diff_eq!(site_objective(&constant, &w), 3.5, epsilon = 1e-12);
        assert_abs_diff_eq!(site_objective(&ab.regions[0], &w), 2.8, epsilon = 1e-12);
        assert_abs_diff_eq!(site_objective(&ab.regions[1], &w), 4.2, epsilon = 1e-12);
    }

    #[test]
    fn mca_objective_examples() {
        let p = WeightProfile {
            w_phi: 2.0,
            ..profile()
        };
        let w = EffectiveWeights::baseline(&p);
        let a = &ab_world().regions[0];
        assert_eq!(site_objective_mca(a, &w, 1.0, &p).unwrap(), site_objective(a, &w));
        let off = WeightProfile { w_phi: 0.0, ..p };
        assert_eq!(site_objective_mca(a, &w, 0.3, &off).unwrap(), site_objective(a, &w));
        assert_abs_diff_eq!(site_objective_mca(a, &w, 0.6, &p).unwrap(), 3.6, epsilon = 1e-12);
        assert!(site_objective_mca(a, &w, 0.0, &p).is_err());
    }

    #[test]
    fn select_site_examples() {
        let p = profile();
        let single = world(vec![region("only", 0.0, 0.0, [5.0; 6], 1.0)], 0.0);
        let ranked = select_site(&single, &electronics(), &p, SelectionMode::Classic, None).unwrap();
        assert_eq!(ranked[0].region_id, "only");

        let ab = ab_world();
        let ranked = select_site(&ab, &CapabilityVector::ZERO, &p, SelectionMode::Classic, None).unwrap();
        assert_eq!(ranked[0].region_id, "A");
        assert_abs_diff_eq!(ranked[0].score, 2.8, epsilon = 1e-12);
        assert_abs_diff_eq!(ranked[1].score, 4.2, epsilon = 1e-12);

        // delta * rho * h = 0.9
        let c = CapabilityVector::new(0.9, 1.0, 1.0, 1.0).unwrap();
        let ranked = select_site(&ab, &c, &p, SelectionMode::Classic, None).unwrap();
        assert_eq!(ranked[0].region_id, "B");
        assert_abs_diff_eq!(ranked[0].score, 1.92, epsilon = 1e-12);
        assert_abs_diff_eq!(ranked[1].score, 3.88, epsilon = 1e-12);

        let empty = world(vec![], 0.0);
        assert!(select_site(&empty, &c, &p, SelectionMode::Classic, None).is_err());
        assert!(select_site(&ab, &c, &p, SelectionMode::Mca, None).is_err());
    }

    #[test]
    fn ties_break_by_id() {
        let w = world(
            vec![
                region("z", 0.0, 0.0, [2.0; 6], 1.0),
                region("m", 0.0, 0.0, [2.0; 6], 1.0),
            ],
            0.0,
        );
        let ranked = select_site(&w, &CapabilityVector::ZERO, &profile(), SelectionMode::Classic, None).unwrap();
        assert_eq!(ranked[0].region_id, "m");
    }

    #[test]
    fn traditional_score_examples() {
        let p = profile();
        let ab = ab_world();
        assert_abs_diff_eq!(traditional_score(&region("k", 0.0, 0.0, [2.0; 6], 0.0), &p), -2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(traditional_score(&ab.regions[0], &p), -2.8, epsilon = 1e-12);
        assert_abs_diff_eq!(traditional_score(&ab.regions[1], &p), -4.2, epsilon = 1e-12);
    }

    #[test]
    fn pareto_examples() {
        let f = [Factor::Labor, Factor::Logistics];
        let one = world(vec![region("A", 0.0, 0.0, [1.0; 6], 0.0)], 0.0);
        assert_eq!(pareto_set(&one, &f).unwrap(), ["A"]);

        let dominated = world(
            vec![
                region("A", 0.0, 0.0, [1.0, 2.0, 0.0, 0.0, 0.0, 0.0], 0.0),
                region("B", 0.0, 0.0, [2.0, 3.0, 0.0, 0.0, 0.0, 0.0], 0.0),
            ],
            0.0,
        );
        assert_eq!(pareto_set(&dominated, &f).unwrap(), ["A"]);

        let crossed = world(
            vec![
                region("A", 0.0, 0.0, [1.0, 3.0, 0.0, 0.0, 0.0, 0.0], 0.0),
                region("B", 0.0, 0.0, [3.0, 1.0, 0.0, 0.0, 0.0, 0.0], 0.0),
            ],
            0.0,
        );
        assert_eq!(pareto_set(&crossed, &f).unwrap(), ["A", "B"]);
        assert!(pareto_set_by_names(&crossed, &["labor", "wages"]).is_err());
        assert!(pareto_set(&crossed, &[]).is_err());
    }

    #[test]
    fn weight_inversion_examples() {
        let p = profile();
        let opts = ScanOptions::default();
        let zero = LinearPath::constant(CapabilityVector::ZERO);
        let one = LinearPath::constant(CapabilityVector::ONE);
        assert_eq!(find_weight_inversion(&zero, &p, &opts).unwrap(), None);
        assert_eq!(find_weight_inversion(&one, &p, &opts).unwrap(), None);

        // delta * rho * h = t^3 on the diagonal; inversion at t^3 = 0.375
        let t = find_weight_inversion(&LinearPath::diagonal(), &p, &opts).unwrap().unwrap();
        assert_abs_diff_eq!(t, 0.375f64.cbrt(), epsilon = 1e-6);
        assert_abs_diff_eq!(t, 0.7211, epsilon = 1e-4);

        let down = LinearPath::new(CapabilityVector::ONE, CapabilityVector::ZERO);
        assert!(find_weight_inversion(&down, &p, &opts).is_err());
    }

    fn capability() -> impl Strategy<Value = CapabilityVector> {
        prop::array::uniform4(0.0..=1.0f64).prop_map(|v| CapabilityVector::new(v[0], v[1], v[2], v[3]).unwrap())
    }

    fn profile_strategy() -> impl Strategy<Value = WeightProfile> {
        prop::array::uniform6(0.001..1.0f64).prop_map(|raw| {
            let s: f64 = raw.iter().sum();
            WeightProfile {
                baseline: FactorWeights::from_array(raw.map(|v| v / s)),
                ..WeightProfile::default()
            }
        })
    }

    proptest! {
        #[test]
        fn weights_stay_normalized(c in capability(), p in profile_strategy()) {
            let w = effective_weights(&c, &p).unwrap();
            prop_assert!((w.sum() - 1.0).abs() <= 1e-9);
            prop_assert!(w.as_array().iter().all(|v| *v >= 0.0));
            prop_assert!(w.get(Factor::Labor) <= p.baseline.labor);
        }

        #[test]
        fn winner_is_pareto_optimal(
            c in capability(),
            factors in prop::collection::vec(prop::array::uniform6(0.0..10.0f64), 1..8)
        ) {
            let regions = factors.iter().enumerate()
                .map(|(i, f)| region(&format!("r{i}"), 0.0, 0.0, *f, 1.0)).collect();
            let w = world(regions, 0.0);
            let ranked = select_site(&w, &c, &profile(), SelectionMode::Classic, None).unwrap();
            let front = pareto_set(&w, &Factor::ALL).unwrap();
            prop_assert!(front.contains(&ranked[0].region_id));
        }
    }
}
