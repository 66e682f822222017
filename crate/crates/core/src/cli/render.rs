//! Table and CSV rendering for the subcommands. Every number is written with
//! six decimals so output is byte-stable.

use crate::capability::{CapabilityMinimums, IndustryPreset};
use crate::mca::McaRanking;
use crate::siteselect::SiteScore;
use crate::topology::{FacilityCost, RegimeVerdict};

fn fixed(v: f64) -> String {
    format!("{v:.6}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fixed).unwrap_or_default()
}

pub fn yield_table(rho: f64, n: u32, y: f64) -> String {
    format!("rho,n,yield\n{},{n},{}\n", fixed(rho), fixed(y))
}

pub fn mebs_table(mebs: f64, n_star: f64, verdict: RegimeVerdict, terms: &FacilityCost) -> String {
    format!(
        "mebs,n_star,regime,boundary,facility,equipment,switching,labor\n{},{},{:?},{},{},{},{},{}\n",
        fixed(mebs),
        fixed(n_star),
        verdict.regime,
        verdict.boundary,
        fixed(terms.facility),
        fixed(terms.equipment),
        fixed(terms.switching),
        fixed(terms.labor),
    )
}

pub fn site_scores(scores: &[SiteScore]) -> String {
    let mut out = String::from("rank,region_id,objective,phi\n");
    for (i, s) in scores.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", i + 1, s.region_id, fixed(s.score), opt(s.phi)));
    }
    out
}

pub fn mca_ranking(ranking: &[McaRanking]) -> String {
    let mut out = String::from("rank,region_id,phi");
    if let Some(first) = ranking.first() {
        for (p, _) in &first.responses {
            out.push(',');
            out.push_str(p.name());
        }
    }
    out.push('\n');
    for (i, r) in ranking.iter().enumerate() {
        out.push_str(&format!("{},{},{}", i + 1, r.region_id, fixed(r.phi)));
        for (_, v) in &r.responses {
            out.push(',');
            out.push_str(&fixed(*v));
        }
        out.push('\n');
    }
    out
}

pub const PRESET_COLUMNS: &str = "name,delta,gamma,rho,tau,\
sigma_w_delta_min,sigma_w_gamma_min,sigma_w_rho_min,\
sigma_n_delta_min,sigma_n_gamma_min,sigma_n_rho_min,\
theta_h,theta_g,tau_min";

fn minimums(m: Option<CapabilityMinimums>) -> [String; 3] {
    [
        opt(m.map(|m| m.delta_min)),
        opt(m.map(|m| m.gamma_min)),
        opt(m.map(|m| m.rho_min)),
    ]
}

pub fn presets(presets: &[IndustryPreset]) -> String {
    let mut out = format!("{PRESET_COLUMNS}\n");
    for p in presets {
        let mut row = vec![p.name.clone()];
        row.extend(p.current.to_array().map(fixed));
        row.extend(minimums(p.thresholds.sigma_w));
        row.extend(minimums(p.thresholds.sigma_n));
        let h = p.thresholds.sigma_h;
        row.extend([h.theta_h, h.theta_g, h.tau_min].map(fixed));
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
