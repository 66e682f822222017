//! The concentration order parameter, phase labels, and sweeps through
//! capability space that locate discontinuities in manufacturing topology.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::capability::{crossed_sigma_h, CapabilityVector, SurfaceThresholds};
use crate::error::{Error, Result};
use crate::model::ModelBundle;
use crate::path::{find_flip, refine_boundary, sample_grid, sample_monotone, CapabilityPath};
use crate::siteselect::{find_weight_inversion, weight_gap, ScanOptions, WeightProfile};
use crate::topology::{allocate, mebs, n_star};

/// Sum of squared output shares. 1 when one region produces everything,
/// `1/|R|` when output is uniform.
pub fn mci(outputs: &[f64]) -> Result<f64> {
    if outputs.is_empty() {
        return Err(Error::domain("MCI needs at least one region"));
    }
    if let Some(bad) = outputs.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
        return Err(Error::domain(format!("regional output {bad} must be finite and >= 0")));
    }
    let total: f64 = outputs.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(Error::domain("MCI is undefined when total output is zero"));
    }
    Ok(outputs.iter().map(|m| (m / total).powi(2)).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PhaseLabel {
    /// Labor cost dominates siting.
    PhaseI,
    /// Market proximity dominates siting.
    PhaseII,
    /// Decoupled from human infrastructure.
    PhaseIII,
}

impl fmt::Display for PhaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhaseLabel::PhaseI => "PhaseI",
            PhaseLabel::PhaseII => "PhaseII",
            PhaseLabel::PhaseIII => "PhaseIII",
        })
    }
}

/// III beyond the decoupling surface, else II once market weight strictly
/// exceeds labor weight, else I.
pub fn classify_phase(c: &CapabilityVector, p: &WeightProfile, t: &SurfaceThresholds) -> Result<PhaseLabel> {
    if crossed_sigma_h(c, t) {
        return Ok(PhaseLabel::PhaseIII);
    }
    Ok(if weight_gap(c, p)? < 0.0 {
        PhaseLabel::PhaseII
    } else {
        PhaseLabel::PhaseI
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalKind {
    SigmaW,
    SigmaN,
    SigmaH,
    MciJump,
}

impl fmt::Display for CriticalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CriticalKind::SigmaW => "SigmaW",
            CriticalKind::SigmaN => "SigmaN",
            CriticalKind::SigmaH => "SigmaH",
            CriticalKind::MciJump => "MciJump",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoint {
    pub t: f64,
    pub kind: CriticalKind,
    /// `|delta MCI|` across the bracket, for jumps.
    pub magnitude: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSample {
    pub t: f64,
    pub mci: f64,
    pub phase: PhaseLabel,
    pub facilities: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub samples: Vec<SweepSample>,
    /// Sorted by `t`.
    pub critical_points: Vec<CriticalPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub jump_threshold: f64,
    pub tol: f64,
    /// Resolution of the scans that precede bisection.
    pub scan_samples: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            jump_threshold: 0.1,
            tol: 1e-4,
            scan_samples: 64,
        }
    }
}

fn sample_at(path: &dyn CapabilityPath, t: f64, bundle: &ModelBundle) -> Result<SweepSample> {
    let run = || -> Result<SweepSample> {
        let c = path.at(t)?;
        let allocation = allocate(bundle, &c)?;
        Ok(SweepSample {
            t,
            mci: mci(&allocation.output_values())?,
            phase: classify_phase(&c, &bundle.weights, &bundle.thresholds)?,
            facilities: allocation.facility_count(),
        })
    };
    run().map_err(|e| Error::at(t, e))
}

fn mci_at(path: &dyn CapabilityPath, t: f64, bundle: &ModelBundle) -> Result<f64> {
    Ok(sample_at(path, t, bundle)?.mci)
}

/// Narrows `[lo, hi]` onto the larger half of an MCI jump. Returns the point
/// only if the jump survives refinement at full threshold.
fn refine_jump(
    path: &dyn CapabilityPath,
    bundle: &ModelBundle,
    (mut lo, mut mci_lo): (f64, f64),
    (mut hi, mut mci_hi): (f64, f64),
    opts: &SweepOptions,
) -> Result<Option<CriticalPoint>> {
    while hi - lo > opts.tol {
        let mid = 0.5 * (lo + hi);
        let mci_mid = mci_at(path, mid, bundle)?;
        if (mci_mid - mci_lo).abs() >= (mci_hi - mci_mid).abs() {
            hi = mid;
            mci_hi = mci_mid;
        } else {
            lo = mid;
            mci_lo = mci_mid;
        }
    }
    let magnitude = (mci_hi - mci_lo).abs();
    Ok((magnitude >= opts.jump_threshold).then_some(CriticalPoint {
        t: 0.5 * (lo + hi),
        kind: CriticalKind::MciJump,
        magnitude: Some(magnitude),
    }))
}

fn surface_crossing(
    path: &dyn CapabilityPath,
    kind: CriticalKind,
    bundle: &ModelBundle,
    opts: &SweepOptions,
) -> Result<Option<f64>> {
    match kind {
        CriticalKind::SigmaW => find_weight_inversion(
            path,
            &bundle.weights,
            &ScanOptions {
                samples: opts.scan_samples,
                tol: opts.tol,
            },
        ),
        CriticalKind::SigmaH => find_flip(opts.scan_samples, opts.tol, |t| {
            Ok(crossed_sigma_h(&path.at(t)?, &bundle.thresholds))
        }),
        CriticalKind::SigmaN => {
            let threshold = n_star(&bundle.world, &bundle.product)?;
            find_flip(opts.scan_samples, opts.tol, |t| {
                Ok(mebs(&path.at(t)?, &bundle.costs, &bundle.product)? < threshold)
            })
        }
        CriticalKind::MciJump => unreachable!("jumps are located from samples"),
    }
}

/// Locates one critical point of the requested kind along `path`. For jumps,
/// the largest adjacent-sample jump on the scan grid is refined.
pub fn find_critical_point(
    path: &dyn CapabilityPath,
    detector: CriticalKind,
    bundle: &ModelBundle,
    opts: &SweepOptions,
) -> Result<Option<CriticalPoint>> {
    if detector != CriticalKind::MciJump {
        return Ok(surface_crossing(path, detector, bundle, opts)?.map(|t| CriticalPoint {
            t,
            kind: detector,
            magnitude: None,
        }));
    }
    let grid = sample_grid(opts.scan_samples.max(2));
    let values = grid
        .iter()
        .map(|&t| mci_at(path, t, bundle))
        .collect::<Result<Vec<_>>>()?;
    let largest = (1..grid.len())
        .map(|i| (i, (values[i] - values[i - 1]).abs()))
        .filter(|(_, d)| *d > 0.0 && *d >= opts.jump_threshold)
        .fold(None, |best: Option<(usize, f64)>, x| match best {
            Some(b) if b.1 >= x.1 => Some(b),
            _ => Some(x),
        });
    match largest {
        Some((i, _)) => refine_jump(
            path,
            bundle,
            (grid[i - 1], values[i - 1]),
            (grid[i], values[i]),
            opts,
        ),
        None => Ok(None),
    }
}

/// Runs the allocation at `steps` evenly spaced parameters, then reports MCI
/// jumps and the weight-inversion, batch-collapse and decoupling crossings.
pub fn sweep_1d(
    path: &dyn CapabilityPath,
    steps: usize,
    bundle: &ModelBundle,
    opts: &SweepOptions,
) -> Result<SweepResult> {
    if steps < 2 {
        return Err(Error::domain(format!("a sweep needs at least 2 steps, got {steps}")));
    }
    sample_monotone(path, opts.scan_samples.max(2))?;
    let grid = sample_grid(steps);
    let samples = grid
        .par_iter()
        .map(|&t| sample_at(path, t, bundle))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut critical_points = Vec::new();
    for pair in samples.windows(2) {
        if (pair[1].mci - pair[0].mci).abs() >= opts.jump_threshold {
            let point = refine_jump(
                path,
                bundle,
                (pair[0].t, pair[0].mci),
                (pair[1].t, pair[1].mci),
                opts,
            )?;
            critical_points.extend(point);
        }
    }
    for kind in [CriticalKind::SigmaW, CriticalKind::SigmaN, CriticalKind::SigmaH] {
        if let Some(t) = surface_crossing(path, kind, bundle, opts)? {
            critical_points.push(CriticalPoint {
                t,
                kind,
                magnitude: None,
            });
        }
    }
    critical_points.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(SweepResult {
        samples,
        critical_points,
    })
}

impl SweepResult {
    /// `t,mci,phase,facilities`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,mci,phase,facilities\n");
        for s in &self.samples {
            out.push_str(&format!("{:.6},{:.6},{},{}\n", s.t, s.mci, s.phase, s.facilities));
        }
        out
    }

    /// `t,kind,magnitude`.
    pub fn critical_points_csv(&self) -> String {
        let mut out = String::from("t,kind,magnitude\n");
        for p in &self.critical_points {
            let magnitude = p.magnitude.map(|m| format!("{m:.6}")).unwrap_or_default();
            out.push_str(&format!("{:.6},{},{}\n", p.t, p.kind, magnitude));
        }
        out
    }
}

/// How a value `a` of the product `delta * rho` is split into its factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisEmbedding {
    /// `delta = rho = sqrt(a)`.
    #[default]
    Symmetric,
    /// `delta = a`, `rho = 1`.
    Dexterity,
}

impl AxisEmbedding {
    pub fn embed(self, a: f64, gamma: f64, tau: f64) -> Result<CapabilityVector> {
        match self {
            AxisEmbedding::Symmetric => CapabilityVector::new(a.sqrt(), gamma, a.sqrt(), tau),
            AxisEmbedding::Dexterity => CapabilityVector::new(a, gamma, 1.0, tau),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagramCell {
    pub a: f64,
    pub gamma: f64,
    pub phase: PhaseLabel,
    /// Absent when the allocation failed; see `error`.
    pub mci: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagram {
    /// Values of `delta * rho`, one per row.
    pub a_axis: Vec<f64>,
    /// Values of `gamma`, one per column.
    pub gamma_axis: Vec<f64>,
    pub fixed_tau: f64,
    pub embedding: AxisEmbedding,
    /// Row-major: row `i` holds `a_axis[i]` against every gamma.
    pub cells: Vec<DiagramCell>,
}

impl PhaseDiagram {
    pub fn resolution(&self) -> (usize, usize) {
        (self.a_axis.len(), self.gamma_axis.len())
    }

    pub fn cell(&self, row: usize, col: usize) -> &DiagramCell {
        &self.cells[row * self.gamma_axis.len() + col]
    }

    /// Labels of cells `(i, i)`.
    pub fn diagonal(&self) -> Vec<PhaseLabel> {
        let (rows, cols) = self.resolution();
        (0..rows.min(cols)).map(|i| self.cell(i, i).phase).collect()
    }

    /// `a,gamma,phase,mci`, row-major.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("a,gamma,phase,mci\n");
        for cell in &self.cells {
            let mci = cell.mci.map(|m| format!("{m:.6}")).unwrap_or_default();
            out.push_str(&format!("{:.6},{:.6},{},{}\n", cell.a, cell.gamma, cell.phase, mci));
        }
        out
    }
}

/// Labels and concentration over the `(delta * rho, gamma)` plane at fixed tau.
pub fn sweep_2d(
    fixed_tau: f64,
    resolution: (usize, usize),
    bundle: &ModelBundle,
    embedding: AxisEmbedding,
) -> Result<PhaseDiagram> {
    let (rows, cols) = resolution;
    if rows < 2 || cols < 2 {
        return Err(Error::domain(format!(
            "phase diagram resolution must be at least 2x2, got {rows}x{cols}"
        )));
    }
    crate::capability::check_unit("fixed_tau", fixed_tau)?;
    let a_axis = sample_grid(rows);
    let gamma_axis = sample_grid(cols);
    let cells = (0..rows * cols)
        .into_par_iter()
        .map(|k| {
            let (a, gamma) = (a_axis[k / cols], gamma_axis[k % cols]);
            let c = embedding.embed(a, gamma, fixed_tau)?;
            let phase = classify_phase(&c, &bundle.weights, &bundle.thresholds)?;
            let (mci, error) = match allocate(bundle, &c).and_then(|al| mci(&al.output_values())) {
                Ok(m) => (Some(m), None),
                Err(e) => (None, Some(e.to_string())),
            };
            Ok(DiagramCell {
                a,
                gamma,
                phase,
                mci,
                error,
            })
        })
        .collect::<Vec<Result<DiagramCell>>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseDiagram {
        a_axis,
        gamma_axis,
        fixed_tau,
        embedding,
        cells,
    })
}

/// Refines the parameter where `classify_phase` first reaches `target` along a
/// monotone path.
pub fn phase_boundary(
    path: &dyn CapabilityPath,
    target: PhaseLabel,
    p: &WeightProfile,
    thresholds: &SurfaceThresholds,
    tol: f64,
) -> Result<Option<f64>> {
    let reached = |t: f64| -> Result<bool> { Ok(classify_phase(&path.at(t)?, p, thresholds)? >= target) };
    if reached(0.0)? || !reached(1.0)? {
        return Ok(None);
    }
    let (lo, hi) = refine_boundary(0.0, 1.0, tol, reached)?;
    Ok(Some(0.5 * (lo + hi)))
}
