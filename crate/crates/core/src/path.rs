//! One-parameter paths through capability space and the scan-then-bisect
//! machinery used to locate transitions along them.

use serde::{Deserialize, Serialize};

use crate::capability::CapabilityVector;
use crate::error::{Error, Result};

/// A map `t -> c(t)` for `t` in `[0, 1]`.
pub trait CapabilityPath: Sync {
    fn at(&self, t: f64) -> Result<CapabilityVector>;
}

impl<F> CapabilityPath for F
where
    F: Fn(f64) -> CapabilityVector + Sync,
{
    fn at(&self, t: f64) -> Result<CapabilityVector> {
        Ok(self(t))
    }
}

/// Straight segment from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearPath {
    pub from: CapabilityVector,
    pub to: CapabilityVector,
}

impl LinearPath {
    pub fn new(from: CapabilityVector, to: CapabilityVector) -> Self {
        LinearPath { from, to }
    }

    /// `delta = gamma = rho = tau = t`.
    pub fn diagonal() -> Self {
        LinearPath::new(CapabilityVector::ZERO, CapabilityVector::ONE)
    }

    pub fn constant(c: CapabilityVector) -> Self {
        LinearPath::new(c, c)
    }
}

impl CapabilityPath for LinearPath {
    fn at(&self, t: f64) -> Result<CapabilityVector> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::domain(format!("path parameter {t} outside [0, 1]")));
        }
        let a = self.from.to_array();
        let b = self.to.to_array();
        let v: [f64; 4] = std::array::from_fn(|i| {
            // exact endpoints regardless of rounding
            if t == 1.0 {
                b[i]
            } else {
                a[i] + (b[i] - a[i]) * t
            }
        });
        CapabilityVector::new(v[0], v[1], v[2], v[3])
    }
}

/// `samples` evenly spaced parameters covering `[0, 1]` inclusive.
pub fn sample_grid(samples: usize) -> Vec<f64> {
    match samples {
        0 => Vec::new(),
        1 => vec![0.0],
        n => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Samples the path and rejects it unless it is componentwise nondecreasing.
pub fn sample_monotone(path: &dyn CapabilityPath, samples: usize) -> Result<Vec<(f64, CapabilityVector)>> {
    let points = sample_grid(samples)
        .into_iter()
        .map(|t| path.at(t).map(|c| (t, c)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(w) = points.windows(2).find(|w| !w[1].1.dominates(&w[0].1)) {
        return Err(Error::domain(format!(
            "path is not componentwise nondecreasing between t = {} and t = {}",
            w[0].0, w[1].0
        )));
    }
    Ok(points)
}

/// Bisects `[lo, hi]` where `after(lo)` is false and `after(hi)` is true until the
/// bracket is no wider than `tol`. Returns the final bracket.
pub fn refine_boundary<F>(mut lo: f64, mut hi: f64, tol: f64, mut after: F) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<bool>,
{
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain(format!("tolerance must be > 0, got {tol}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if after(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Scan-then-bisect search for the first parameter at which `after` flips from
/// false to true. `None` when no flip is visible at the scan resolution.
pub fn find_flip<F>(samples: usize, tol: f64, mut after: F) -> Result<Option<f64>>
where
    F: FnMut(f64) -> Result<bool>,
{
    let grid = sample_grid(samples.max(2));
    let mut prev_t = grid[0];
    let mut prev = after(prev_t)?;
    for &t in &grid[1..] {
        let now = after(t)?;
        if !prev && now {
            let (lo, hi) = refine_boundary(prev_t, t, tol, &mut after)?;
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev_t = t;
        prev = now;
    }
    Ok(None)
}
