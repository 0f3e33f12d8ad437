use serde::Serialize;

use super::trajectory::{probe, OdeConfig, Probe};
use crate::{Error, Result};

/// Bisection bracket and resolution for `d_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmaxScan {
    pub lo: f64,
    pub hi: f64,
    pub resolution: f64,
}

impl Default for DmaxScan {
    fn default() -> Self {
        DmaxScan { lo: 1.0, hi: 6.0, resolution: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmaxResult {
    pub alpha: f64,
    pub delta: usize,
    /// Largest feasible probe; `None` when even `lo` is infeasible.
    pub d_max: Option<f64>,
    /// Every probe in evaluation order.
    pub probes: Vec<Probe>,
}

/// Largest `d` in the bracket for which λ stays below 1 while γ > 0, to
/// within `scan.resolution`.
pub fn d_max(alpha: f64, delta: usize, scan: &DmaxScan) -> Result<DmaxResult> {
    if !(alpha >= 1.0) {
        return Err(Error::param(format!("alpha must be at least 1, got {alpha}")));
    }
    if !(scan.lo > 0.0 && scan.lo < scan.hi && scan.resolution > 0.0) {
        return Err(Error::param("invalid d_max bracket"));
    }
    let run = |d: f64| probe(&OdeConfig::new(d, alpha).with_delta(delta));
    let mut probes = Vec::new();
    let low = run(scan.lo)?;
    let low_ok = low.feasible;
    probes.push(low);
    if !low_ok {
        return Ok(DmaxResult { alpha, delta, d_max: None, probes });
    }
    let high = run(scan.hi)?;
    let high_ok = high.feasible;
    probes.push(high);
    if high_ok {
        return Ok(DmaxResult { alpha, delta, d_max: Some(scan.hi), probes });
    }
    let (mut lo, mut hi) = (scan.lo, scan.hi);
    while hi - lo > scan.resolution {
        let mid = 0.5 * (lo + hi);
        let p = run(mid)?;
        if p.feasible {
            lo = mid;
        } else {
            hi = mid;
        }
        probes.push(p);
    }
    Ok(DmaxResult { alpha, delta, d_max: Some(lo), probes })
}
