use std::io::Write;

use serde::Serialize;

use super::{or_nan, per_seed, simulate, ExperimentConfig};
use crate::am::{EpochDiagnostics, InitMode, RunOptions};
use crate::ode::{integrate, OdeConfig, Trajectory};
use crate::rng::Experiment;
use crate::sbm::SbmParams;
use crate::Result;

/// Trace samples per unit of `t`, fine enough to resolve the λ peak.
const TRACE_POINTS: u64 = 20_000;

/// Empirical λ and γ averaged over seeds on the ODE output grid.
#[derive(Debug, Clone)]
pub struct LambdaCompare {
    pub ode: Trajectory,
    pub t: Vec<f64>,
    pub lambda_emp: Vec<Option<f64>>,
    pub gamma_emp: Vec<Option<f64>>,
    /// Runs whose trace covers the grid point.
    pub runs: Vec<usize>,
    pub seeds: usize,
    pub summary: LambdaSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaSummary {
    /// Over grid points with `t <= t*_ode` covered by every run.
    pub max_abs_lambda_diff: Option<f64>,
    pub compared_points: usize,
    pub t_star_ode: Option<f64>,
    pub t_star_emp: Option<f64>,
    pub lambda0_ode: Option<f64>,
    pub lambda0_emp: Option<f64>,
}

/// Linear interpolation of `(t, value)` points at `t`; `None` outside the
/// range or next to an undefined value.
fn interpolate(pts: &[(f64, Option<f64>)], t: f64) -> Option<f64> {
    let first = pts.first()?;
    if t < first.0 || t > pts.last()?.0 {
        return None;
    }
    let k = pts.partition_point(|p| p.0 <= t);
    if k == 0 {
        return first.1;
    }
    let (t0, v0) = pts[k - 1];
    if t0 == t || k == pts.len() {
        return if t0 == t { v0 } else { None };
    }
    let (t1, v1) = pts[k];
    let a = (t - t0) / (t1 - t0);
    Some(v0? * (1.0 - a) + v1? * a)
}

/// First zero crossing of a sampled curve, linearly interpolated.
fn first_crossing(t: &[f64], g: &[Option<f64>]) -> Option<f64> {
    if let Some(Some(g0)) = g.first() {
        if *g0 <= 0.0 {
            return Some(t[0]);
        }
    }
    for k in 1..t.len() {
        if let (Some(a), Some(b)) = (g[k - 1], g[k]) {
            if a > 0.0 && b <= 0.0 {
                return Some(t[k - 1] + (t[k] - t[k - 1]) * a / (a - b));
            }
        }
    }
    None
}

fn average(traces: &[Vec<EpochDiagnostics>], t: f64, pick: impl Fn(&EpochDiagnostics) -> Option<f64>) -> (Option<f64>, usize) {
    let vals: Vec<f64> = traces
        .iter()
        .filter_map(|tr| {
            let pts: Vec<(f64, Option<f64>)> = tr.iter().map(|d| (d.t, pick(d))).collect();
            interpolate(&pts, t)
        })
        .collect();
    let k = vals.len();
    ((k > 0).then(|| vals.iter().sum::<f64>() / k as f64), k)
}

/// ODE trajectory against the seed-averaged truncated-start simulation.
pub fn lambda_compare(cfg: &ExperimentConfig) -> Result<LambdaCompare> {
    let n = cfg.size()?;
    let alpha = cfg.alpha()?;
    let ode = integrate(&OdeConfig::new(cfg.d, alpha).with_delta(cfg.delta))?;
    let params = SbmParams::new(n, cfg.d, cfg.beta)?;
    let opts = RunOptions { sample_every: (n as u64 / TRACE_POINTS).max(1), record_events: false };
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let traces = per_seed(&seeds, |seed| {
        let (_, out) =
            simulate(Experiment::LambdaCompare, params, alpha, InitMode::Truncated(cfg.delta), seed, &opts)?;
        Ok(out.trace)
    })?;
    let t: Vec<f64> = ode.samples.iter().map(|s| s.t).collect();
    let mut lambda_emp = Vec::with_capacity(t.len());
    let mut gamma_emp = Vec::with_capacity(t.len());
    let mut runs = Vec::with_capacity(t.len());
    for &tk in &t {
        let (l, k) = average(&traces, tk, |d| d.lambda_emp);
        let (g, _) = average(&traces, tk, |d| Some(d.gamma_emp));
        lambda_emp.push(l);
        gamma_emp.push(g);
        runs.push(k);
    }
    let mut diff: Option<f64> = None;
    let mut compared = 0;
    for k in 0..t.len() {
        if ode.t_star.is_some_and(|ts| t[k] > ts) || runs[k] < seeds.len() {
            continue;
        }
        if let (Some(a), Some(b)) = (ode.lambda[k], lambda_emp[k]) {
            diff = Some(diff.unwrap_or(0.0).max((a - b).abs()));
            compared += 1;
        }
    }
    let summary = LambdaSummary {
        max_abs_lambda_diff: diff,
        compared_points: compared,
        t_star_ode: ode.t_star,
        t_star_emp: first_crossing(&t, &gamma_emp),
        lambda0_ode: ode.lambda.first().copied().flatten(),
        lambda0_emp: lambda_emp.first().copied().flatten(),
    };
    Ok(LambdaCompare { ode, t, lambda_emp, gamma_emp, runs, seeds: seeds.len(), summary })
}

impl LambdaCompare {
    /// `t,lambda_emp,gamma_emp,runs` on the ODE grid.
    pub fn write_empirical_csv<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "# {header}")?;
        writeln!(out, "t,lambda_emp,gamma_emp,runs")?;
        for k in 0..self.t.len() {
            writeln!(out, "{},{},{},{}", self.t[k], or_nan(self.lambda_emp[k]), or_nan(self.gamma_emp[k]), self.runs[k])?;
        }
        Ok(())
    }
}
