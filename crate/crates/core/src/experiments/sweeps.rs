use std::io::Write;

use serde::Serialize;

use super::{per_seed, simulate, ExperimentConfig};
use crate::am::RunOptions;
use crate::rng::Experiment;
use crate::sbm::{agreement, loss, rebalance_isolated, theorem_loss, MaxMode, SbmParams};
use crate::{Error, Result};

const NO_TRACE: RunOptions = RunOptions { sample_every: 0, record_events: false };

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementRow {
    pub n: usize,
    pub seed: u64,
    pub agreement: f64,
    pub bad: usize,
    pub mono_edges: usize,
}

/// Full-graph runs over `n × seeds`, sorted by `(n, seed)`.
pub fn agreement_scan(cfg: &ExperimentConfig) -> Result<Vec<AgreementRow>> {
    let alpha = cfg.alpha()?;
    let mut ns = cfg.n.clone();
    ns.sort_unstable();
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let mut rows = Vec::new();
    for n in ns {
        let params = SbmParams::new(n, cfg.d, cfg.beta)?;
        rows.extend(per_seed(&seeds, |seed| {
            let (graph, out) = simulate(Experiment::AgreementScan, params, alpha, cfg.init_mode(), seed, &NO_TRACE)?;
            Ok(AgreementRow {
                n,
                seed,
                agreement: agreement(&out.colouring, graph.sigma_star())?,
                bad: out.stats.bad,
                mono_edges: out.stats.mono_edges,
            })
        })?);
    }
    Ok(rows)
}

pub fn write_agreement_csv<W: Write>(rows: &[AgreementRow], mut out: W, header: &str) -> Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "n,seed,agreement,bad,mono_edges")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.n, r.seed, r.agreement, r.bad, r.mono_edges)?;
    }
    Ok(())
}

/// Least-squares slope of `ln(mean agreement)` against `ln n`; `None` with
/// fewer than two sizes or a non-positive mean.
pub fn agreement_slope(rows: &[AgreementRow]) -> Option<f64> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    let mut pts = Vec::new();
    for n in ns {
        let vals: Vec<f64> = rows.iter().filter(|r| r.n == n).map(|r| r.agreement).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        if !(mean > 0.0) {
            return None;
        }
        pts.push(((n as f64).ln(), mean.ln()));
    }
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadRow {
    pub seed: u64,
    pub bad: usize,
    pub mono_edges: usize,
    pub epochs: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BadSummary {
    pub n: usize,
    pub runs: usize,
    pub mean_bad: Option<f64>,
    pub frac_zero_bad: Option<f64>,
}

pub fn bad_vertices(cfg: &ExperimentConfig) -> Result<Vec<BadRow>> {
    let n = cfg.size()?;
    let alpha = cfg.alpha()?;
    let params = SbmParams::new(n, cfg.d, cfg.beta)?;
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    per_seed(&seeds, |seed| {
        let (_, out) = simulate(Experiment::BadVertices, params, alpha, cfg.init_mode(), seed, &NO_TRACE)?;
        Ok(BadRow { seed, bad: out.stats.bad, mono_edges: out.stats.mono_edges, epochs: out.stats.epochs })
    })
}

/// Recomputes the summary from the rows alone.
pub fn bad_summary(n: usize, rows: &[BadRow]) -> BadSummary {
    let runs = rows.len();
    let (mean_bad, frac_zero_bad) = if runs == 0 {
        (None, None)
    } else {
        let total: usize = rows.iter().map(|r| r.bad).sum();
        let zero = rows.iter().filter(|r| r.bad == 0).count();
        (Some(total as f64 / runs as f64), Some(zero as f64 / runs as f64))
    };
    BadSummary { n, runs, mean_bad, frac_zero_bad }
}

pub fn write_bad_csv<W: Write>(rows: &[BadRow], mut out: W, header: &str) -> Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "seed,bad,mono_edges,epochs")?;
    for r in rows {
        writeln!(out, "{},{},{},{}", r.seed, r.bad, r.mono_edges, r.epochs)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossRow {
    pub seed: u64,
    pub bad: usize,
    pub mono_edges: usize,
    /// Runs with no bad vertex and no monochromatic edge.
    pub qualifying: bool,
    /// `loss(σ*)` against the rebalanced colouring.
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub runs: usize,
    pub qualifying: usize,
    pub mean_loss: Option<f64>,
    pub theorem_loss: f64,
    pub relative_error: Option<f64>,
}

impl LossReport {
    pub fn from_rows(rows: &[LossRow], d: f64, beta: f64) -> Self {
        let good: Vec<f64> = rows.iter().filter(|r| r.qualifying).map(|r| r.loss).collect();
        let theorem = theorem_loss(d, beta);
        let mean = (!good.is_empty()).then(|| good.iter().sum::<f64>() / good.len() as f64);
        LossReport {
            runs: rows.len(),
            qualifying: good.len(),
            mean_loss: mean,
            theorem_loss: theorem,
            relative_error: mean.map(|m| (m - theorem).abs() / theorem),
        }
    }
}

/// Runs seeds in order, a batch at a time, until `cfg.target` runs qualify
/// or the seed list is exhausted. Rows stop at the target-th qualifying run.
pub fn loss_scan(cfg: &ExperimentConfig) -> Result<Vec<LossRow>> {
    let n = cfg.size()?;
    let alpha = cfg.alpha()?;
    let params = SbmParams::new(n, cfg.d, cfg.beta)?;
    if cfg.target == 0 {
        return Err(Error::param("target must be positive"));
    }
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let batch = 16;
    let mut rows: Vec<LossRow> = Vec::new();
    for chunk in seeds.chunks(batch) {
        rows.extend(per_seed(chunk, |seed| {
            let (graph, out) = simulate(Experiment::Loss, params, alpha, cfg.init_mode(), seed, &NO_TRACE)?;
            let reference = rebalance_isolated(&graph, &out.colouring);
            Ok(LossRow {
                seed,
                bad: out.stats.bad,
                mono_edges: out.stats.mono_edges,
                qualifying: out.stats.bad == 0 && out.stats.mono_edges == 0,
                loss: loss(&graph, graph.sigma_star(), MaxMode::Reference(&reference))?,
            })
        })?);
        if rows.iter().filter(|r| r.qualifying).count() >= cfg.target {
            break;
        }
    }
    let mut seen = 0;
    let cut = rows
        .iter()
        .position(|r| {
            seen += usize::from(r.qualifying);
            seen == cfg.target
        })
        .map_or(rows.len(), |k| k + 1);
    rows.truncate(cut);
    Ok(rows)
}

pub fn write_loss_csv<W: Write>(rows: &[LossRow], mut out: W, header: &str) -> Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "seed,bad,mono_edges,qualifying,loss")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.seed, r.bad, r.mono_edges, u8::from(r.qualifying), r.loss)?;
    }
    Ok(())
}
