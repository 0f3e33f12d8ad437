use std::io::Write;

use rand::seq::IndexedRandom;
use rayon::prelude::*;
use serde::Serialize;

use super::ExperimentConfig;
use crate::ode::{d_max, DmaxScan};
use crate::rng::{stream, Experiment, Purpose};
use crate::sbm::{census, census_cell_expectation, census_class_expectation, generate_with_rng, SbmParams};
use crate::theory::{verify_theory, CheckResult, VerifyConfig};
use crate::{Result, Q};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DmaxRow {
    pub alpha: f64,
    /// `None` when no `d` in the bracket is feasible.
    pub d_max: Option<f64>,
}

/// One bisection per α, in the order given.
pub fn dmax_scan(alphas: &[f64], delta: usize, scan: &DmaxScan) -> Result<Vec<DmaxRow>> {
    alphas
        .par_iter()
        .map(|&alpha| Ok(DmaxRow { alpha, d_max: d_max(alpha, delta, scan)?.d_max }))
        .collect()
}

/// `alpha,d_max` with `-1` for infeasible α.
pub fn write_dmax_csv<W: Write>(rows: &[DmaxRow], mut out: W, header: &str) -> Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "alpha,d_max")?;
    for r in rows {
        writeln!(out, "{},{}", r.alpha, r.d_max.unwrap_or(-1.0))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    /// 1-based planted colour.
    pub s: usize,
    pub count: usize,
    pub expected: f64,
    /// `4√n·ln n`.
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellRow {
    pub s: usize,
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
    pub count: usize,
    pub expected: f64,
    /// Binomial standard deviation `√(n p (1 − p))`.
    pub sigma: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub n: usize,
    pub delta: usize,
    pub classes: Vec<ClassRow>,
    pub cells: Vec<CellRow>,
}

impl CensusReport {
    pub fn pass(&self) -> bool {
        self.classes.iter().all(|c| c.pass) && self.cells.iter().all(|c| c.pass)
    }

    pub fn write_cells_csv<W: Write>(&self, mut out: W, header: &str) -> Result<()> {
        writeln!(out, "# {header}")?;
        writeln!(out, "s,d1,d2,d3,count,expected,sigma")?;
        for c in &self.cells {
            writeln!(out, "{},{},{},{},{},{},{}", c.s, c.d1, c.d2, c.d3, c.count, c.expected, c.sigma)?;
        }
        Ok(())
    }
}

/// Class counts and `cfg.cells` cells drawn uniformly among those with
/// expected count at least 1, for the graph of the first seed.
pub fn census_check(cfg: &ExperimentConfig) -> Result<CensusReport> {
    let n = cfg.size()?;
    let seed = cfg.seeds.iter().copied().min().unwrap_or(0);
    let params = SbmParams::new(n, cfg.d, cfg.beta)?;
    let graph = generate_with_rng(params, seed, &mut stream(Experiment::Census, Purpose::Graph, seed))?;
    let tc = census(&graph, cfg.delta);
    let tolerance = 4.0 * (n as f64).sqrt() * (n as f64).ln();
    let expected = census_class_expectation(n, cfg.d, cfg.delta);
    let classes = (0..Q)
        .map(|s| {
            let count = tc.class_count(s);
            ClassRow { s: s + 1, count, expected, tolerance, pass: (count as f64 - expected).abs() <= tolerance }
        })
        .collect();
    let eligible: Vec<(usize, [usize; 3], f64)> = tc
        .index()
        .iter()
        .map(|(_, s, d)| (s, d, census_cell_expectation(n, cfg.d, cfg.beta, s, d)))
        .filter(|c| c.2 >= 1.0)
        .collect();
    let mut rng = stream(Experiment::Census, Purpose::Uniform, seed);
    let cells = eligible
        .choose_multiple(&mut rng, cfg.cells)
        .map(|&(s, d, expected)| {
            let p = expected / n as f64;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            let count = tc.cell(s, d);
            CellRow {
                s: s + 1,
                d1: d[0],
                d2: d[1],
                d3: d[2],
                count,
                expected,
                sigma,
                pass: (count as f64 - expected).abs() <= 3.0 * sigma,
            }
        })
        .collect();
    Ok(CensusReport { n, delta: cfg.delta, classes, cells })
}

/// `verify-theory` with `cfg.delta`, `cfg.alpha`, `cfg.beta`, `cfg.d`,
/// `cfg.trials` and the first seed.
pub fn verify(cfg: &ExperimentConfig, betas: &[f64], states: usize) -> Result<Vec<CheckResult>> {
    let vc = VerifyConfig {
        delta: cfg.delta,
        alphas: cfg.alpha.clone(),
        betas: betas.to_vec(),
        d: cfg.d,
        states,
        mc_trials: cfg.trials,
        seed: cfg.seeds.iter().copied().min().unwrap_or(0),
        tamper: cfg.tamper,
    };
    verify_theory(&vc)
}
