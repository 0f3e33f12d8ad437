//! Experiment drivers. Every driver is a pure function of an
//! [`ExperimentConfig`]: runs are keyed by `(experiment, seed)` streams,
//! executed on the current rayon pool and merged in seed order, so output
//! bytes do not depend on the worker count.

mod compare;
mod scan;
mod sweeps;

use std::io::Write;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::am::{init_lists, run, EpochDiagnostics, InitMode, RunOptions, RunOutput};
use crate::rng::{stream, Experiment, Purpose};
use crate::sbm::{agreement, generate_with_rng, PlantedGraph, SbmParams};
use crate::{Error, Result};

pub use compare::{lambda_compare, LambdaCompare, LambdaSummary};
pub use scan::{census_check, dmax_scan, verify, write_dmax_csv, CellRow, CensusReport, ClassRow, DmaxRow};
pub use sweeps::{
    agreement_scan, agreement_slope, bad_summary, bad_vertices, loss_scan, write_agreement_csv, write_bad_csv,
    write_loss_csv, AgreementRow, BadRow, BadSummary, LossReport, LossRow,
};

/// `full` or `truncated`; the truncation level is [`ExperimentConfig::delta`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    Full,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub n: Vec<usize>,
    pub seeds: Vec<u64>,
    pub d: f64,
    pub beta: f64,
    pub alpha: Vec<f64>,
    pub delta: usize,
    pub mode: ModeName,
    /// Monte-Carlo trials of `verify-theory`.
    pub trials: u64,
    /// Qualifying runs wanted by the loss experiment.
    pub target: usize,
    /// Random cells checked by the census.
    pub cells: usize,
    /// Run the negative control of `verify-theory` on the main check.
    pub tamper: bool,
    #[serde(skip_serializing)]
    pub out: PathBuf,
    #[serde(skip_serializing)]
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: String::new(),
            n: vec![100_000],
            seeds: (0..5).collect(),
            d: 4.03,
            beta: 6.0,
            alpha: vec![15.0],
            delta: 20,
            mode: ModeName::Full,
            trials: 1_000_000,
            target: 10,
            cells: 10,
            tamper: false,
            out: PathBuf::from("out"),
            workers: None,
        }
    }
}

impl ExperimentConfig {
    pub fn init_mode(&self) -> InitMode {
        match self.mode {
            ModeName::Full => InitMode::Full,
            ModeName::Truncated => InitMode::Truncated(self.delta),
        }
    }

    /// The single α of experiments that take one.
    pub fn alpha(&self) -> Result<f64> {
        match self.alpha.as_slice() {
            [a] => Ok(*a),
            _ => Err(Error::param(format!("expected exactly one alpha, got {:?}", self.alpha))),
        }
    }

    /// The single n of experiments that take one.
    pub fn size(&self) -> Result<usize> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            _ => Err(Error::param(format!("expected exactly one n, got {:?}", self.n))),
        }
    }

    /// `sbm-am <version> <config as JSON>`, without output path and workers.
    pub fn header(&self) -> String {
        let json = serde_json::to_string(self).expect("config serialises");
        format!("sbm-am {} {json}", env!("CARGO_PKG_VERSION"))
    }
}

/// One run summary as written by `run-am`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub n: usize,
    pub d: f64,
    pub beta: f64,
    pub alpha: f64,
    pub mode: String,
    pub bad: usize,
    pub mono_edges: usize,
    pub epochs: u64,
    pub agreement: f64,
}

/// Generates the graph of `(experiment, seed)` and runs the algorithm on it.
pub fn simulate(
    experiment: Experiment,
    params: SbmParams,
    alpha: f64,
    mode: InitMode,
    seed: u64,
    opts: &RunOptions,
) -> Result<(PlantedGraph, RunOutput)> {
    let mut grng = stream(experiment, Purpose::Graph, seed);
    let graph = generate_with_rng(params, seed, &mut grng)?;
    let mut crng = stream(experiment, Purpose::Colouring, seed);
    let state = init_lists(&graph, mode, alpha, &mut crng);
    let out = run(&graph, state, opts, &mut crng);
    Ok((graph, out))
}

/// Maps `f` over `seeds` on the current pool, keeping seed order.
pub(crate) fn per_seed<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    seeds.par_iter().map(|&s| f(s)).collect()
}

/// `run-am`: one record and one trace per seed.
pub fn run_am(cfg: &ExperimentConfig, with_trace: bool) -> Result<Vec<(RunRecord, Vec<EpochDiagnostics>)>> {
    let n = cfg.size()?;
    let alpha = cfg.alpha()?;
    let params = SbmParams::new(n, cfg.d, cfg.beta)?;
    let mode = cfg.init_mode();
    let opts = RunOptions { sample_every: if with_trace { RunOptions::for_size(n).sample_every } else { 0 }, record_events: false };
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    per_seed(&seeds, |seed| {
        let (graph, out) = simulate(Experiment::RunAm, params, alpha, mode, seed, &opts)?;
        let record = RunRecord {
            seed,
            n,
            d: cfg.d,
            beta: cfg.beta,
            alpha,
            mode: mode.to_string(),
            bad: out.stats.bad,
            mono_edges: out.stats.mono_edges,
            epochs: out.stats.epochs,
            agreement: agreement(&out.colouring, graph.sigma_star())?,
        };
        Ok((record, out.trace))
    })
}

/// One JSON object per line.
pub fn write_json_lines<T: Serialize, W: Write>(items: &[T], mut out: W) -> Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Writes `NaN` for a missing value, as the trace writers do.
pub(crate) fn or_nan(x: Option<f64>) -> f64 {
    x.unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_omits_out_and_workers() {
        let cfg = ExperimentConfig { workers: Some(3), out: PathBuf::from("/tmp/x"), ..Default::default() };
        let h = cfg.header();
        assert!(h.starts_with("sbm-am "));
        assert!(!h.contains("workers") && !h.contains("/tmp/x"));
        let other = ExperimentConfig { workers: Some(1), ..cfg.clone() };
        assert_eq!(h, other.header());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cfg = ExperimentConfig { experiment: "bad-vertices".into(), seeds: vec![3, 1], ..Default::default() };
        let back: ExperimentConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back.seeds, cfg.seeds);
        assert_eq!(back.mode, ModeName::Full);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
