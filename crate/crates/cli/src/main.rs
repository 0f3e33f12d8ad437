use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sbm_am::experiments::{self as ex, ExperimentConfig, LossReport, ModeName};
use sbm_am::ode::{integrate, DmaxScan, OdeConfig};
use sbm_am::rng::{stream, Experiment, Purpose};
use sbm_am::sbm::{generate_with_rng, SbmParams};
use sbm_am::theory::MAX_VERIFY_DELTA;
use serde_json::Value;

#[derive(Parser)]
#[command(name = "sbm-am", version, about = "List colouring of the disassortative 3-community block model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample planted graphs, one file per seed.
    Gen(Common),
    /// Run the colouring algorithm; one JSON line per seed.
    RunAm {
        #[command(flatten)]
        common: Common,
        /// Also write a per-seed trace CSV.
        #[arg(long)]
        trace: bool,
    },
    /// Integrate the reduced system.
    Ode {
        #[command(flatten)]
        common: Common,
        /// Append the full state to every row.
        #[arg(long)]
        full_state: bool,
    },
    /// Largest feasible d for each α.
    DmaxScan(Common),
    /// ODE λ(t), γ(t) against seed-averaged simulation traces.
    LambdaCompare(Common),
    /// Agreement with the planted colouring over sizes and seeds.
    AgreementScan(Common),
    /// Bad-vertex counts per run and their summary.
    BadVertices(Common),
    /// Numerical checks of the type-space system; nonzero exit on failure.
    VerifyTheory(Common),
    /// Loss of the planted colouring against the algorithm's colouring.
    Loss(Common),
    /// Vertex census of the truncated graph against its large-n formula.
    Census(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Graph sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Degree exponents, comma separated.
    #[arg(long, value_delimiter = ',')]
    alpha: Option<Vec<f64>>,
    #[arg(long)]
    delta: Option<usize>,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    seeds: Option<String>,
    /// Shorthand for `--seeds 0..RUNS`.
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// JSON file with any of the config fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `full` or `truncated`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    tamper: bool,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("cannot parse seeds `{s}`");
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..b).collect());
    }
    s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect()
}

fn defaults(name: &str) -> ExperimentConfig {
    let base = ExperimentConfig { experiment: name.to_string(), ..Default::default() };
    match name {
        "dmax-scan" => ExperimentConfig { alpha: (2..=20).map(f64::from).collect(), ..base },
        "lambda-compare" => ExperimentConfig { mode: ModeName::Truncated, ..base },
        "agreement-scan" => ExperimentConfig { n: vec![1_000, 10_000, 100_000], seeds: (0..20).collect(), ..base },
        "bad-vertices" => ExperimentConfig { seeds: (0..100).collect(), ..base },
        "verify-theory" => ExperimentConfig { delta: 5, alpha: vec![1.0, 2.0, 15.0], seeds: vec![1], ..base },
        "loss" => ExperimentConfig { seeds: (0..3000).collect(), target: 20, ..base },
        "census" => ExperimentConfig { n: vec![1_000_000], seeds: vec![0], ..base },
        "gen" | "run-am" => ExperimentConfig { seeds: vec![0], ..base },
        _ => base,
    }
}

/// Defaults, then the config file, then flags.
fn resolve(name: &str, c: &Common) -> Result<ExperimentConfig, String> {
    let mut value = serde_json::to_value(defaults(name)).map_err(|e| e.to_string())?;
    if let Some(path) = &c.config {
        let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let Value::Object(map) = file else { return Err("config must be a JSON object".into()) };
        for (k, v) in map {
            value[k] = v;
        }
    }
    let mut cfg: ExperimentConfig = serde_json::from_value(value).map_err(|e| e.to_string())?;
    cfg.experiment = name.to_string();
    if let Some(v) = &c.n {
        cfg.n = v.clone();
    }
    if let Some(v) = c.d {
        cfg.d = v;
    }
    if let Some(v) = c.beta {
        cfg.beta = v;
    }
    if let Some(v) = &c.alpha {
        cfg.alpha = v.clone();
    }
    if let Some(v) = c.delta {
        cfg.delta = v;
    }
    if let Some(r) = c.runs {
        cfg.seeds = (0..r).collect();
    }
    if let Some(s) = &c.seeds {
        cfg.seeds = parse_seeds(s)?;
    }
    if let Some(m) = &c.mode {
        cfg.mode = serde_json::from_value(Value::String(m.clone())).map_err(|_| format!("unknown mode `{m}`"))?;
    }
    if let Some(v) = c.trials {
        cfg.trials = v;
    }
    if let Some(v) = c.target {
        cfg.target = v;
    }
    if let Some(v) = c.cells {
        cfg.cells = v;
    }
    cfg.tamper |= c.tamper;
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    if c.workers.is_some() {
        cfg.workers = c.workers;
    }
    Ok(cfg)
}

fn create(dir: &Path, name: &str) -> sbm_am::Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn finish(mut w: BufWriter<File>) -> sbm_am::Result<()> {
    w.flush()?;
    Ok(())
}

/// `Ok(false)` means the run completed but reported a failure.
fn execute(command: &Command) -> Result<bool, String> {
    let (name, common) = match command {
        Command::Gen(c) => ("gen", c),
        Command::RunAm { common, .. } => ("run-am", common),
        Command::Ode { common, .. } => ("ode", common),
        Command::DmaxScan(c) => ("dmax-scan", c),
        Command::LambdaCompare(c) => ("lambda-compare", c),
        Command::AgreementScan(c) => ("agreement-scan", c),
        Command::BadVertices(c) => ("bad-vertices", c),
        Command::VerifyTheory(c) => ("verify-theory", c),
        Command::Loss(c) => ("loss", c),
        Command::Census(c) => ("census", c),
    };
    let cfg = resolve(name, common)?;
    if name == "verify-theory" && cfg.delta > MAX_VERIFY_DELTA {
        return Err(format!("verify-theory refuses delta {} (at most {MAX_VERIFY_DELTA})", cfg.delta));
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let pool = pool.build().map_err(|e| e.to_string())?;
    pool.install(|| run(command, &cfg)).map_err(|e| e.to_string())
}

fn run(command: &Command, cfg: &ExperimentConfig) -> sbm_am::Result<bool> {
    let out = cfg.out.as_path();
    let header = cfg.header();
    match command {
        Command::Gen(_) => {
            for &n in &cfg.n {
                let params = SbmParams::new(n, cfg.d, cfg.beta)?;
                for &seed in &cfg.seeds {
                    let g = generate_with_rng(params, seed, &mut stream(Experiment::RunAm, Purpose::Graph, seed))?;
                    let mut w = create(out, &format!("graph_n{n}_seed{seed}.txt"))?;
                    g.write_to(&mut w)?;
                    finish(w)?;
                }
            }
        }
        Command::RunAm { trace, .. } => {
            let runs = ex::run_am(cfg, *trace)?;
            let records: Vec<_> = runs.iter().map(|r| r.0.clone()).collect();
            let mut w = create(out, "runs.jsonl")?;
            ex::write_json_lines(&records, &mut w)?;
            finish(w)?;
            if *trace {
                for (rec, tr) in &runs {
                    let mut w = create(out, &format!("trace_seed{}.csv", rec.seed))?;
                    sbm_am::am::write_trace_csv(tr, &mut w, &header)?;
                    finish(w)?;
                }
            }
        }
        Command::Ode { full_state, .. } => {
            let traj = integrate(&OdeConfig::new(cfg.d, cfg.alpha()?).with_delta(cfg.delta))?;
            let mut w = create(out, "trajectory.csv")?;
            traj.write_csv(&mut w, &header, *full_state)?;
            finish(w)?;
            let mut w = create(out, "assumptions.json")?;
            ex::write_json(&traj.report, &mut w)?;
            finish(w)?;
        }
        Command::DmaxScan(_) => {
            let rows = ex::dmax_scan(&cfg.alpha, cfg.delta, &DmaxScan::default())?;
            let mut w = create(out, "dmax.csv")?;
            ex::write_dmax_csv(&rows, &mut w, &header)?;
            finish(w)?;
        }
        Command::LambdaCompare(_) => {
            let cmp = ex::lambda_compare(cfg)?;
            let mut w = create(out, "lambda_ode.csv")?;
            cmp.ode.write_csv(&mut w, &header, false)?;
            finish(w)?;
            let mut w = create(out, "lambda_emp.csv")?;
            cmp.write_empirical_csv(&mut w, &header)?;
            finish(w)?;
            let mut w = create(out, "lambda_summary.json")?;
            ex::write_json(&cmp.summary, &mut w)?;
            finish(w)?;
            let mut w = create(out, "assumptions.json")?;
            ex::write_json(&cmp.ode.report, &mut w)?;
            finish(w)?;
        }
        Command::AgreementScan(_) => {
            let rows = ex::agreement_scan(cfg)?;
            let mut w = create(out, "agreement.csv")?;
            ex::write_agreement_csv(&rows, &mut w, &header)?;
            finish(w)?;
            let mut w = create(out, "agreement_summary.json")?;
            ex::write_json(&serde_json::json!({ "slope": ex::agreement_slope(&rows) }), &mut w)?;
            finish(w)?;
        }
        Command::BadVertices(_) => {
            let rows = ex::bad_vertices(cfg)?;
            let mut w = create(out, "bad_vertices.csv")?;
            ex::write_bad_csv(&rows, &mut w, &header)?;
            finish(w)?;
            let mut w = create(out, "bad_vertices_summary.json")?;
            ex::write_json(&ex::bad_summary(cfg.size()?, &rows), &mut w)?;
            finish(w)?;
        }
        Command::VerifyTheory(c) => {
            let betas = match c.beta {
                Some(b) => vec![b],
                None => vec![0.0, 2.0, 6.0],
            };
            let report = ex::verify(cfg, &betas, 10)?;
            let mut w = create(out, "verify_theory.json")?;
            ex::write_json(&report, &mut w)?;
            finish(w)?;
            for r in report.iter().filter(|r| !r.pass) {
                eprintln!("FAIL {}: {:e} > {:e}", r.check_name, r.max_abs_error, r.threshold);
            }
            return Ok(report.iter().all(|r| r.pass));
        }
        Command::Loss(_) => {
            let rows = ex::loss_scan(cfg)?;
            let mut w = create(out, "loss.csv")?;
            ex::write_loss_csv(&rows, &mut w, &header)?;
            finish(w)?;
            let mut w = create(out, "loss_summary.json")?;
            ex::write_json(&LossReport::from_rows(&rows, cfg.d, cfg.beta), &mut w)?;
            finish(w)?;
        }
        Command::Census(_) => {
            let report = ex::census_check(cfg)?;
            let mut w = create(out, "census_cells.csv")?;
            report.write_cells_csv(&mut w, &header)?;
            finish(w)?;
            let mut w = create(out, "census.json")?;
            ex::write_json(&report, &mut w)?;
            finish(w)?;
            return Ok(report.pass());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_accept_ranges_and_lists() {
        assert_eq!(parse_seeds("2..5").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_seeds("7, 1").unwrap(), vec![7, 1]);
        assert!(parse_seeds("x").is_err());
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("sbm-am-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("c.json");
        fs::write(&path, r#"{"d": 3.5, "beta": 2.0, "seeds": [4]}"#).unwrap();
        let c = Common { config: Some(path), beta: Some(1.0), ..Default::default() };
        let cfg = resolve("bad-vertices", &c).unwrap();
        assert_eq!(cfg.d, 3.5);
        assert_eq!(cfg.beta, 1.0);
        assert_eq!(cfg.seeds, vec![4]);
        fs::remove_dir_all(dir).unwrap();
    }
}
