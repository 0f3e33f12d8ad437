//! Numerical checks of the type-space system against its closed forms,
//! a brute-force small-Δ recomputation and a Monte-Carlo branching oracle.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::branching::BranchingOracle;
use super::closed::{cleanup_identity_gap, cleanup_matrix, edge_table_closed, kappa_scalar, kappa_table_closed, lambda_closed};
use super::flat::{flat_white_expand, product_form, FullTypeState, Moments};
use super::naive::naive_system;
use super::spectral::spectral_radius;
use super::system::{full_rhs, kappa_linear, kappa_neumann, vertex_edge_factors};
use crate::ode::{integrate, OdeConfig, OdeSystem};
use crate::{Error, Result, Q};

/// Largest Δ the dense checks accept.
pub const MAX_VERIFY_DELTA: usize = 8;
/// Size of the perturbation used by the negative control.
pub const TAMPER: f64 = 1e-3;
const NAIVE_DELTA: usize = 2;
const MC_SIGMAS: f64 = 4.0;
/// States are only used while λ stays this far below 1.
const LAMBDA_MAX: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub delta: usize,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
    pub d: f64,
    /// Trajectory states per α.
    pub states: usize,
    pub mc_trials: u64,
    pub seed: u64,
    /// Perturb the state fed to the flat-white residual check.
    pub tamper: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            delta: 5,
            alphas: vec![1.0, 2.0, 15.0],
            betas: vec![0.0, 2.0, 6.0],
            d: 4.03,
            states: 10,
            mc_trials: 1_000_000,
            seed: 1,
            tamper: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub max_abs_error: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Default)]
struct Acc {
    items: Vec<(&'static str, f64, f64)>,
}

impl Acc {
    fn push(&mut self, name: &'static str, err: f64, threshold: f64) {
        // NaN must count as a failure
        let err = if err.is_nan() { f64::INFINITY } else { err };
        self.items.push((name, err, threshold));
    }
}

fn max_abs<'a>(pairs: impl IntoIterator<Item = (&'a f64, &'a f64)>) -> f64 {
    pairs.into_iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// ODE states with γ > 0 and λ < [`LAMBDA_MAX`], evenly thinned to `count`.
pub fn trajectory_states(d: f64, alpha: f64, delta: usize, count: usize) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let traj = integrate(&OdeConfig::new(d, alpha).with_delta(delta))?;
    let ok: Vec<usize> = (0..traj.samples.len())
        .filter(|&k| traj.gamma[k] > 0.0 && traj.lambda[k].is_some_and(|l| l < LAMBDA_MAX))
        .collect();
    if ok.is_empty() || count == 0 {
        return Err(Error::degenerate(format!("no usable ODE states at d={d}, alpha={alpha}")));
    }
    let picks = count.min(ok.len());
    Ok((0..picks)
        .map(|j| {
            let k = ok[j * (ok.len() - 1) / (picks.max(2) - 1).max(1)];
            let s = &traj.samples[k];
            (s.u.iter().map(|x| x.max(0.0)).collect(), s.w.iter().map(|x| x.max(0.0)).collect())
        })
        .collect())
}

/// Adds [`TAMPER`] to the first degree-1 2-list density.
pub fn tamper_state(fs: &mut FullTypeState) {
    let theta = fs.index.index(0, [0, 1, 0]).expect("delta is at least 1");
    let k = fs.index.pair(0, theta);
    fs.u[k] += TAMPER;
}

/// `max |full_rhs(fs) − product_form(small-system derivative)|` with the
/// small system evaluated at `(u, w)`.
fn flat_white_residual(fs: &FullTypeState, u: &[f64], w: &[f64], alpha: f64) -> Result<(f64, f64)> {
    let full = full_rhs(fs, alpha)?;
    let sys = OdeSystem::new(alpha, u.len() - 1)?;
    let y: Vec<f64> = u.iter().chain(w).copied().collect();
    let mut dy = vec![0.0; y.len()];
    sys.eval(&y, &mut dy)?;
    let m = u.len();
    let chain = product_form(&dy[..m], &dy[m..], fs.beta)?;
    let res = max_abs(full.dw.iter().zip(&chain.w)).max(max_abs(full.du.iter().zip(&chain.u)));
    let total_full: f64 = full.dw.iter().chain(&full.du).sum();
    let total_small: f64 = dy.iter().sum();
    Ok((res, (total_full - total_small).abs()))
}

fn permuted_kappa_gap(fs: &FullTypeState, alpha: f64) -> Result<f64> {
    // break the planted-colour symmetry of the flat-white state first
    let mut asym = fs.clone();
    for (k, x) in asym.u.iter_mut().enumerate() {
        *x *= 1.0 + 0.1 * (k as f64).sin();
    }
    for (k, x) in asym.w.iter_mut().enumerate() {
        *x *= 1.0 + 0.1 * (k as f64).cos();
    }
    let perm = [1, 2, 0];
    let (a, _) = kappa_linear(&asym, alpha)?;
    let (b, _) = kappa_linear(&asym.permute_planted(perm), alpha)?;
    let mut gap: f64 = 0.0;
    for s in 0..Q {
        for s2 in 0..Q {
            gap = gap.max((a.ss[s][s2] - b.ss[perm[s]][perm[s2]]).abs());
            for c in 0..Q {
                gap = gap.max((a.css[c][s][s2] - b.css[c][perm[s]][perm[s2]]).abs());
            }
        }
    }
    Ok(gap)
}

/// Entrywise gap between the indexed system and the nested-loop one.
fn naive_gap(u: &[f64], w: &[f64], beta: f64, alpha: f64) -> Result<f64> {
    let (u, w) = (&u[..=NAIVE_DELTA], &w[..=NAIVE_DELTA]);
    let fs = flat_white_expand(u, w, beta)?;
    let (kappa, sys) = kappa_linear(&fs, alpha)?;
    let der = full_rhs(&fs, alpha)?;
    let nv = naive_system(u, w, beta, alpha)?;
    let idx = &fs.index;
    let mut gap: f64 = 0.0;
    let mut upd = |a: f64, b: f64| gap = gap.max((a - b).abs());
    for (theta, s, d) in idx.iter() {
        upd(fs.w[theta], nv.w(s, d));
        upd(der.dw[theta], nv.dw(s, d));
        for c in 0..Q {
            let k = idx.pair(c, theta);
            upd(fs.u[k], nv.u(c, s, d));
            upd(sys.p[k], nv.p(c, s, d));
            upd(der.du[k], nv.du(c, s, d));
            for (child, cs, cd) in idx.iter() {
                for c2 in 0..Q {
                    upd(sys.m[(idx.pair(c2, child), k)], nv.m((c2, cs, cd), (c, s, d)));
                }
            }
        }
    }
    for s in 0..Q {
        for s2 in 0..Q {
            upd(sys.e[s][s2], nv.e[s][s2]);
            for c in 0..Q {
                upd(kappa.css[c][s][s2], nv.kappa[c][s][s2]);
            }
        }
    }
    Ok(gap)
}

fn mc_zscore(fs: &FullTypeState, alpha: f64, trials: u64, seed: u64) -> Result<f64> {
    let (kappa, _) = kappa_linear(fs, alpha)?;
    let est = BranchingOracle::new(fs, alpha)?.estimate(trials, seed)?;
    let mut z: f64 = 0.0;
    for c in 0..Q {
        for s in 0..Q {
            for s2 in 0..Q {
                let diff = (est.mean[c][s][s2] - kappa.css[c][s][s2]).abs();
                let se = est.stderr[c][s][s2];
                z = z.max(if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY });
            }
        }
    }
    Ok(z)
}

fn check_state(u: &[f64], w: &[f64], beta: f64, alpha: f64, tamper: bool, acc: &mut Acc) -> Result<()> {
    let fs = flat_white_expand(u, w, beta)?;
    let mom = Moments::of(u, w, alpha);
    let (kappa, sys) = kappa_linear(&fs, alpha)?;
    let idx = &fs.index;

    acc.push("p_normalised", (sys.p.sum() - 1.0).abs(), 1e-12);
    let ec = edge_table_closed(&mom, beta);
    acc.push("e_closed_form", max_abs(sys.e.iter().flatten().zip(ec.iter().flatten())), 1e-12);

    let mut same: f64 = 0.0;
    for c in 0..Q {
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                same = same.max(sys.m[(idx.pair(c, a), idx.pair(c, b))].abs());
            }
        }
    }
    acc.push("same_colour_zero", same, 0.0);

    let (mv, me) = vertex_edge_factors(&fs)?;
    let prod: DMatrix<f64> = &me * &mv;
    acc.push("m_factorisation", (&sys.m - prod).abs().max(), 1e-12);

    let small: DMatrix<f64> = &mv * &me;
    let lam = lambda_closed(&mom);
    acc.push("mvme_radius", (spectral_radius(&small)? - lam).abs(), 1e-10);
    let p_hat = &mv * &sys.p;
    acc.push("eigenvector_residual", (&small * &p_hat - &p_hat * lam).abs().max(), 1e-12);

    let k = kappa_scalar(&mom)?;
    let closed = kappa_table_closed(k, beta);
    acc.push("kappa_closed_form", kappa.max_abs_diff(&closed), 1e-8);
    let mut ss_gap: f64 = 0.0;
    for s in 0..Q {
        for s2 in 0..Q {
            let sum: f64 = (0..Q).map(|c| kappa.css[c][s][s2]).sum();
            ss_gap = ss_gap.max((sum - kappa.ss[s][s2]).abs());
        }
    }
    acc.push("kappa_colour_sum", ss_gap, 1e-12);

    let radius = spectral_radius(&sys.m)?;
    if radius < 0.9 {
        let terms = ((1e-11f64).ln() / radius.max(1e-3).ln()).ceil().max(40.0) as usize;
        acc.push("kappa_neumann", kappa_neumann(&fs, &sys, terms).max_abs_diff(&kappa), 1e-8);
    }

    let ode = OdeSystem::new(alpha, u.len() - 1)?;
    let y: Vec<f64> = u.iter().chain(w).copied().collect();
    let rates = ode.rates(&y)?;
    let positive = if k > 0.0 && lam < 1.0 { 0.0 } else { f64::INFINITY };
    acc.push("kappa_scalar_identity", (k - rates.kappa).abs().max(positive), 1e-12);

    let mut probe = fs.clone();
    if tamper {
        tamper_state(&mut probe);
    }
    let (res, sum_gap) = flat_white_residual(&probe, u, w, alpha)?;
    acc.push("flat_white_residual", res, 1e-8);
    acc.push("summed_identity", sum_gap, 1e-10);

    let mut bad = fs.clone();
    tamper_state(&mut bad);
    let (bad_res, _) = flat_white_residual(&bad, u, w, alpha)?;
    // passes when the perturbed state is caught
    acc.push("negative_control", if bad_res > 1e-8 { 0.0 } else { f64::INFINITY }, 0.0);

    let cleanup = cleanup_matrix(u, w, beta)?;
    acc.push("cleanup_radius", cleanup.identity_gap, 1e-10);
    acc.push("cleanup_identity", cleanup_identity_gap(u, w), 1e-12);

    acc.push("colour_symmetry", permuted_kappa_gap(&fs, alpha)?, 1e-10);
    acc.push("small_delta_oracle", naive_gap(u, w, beta, alpha)?, 1e-10);
    Ok(())
}

fn merge(items: impl IntoIterator<Item = (&'static str, f64, f64)>) -> Vec<CheckResult> {
    let mut out: Vec<CheckResult> = Vec::new();
    for (name, err, threshold) in items {
        match out.iter_mut().find(|r| r.check_name == name) {
            Some(r) => r.max_abs_error = r.max_abs_error.max(err),
            None => out.push(CheckResult { check_name: name.to_string(), max_abs_error: err, threshold, pass: false }),
        }
    }
    for r in &mut out {
        r.pass = r.max_abs_error <= r.threshold;
    }
    out
}

/// Runs every check over `alphas × betas × states`. Errors of individual
/// cases are reported as failed checks rather than aborting the run.
pub fn verify_theory(cfg: &VerifyConfig) -> Result<Vec<CheckResult>> {
    if cfg.delta > MAX_VERIFY_DELTA {
        return Err(Error::param(format!(
            "delta {} exceeds the dense-algebra cap of {MAX_VERIFY_DELTA}",
            cfg.delta
        )));
    }
    if cfg.delta < NAIVE_DELTA {
        return Err(Error::param(format!("delta must be at least {NAIVE_DELTA}")));
    }
    let mut cases = Vec::new();
    for &alpha in &cfg.alphas {
        let states = trajectory_states(cfg.d, alpha, cfg.delta, cfg.states)?;
        for &beta in &cfg.betas {
            cases.push((alpha, beta, states.clone()));
        }
    }
    let results: Vec<Vec<(&'static str, f64, f64)>> = cases
        .par_iter()
        .enumerate()
        .map(|(case, (alpha, beta, states))| {
            let mut acc = Acc::default();
            for (u, w) in states {
                if check_state(u, w, *beta, *alpha, cfg.tamper, &mut acc).is_err() {
                    acc.push("case_errors", f64::INFINITY, 0.0);
                }
            }
            if cfg.mc_trials > 0 {
                let (u, w) = &states[states.len() / 2];
                let z = flat_white_expand(u, w, *beta)
                    .and_then(|fs| mc_zscore(&fs, *alpha, cfg.mc_trials, cfg.seed.wrapping_add(case as u64)));
                acc.push("branching_mc", z.unwrap_or(f64::INFINITY), MC_SIGMAS);
            }
            acc.items
        })
        .collect();
    Ok(merge(results.into_iter().flatten()))
}
