use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dopri::{Dopri5, Failure, Step, Tolerances};
use super::system::{default_delta, gamma_of, initial_state, lambda_of, OdeState, OdeSystem};
use crate::{Error, Result};

/// Integration settings. β never enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeConfig {
    pub d: f64,
    pub alpha: f64,
    pub delta: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Number of points of the uniform output grid on `[0, t_end]`.
    pub grid_points: usize,
    /// How far past `t*` to continue, used as the ξ-window of the report.
    pub overshoot: f64,
}

impl OdeConfig {
    pub fn new(d: f64, alpha: f64) -> Self {
        OdeConfig {
            d,
            alpha,
            delta: default_delta(d),
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            grid_points: 1000,
            overshoot: 0.02,
        }
    }

    pub fn with_delta(mut self, delta: usize) -> Self {
        self.delta = delta;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::param("tolerances must be positive"));
        }
        if self.grid_points < 2 {
            return Err(Error::param("grid needs at least two points"));
        }
        if !(self.overshoot >= 0.0) {
            return Err(Error::param("overshoot must be non-negative"));
        }
        Ok(())
    }
}

/// Below this total 2-list density the α-power denominator is meaningless.
pub const STOP_EPSILON: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    /// Reached `t* + overshoot` (or `t* = 0`).
    Completed,
    /// Reached `t = 1` without γ changing sign.
    NoCrossing,
    /// `Σ u_i` dropped below [`STOP_EPSILON`].
    Exhausted { t: f64 },
    /// κ or one of its denominators became singular.
    Degenerate { t: f64, reason: String },
    StepUnderflow { t: f64 },
}

impl Termination {
    pub fn is_failure(&self) -> bool {
        !matches!(self, Termination::Completed | Termination::NoCrossing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub t_star: Option<f64>,
    /// `min u_ℓ, w_ℓ` over `[0, t* + overshoot]`.
    pub xi_positivity: f64,
    /// `−γ(t* + overshoot)`.
    pub xi_gamma: Option<f64>,
    /// `3/2 − max Σi(i−1)u_i / Σi(u_i+w_i)` over `[0, t* + overshoot]`.
    pub xi_lambda: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: OdeConfig,
    pub samples: Vec<OdeState>,
    pub lambda: Vec<Option<f64>>,
    pub gamma: Vec<f64>,
    pub t_star: Option<f64>,
    /// Supremum of λ over accepted steps with γ > 0.
    pub sup_lambda: f64,
    pub termination: Termination,
    pub report: AssumptionReport,
    pub steps: usize,
}

struct Sweep {
    t_star: Option<f64>,
    sup_lambda: f64,
    max_lambda_window: f64,
    min_value: f64,
    gamma_end: Option<f64>,
    t_end: f64,
    termination: Termination,
    steps: usize,
}

fn lambda_or_zero(y: &[f64]) -> f64 {
    let m = y.len() / 2;
    lambda_of(&y[..m], &y[m..]).unwrap_or(0.0)
}

fn gamma_y(y: &[f64]) -> f64 {
    let m = y.len() / 2;
    gamma_of(&y[..m], &y[m..])
}

/// Root of γ on the dense output of `step`, to `1e-8` in `t`.
fn locate_crossing(step: &Step) -> f64 {
    let mut buf = vec![0.0; step.y0.len()];
    let (mut lo, mut hi) = (step.t0, step.t1);
    while hi - lo > 1e-8 {
        let mid = 0.5 * (lo + hi);
        step.interpolate(mid, &mut buf);
        if gamma_y(&buf) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Integrates from 0 until `t* + overshoot`, `t = 1` or a failure. When
/// `stop_at_crossing` is set the overshoot is skipped.
fn sweep(cfg: &OdeConfig, stop_at_crossing: bool, mut on_step: impl FnMut(&Step)) -> Result<Sweep> {
    cfg.validate()?;
    let sys = OdeSystem::new(cfg.alpha, cfg.delta)?;
    let y0 = initial_state(cfg.d, cfg.delta)?.to_vec();
    let g0 = gamma_y(&y0);
    let lam0 = lambda_or_zero(&y0);
    let min0 = y0.iter().copied().fold(f64::INFINITY, f64::min);
    if g0 <= 0.0 {
        return Ok(Sweep {
            t_star: Some(0.0),
            sup_lambda: 0.0,
            max_lambda_window: lam0,
            min_value: min0,
            gamma_end: Some(g0),
            t_end: 0.0,
            termination: Termination::Completed,
            steps: 0,
        });
    }
    let rhs = |y: &[f64], dy: &mut [f64]| sys.eval(y, dy).map(|_| ());
    let tol = Tolerances { rel: cfg.rel_tol, abs: cfg.abs_tol };
    let mut out = Sweep {
        t_star: None,
        sup_lambda: lam0,
        max_lambda_window: lam0,
        min_value: min0,
        gamma_end: None,
        t_end: 0.0,
        termination: Termination::NoCrossing,
        steps: 0,
    };
    let mut solver = match Dopri5::new(rhs, 0.0, y0, tol) {
        Ok(s) => s,
        Err(Failure::Rhs(e)) => {
            out.termination = Termination::Degenerate { t: 0.0, reason: e.to_string() };
            return Ok(out);
        }
        Err(Failure::Underflow) => unreachable!(),
    };
    let mut t_limit = 1.0;
    while solver.t() < t_limit {
        let step = match solver.step(t_limit) {
            Ok(s) => s,
            Err(f) => {
                let t = solver.t();
                out.termination = match f {
                    Failure::Rhs(e) => Termination::Degenerate { t, reason: e.to_string() },
                    Failure::Underflow => Termination::StepUnderflow { t },
                };
                break;
            }
        };
        out.steps += 1;
        on_step(&step);
        let y1 = &step.y1;
        let g1 = gamma_y(y1);
        let lam = lambda_or_zero(y1);
        out.max_lambda_window = out.max_lambda_window.max(lam);
        out.min_value = y1.iter().copied().fold(out.min_value, f64::min);
        out.t_end = step.t1;
        if out.t_star.is_none() {
            if g1 > 0.0 {
                out.sup_lambda = out.sup_lambda.max(lam);
            } else {
                let ts = locate_crossing(&step);
                out.t_star = Some(ts);
                if stop_at_crossing {
                    out.termination = Termination::Completed;
                    break;
                }
                t_limit = (ts + cfg.overshoot).min(1.0);
            }
        }
        let u_sum: f64 = y1[..cfg.delta + 1].iter().sum();
        if u_sum < STOP_EPSILON {
            out.termination = Termination::Exhausted { t: step.t1 };
            break;
        }
    }
    if out.t_star.is_some() && !out.termination.is_failure() {
        out.termination = Termination::Completed;
        out.gamma_end = Some(gamma_y(solver.y()));
    }
    Ok(out)
}

/// Solves the reduced system and samples it on a uniform grid over
/// `[0, t_end]`, `t_end` being where the integration stopped.
pub fn integrate(cfg: &OdeConfig) -> Result<Trajectory> {
    let first = sweep(cfg, false, |_| {})?;
    let t_end = first.t_end;
    let n = cfg.grid_points;
    let grid: Vec<f64> = if t_end > 0.0 {
        (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
    } else {
        vec![0.0]
    };
    let init = initial_state(cfg.d, cfg.delta)?;
    let mut samples = vec![init];
    let mut next = 1;
    let mut buf = vec![0.0; 2 * (cfg.delta + 1)];
    if t_end > 0.0 {
        sweep(cfg, false, |step| {
            while next < grid.len() && grid[next] <= step.t1 {
                step.interpolate(grid[next], &mut buf);
                samples.push(OdeState::from_slice(grid[next], &buf));
                next += 1;
            }
        })?;
    }
    let lambda = samples.iter().map(|s| s.lambda()).collect();
    let gamma = samples.iter().map(|s| s.gamma()).collect();
    let xi_gamma = first.gamma_end.map(|g| -g);
    let xi_lambda = 1.5 - 1.5 * first.max_lambda_window;
    let feasible = first.t_star.is_some()
        && first.termination == Termination::Completed
        && xi_gamma.is_some_and(|x| x > 0.0)
        && xi_lambda > 0.0;
    Ok(Trajectory {
        config: *cfg,
        samples,
        lambda,
        gamma,
        t_star: first.t_star,
        sup_lambda: first.sup_lambda,
        termination: first.termination,
        report: AssumptionReport {
            t_star: first.t_star,
            xi_positivity: first.min_value,
            xi_gamma,
            xi_lambda,
            feasible,
        },
        steps: first.steps,
    })
}

/// Outcome of one `d_max` feasibility probe.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Probe {
    pub d: f64,
    pub feasible: bool,
    pub sup_lambda: f64,
    pub t_star: Option<f64>,
    pub termination: Termination,
}

/// Feasible iff γ reaches 0 without a failure and λ < 1 while γ > 0.
pub fn probe(cfg: &OdeConfig) -> Result<Probe> {
    let s = sweep(cfg, true, |_| {})?;
    Ok(Probe {
        d: cfg.d,
        feasible: s.t_star.is_some() && !s.termination.is_failure() && s.sup_lambda < 1.0,
        sup_lambda: s.sup_lambda,
        t_star: s.t_star,
        termination: s.termination,
    })
}

impl Trajectory {
    /// Writes `t,lambda,gamma,u_sum,w_sum,u1,w1`, optionally followed by the
    /// full state. An undefined λ is written as `NaN`.
    pub fn write_csv<W: Write>(&self, mut out: W, header: &str, full_state: bool) -> Result<()> {
        writeln!(out, "# {header}")?;
        write!(out, "t,lambda,gamma,u_sum,w_sum,u1,w1")?;
        let delta = self.config.delta;
        if full_state {
            for l in 0..=delta {
                write!(out, ",u_{l}")?;
            }
            for l in 0..=delta {
                write!(out, ",w_{l}")?;
            }
        }
        writeln!(out)?;
        for (k, s) in self.samples.iter().enumerate() {
            let lam = self.lambda[k].unwrap_or(f64::NAN);
            let u_sum: f64 = s.u.iter().sum();
            let w_sum: f64 = s.w.iter().sum();
            let u1 = super::system::moment(&s.u, 1.0);
            let w1 = super::system::moment(&s.w, 1.0);
            write!(out, "{},{},{},{},{},{},{}", s.t, lam, self.gamma[k], u_sum, w_sum, u1, w1)?;
            if full_state {
                for v in s.u.iter().chain(&s.w) {
                    write!(out, ",{v}")?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }

    /// Grid index of the largest λ.
    pub fn peak_index(&self) -> Option<usize> {
        self.lambda
            .iter()
            .enumerate()
            .filter_map(|(k, l)| l.map(|v| (k, v)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }
}

/// Largest change of the finite-difference slope of λ within `window` of
/// the peak.
pub fn max_slope_jump(traj: &Trajectory, window: f64) -> Option<f64> {
    let k = traj.peak_index()?;
    let tp = traj.samples[k].t;
    let pts: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .zip(&traj.lambda)
        .filter(|(s, _)| (s.t - tp).abs() <= window)
        .filter_map(|(s, l)| l.map(|v| (s.t, v)))
        .collect();
    let slopes: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
    slopes.windows(2).map(|s| (s[1] - s[0]).abs()).reduce(f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subcritical_start_returns_immediately() {
        let cfg = OdeConfig::new(0.8, 15.0);
        let t = integrate(&cfg).unwrap();
        assert_eq!(t.t_star, Some(0.0));
        assert_eq!(t.samples.len(), 1);
        assert_eq!(t.steps, 0);
        assert!(t.gamma[0] <= 0.0);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut cfg = OdeConfig::new(3.0, 2.0);
        cfg.rel_tol = 0.0;
        assert!(integrate(&cfg).is_err());
    }

    #[test]
    fn grid_is_uniform_and_recomputable() {
        let cfg = OdeConfig { grid_points: 200, ..OdeConfig::new(3.0, 2.0) };
        let t = integrate(&cfg).unwrap();
        assert_eq!(t.samples.len(), 200);
        let h = t.samples[1].t - t.samples[0].t;
        for w in t.samples.windows(2) {
            assert!(((w[1].t - w[0].t) - h).abs() < 1e-12);
        }
        for (k, s) in t.samples.iter().enumerate() {
            assert_eq!(s.lambda(), t.lambda[k]);
            assert_eq!(s.gamma(), t.gamma[k]);
        }
    }
}
