use std::io::Write;

use rand::Rng;
use serde::Serialize;

use super::state::{list_size, ColoringState};
use crate::sbm::PlantedGraph;
use crate::{Colour, Result, Q};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// A 1-list vertex takes its only colour.
    Forced,
    /// Degree-weighted choice among 2-list vertices; starts an epoch.
    Free,
    /// No 1- or 2-lists left: a uniform 3-list vertex takes a uniform colour.
    Restart,
}

/// One colouring step, recorded when [`RunOptions::record_events`] is set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub vertex: u32,
    pub kind: StepKind,
    /// List of the vertex just before it was coloured.
    pub list: u8,
    pub colour: Colour,
    /// Number of 1-list vertices at the time of the choice.
    pub forced_pending: usize,
}

/// Snapshot taken just before a Step-3 choice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochDiagnostics {
    /// Completed epochs divided by the working-graph size.
    pub t: f64,
    pub epoch: u64,
    /// `None` when no live vertex of positive degree has list size 2 or 3.
    pub lambda_emp: Option<f64>,
    pub gamma_emp: f64,
    pub live: usize,
    pub bad_so_far: usize,
    pub two_lists: usize,
    pub three_lists: usize,
    /// Forced colourings in the epoch that just ended.
    pub forced_tree_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Record diagnostics every this many epochs; 0 disables the trace.
    pub sample_every: u64,
    pub record_events: bool,
}

impl RunOptions {
    /// Default cadence `max(1, n/500)`.
    pub fn for_size(n: usize) -> Self {
        RunOptions { sample_every: (n as u64 / 500).max(1), record_events: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunStats {
    pub bad: usize,
    pub mono_edges: usize,
    pub epochs: u64,
    pub restarts: u64,
    pub forced: u64,
    pub precolour_conflicts: usize,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub colouring: Vec<Colour>,
    pub stats: RunStats,
    pub trace: Vec<EpochDiagnostics>,
    pub events: Vec<Event>,
    pub state: ColoringState,
}

/// `λ` and `γ/n` from live degree profiles `U_i` (2-lists) and `W_i` (3-lists).
pub fn profile_lambda_gamma(u: &[usize], w: &[usize], n: usize) -> (Option<f64>, f64) {
    let mut num = 0.0;
    let mut den = 0.0;
    let mut gamma = 0.0;
    for i in 0..u.len() {
        let fi = i as f64;
        let (ui, wi) = (u[i] as f64, w[i] as f64);
        num += fi * (fi - 1.0) * ui;
        den += fi * (ui + wi);
        gamma += fi * (fi - 2.0) * (ui + wi);
    }
    let lambda = (den > 0.0).then(|| 2.0 * num / (3.0 * den));
    (lambda, gamma / n.max(1) as f64)
}

pub fn epoch_diagnostics(state: &ColoringState, epoch: u64, forced_tree_size: usize) -> EpochDiagnostics {
    let (u, w) = state.degree_profile();
    let norm = state.working_size().max(1);
    let (lambda_emp, gamma_emp) = profile_lambda_gamma(&u, &w, norm);
    EpochDiagnostics {
        t: epoch as f64 / norm as f64,
        epoch,
        lambda_emp,
        gamma_emp,
        live: state.live_count(),
        bad_so_far: state.bad_vertices().len(),
        two_lists: state.two_lists(),
        three_lists: state.three_lists(),
        forced_tree_size,
    }
}

fn fail(state: &mut ColoringState, graph: &PlantedGraph, u: usize) {
    state.live[u] = false;
    state.live_count -= 1;
    state.bad.push(u as u32);
    state.losses_at_failure.push(state.start_size[u]);
    let s = graph.sigma_star()[u] as usize;
    for &x in graph.neighbours(u) {
        let x = x as usize;
        if !state.live[x] {
            continue;
        }
        let old = state.pool_of(x);
        state.pools.remove(x, old);
        state.live_degree[x] -= 1;
        state.deg_by_colour[x][s] -= 1;
        let new = state.pool_of(x);
        state.pools.insert(x, new);
    }
}

fn colour(state: &mut ColoringState, graph: &PlantedGraph, v: usize, c: Colour) {
    let pool = state.pool_of(v);
    state.pools.remove(v, pool);
    state.set_assigned(v, c);
    state.live[v] = false;
    state.live_count -= 1;
    let s = graph.sigma_star()[v] as usize;
    let bit = 1u8 << c;
    for &u in graph.neighbours(v) {
        let u = u as usize;
        if !state.live[u] {
            continue;
        }
        let old = state.pool_of(u);
        state.pools.remove(u, old);
        state.live_degree[u] -= 1;
        state.deg_by_colour[u][s] -= 1;
        if state.lists[u] & bit != 0 {
            if state.stamp[u] != state.epoch_id {
                state.stamp[u] = state.epoch_id;
                state.start_size[u] = list_size(state.lists[u]) as u8;
            }
            state.lists[u] &= !bit;
        }
        if state.lists[u] == 0 {
            fail(state, graph, u);
        } else {
            let new = state.pool_of(u);
            state.pools.insert(u, new);
        }
    }
}

fn pick_from_list<R: Rng>(mask: u8, rng: &mut R) -> Colour {
    let k = rng.random_range(0..list_size(mask));
    (0..Q as u8).filter(|c| mask & (1 << c) != 0).nth(k).unwrap()
}

/// Runs the list-colouring algorithm to completion.
///
/// Forced steps come first; otherwise a 2-list vertex is chosen with
/// probability proportional to `degree^α` and takes a uniform colour from its
/// list; when only 3-lists remain a uniform one takes a uniform colour. Bad
/// vertices are taken out of the graph as soon as their list empties and get
/// a uniform colour at the end.
pub fn run<R: Rng>(graph: &PlantedGraph, mut state: ColoringState, opts: &RunOptions, rng: &mut R) -> RunOutput {
    let mut trace = Vec::new();
    let mut events = Vec::new();
    let mut epoch: u64 = 0;
    let mut restarts = 0;
    let mut forced = 0;
    let mut forced_in_epoch = 0;
    loop {
        let pending = state.pools.forced_len();
        let (v, c, kind) = if pending > 0 {
            let v = state.pools.pick_forced(rng);
            forced += 1;
            forced_in_epoch += 1;
            (v, pick_from_list(state.lists[v], rng), StepKind::Forced)
        } else if state.pools.two_len() > 0 {
            if opts.sample_every > 0 && epoch % opts.sample_every == 0 {
                trace.push(epoch_diagnostics(&state, epoch, forced_in_epoch));
            }
            epoch += 1;
            state.epoch_id += 1;
            forced_in_epoch = 0;
            let v = state.pools.pick_two(rng);
            (v, pick_from_list(state.lists[v], rng), StepKind::Free)
        } else if state.pools.three_len() > 0 {
            restarts += 1;
            state.epoch_id += 1;
            forced_in_epoch = 0;
            let v = state.pools.pick_three(rng);
            (v, rng.random_range(0..Q as Colour), StepKind::Restart)
        } else {
            break;
        };
        if opts.record_events {
            events.push(Event { vertex: v as u32, kind, list: state.lists[v], colour: c, forced_pending: pending });
        }
        colour(&mut state, graph, v, c);
    }
    let bad: Vec<u32> = state.bad.clone();
    for &b in &bad {
        let c = rng.random_range(0..Q as Colour);
        state.set_assigned(b as usize, c);
    }
    let colouring: Vec<Colour> = (0..graph.n())
        .map(|v| state.assigned(v).unwrap_or_else(|| rng.random_range(0..Q as Colour)))
        .collect();
    let stats = RunStats {
        bad: bad.len(),
        mono_edges: graph.monochromatic_edges(&colouring),
        epochs: epoch,
        restarts,
        forced,
        precolour_conflicts: state.precolour().map_or(0, |p| p.monochromatic_hash_edges),
    };
    RunOutput { colouring, stats, trace, events, state }
}

/// Writes the trace as `t,lambda_emp,gamma_emp,live,bad_so_far,two_lists,three_lists`.
pub fn write_trace_csv<W: Write>(trace: &[EpochDiagnostics], mut out: W, header: &str) -> Result<()> {
    writeln!(out, "# {header}")?;
    writeln!(out, "t,lambda_emp,gamma_emp,live,bad_so_far,two_lists,three_lists")?;
    for d in trace {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            d.t,
            d.lambda_emp.unwrap_or(f64::NAN),
            d.gamma_emp,
            d.live,
            d.bad_so_far,
            d.two_lists,
            d.three_lists
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn only_three_lists_give_zero_lambda() {
        let (l, _) = profile_lambda_gamma(&[0, 0, 0], &[0, 4, 7], 10);
        assert_eq!(l, Some(0.0));
    }

    #[test]
    fn hand_built_profile() {
        // one 2-list vertex of degree 3, one 3-list vertex of degree 1
        let u = [0, 0, 0, 1];
        let w = [0, 1, 0, 0];
        let (l, g) = profile_lambda_gamma(&u, &w, 1);
        assert_eq!(l, Some(1.0));
        assert_eq!(g, 2.0);
    }

    #[test]
    fn empty_profile_is_undefined() {
        let (l, g) = profile_lambda_gamma(&[3], &[5], 8);
        assert_eq!(l, None);
        assert_eq!(g, 0.0);
    }
}
