use rand::Rng;
use serde::{Deserialize, Serialize};

use super::pools::{Pool, Pools};
use super::precolour::{high_degree_precolor, PrecolourResult};
use crate::sbm::PlantedGraph;
use crate::Colour;

pub(crate) const ALL: u8 = 0b111;
const UNSET: u8 = u8::MAX;

/// Initial lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode", content = "delta")]
pub enum InitMode {
    /// Whole graph, every list `{1,2,3}`.
    Full,
    /// Graph restricted to degree `<= Δ`; vertices next to a high-degree
    /// vertex lose `c#(v)`, high-degree vertices take `σ#`.
    Truncated(usize),
}

impl std::fmt::Display for InitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitMode::Full => write!(f, "full"),
            InitMode::Truncated(d) => write!(f, "truncated({d})"),
        }
    }
}

/// Mutable state of one run.
///
/// A vertex is live iff it belongs to the working graph, is uncoloured and is
/// not bad. Live degree and `deg_by_colour` count live neighbours only.
#[derive(Debug, Clone)]
pub struct ColoringState {
    pub(crate) lists: Vec<u8>,
    pub(crate) assigned: Vec<u8>,
    pub(crate) live: Vec<bool>,
    pub(crate) live_degree: Vec<u32>,
    pub(crate) deg_by_colour: Vec<[u32; 3]>,
    pub(crate) bad: Vec<u32>,
    pub(crate) working: usize,
    pub(crate) live_count: usize,
    pub(crate) pools: Pools,
    pub(crate) precolour: Option<PrecolourResult>,
    pub(crate) mode: InitMode,
    // list size at the first removal in the current epoch
    pub(crate) stamp: Vec<u32>,
    pub(crate) start_size: Vec<u8>,
    pub(crate) losses_at_failure: Vec<u8>,
    pub(crate) epoch_id: u32,
}

pub(crate) fn list_size(mask: u8) -> usize {
    mask.count_ones() as usize
}

impl ColoringState {
    pub(crate) fn pool_of(&self, v: usize) -> Pool {
        match list_size(self.lists[v]) {
            1 => Pool::Forced,
            2 => Pool::Two(self.live_degree[v] as usize),
            3 => Pool::Three,
            s => unreachable!("live vertex {v} with list size {s}"),
        }
    }

    pub fn n(&self) -> usize {
        self.lists.len()
    }

    pub fn mode(&self) -> InitMode {
        self.mode
    }

    /// List of `v` as a bitmask over colours `0..3`.
    pub fn list(&self, v: usize) -> u8 {
        self.lists[v]
    }

    pub fn assigned(&self, v: usize) -> Option<Colour> {
        (self.assigned[v] != UNSET).then_some(self.assigned[v])
    }

    pub fn is_live(&self, v: usize) -> bool {
        self.live[v]
    }

    pub fn live_degree(&self, v: usize) -> usize {
        self.live_degree[v] as usize
    }

    pub fn deg_by_colour(&self, v: usize) -> [u32; 3] {
        self.deg_by_colour[v]
    }

    pub fn bad_vertices(&self) -> &[u32] {
        &self.bad
    }

    /// Size of the working graph (vertices the algorithm may colour).
    pub fn working_size(&self) -> usize {
        self.working
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn two_lists(&self) -> usize {
        self.pools.two_len()
    }

    pub fn three_lists(&self) -> usize {
        self.pools.three_len()
    }

    pub fn precolour(&self) -> Option<&PrecolourResult> {
        self.precolour.as_ref()
    }

    /// Colours lost within the epoch in which each bad vertex failed, in the
    /// order the vertices failed.
    pub fn losses_at_failure(&self) -> &[u8] {
        &self.losses_at_failure
    }

    /// Counts of live 2-list (`U`) and 3-list (`W`) vertices by live degree.
    pub fn degree_profile(&self) -> (Vec<usize>, Vec<usize>) {
        let max = self.live_degree.iter().copied().max().unwrap_or(0) as usize;
        let mut u = vec![0; max + 1];
        let mut w = vec![0; max + 1];
        for v in 0..self.n() {
            if !self.live[v] {
                continue;
            }
            let d = self.live_degree[v] as usize;
            match list_size(self.lists[v]) {
                2 => u[d] += 1,
                3 => w[d] += 1,
                _ => {}
            }
        }
        (u, w)
    }

    pub(crate) fn set_assigned(&mut self, v: usize, c: Colour) {
        self.assigned[v] = c;
    }
}

/// Builds the initial state. The precolouring, if any, draws from `rng`.
pub fn init_lists<R: Rng>(graph: &PlantedGraph, mode: InitMode, alpha: f64, rng: &mut R) -> ColoringState {
    let n = graph.n();
    let (precolour, in_graph): (Option<PrecolourResult>, Vec<bool>) = match mode {
        InitMode::Full => (None, vec![true; n]),
        InitMode::Truncated(delta) => {
            let p = high_degree_precolor(graph, delta, rng);
            (Some(p), (0..n).map(|v| graph.degree(v) <= delta).collect())
        }
    };
    let sigma = graph.sigma_star();
    let mut lists = vec![0u8; n];
    let mut assigned = vec![UNSET; n];
    let mut live_degree = vec![0u32; n];
    let mut deg_by_colour = vec![[0u32; 3]; n];
    let mut max_degree = 0;
    for v in 0..n {
        if !in_graph[v] {
            if let Some(c) = precolour.as_ref().and_then(|p| p.sigma_hash[v]) {
                assigned[v] = c;
            }
            continue;
        }
        lists[v] = ALL;
        if let Some(c) = precolour.as_ref().and_then(|p| p.forbidden[v]) {
            lists[v] &= !(1 << c);
        }
        for &w in graph.neighbours(v) {
            if in_graph[w as usize] {
                live_degree[v] += 1;
                deg_by_colour[v][sigma[w as usize] as usize] += 1;
            }
        }
        max_degree = max_degree.max(live_degree[v] as usize);
    }
    let working = in_graph.iter().filter(|&&b| b).count();
    let mut state = ColoringState {
        lists,
        assigned,
        live: in_graph,
        live_degree,
        deg_by_colour,
        bad: Vec::new(),
        working,
        live_count: working,
        pools: Pools::new(n, max_degree, alpha),
        precolour,
        mode,
        stamp: vec![u32::MAX; n],
        start_size: vec![0; n],
        losses_at_failure: Vec::new(),
        epoch_id: 0,
    };
    for v in 0..n {
        if state.live[v] {
            let pool = state.pool_of(v);
            state.pools.insert(v, pool);
        }
    }
    state
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Purpose};
    use crate::sbm::SbmParams;

    #[test]
    fn full_mode_lists_are_complete() {
        let g = crate::sbm::generate(SbmParams::new(500, 4.03, 6.0).unwrap(), 1).unwrap();
        let s = init_lists(&g, InitMode::Full, 15.0, &mut seeded(Purpose::Precolour, 1));
        assert!((0..500).all(|v| s.list(v) == ALL));
        assert_eq!(s.three_lists(), 500);
        for v in 0..500 {
            let d: u32 = s.deg_by_colour(v).iter().sum();
            assert_eq!(d as usize, s.live_degree(v));
            assert_eq!(s.live_degree(v), g.degree(v));
        }
    }

    #[test]
    fn truncated_star_leaves_have_two_lists() {
        let delta = 3;
        let p = SbmParams::new(6, 1.0, 1.0).unwrap();
        let g = PlantedGraph::from_edges(p, 0, vec![0, 1, 2, 0, 1, 2], (1..=4).map(|i| (0, i))).unwrap();
        let s = init_lists(&g, InitMode::Truncated(delta), 15.0, &mut seeded(Purpose::Precolour, 4));
        assert!(!s.is_live(0));
        let c = s.assigned(0).unwrap();
        for leaf in 1..=4 {
            assert_eq!(list_size(s.list(leaf)), 2);
            assert_eq!(s.list(leaf) & (1 << c), 0);
            assert_eq!(s.live_degree(leaf), 0);
        }
        assert_eq!(s.list(5), ALL);
        assert_eq!(s.working_size(), 5);
    }
}
