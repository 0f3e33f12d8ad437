use std::collections::VecDeque;

use rand::Rng;

use crate::sbm::PlantedGraph;
use crate::{Colour, Q};

/// Colours for the high-degree part of the graph.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecolourResult {
    pub delta: usize,
    /// `σ#(v)` for every `v ∈ V#`, `None` elsewhere.
    pub sigma_hash: Vec<Option<Colour>>,
    /// `c#(v)` for every `v ∈ V#_Δ` (low-degree vertex with a high-degree
    /// neighbour), `None` elsewhere.
    pub forbidden: Vec<Option<Colour>>,
    /// Edges of `G#` whose endpoints received the same colour.
    pub monochromatic_hash_edges: usize,
    /// Vertices of `V#_Δ` whose high-degree neighbours disagree.
    pub split_boundary: usize,
}

impl PrecolourResult {
    pub fn is_high(&self, graph: &PlantedGraph, v: usize) -> bool {
        graph.degree(v) > self.delta
    }

    pub fn hash_size(&self) -> usize {
        self.sigma_hash.iter().filter(|c| c.is_some()).count()
    }
}

/// Colours `G#`, the graph on `V#` whose edges have at least one endpoint of
/// degree greater than `delta`.
///
/// Each component is explored breadth-first from its smallest vertex. The
/// root receives a uniform colour `a`, and a second colour `b ≠ a` is drawn
/// uniformly; vertices at even depth get `a`, odd depth `b`. On trees this is
/// a proper colouring in which every low-degree vertex sees a single colour
/// among its high-degree neighbours; on cyclic components the conflicts are
/// counted.
pub fn high_degree_precolor<R: Rng>(graph: &PlantedGraph, delta: usize, rng: &mut R) -> PrecolourResult {
    let n = graph.n();
    let high = |v: usize| graph.degree(v) > delta;
    let hash_edge = |v: usize, w: usize| high(v) || high(w);
    let mut in_hash = vec![false; n];
    for v in (0..n).filter(|&v| high(v)) {
        in_hash[v] = true;
        for &w in graph.neighbours(v) {
            in_hash[w as usize] = true;
        }
    }
    let mut sigma_hash: Vec<Option<Colour>> = vec![None; n];
    let mut depth = vec![0u32; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if !in_hash[root] || sigma_hash[root].is_some() {
            continue;
        }
        let a: Colour = rng.random_range(0..Q as Colour);
        let b: Colour = (a + rng.random_range(1..Q as Colour)) % Q as Colour;
        sigma_hash[root] = Some(a);
        depth[root] = 0;
        queue.push_back(root);
        while let Some(v) = queue.pop_front() {
            for &w in graph.neighbours(v) {
                let w = w as usize;
                if !hash_edge(v, w) || sigma_hash[w].is_some() {
                    continue;
                }
                depth[w] = depth[v] + 1;
                sigma_hash[w] = Some(if depth[w] % 2 == 0 { a } else { b });
                queue.push_back(w);
            }
        }
    }
    let monochromatic_hash_edges = graph
        .edges()
        .iter()
        .filter(|&&(u, v)| {
            let (u, v) = (u as usize, v as usize);
            hash_edge(u, v) && sigma_hash[u] == sigma_hash[v]
        })
        .count();
    let mut forbidden = vec![None; n];
    let mut split_boundary = 0;
    for v in (0..n).filter(|&v| in_hash[v] && !high(v)) {
        let mut seen = graph.neighbours(v).iter().map(|&w| w as usize).filter(|&w| high(w)).map(|w| sigma_hash[w]);
        let first = seen.next().flatten();
        if seen.any(|c| c != first) {
            split_boundary += 1;
        }
        forbidden[v] = first;
    }
    PrecolourResult { delta, sigma_hash, forbidden, monochromatic_hash_edges, split_boundary }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{seeded, Purpose};
    use crate::sbm::SbmParams;

    fn graph(n: usize, edges: &[(usize, usize)]) -> PlantedGraph {
        let p = SbmParams::new(n, 1.0, 1.0).unwrap();
        PlantedGraph::from_edges(p, 0, vec![0; n], edges.iter().copied()).unwrap()
    }

    #[test]
    fn low_degree_graph_is_untouched() {
        let g = graph(4, &[(0, 1), (1, 2), (2, 3)]);
        let r = high_degree_precolor(&g, 2, &mut seeded(Purpose::Precolour, 1));
        assert_eq!(r.hash_size(), 0);
        assert_eq!(r.monochromatic_hash_edges, 0);
        assert!(r.forbidden.iter().all(Option::is_none));
    }

    #[test]
    fn star_leaves_forbid_centre_colour() {
        let delta = 3;
        let edges: Vec<_> = (1..=delta + 1).map(|i| (0, i)).collect();
        let g = graph(delta + 2, &edges);
        for seed in 0..20 {
            let r = high_degree_precolor(&g, delta, &mut seeded(Purpose::Precolour, seed));
            let c = r.sigma_hash[0].unwrap();
            for leaf in 1..=delta + 1 {
                assert_eq!(r.forbidden[leaf], Some(c));
                assert_ne!(r.sigma_hash[leaf], Some(c));
            }
            assert_eq!(r.monochromatic_hash_edges, 0);
        }
    }

    #[test]
    fn odd_cycle_through_high_vertices_counts_conflict() {
        // triangle of three high-degree vertices, each with two pendant leaves
        let mut edges = vec![(0, 1), (1, 2), (0, 2)];
        let mut next = 3;
        for c in 0..3 {
            for _ in 0..2 {
                edges.push((c, next));
                next += 1;
            }
        }
        let g = graph(next, &edges);
        let r = high_degree_precolor(&g, 3, &mut seeded(Purpose::Precolour, 2));
        assert!(r.monochromatic_hash_edges >= 1);
    }

    #[test]
    fn tree_boundary_sees_one_colour() {
        // two high vertices sharing a low neighbour
        let mut edges = vec![(0, 2), (1, 2)];
        for i in 0..3 {
            edges.push((0, 3 + i));
            edges.push((1, 6 + i));
        }
        let g = graph(9, &edges);
        for seed in 0..20 {
            let r = high_degree_precolor(&g, 3, &mut seeded(Purpose::Precolour, seed));
            assert_eq!(r.sigma_hash[0], r.sigma_hash[1]);
            assert_eq!(r.split_boundary, 0);
            assert_eq!(r.monochromatic_hash_edges, 0);
        }
    }
}
