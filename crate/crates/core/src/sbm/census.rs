use super::graph::PlantedGraph;
use crate::poisson;
use crate::theory::TypeIndex;
use crate::Q;

/// Vertex counts of the Δ-truncated graph, by planted colour and by the
/// number of surviving neighbours of each planted colour.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeCensus {
    index: TypeIndex,
    class: [usize; Q],
    cells: Vec<usize>,
}

impl TypeCensus {
    pub fn delta(&self) -> usize {
        self.index.delta()
    }

    /// Surviving vertices of planted colour `s`.
    pub fn class_count(&self, s: usize) -> usize {
        self.class[s]
    }

    /// Surviving vertices of planted colour `s` with `degrees[r]` surviving
    /// neighbours of planted colour `r`.
    pub fn cell(&self, s: usize, degrees: [usize; 3]) -> usize {
        self.index.index(s, degrees).map_or(0, |i| self.cells[i])
    }

    pub fn index(&self) -> &TypeIndex {
        &self.index
    }

    pub fn survivors(&self) -> usize {
        self.class.iter().sum()
    }
}

/// Deletes every vertex of degree greater than `delta` and counts the rest.
pub fn census(graph: &PlantedGraph, delta: usize) -> TypeCensus {
    let index = TypeIndex::new(delta);
    let mut class = [0usize; Q];
    let mut cells = vec![0usize; index.len()];
    let sigma = graph.sigma_star();
    let keep = |v: usize| graph.degree(v) <= delta;
    for v in (0..graph.n()).filter(|&v| keep(v)) {
        let s = sigma[v] as usize;
        let mut degrees = [0usize; 3];
        for &w in graph.neighbours(v) {
            if keep(w as usize) {
                degrees[sigma[w as usize] as usize] += 1;
            }
        }
        class[s] += 1;
        cells[index.index(s, degrees).expect("degree bounded by delta")] += 1;
    }
    TypeCensus { index, class, cells }
}

/// Large-`n` value of a class count: `(n/3)·P[Po(d) ≤ Δ]`.
pub fn census_class_expectation(n: usize, d: f64, delta: usize) -> f64 {
    n as f64 / 3.0 * poisson::cdf(d, delta)
}

/// Large-`n` value of a cell count for planted colour `s`.
pub fn census_cell_expectation(n: usize, d: f64, beta: f64, s: usize, degrees: [usize; 3]) -> f64 {
    let k: usize = degrees.iter().sum();
    let x = (-beta).exp();
    let same = if beta.is_infinite() && degrees[s] == 0 { 1.0 } else { (-beta * degrees[s] as f64).exp() };
    n as f64 / 3.0 * poisson::pmf(d, k) * poisson::multinomial(degrees) * same / (2.0 + x).powi(k as i32)
}
