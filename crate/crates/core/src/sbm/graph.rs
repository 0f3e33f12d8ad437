use std::collections::HashSet;
use std::io::{BufRead, Write};

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::params::SbmParams;
use crate::rng::{self, Purpose, StreamRng};
use crate::{Colour, Error, Result, Q};

/// Sparse undirected graph together with its planted colouring.
///
/// Adjacency is stored in compressed-row form; every undirected edge appears
/// in both endpoints' rows. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedGraph {
    params: SbmParams,
    seed: u64,
    sigma_star: Vec<Colour>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
    edges: Vec<(u32, u32)>,
}

impl PlantedGraph {
    /// Builds a graph from an explicit edge list. Edges are normalised to
    /// `u < v`; self-loops and duplicates are rejected.
    pub fn from_edges(
        params: SbmParams,
        seed: u64,
        sigma_star: Vec<Colour>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = params.n;
        if sigma_star.len() != n {
            return Err(Error::param(format!(
                "planted colouring has {} entries for {n} vertices",
                sigma_star.len()
            )));
        }
        if let Some(&c) = sigma_star.iter().find(|&&c| c as usize >= Q) {
            return Err(Error::param(format!("colour {c} out of range")));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::param(format!("self-loop at {u}")));
            }
            list.push((u.min(v) as u32, u.max(v) as u32));
        }
        list.sort_unstable();
        if list.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::param("parallel edge"));
        }
        Ok(Self::from_sorted_edges(params, seed, sigma_star, list))
    }

    fn from_sorted_edges(
        params: SbmParams,
        seed: u64,
        sigma_star: Vec<Colour>,
        edges: Vec<(u32, u32)>,
    ) -> Self {
        let n = params.n;
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0u32; 2 * edges.len()];
        for &(u, v) in &edges {
            adjacency[fill[u as usize]] = v;
            fill[u as usize] += 1;
            adjacency[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        PlantedGraph { params, seed, sigma_star, offsets, adjacency, edges }
    }

    pub fn params(&self) -> &SbmParams {
        &self.params
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sigma_star(&self) -> &[Colour] {
        &self.sigma_star
    }

    pub fn neighbours(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n()).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Edges with `u < v`, sorted.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn mean_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            2.0 * self.edges.len() as f64 / self.n() as f64
        }
    }

    /// Number of edges whose endpoints share a colour under `sigma`.
    pub fn monochromatic_edges(&self, sigma: &[Colour]) -> usize {
        self.edges
            .iter()
            .filter(|&&(u, v)| sigma[u as usize] == sigma[v as usize])
            .count()
    }

    /// Writes the plain-text edge-list format: a header `n d beta seed`, one
    /// planted colour (1-based) per line, then one `u v` line per edge.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{} {} {} {}", self.n(), self.params.d, self.params.beta, self.seed)?;
        for &c in &self.sigma_star {
            writeln!(out, "{}", c + 1)?;
        }
        for &(u, v) in &self.edges {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn read_from<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines().enumerate();
        let parse_err = |line: usize, msg: &str| Error::Parse { line: line + 1, msg: msg.to_string() };
        let (ln, header) = lines.next().ok_or_else(|| parse_err(0, "empty input"))?;
        let header = header?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(ln, "header must be `n d beta seed`"));
        }
        let n: usize = fields[0].parse().map_err(|_| parse_err(ln, "bad n"))?;
        let d: f64 = fields[1].parse().map_err(|_| parse_err(ln, "bad d"))?;
        let beta: f64 = fields[2].parse().map_err(|_| parse_err(ln, "bad beta"))?;
        let seed: u64 = fields[3].parse().map_err(|_| parse_err(ln, "bad seed"))?;
        let params = SbmParams::new(n, d, beta)?;
        let mut sigma = Vec::with_capacity(n);
        for _ in 0..n {
            let (ln, line) = lines.next().ok_or_else(|| parse_err(ln, "missing colour line"))?;
            let c: u8 = line?.trim().parse().map_err(|_| parse_err(ln, "bad colour"))?;
            if !(1..=3).contains(&c) {
                return Err(parse_err(ln, "colour must be 1, 2 or 3"));
            }
            sigma.push(c - 1);
        }
        let mut edges = Vec::new();
        for (ln, line) in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let mut next = || -> Result<usize> {
                it.next()
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| parse_err(ln, "bad edge line"))
            };
            edges.push((next()?, next()?));
        }
        PlantedGraph::from_edges(params, seed, sigma, edges)
    }
}

/// Samples a planted graph. See [`generate_with_rng`].
pub fn generate(params: SbmParams, seed: u64) -> Result<PlantedGraph> {
    let mut rng = rng::seeded(Purpose::Graph, seed);
    generate_with_rng(params, seed, &mut rng)
}

/// Draws the planted colouring uniformly, then for each of the six unordered
/// community pairs draws the edge count from `Binomial(#pairs, rate/n)` and
/// places that many distinct pairs uniformly at random. This is the same
/// distribution as flipping an independent coin per vertex pair.
pub fn generate_with_rng(params: SbmParams, seed: u64, rng: &mut StreamRng) -> Result<PlantedGraph> {
    let n = params.n;
    if n == 0 {
        return Err(Error::param("need at least one vertex"));
    }
    let (Some(p_in), Some(p_out)) = (params.pair_probability(true), params.pair_probability(false))
    else {
        return Err(Error::param(format!(
            "n={n} too small for rates d_in={}, d_out={} (edge probability would be clamped at 1)",
            params.d_in(),
            params.d_out()
        )));
    };

    let sigma: Vec<Colour> = (0..n).map(|_| rng.random_range(0..Q as u8)).collect();
    let mut classes: [Vec<u32>; Q] = Default::default();
    for (v, &c) in sigma.iter().enumerate() {
        classes[c as usize].push(v as u32);
    }

    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    for a in 0..Q {
        for b in a..Q {
            let (ca, cb) = (&classes[a], &classes[b]);
            let pairs: u64 = if a == b {
                let m = ca.len() as u64;
                m * m.saturating_sub(1) / 2
            } else {
                ca.len() as u64 * cb.len() as u64
            };
            let p = if a == b { p_in } else { p_out };
            if pairs == 0 || p == 0.0 {
                continue;
            }
            let count = Binomial::new(pairs, p)
                .map_err(|e| Error::param(format!("binomial: {e}")))?
                .sample(rng);
            seen.clear();
            let mut placed = 0u64;
            while placed < count {
                let (u, v) = if a == b {
                    let i = rng.random_range(0..ca.len());
                    let j = rng.random_range(0..ca.len());
                    if i == j {
                        continue;
                    }
                    (ca[i], ca[j])
                } else {
                    (ca[rng.random_range(0..ca.len())], cb[rng.random_range(0..cb.len())])
                };
                let key = (u.min(v), u.max(v));
                if seen.insert(key) {
                    edges.push(key);
                    placed += 1;
                }
            }
        }
    }
    edges.sort_unstable();
    Ok(PlantedGraph::from_sorted_edges(params, seed, sigma, edges))
}
