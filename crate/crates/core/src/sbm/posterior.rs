use super::graph::PlantedGraph;
use crate::{Colour, Error, Result, Q};

/// Largest `n` accepted by the exhaustive maximiser.
pub const EXHAUSTIVE_LIMIT: usize = 12;

const PERMUTATIONS: [[Colour; 3]; 6] =
    [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

/// `-1/2 + (3/2n)·max_π #{v : π(σ(v)) = σ*(v)}`.
pub fn agreement(sigma: &[Colour], sigma_star: &[Colour]) -> Result<f64> {
    if sigma.len() != sigma_star.len() {
        return Err(Error::param(format!(
            "colourings differ in length ({} vs {})",
            sigma.len(),
            sigma_star.len()
        )));
    }
    if sigma.is_empty() {
        return Err(Error::param("agreement of empty colourings"));
    }
    let mut joint = [[0usize; Q]; Q];
    for (&a, &b) in sigma.iter().zip(sigma_star) {
        joint[a as usize][b as usize] += 1;
    }
    let best = PERMUTATIONS
        .iter()
        .map(|p| (0..Q).map(|c| joint[c][p[c] as usize]).sum::<usize>())
        .max()
        .unwrap();
    Ok(-0.5 + 1.5 * best as f64 / sigma.len() as f64)
}

pub fn class_sizes(sigma: &[Colour]) -> [usize; Q] {
    let mut sizes = [0; Q];
    for &c in sigma {
        sizes[c as usize] += 1;
    }
    sizes
}

/// `(m_in, m_out)`: edges inside a colour class and edges across classes.
pub fn edge_split(graph: &PlantedGraph, sigma: &[Colour]) -> (u64, u64) {
    let m_in = graph.monochromatic_edges(sigma) as u64;
    (m_in, graph.edge_count() as u64 - m_in)
}

/// Potential vertex pairs inside and across classes.
fn pair_counts(sigma: &[Colour]) -> (i128, i128) {
    let sizes = class_sizes(sigma).map(|s| s as i128);
    let n: i128 = sizes.iter().sum();
    let inside: i128 = sizes.iter().map(|s| s * (s - 1) / 2).sum();
    (inside, n * (n - 1) / 2 - inside)
}

/// Unnormalised log posterior weight of `sigma` given the graph:
///
/// `m_in ln d_in + m_out ln d_out + (N_in − m_in) ln(1 − d_in/n) + (N_out − m_out) ln(1 − d_out/n)`.
///
/// Returns `-inf` when `d_in = 0` and `sigma` has a monochromatic edge.
pub fn log_posterior(graph: &PlantedGraph, sigma: &[Colour]) -> Result<f64> {
    if sigma.len() != graph.n() {
        return Err(Error::param("colouring length does not match graph"));
    }
    let p = graph.params();
    let n = p.n as f64;
    let (d_in, d_out) = (p.d_in(), p.d_out());
    if d_in / n >= 1.0 || d_out / n >= 1.0 {
        return Err(Error::param("edge probabilities must be below 1"));
    }
    let (m_in, m_out) = edge_split(graph, sigma);
    let (big_in, big_out) = pair_counts(sigma);
    let term = |m: u64, rate: f64| if m == 0 { 0.0 } else { m as f64 * rate.ln() };
    if d_in == 0.0 && m_in > 0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(term(m_in, d_in)
        + term(m_out, d_out)
        + (big_in - m_in as i128) as f64 * (-d_in / n).ln_1p()
        + (big_out - m_out as i128) as f64 * (-d_out / n).ln_1p())
}

/// What the loss is measured against.
#[derive(Debug, Clone, Copy)]
pub enum MaxMode<'a> {
    /// Maximum over all `3^n` colourings; `n <= EXHAUSTIVE_LIMIT`.
    Exhaustive,
    /// A supplied near-maximal colouring.
    Reference(&'a [Colour]),
}

/// `(1/n)·(log weight of the maximiser − log weight of sigma)`.
///
/// Non-negative in exhaustive mode. In reference mode the value is the signed
/// gap and is negative whenever `sigma` beats the reference.
pub fn loss(graph: &PlantedGraph, sigma: &[Colour], mode: MaxMode<'_>) -> Result<f64> {
    let own = log_posterior(graph, sigma)?;
    let top = match mode {
        MaxMode::Exhaustive => map_exhaustive(graph)?.1,
        MaxMode::Reference(r) => log_posterior(graph, r)?,
    };
    if top == own {
        return Ok(0.0);
    }
    Ok((top - own) / graph.n() as f64)
}

/// Enumerates every colouring and returns the first one of maximal weight
/// (in base-3 counting order, vertex 0 least significant) with its weight.
pub fn map_exhaustive(graph: &PlantedGraph) -> Result<(Vec<Colour>, f64)> {
    let n = graph.n();
    if n > EXHAUSTIVE_LIMIT {
        return Err(Error::param(format!(
            "exhaustive maximisation refused for n={n} > {EXHAUSTIVE_LIMIT}"
        )));
    }
    let mut sigma = vec![0 as Colour; n];
    let mut best = (sigma.clone(), log_posterior(graph, &sigma)?);
    loop {
        let mut i = 0;
        while i < n && sigma[i] == 2 {
            sigma[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
        sigma[i] += 1;
        let w = log_posterior(graph, &sigma)?;
        if w > best.1 {
            best = (sigma.clone(), w);
        }
    }
    Ok(best)
}

/// Recolours isolated vertices, lowest index first, from the largest class to
/// the smallest until no class can move closer to `n/3` this way.
pub fn rebalance_isolated(graph: &PlantedGraph, sigma: &[Colour]) -> Vec<Colour> {
    let mut out = sigma.to_vec();
    let mut sizes = class_sizes(&out);
    for v in (0..graph.n()).filter(|&v| graph.degree(v) == 0) {
        let big = (0..Q).max_by_key(|&c| (sizes[c], std::cmp::Reverse(c))).unwrap();
        let small = (0..Q).min_by_key(|&c| (sizes[c], c)).unwrap();
        if sizes[big] <= sizes[small] + 1 {
            break;
        }
        if out[v] as usize == big {
            out[v] = small as Colour;
            sizes[big] -= 1;
            sizes[small] += 1;
        }
    }
    out
}

/// Limiting loss of the planted colouring, `dβ/(4e^β + 2)`.
pub fn theorem_loss(d: f64, beta: f64) -> f64 {
    d * beta / (4.0 * beta.exp() + 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sbm::{generate, SbmParams};
    use proptest::prelude::*;

    fn tiny(edges: &[(usize, usize)], n: usize) -> PlantedGraph {
        let p = SbmParams::new(n, 1.0, 2.0).unwrap();
        let sigma = (0..n).map(|v| (v % 3) as Colour).collect();
        PlantedGraph::from_edges(p, 0, sigma, edges.iter().copied()).unwrap()
    }

    #[test]
    fn agreement_extremes() {
        let s: Vec<Colour> = (0..30).map(|v| (v % 3) as Colour).collect();
        assert_eq!(agreement(&s, &s).unwrap(), 1.0);
        let constant = vec![1; 30];
        assert!(agreement(&constant, &s).unwrap().abs() < 1e-15);
        assert!(agreement(&s, &s[..29]).is_err());
    }

    #[test]
    fn empty_graph_weight() {
        let g = tiny(&[], 6);
        let sigma = [0, 1, 2, 0, 1, 2];
        let p = g.params();
        let expected = 3.0 * (-p.d_in() / 6.0).ln_1p() + 12.0 * (-p.d_out() / 6.0).ln_1p();
        assert!((log_posterior(&g, &sigma).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn one_extra_monochromatic_edge_gap() {
        // same class sizes, one edge moves from across to inside
        let g = tiny(&[(0, 1), (2, 3)], 6);
        let proper = [0, 1, 0, 1, 2, 2];
        let one_bad = [0, 1, 2, 2, 0, 1];
        assert_eq!(class_sizes(&proper), class_sizes(&one_bad));
        let p = g.params();
        let n = 6.0;
        let gap = log_posterior(&g, &proper).unwrap() - log_posterior(&g, &one_bad).unwrap();
        let expected = (p.d_out() / p.d_in()).ln()
            + ((1.0 - p.d_in() / n) / (1.0 - p.d_out() / n)).ln();
        assert!((gap - expected).abs() < 1e-12);
    }

    #[test]
    fn single_recolouring_matches_local_count() {
        let g = tiny(&[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5), (1, 4)], 6);
        let a: [Colour; 6] = [0, 1, 2, 0, 1, 2];
        let mut b = a;
        b[1] = 0;
        let p = g.params();
        let n = 6.0;
        let (mi_a, _) = edge_split(&g, &a);
        let (mi_b, _) = edge_split(&g, &b);
        let (ni_a, _) = pair_counts(&a);
        let (ni_b, _) = pair_counts(&b);
        let dm = mi_b as f64 - mi_a as f64;
        let dn = (ni_b - ni_a) as f64;
        let expected = dm * (p.d_in() / p.d_out()).ln()
            + (dn - dm) * (-p.d_in() / n).ln_1p()
            - (dn - dm) * (-p.d_out() / n).ln_1p();
        let got = log_posterior(&g, &b).unwrap() - log_posterior(&g, &a).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn infinite_beta_sentinel() {
        let p = SbmParams::new(6, 1.0, f64::INFINITY).unwrap();
        let g = PlantedGraph::from_edges(p, 0, vec![0, 1, 2, 0, 1, 2], [(0, 1)]).unwrap();
        assert_eq!(log_posterior(&g, &[0, 0, 1, 1, 2, 2]).unwrap(), f64::NEG_INFINITY);
        assert!(log_posterior(&g, &[0, 1, 2, 0, 1, 2]).unwrap().is_finite());
    }

    #[test]
    fn exhaustive_refuses_large_n() {
        let g = tiny(&[], 13);
        assert!(map_exhaustive(&g).is_err());
        assert!(loss(&g, &[0; 13], MaxMode::Exhaustive).is_err());
    }

    #[test]
    fn maximiser_has_zero_loss() {
        let g = generate(SbmParams::new(8, 2.0, 3.0).unwrap(), 4).unwrap();
        let (best, _) = map_exhaustive(&g).unwrap();
        assert_eq!(loss(&g, &best, MaxMode::Exhaustive).unwrap(), 0.0);
        assert!(loss(&g, &[0; 8], MaxMode::Exhaustive).unwrap() > 0.0);
    }

    #[test]
    fn rebalance_moves_isolated_only() {
        let g = tiny(&[(0, 1)], 9);
        let sigma = [0, 1, 0, 0, 0, 0, 0, 0, 0];
        let out = rebalance_isolated(&g, &sigma);
        assert_eq!(&out[..2], &[0, 1]);
        assert_eq!(class_sizes(&out), [3, 3, 3]);
    }

    #[test]
    fn theorem_value() {
        assert!((theorem_loss(4.03, 6.0) - 0.014966).abs() < 5e-7);
    }

    fn enumerate_weights(g: &PlantedGraph) -> Vec<(Vec<Colour>, f64)> {
        let n = g.n();
        (0..3usize.pow(n as u32))
            .map(|mut code| {
                let s: Vec<Colour> = (0..n)
                    .map(|_| {
                        let c = (code % 3) as Colour;
                        code /= 3;
                        c
                    })
                    .collect();
                let w = log_posterior(g, &s).unwrap();
                (s, w)
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn agreement_in_unit_interval_and_permutation_invariant(
            a in prop::collection::vec(0u8..3, 1..60),
            seed in 0usize..6,
        ) {
            let b: Vec<Colour> = a.iter().rev().copied().collect();
            let x = agreement(&a, &b).unwrap();
            prop_assert!((0.0..=1.0).contains(&x));
            let perm = PERMUTATIONS[seed];
            let pa: Vec<Colour> = a.iter().map(|&c| perm[c as usize]).collect();
            prop_assert!((agreement(&pa, &b).unwrap() - x).abs() < 1e-12);
        }

        #[test]
        fn weight_decreases_in_monochromatic_edges(seed in 0u64..200, beta in 0.2f64..8.0) {
            let g = generate(SbmParams::new(6, 2.0, beta).unwrap(), seed).unwrap();
            let all: Vec<_> = enumerate_weights(&g)
                .into_iter()
                .map(|(s, w)| (class_sizes(&s), edge_split(&g, &s).0, w))
                .collect();
            for (c1, m1, w1) in &all {
                for (c2, m2, w2) in &all {
                    if c1 == c2 && m1 < m2 {
                        prop_assert!(w1 > w2);
                    }
                }
            }
        }
    }
}
