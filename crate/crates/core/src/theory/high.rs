use serde::Serialize;

use crate::poisson::upper_tail;
use crate::{Error, Result};

/// Two-type branching matrix for the graph spanned by high-degree vertices.
///
/// Type 0 is `big` (degree `> Δ`), type 1 is `small`. `matrix[i][j]` is the
/// expected number of type-`j` children of a type-`i` vertex reached along
/// an edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HighDegree {
    pub delta: usize,
    pub matrix: [[f64; 2]; 2],
    pub radius: f64,
}

/// `E[X(X−1) 1{X ∈ A}] / E[X 1{X ∈ A}]` for `A` the tail `X > Δ` or the
/// bulk `X <= Δ`, i.e. the mean of `B − 1` or `S − 1`.
fn excess(d: f64, delta: usize, tail: bool) -> f64 {
    let t1 = upper_tail(d, delta);
    let t2 = if delta == 0 { 1.0 } else { upper_tail(d, delta - 1) };
    let (first, second) = if tail { (t1, t2) } else { (1.0 - t1, 1.0 - t2) };
    if first <= 0.0 {
        return 0.0;
    }
    d * second / first
}

pub fn high_degree_matrix(d: f64, delta: usize) -> Result<HighDegree> {
    if !(d > 0.0) {
        return Err(Error::param(format!("d must be positive, got {d}")));
    }
    // share of edge ends at big vertices
    let phi = upper_tail(d, delta);
    let b = excess(d, delta, true);
    let s = excess(d, delta, false);
    let matrix = [[b * phi, b * (1.0 - phi)], [s * phi, 0.0]];
    let (a, bc) = (matrix[0][0], matrix[0][1] * matrix[1][0]);
    let radius = 0.5 * (a + (a * a + 4.0 * bc).sqrt());
    Ok(HighDegree { delta, matrix, radius })
}

/// Smallest Δ in `1..=max_delta` whose matrix is subcritical.
pub fn delta0(d: f64, max_delta: usize) -> Result<Option<usize>> {
    for delta in 1..=max_delta {
        if high_degree_matrix(d, delta)?.radius < 1.0 {
            return Ok(Some(delta));
        }
    }
    Ok(None)
}
