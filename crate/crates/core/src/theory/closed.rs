use nalgebra::DMatrix;
use serde::Serialize;

use super::flat::{neighbour_weight, Moments};
use super::spectral::spectral_radius;
use super::system::KappaTable;
use crate::ode::gamma_of;
use crate::{Error, Result, Q};

/// `κ = 3(u^(1)+w^(1)) u^(α+1) / ((5u^(1) + 3w^(1) − 2u^(2)) u^(α))`.
pub fn kappa_scalar(m: &Moments) -> Result<f64> {
    let den = (5.0 * m.u1 + 3.0 * m.w1 - 2.0 * m.u2) * m.ua;
    if !(den > 0.0) {
        return Err(Error::degenerate("kappa denominator is not positive"));
    }
    Ok(3.0 * (m.u1 + m.w1) * m.ua1 / den)
}

/// `λ = 2(u^(2) − u^(1)) / (3(u^(1) + w^(1)))`.
pub fn lambda_closed(m: &Moments) -> f64 {
    2.0 * (m.u2 - m.u1) / (3.0 * (m.u1 + m.w1))
}

/// `κ_{c,s,s'} = κ/9 · x_{s,s'}` and `κ_{s,s'} = κ/3 · x_{s,s'}`.
pub fn kappa_table_closed(kappa: f64, beta: f64) -> KappaTable {
    let mut css = [[[0.0; Q]; Q]; Q];
    let mut ss = [[0.0; Q]; Q];
    for s in 0..Q {
        for s2 in 0..Q {
            let x = neighbour_weight(beta, s, s2);
            ss[s][s2] = kappa / 3.0 * x;
            for c in 0..Q {
                css[c][s][s2] = kappa / 9.0 * x;
            }
        }
    }
    KappaTable { css, ss }
}

/// `e_{s,s'} = x_{s,s'}/3 · Σ ℓ(w_ℓ + u_ℓ)`.
pub fn edge_table_closed(m: &Moments, beta: f64) -> [[f64; Q]; Q] {
    let mut e = [[0.0; Q]; Q];
    for s in 0..Q {
        for s2 in 0..Q {
            e[s][s2] = neighbour_weight(beta, s, s2) * (m.u1 + m.w1) / 3.0;
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cleanup {
    #[serde(skip)]
    pub matrix: DMatrix<f64>,
    pub radius: f64,
    /// `(u^(2)+w^(2)−u^(1)−w^(1)) / (u^(1)+w^(1))`.
    pub closed: f64,
    pub identity_gap: f64,
}

/// Offspring matrix of breadth-first search on the residual graph, over
/// ordered pairs of planted colours: `M_T = M_T^V M_T^E`, where a vertex of
/// type `(s, ℓ)` sends `(ℓ−1)x_{s,s'}` edges to class `s'` and an edge into
/// class `s'` lands on a degree-`ℓ` vertex with probability
/// `ℓ(u_ℓ+w_ℓ)/(u^(1)+w^(1))`.
pub fn cleanup_matrix(u: &[f64], w: &[f64], beta: f64) -> Result<Cleanup> {
    if u.len() != w.len() || u.len() < 2 {
        return Err(Error::param("u and w must have equal length of at least 2"));
    }
    let delta = u.len() - 1;
    let m = Moments::of(u, w, 1.0);
    let s1 = m.u1 + m.w1;
    if !(s1 > 0.0) {
        return Err(Error::degenerate("no edge mass"));
    }
    let vt = |s: usize, l: usize| s * delta + (l - 1);
    let pair = |a: usize, b: usize| a * Q + b;
    let mut mv = DMatrix::zeros(Q * Q, Q * delta);
    let mut me = DMatrix::zeros(Q * delta, Q * Q);
    for s in 0..Q {
        for l in 1..=delta {
            for s2 in 0..Q {
                mv[(pair(s, s2), vt(s, l))] = (l - 1) as f64 * neighbour_weight(beta, s, s2);
                me[(vt(s, l), pair(s2, s))] = l as f64 * (u[l] + w[l]) / s1;
            }
        }
    }
    let matrix = mv * me;
    let radius = spectral_radius(&matrix)?;
    let closed = (m.u2 + m.w2 - m.u1 - m.w1) / s1;
    Ok(Cleanup { matrix, radius, closed, identity_gap: (radius - closed).abs() })
}

/// `|(closed cleanup radius − 1) − γ/(u^(1)+w^(1))|`.
pub fn cleanup_identity_gap(u: &[f64], w: &[f64]) -> f64 {
    let m = Moments::of(u, w, 1.0);
    let s1 = m.u1 + m.w1;
    let closed = (m.u2 + m.w2 - m.u1 - m.w1) / s1;
    ((closed - 1.0) - gamma_of(u, w) / s1).abs()
}
