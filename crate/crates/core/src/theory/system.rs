use nalgebra::{DMatrix, DVector};

use super::flat::{degree_power, FullTypeState};
use super::spectral::spectral_radius;
use super::types::third_colour;
use crate::{Error, Result, Q};

/// Root distribution `p`, edge table `e` and offspring matrix `M` of the
/// forced-colouring branching process.
///
/// `M` has rows `(c', θ')` (child) and columns `(c, θ)` (parent), both in
/// [`super::TypeIndex::pair`] order.
#[derive(Debug, Clone)]
pub struct Assembled {
    pub p: DVector<f64>,
    /// `e[s][s']`: edge ends at planted-`s'` vertices pointing to planted `s`.
    pub e: [[f64; Q]; Q],
    pub m: DMatrix<f64>,
    /// `Σ_{c,θ} deg(θ)^α u_{c,θ}`.
    pub u_alpha: f64,
}

/// `κ_{c,s,s'}` and `κ_{s,s'} = Σ_c κ_{c,s,s'}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaTable {
    pub css: [[[f64; Q]; Q]; Q],
    pub ss: [[f64; Q]; Q],
}

impl KappaTable {
    fn from_progeny(fs: &FullTypeState, x: &DVector<f64>) -> Self {
        let mut css = [[[0.0; Q]; Q]; Q];
        for (theta, s, d) in fs.index.iter() {
            for c in 0..Q {
                let v = x[fs.index.pair(c, theta)];
                for s2 in 0..Q {
                    css[c][s][s2] += d[s2] as f64 * v;
                }
            }
        }
        let mut ss = [[0.0; Q]; Q];
        for c in 0..Q {
            for s in 0..Q {
                for s2 in 0..Q {
                    ss[s][s2] += css[c][s][s2];
                }
            }
        }
        KappaTable { css, ss }
    }

    pub fn max_abs_diff(&self, other: &KappaTable) -> f64 {
        let mut m: f64 = 0.0;
        for c in 0..Q {
            for s in 0..Q {
                for s2 in 0..Q {
                    m = m.max((self.css[c][s][s2] - other.css[c][s][s2]).abs());
                }
            }
        }
        m
    }
}

pub fn edge_table(fs: &FullTypeState) -> [[f64; Q]; Q] {
    let mut e = [[0.0; Q]; Q];
    for (theta, s2, d) in fs.index.iter() {
        let mass = fs.w[theta] + (0..Q).map(|c| fs.u_at(c, theta)).sum::<f64>();
        for s in 0..Q {
            e[s][s2] += d[s] as f64 * mass;
        }
    }
    e
}

fn edge_ratio(e: &[[f64; Q]; Q], s: usize, s2: usize) -> Result<f64> {
    let v = e[s][s2];
    if v > 0.0 {
        Ok(1.0 / v)
    } else {
        Err(Error::degenerate(format!("e[{s}][{s2}] vanishes")))
    }
}

pub fn assemble_system(fs: &FullTypeState, alpha: f64) -> Result<Assembled> {
    let idx = &fs.index;
    let n = idx.pair_len();
    let pow: Vec<f64> = (0..=idx.delta()).map(|l| degree_power(l, alpha)).collect();
    let u_alpha: f64 = idx
        .iter()
        .map(|(theta, _, _)| pow[idx.total_degree(theta)] * (0..Q).map(|c| fs.u_at(c, theta)).sum::<f64>())
        .sum();
    if !(u_alpha > 0.0) {
        return Err(Error::degenerate("no weighted 2-list mass"));
    }
    let mut p = DVector::zeros(n);
    for theta in 0..idx.len() {
        let weight = pow[idx.total_degree(theta)];
        for c in 0..Q {
            let others: f64 = (0..Q).filter(|&chi| chi != c).map(|chi| fs.u_at(chi, theta)).sum();
            p[idx.pair(c, theta)] = weight * others / (2.0 * u_alpha);
        }
    }
    let e = edge_table(fs);
    let mut m = DMatrix::zeros(n, n);
    for (theta, s, d) in idx.iter() {
        for s2 in 0..Q {
            if d[s2] == 0 {
                continue;
            }
            let inv = edge_ratio(&e, s, s2)?;
            for (child, cs, cd) in idx.iter() {
                if cs != s2 {
                    continue;
                }
                let Some(grown) = idx.plus(child, s) else { continue };
                for c in 0..Q {
                    for c2 in (0..Q).filter(|&c2| c2 != c) {
                        let u = fs.u_at(third_colour(c, c2), grown);
                        if u != 0.0 {
                            m[(idx.pair(c2, child), idx.pair(c, theta))] =
                                d[s2] as f64 * (cd[s] + 1) as f64 * u * inv;
                        }
                    }
                }
            }
        }
    }
    Ok(Assembled { p, e, m, u_alpha })
}

/// `κ` tables from the direct solve `(Id − M) x = p`.
pub fn kappa_linear(fs: &FullTypeState, alpha: f64) -> Result<(KappaTable, Assembled)> {
    let sys = assemble_system(fs, alpha)?;
    let radius = spectral_radius(&sys.m)?;
    if radius >= 1.0 {
        return Err(Error::degenerate(format!("offspring matrix is not subcritical (radius {radius})")));
    }
    let n = sys.p.len();
    let a = DMatrix::<f64>::identity(n, n) - &sys.m;
    let x = a.lu().solve(&sys.p).ok_or_else(|| Error::degenerate("Id − M is singular"))?;
    Ok((KappaTable::from_progeny(fs, &x), sys))
}

/// `κ` tables from the truncated series `Σ_{ℓ≤terms} M^ℓ p`.
pub fn kappa_neumann(fs: &FullTypeState, sys: &Assembled, terms: usize) -> KappaTable {
    let mut term = sys.p.clone();
    let mut sum = term.clone();
    for _ in 0..terms {
        term = &sys.m * term;
        sum += &term;
    }
    KappaTable::from_progeny(fs, &sum)
}

/// Time derivatives of the full type-space system.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDerivative {
    pub dw: Vec<f64>,
    pub du: Vec<f64>,
}

/// Right-hand side of the full system with `κ` from [`kappa_linear`].
///
/// Vertices leave a class through any edge from the forced tree, so the
/// outflow terms use `κ_{s',s}` summed over tree colours; inflow into
/// `u_{c,·}` only comes from tree vertices coloured `c`.
pub fn full_rhs(fs: &FullTypeState, alpha: f64) -> Result<FullDerivative> {
    let (kappa, sys) = kappa_linear(fs, alpha)?;
    let idx = &fs.index;
    let mut dw = vec![0.0; idx.len()];
    let mut du = vec![0.0; idx.pair_len()];
    for (theta, s, d) in idx.iter() {
        let l = idx.total_degree(theta);
        let select = degree_power(l, alpha) / sys.u_alpha;
        let mut out_rate = 0.0;
        let mut inflow = [0.0; Q];
        for s2 in 0..Q {
            let e = sys.e[s][s2];
            if d[s2] > 0 {
                out_rate += d[s2] as f64 * kappa.ss[s2][s] / e;
            }
            if let Some(up) = idx.plus(theta, s2) {
                let grown = (d[s2] + 1) as f64 / e;
                for c in 0..Q {
                    inflow[c] += kappa.css[c][s2][s] * grown * (fs.w[up] + fs.u_at(c, up));
                }
            }
        }
        dw[theta] = -out_rate * fs.w[theta];
        for c in 0..Q {
            let u = fs.u_at(c, theta);
            du[idx.pair(c, theta)] = -select * u - out_rate * u + inflow[c];
        }
    }
    Ok(FullDerivative { dw, du })
}

/// Row index of `(c', s1', s2')` in the 27-dimensional edge-type space.
pub fn edge_type(c: usize, s1: usize, s2: usize) -> usize {
    (c * Q + s1) * Q + s2
}

/// `M^V` (27 × 3|T|) and `M^E` (3|T| × 27) with `M = M^E M^V`.
///
/// `M^V[(c',s1',s2'), (c,θ)] = 1{c=c', s=s1'} d_{s2'}` counts the edges a
/// coloured vertex sends to each planted class; `M^E[(c,θ), (c',s1',s2')]`
/// is the chance such an edge ends at a 2-list vertex of type `θ` whose list
/// misses the third colour, forcing colour `c`.
pub fn vertex_edge_factors(fs: &FullTypeState) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let idx = &fs.index;
    let n = idx.pair_len();
    let e = edge_table(fs);
    let mut mv = DMatrix::zeros(Q * Q * Q, n);
    let mut me = DMatrix::zeros(n, Q * Q * Q);
    for (theta, s, d) in idx.iter() {
        for c in 0..Q {
            let col = idx.pair(c, theta);
            for s2 in 0..Q {
                mv[(edge_type(c, s, s2), col)] = d[s2] as f64;
            }
            for c1 in (0..Q).filter(|&c1| c1 != c) {
                for s1 in 0..Q {
                    let Some(up) = idx.plus(theta, s1) else { continue };
                    let u = fs.u_at(third_colour(c, c1), up);
                    if u != 0.0 {
                        me[(col, edge_type(c1, s1, s))] = (d[s1] + 1) as f64 * u * edge_ratio(&e, s1, s)?;
                    }
                }
            }
        }
    }
    Ok((mv, me))
}
