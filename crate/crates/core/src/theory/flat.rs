use super::types::TypeIndex;
use crate::poisson::multinomial;
use crate::{Error, Result, Q};

/// Probability that a neighbour of a planted-`s` vertex has planted colour
/// `s2`: `e^{-β·1{s=s2}} / (2 + e^{-β})`.
pub fn neighbour_weight(beta: f64, s: usize, s2: usize) -> f64 {
    let e = (-beta).exp();
    (if s == s2 { e } else { 1.0 }) / (2.0 + e)
}

/// Densities `w_θ` (3-lists) and `u_{c,θ}` (2-lists missing colour `c`) over
/// the type space.
#[derive(Debug, Clone, PartialEq)]
pub struct FullTypeState {
    pub index: TypeIndex,
    pub beta: f64,
    /// Indexed by type.
    pub w: Vec<f64>,
    /// Indexed by [`TypeIndex::pair`].
    pub u: Vec<f64>,
}

/// `u^(k)`, `w^(k)` for `k ∈ {1, 2, α, α+1}` of degree profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub u1: f64,
    pub u2: f64,
    pub w1: f64,
    pub w2: f64,
    pub ua: f64,
    pub ua1: f64,
}

pub(crate) fn degree_power(l: usize, alpha: f64) -> f64 {
    if l == 0 {
        0.0
    } else if alpha.fract() == 0.0 && alpha.abs() < i32::MAX as f64 {
        (l as f64).powi(alpha as i32)
    } else {
        (l as f64).powf(alpha)
    }
}

impl Moments {
    pub fn of(u: &[f64], w: &[f64], alpha: f64) -> Self {
        let mut m = Moments { u1: 0.0, u2: 0.0, w1: 0.0, w2: 0.0, ua: 0.0, ua1: 0.0 };
        for l in 0..u.len() {
            let f = l as f64;
            m.u1 += f * u[l];
            m.u2 += f * f * u[l];
            m.w1 += f * w[l];
            m.w2 += f * f * w[l];
            m.ua += degree_power(l, alpha) * u[l];
            m.ua1 += degree_power(l, alpha + 1.0) * u[l];
        }
        m
    }
}

impl FullTypeState {
    /// Wraps explicit densities; lengths must match `index`.
    pub fn from_parts(index: TypeIndex, beta: f64, w: Vec<f64>, u: Vec<f64>) -> Result<Self> {
        if w.len() != index.len() || u.len() != index.pair_len() {
            return Err(Error::param("density vectors do not match the type index"));
        }
        Ok(FullTypeState { index, beta, w, u })
    }

    pub fn delta(&self) -> usize {
        self.index.delta()
    }

    pub fn u_at(&self, c: usize, theta: usize) -> f64 {
        self.u[self.index.pair(c, theta)]
    }

    /// `u_{c, θ}` for a possibly absent `θ`, zero outside `T_Δ`.
    pub fn u_opt(&self, c: usize, theta: Option<usize>) -> f64 {
        theta.map_or(0.0, |t| self.u_at(c, t))
    }

    /// `Σ_{θ: deg θ = ℓ} w_θ` and `Σ_c Σ_{θ: deg θ = ℓ} u_{c,θ}`.
    pub fn marginals(&self) -> (Vec<f64>, Vec<f64>) {
        let mut u = vec![0.0; self.delta() + 1];
        let mut w = vec![0.0; self.delta() + 1];
        for theta in 0..self.index.len() {
            let l = self.index.total_degree(theta);
            w[l] += self.w[theta];
            for c in 0..Q {
                u[l] += self.u_at(c, theta);
            }
        }
        (u, w)
    }

    /// Relabels planted colours by `perm`, moving degree coordinates along.
    pub fn permute_planted(&self, perm: [usize; Q]) -> Self {
        let mut out = self.clone();
        for (theta, s, d) in self.index.iter() {
            let mut d2 = [0; Q];
            for r in 0..Q {
                d2[perm[r]] = d[r];
            }
            let t2 = self.index.index(perm[s], d2).expect("permutation preserves total degree");
            out.w[t2] = self.w[theta];
            for c in 0..Q {
                out.u[self.index.pair(c, t2)] = self.u_at(c, theta);
            }
        }
        out
    }
}

/// Product-form expansion of degree profiles `u_ℓ`, `w_ℓ` into the type
/// space:
///
/// `w_θ = w_ℓ/3 · multinomial(d) · Π x_{s,s'}^{d_{s'}}`,
/// `u_{c,θ} = u_ℓ/9 · multinomial(d) · Π x_{s,s'}^{d_{s'}}`
///
/// with `ℓ = d1+d2+d3` and `x` from [`neighbour_weight`].
pub fn flat_white_expand(u: &[f64], w: &[f64], beta: f64) -> Result<FullTypeState> {
    if u.len() != w.len() || u.is_empty() {
        return Err(Error::param("u and w must have equal, positive length"));
    }
    if u.iter().chain(w).any(|&x| !(x >= 0.0)) {
        return Err(Error::param("densities must be non-negative"));
    }
    product_form(u, w, beta)
}

/// The same linear map as [`flat_white_expand`] without the sign check, so
/// it also carries derivatives `du_ℓ/dt`, `dw_ℓ/dt` into the type space.
pub fn product_form(u: &[f64], w: &[f64], beta: f64) -> Result<FullTypeState> {
    if u.len() != w.len() || u.is_empty() {
        return Err(Error::param("u and w must have equal, positive length"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::param(format!("beta must be finite and non-negative, got {beta}")));
    }
    let index = TypeIndex::new(u.len() - 1);
    let mut fw = vec![0.0; index.len()];
    let mut fu = vec![0.0; index.pair_len()];
    for (theta, s, d) in index.iter() {
        let l: usize = d.iter().sum();
        let mut shape = multinomial(d);
        for s2 in 0..Q {
            shape *= neighbour_weight(beta, s, s2).powi(d[s2] as i32);
        }
        fw[theta] = w[l] / 3.0 * shape;
        for c in 0..Q {
            fu[index.pair(c, theta)] = u[l] / 9.0 * shape;
        }
    }
    Ok(FullTypeState { index, beta, w: fw, u: fu })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_zero_is_colour_flat() {
        let u = [0.1, 0.2, 0.3];
        let w = [0.05, 0.15, 0.2];
        let fs = flat_white_expand(&u, &w, 0.0).unwrap();
        for (theta, _, d) in fs.index.iter() {
            let l: usize = d.iter().sum();
            let expect = w[l] / 3.0 * multinomial(d) / 3f64.powi(l as i32);
            assert!((fs.w[theta] - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_two_hand_values() {
        let fs = flat_white_expand(&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], 1.0).unwrap();
        assert_eq!(fs.index.len(), 30);
        let e = (-1f64).exp();
        let z = 2.0 + e;
        // (s=0, d=(1,1,0)): w_2/3 · 2 · (e/z)(1/z)
        let t = fs.index.index(0, [1, 1, 0]).unwrap();
        assert!((fs.w[t] - 2.0 * e / (3.0 * z * z)).abs() < 1e-15);
        // (s=1, d=(0,0,1)): u_1/9 · 1/z, for each c
        let t = fs.index.index(1, [0, 0, 1]).unwrap();
        for c in 0..3 {
            assert!((fs.u_at(c, t) - 1.0 / (9.0 * z)).abs() < 1e-15);
        }
        // degree-2 u and degree-1 w are absent
        let t = fs.index.index(2, [0, 2, 0]).unwrap();
        assert_eq!(fs.u_at(0, t), 0.0);
        let t = fs.index.index(2, [1, 0, 0]).unwrap();
        assert_eq!(fs.w[t], 0.0);
        let nonzero = fs.w.iter().chain(&fs.u).filter(|&&x| x > 0.0).count();
        // 3 planted colours × (6 degree-2 triples for w + 3 colours × 3 degree-1 triples for u)
        assert_eq!(nonzero, 3 * (6 + 9));
    }

    #[test]
    fn rejects_negative_density() {
        assert!(flat_white_expand(&[0.1, -1e-3], &[0.0, 0.0], 1.0).is_err());
    }
}
