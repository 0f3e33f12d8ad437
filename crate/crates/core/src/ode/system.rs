use serde::Serialize;

use crate::poisson;
use crate::{Error, Result};

/// Smallest admissible value of `1 − λ` before κ is treated as singular.
///
/// Near the singularity κ grows without bound and drives λ back down, so a
/// numerical solution approaches λ = 1 from below without crossing it.
pub const LAMBDA_GAP: f64 = 1e-6;

/// `d^{-1} Σ_{i>Δ} i·P[Po(d) = i]`, evaluated as `P[Po(d) ≥ Δ]`.
pub fn phi(d: f64, delta: usize) -> f64 {
    poisson::upper_tail(d, delta)
}

/// Smallest Δ with `P[Po(d) > Δ] < 1e-8`.
pub fn default_delta(d: f64) -> usize {
    (1..).find(|&k| poisson::upper_tail(d, k + 1) < 1e-8).unwrap()
}

/// The `2(Δ+1)` densities `u_0..u_Δ`, `w_0..w_Δ` at scaled time `t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OdeState {
    pub t: f64,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl OdeState {
    pub fn delta(&self) -> usize {
        self.u.len() - 1
    }

    /// `[u_0..u_Δ, w_0..w_Δ]`.
    pub fn to_vec(&self) -> Vec<f64> {
        self.u.iter().chain(&self.w).copied().collect()
    }

    pub fn from_slice(t: f64, y: &[f64]) -> Self {
        let m = y.len() / 2;
        OdeState { t, u: y[..m].to_vec(), w: y[m..].to_vec() }
    }

    pub fn lambda(&self) -> Option<f64> {
        lambda_of(&self.u, &self.w)
    }

    pub fn gamma(&self) -> f64 {
        gamma_of(&self.u, &self.w)
    }

    pub fn mass(&self) -> f64 {
        self.u.iter().chain(&self.w).sum()
    }
}

fn clamp(x: f64) -> f64 {
    x.max(0.0)
}

/// `Σ i^k x_i` over clamped entries, `i ≥ 1`.
pub fn moment(x: &[f64], k: f64) -> f64 {
    x.iter().enumerate().skip(1).map(|(i, &v)| (i as f64).powf(k) * clamp(v)).sum()
}

/// `2 Σ i(i−1)u_i / (3 Σ i(u_i + w_i))`, `None` when the denominator vanishes.
pub fn lambda_of(u: &[f64], w: &[f64]) -> Option<f64> {
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 1..u.len() {
        let fi = i as f64;
        num += fi * (fi - 1.0) * clamp(u[i]);
        den += fi * (clamp(u[i]) + clamp(w[i]));
    }
    (den > 0.0).then(|| 2.0 * num / (3.0 * den))
}

/// `Σ ℓ(ℓ−2)(u_ℓ + w_ℓ)`.
pub fn gamma_of(u: &[f64], w: &[f64]) -> f64 {
    (0..u.len())
        .map(|l| {
            let fl = l as f64;
            fl * (fl - 2.0) * (clamp(u[l]) + clamp(w[l]))
        })
        .sum()
}

/// Initial densities for mean degree `d` and cut-off Δ.
pub fn initial_state(d: f64, delta: usize) -> Result<OdeState> {
    if !(d > 0.0) || delta < 1 {
        return Err(Error::param(format!("need d > 0 and delta >= 1 (d={d}, delta={delta})")));
    }
    let phi = phi(d, delta);
    let pt = poisson::truncated_pmf(d, delta);
    let mut u = vec![0.0; delta + 1];
    let mut w = vec![0.0; delta + 1];
    for l in 0..=delta {
        w[l] = pt[l] * (1.0 - phi).powi(l as i32);
        u[l] = (1..=delta - l).map(|j| pt[l + j] * poisson::binomial_pmf(l + j, phi, j)).sum();
    }
    Ok(OdeState { t: 0.0, u, w })
}

/// Right-hand side of the reduced system for fixed `(α, Δ)`.
#[derive(Debug, Clone)]
pub struct OdeSystem {
    alpha: f64,
    delta: usize,
    pow_alpha: Vec<f64>,
    pow_alpha1: Vec<f64>,
}

/// Quantities shared by the right-hand side and the diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub kappa: f64,
    pub lambda: f64,
    /// `Σ i(u_i + w_i)`.
    pub s1: f64,
}

impl OdeSystem {
    pub fn new(alpha: f64, delta: usize) -> Result<Self> {
        if !(alpha > 0.0) || delta < 1 {
            return Err(Error::param(format!(
                "need alpha > 0 and delta >= 1 (alpha={alpha}, delta={delta})"
            )));
        }
        let pow_alpha = (0..=delta).map(|i| if i == 0 { 0.0 } else { (i as f64).powf(alpha) }).collect();
        let pow_alpha1 =
            (0..=delta).map(|i| if i == 0 { 0.0 } else { (i as f64).powf(alpha + 1.0) }).collect();
        Ok(OdeSystem { alpha, delta, pow_alpha, pow_alpha1 })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn dim(&self) -> usize {
        2 * (self.delta + 1)
    }

    /// κ and λ at `y = [u, w]`, on clamped values.
    pub fn rates(&self, y: &[f64]) -> Result<Rates> {
        let m = self.delta + 1;
        let (u, w) = (&y[..m], &y[m..]);
        let (mut s1, mut u1, mut u2, mut ua, mut ua1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 1..m {
            let fi = i as f64;
            let (ui, wi) = (clamp(u[i]), clamp(w[i]));
            s1 += fi * (ui + wi);
            u1 += fi * ui;
            u2 += fi * fi * ui;
            ua += self.pow_alpha[i] * ui;
            ua1 += self.pow_alpha1[i] * ui;
        }
        if !(s1 > 0.0) {
            return Err(Error::degenerate("no live edges left"));
        }
        if !(ua > 0.0) {
            return Err(Error::degenerate("no 2-list vertex of positive degree left"));
        }
        let lambda = 2.0 * (u2 - u1) / (3.0 * s1);
        // 3W1 + 5U1 − 2U2 = 3·S1·(1 − λ)
        if 1.0 - lambda <= LAMBDA_GAP {
            return Err(Error::degenerate(format!("lambda = {lambda} reached 1")));
        }
        let kappa = 3.0 * s1 / (3.0 * s1 - 2.0 * (u2 - u1)) * ua1 / ua;
        Ok(Rates { kappa, lambda, s1 })
    }

    /// Writes `dy/dt` into `dy` and returns the rates used.
    pub fn eval(&self, y: &[f64], dy: &mut [f64]) -> Result<Rates> {
        let r = self.rates(y)?;
        let m = self.delta + 1;
        let (u, w) = (&y[..m], &y[m..]);
        let ua: f64 = (1..m).map(|i| self.pow_alpha[i] * clamp(u[i])).sum();
        let k = r.kappa / r.s1;
        for l in 0..m {
            let fl = l as f64;
            let (ul, wl) = (clamp(u[l]), clamp(w[l]));
            let inflow = if l < self.delta {
                (fl + 1.0) * (clamp(w[l + 1]) + clamp(u[l + 1]) / 3.0)
            } else {
                0.0
            };
            dy[l] = k * (inflow - fl * ul) - self.pow_alpha[l] * ul / ua;
            dy[m + l] = -k * fl * wl;
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi_at_zero_cutoff_is_one() {
        assert_eq!(phi(4.03, 0), 1.0);
    }

    #[test]
    fn phi_matches_partial_sum() {
        let d = 4.03;
        let direct: f64 = (21..=200).map(|i| i as f64 * poisson::pmf(d, i)).sum::<f64>() / d;
        assert!((phi(d, 20) - direct).abs() < 1e-14);
        let mut last = 1.0;
        for delta in 0..40 {
            let p = phi(d, delta);
            assert!(p <= last);
            last = p;
        }
    }

    #[test]
    fn default_delta_for_reference_degree() {
        assert_eq!(default_delta(4.03), 20);
    }

    #[test]
    fn initial_mass_is_one() {
        for &(d, delta) in &[(4.03, 20), (4.03, 5), (1.0, 3), (7.5, 12), (3.0, 1)] {
            let s = initial_state(d, delta).unwrap();
            assert!((s.mass() - 1.0).abs() < 1e-12, "d={d} delta={delta}");
            assert_eq!(s.u[delta], 0.0);
        }
    }

    #[test]
    fn large_cutoff_has_no_two_lists() {
        let s = initial_state(2.0, 60).unwrap();
        let pt = poisson::truncated_pmf(2.0, 60);
        for l in 0..=60 {
            assert!(s.u[l] < 1e-20);
            assert!((s.w[l] - pt[l]).abs() < 1e-15);
        }
    }

    #[test]
    fn one_hot_u1() {
        let sys = OdeSystem::new(15.0, 4).unwrap();
        let mut y = vec![0.0; 10];
        y[1] = 0.3;
        let mut dy = vec![0.0; 10];
        let r = sys.eval(&y, &mut dy).unwrap();
        assert!((r.kappa - 1.0).abs() < 1e-15);
        assert!((dy[1] + 2.0).abs() < 1e-12);
        assert!((dy[0] - 1.0 / 3.0).abs() < 1e-12);
        assert!(dy[5..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn lambda_gamma_hand_values() {
        let u = [0.0, 0.0, 0.4, 0.0];
        let w = [0.0; 4];
        assert!((lambda_of(&u, &w).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(gamma_of(&u, &w), 0.0);
        let u = [0.0, 0.2, 0.0];
        let w = [0.0, 0.3, 0.0];
        assert_eq!(lambda_of(&u, &w).unwrap(), 0.0);
        assert!((gamma_of(&u, &w) + 0.5).abs() < 1e-15);
        assert!(lambda_of(&[1.0, 0.0], &[1.0, 0.0]).is_none());
    }

    #[test]
    fn degenerate_denominators_are_errors() {
        let sys = OdeSystem::new(2.0, 3).unwrap();
        let mut dy = vec![0.0; 8];
        let only_w = [0.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.0, 0.0];
        assert!(matches!(sys.eval(&only_w, &mut dy), Err(Error::Degenerate(_))));
        // u concentrated on high degree gives λ ≥ 1
        let high = [0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0];
        assert!(matches!(sys.eval(&high, &mut dy), Err(Error::Degenerate(_))));
    }

    fn random_state(delta: usize, seed: &[f64]) -> Vec<f64> {
        (0..2 * (delta + 1)).map(|i| seed[i % seed.len()] * ((i * 7 % 5) as f64 + 0.5)).collect()
    }

    proptest! {
        #[test]
        fn gamma_identity(xs in prop::collection::vec(0.0f64..1.0, 12)) {
            let y = random_state(5, &xs);
            let (u, w) = y.split_at(6);
            let m = |k| moment(u, k) + moment(w, k);
            let g = gamma_of(u, w);
            prop_assert!((g - (m(2.0) - 2.0 * m(1.0))).abs() < 1e-12);
        }

        #[test]
        fn total_derivative_identity(xs in prop::collection::vec(0.01f64..1.0, 12), alpha in 1.0f64..15.0) {
            // Σ(du + dw) = −1 − (2/3)·κ·U1/S1
            let delta = 5;
            let mut y = random_state(delta, &xs);
            // keep λ well below 1
            for l in 3..=delta {
                y[l] *= 0.05;
            }
            let sys = OdeSystem::new(alpha, delta).unwrap();
            let mut dy = vec![0.0; y.len()];
            if let Ok(r) = sys.eval(&y, &mut dy) {
                let u1 = moment(&y[..delta + 1], 1.0);
                let expected = -1.0 - 2.0 / 3.0 * r.kappa * u1 / r.s1;
                let total: f64 = dy.iter().sum();
                prop_assert!((total - expected).abs() < 1e-10 * (1.0 + expected.abs()));
            }
        }

        #[test]
        fn zero_w_stays_zero(xs in prop::collection::vec(0.0f64..1.0, 6)) {
            let delta = 5;
            let mut y = vec![0.0; 12];
            y[1] = 0.5 + xs[0];
            y[2] = 0.1 * xs[1];
            let sys = OdeSystem::new(3.0, delta).unwrap();
            let mut dy = vec![0.0; 12];
            sys.eval(&y, &mut dy).unwrap();
            prop_assert!(dy[6..].iter().all(|&v| v == 0.0));
        }
    }
}
