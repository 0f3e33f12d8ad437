use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Model parameters. `d_in`/`d_out` are derived and kept consistent by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SbmParams {
    pub n: usize,
    pub d: f64,
    pub beta: f64,
    d_in: f64,
    d_out: f64,
}

impl SbmParams {
    pub fn new(n: usize, d: f64, beta: f64) -> Result<Self> {
        let (d_in, d_out) = derive_rates(d, beta)?;
        Ok(SbmParams { n, d, beta, d_in, d_out })
    }

    pub fn d_in(&self) -> f64 {
        self.d_in
    }

    pub fn d_out(&self) -> f64 {
        self.d_out
    }

    /// Edge probability for a pair with equal (`same = true`) or different
    /// planted colours. `None` when the rate exceeds `n` and the `1 ∧` clamp
    /// would be active.
    pub fn pair_probability(&self, same: bool) -> Option<f64> {
        let rate = if same { self.d_in } else { self.d_out };
        let p = rate / self.n as f64;
        (p < 1.0).then_some(p)
    }
}

/// Intra- and inter-community rates `(d_in, d_out)` for mean degree `d` and
/// disassortativity `beta`. `beta = +inf` is accepted (planted colouring).
pub fn derive_rates(d: f64, beta: f64) -> Result<(f64, f64)> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::param(format!("mean degree must be positive, got {d}")));
    }
    if !(beta >= 0.0) {
        return Err(Error::param(format!("beta must be non-negative, got {beta}")));
    }
    let x = (-beta).exp();
    Ok((3.0 * d * x / (2.0 + x), 3.0 * d / (2.0 + x)))
}

/// `((2 + e^-β) / (1 - e^-β))²`.
pub fn kesten_stigum(beta: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::param(format!(
            "Kesten-Stigum threshold needs beta > 0, got {beta}"
        )));
    }
    let x = (-beta).exp();
    Ok(((2.0 + x) / (1.0 - x)).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn beta_zero_collapses_rates() {
        let (a, b) = derive_rates(4.03, 0.0).unwrap();
        assert_eq!(a, 4.03);
        assert_eq!(b, 4.03);
    }

    #[test]
    fn infinite_beta_limit() {
        let (a, b) = derive_rates(4.03, f64::INFINITY).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 6.045).abs() < 1e-12);
    }

    #[test]
    fn beta_six_rates() {
        // reference values evaluated with 50-digit arithmetic
        let (a, b) = derive_rates(4.03, 6.0).unwrap();
        assert!((a - 0.014_965_509_013_926_541).abs() < 1e-12, "{a}");
        assert!((b - 6.037_517_245_493_036_7).abs() < 1e-12, "{b}");
        assert!((a + 2.0 * b - 12.09).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(derive_rates(0.0, 1.0).is_err());
        assert!(derive_rates(-1.0, 1.0).is_err());
        assert!(derive_rates(1.0, -0.5).is_err());
        assert!(derive_rates(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn kesten_stigum_values() {
        assert!((kesten_stigum(2f64.ln()).unwrap() - 25.0).abs() < 1e-12);
        assert!((kesten_stigum(6.0).unwrap() - 4.0299).abs() < 5e-5);
        assert!((kesten_stigum(60.0).unwrap() - 4.0).abs() < 1e-12);
        assert!(kesten_stigum(0.0).is_err());
        assert!(kesten_stigum(-1.0).is_err());
    }

    proptest! {
        #[test]
        fn rates_sum_to_three_d(d in 0.01f64..50.0, beta in 0.0f64..40.0) {
            let (a, b) = derive_rates(d, beta).unwrap();
            prop_assert!((a + 2.0 * b - 3.0 * d).abs() <= 1e-12 * d.max(1.0));
            if beta > 0.0 {
                prop_assert!(a < b);
            }
        }
    }
}
