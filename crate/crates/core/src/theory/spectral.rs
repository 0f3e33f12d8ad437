use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 100_000;

/// Dominant eigenvalue of a non-negative square matrix by power iteration
/// from the all-ones vector, stopping once the estimate changes by less than
/// [`POWER_TOL`] relative.
pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::param("spectral radius needs a square matrix"));
    }
    if m.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::param("spectral radius needs a finite non-negative matrix"));
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(0.0);
    }
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut prev = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let y = m * &x;
        let norm = y.lp_norm(1);
        if norm == 0.0 {
            return Ok(0.0);
        }
        if (norm - prev).abs() <= POWER_TOL * norm {
            return Ok(norm);
        }
        prev = norm;
        x = y / norm;
    }
    Err(Error::degenerate(format!("power iteration did not converge in {POWER_MAX_ITER} steps")))
}
