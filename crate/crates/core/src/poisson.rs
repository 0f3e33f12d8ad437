//! Poisson and binomial probabilities used by the census, the initial
//! conditions and the high-degree branching matrix.
//!
//! Upper tails are summed upward from the cut-off instead of being taken as
//! `1 - cdf`, so they stay accurate far out in the tail.

/// `P[Po(mean) = k]`.
pub fn pmf(mean: f64, k: usize) -> f64 {
    if mean == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    let kf = k as f64;
    (-mean + kf * mean.ln() - ln_factorial(k)).exp()
}

/// `ln k!`, exact summation for small `k`, Stirling series beyond.
pub fn ln_factorial(k: usize) -> f64 {
    if k < 64 {
        (2..=k).map(|i| (i as f64).ln()).sum()
    } else {
        let x = k as f64 + 1.0;
        // ln Γ(x) via Stirling with three correction terms
        (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x.powi(3))
            + 1.0 / (1260.0 * x.powi(5))
    }
}

/// `P[Po(mean) <= k]`.
pub fn cdf(mean: f64, k: usize) -> f64 {
    let mut term = (-mean).exp();
    let mut acc = term;
    for i in 1..=k {
        term *= mean / i as f64;
        acc += term;
    }
    acc.min(1.0)
}

/// `P[Po(mean) >= k]`.
pub fn upper_tail(mean: f64, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if (k as f64) <= mean {
        return 1.0 - cdf(mean, k - 1);
    }
    let mut term = pmf(mean, k);
    let mut acc = 0.0;
    let mut i = k;
    while term > acc * 1e-18 && term > 0.0 {
        acc += term;
        i += 1;
        term *= mean / i as f64;
    }
    acc
}

/// Probabilities of `Po(mean)` conditioned on `<= cap`, indices `0..=cap`.
pub fn truncated_pmf(mean: f64, cap: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..=cap).map(|k| pmf(mean, k)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// `P[Bin(trials, p) = k]`.
pub fn binomial_pmf(trials: usize, p: f64, k: usize) -> f64 {
    if k > trials {
        return 0.0;
    }
    binomial_coefficient(trials, k) * p.powi(k as i32) * (1.0 - p).powi((trials - k) as i32)
}

pub fn binomial_coefficient(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// `k! / (a! b! c!)` for `a + b + c = k`.
pub fn multinomial(counts: [usize; 3]) -> f64 {
    let k: usize = counts.iter().sum();
    binomial_coefficient(k, counts[0]) * binomial_coefficient(k - counts[0], counts[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_sums_to_one() {
        let s: f64 = (0..200).map(|k| pmf(4.03, k)).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tail_and_cdf_are_complementary() {
        for &m in &[0.3, 2.0, 4.03, 11.0] {
            for k in 0..40 {
                let t = upper_tail(m, k + 1) + cdf(m, k);
                assert!((t - 1.0).abs() < 1e-13, "m={m} k={k} sum={t}");
            }
        }
    }

    #[test]
    fn deep_tail_keeps_relative_accuracy() {
        // direct summation as reference
        let m = 4.03;
        let direct: f64 = (40..300).map(|k| pmf(m, k)).sum();
        let tail = upper_tail(m, 40);
        assert!(((tail - direct) / direct).abs() < 1e-12);
    }

    #[test]
    fn ln_factorial_branches_agree() {
        let exact: f64 = (2..=64usize).map(|i| (i as f64).ln()).sum();
        assert!((ln_factorial(64) - exact).abs() < 1e-10);
    }

    #[test]
    fn multinomial_small_cases() {
        assert_eq!(multinomial([0, 1, 1]), 2.0);
        assert_eq!(multinomial([2, 1, 1]), 12.0);
        assert_eq!(multinomial([0, 0, 0]), 1.0);
    }
}
