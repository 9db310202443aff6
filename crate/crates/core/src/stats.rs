//! Small numeric helpers shared across modules.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[inline]
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

#[inline]
pub fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z * FRAC_1_SQRT_2)
}

#[inline]
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal quantile at `u`, given `u` and its complement `c = 1 - u`
/// so that both tails keep full relative precision.
pub fn normal_quantile_pair(u: f64, c: f64) -> f64 {
    if u <= 0.5 {
        -SQRT_2 * erfc_inv(2.0 * u)
    } else {
        SQRT_2 * erfc_inv(2.0 * c)
    }
}

pub fn normal_quantile(u: f64) -> f64 {
    normal_quantile_pair(u, 1.0 - u)
}

/// Pairwise summation; keeps rounding error at O(log n) and makes the
/// result independent of how the input was produced.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 64;
    if xs.len() <= BLOCK {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// Sample standard deviation with the n - 1 divisor. Deviations are taken
/// after shifting by the first value, so constant input gives exactly 0.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let shifted: Vec<f64> = xs.iter().map(|x| x - xs[0]).collect();
    let m = mean(&shifted);
    let dev: Vec<f64> = shifted.iter().map(|x| (x - m) * (x - m)).collect();
    (pairwise_sum(&dev) / (xs.len() - 1) as f64).sqrt()
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let sd = sample_sd(xs);
    sd * sd
}

/// Linear-interpolation sample quantile (Hyndman–Fan type 7) of sorted data.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    assert!(n > 0, "quantile of empty sample");
    let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn iqr_sorted(sorted: &[f64]) -> f64 {
    quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25)
}

pub fn median(xs: &[f64]) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

pub fn sorted_copy(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Kolmogorov–Smirnov statistic of sorted data against a continuous CDF.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn normal_quantile_matches_reference() {
        assert_relative_eq!(normal_quantile(0.95), 1.644_853_626_951_472_7, epsilon = 1e-13);
        assert_eq!(normal_quantile(0.5), 0.0);
        // far tail through the complement
        let z = normal_quantile_pair(1.0 - 1e-300, 1e-300);
        assert!((normal_sf(z) / 1e-300 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn type7_quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&v, 0.0), 1.0);
        assert_eq!(quantile_sorted(&v, 1.0), 4.0);
        assert_eq!(quantile_sorted(&v, 0.5), 2.5);
        assert_eq!(iqr_sorted(&v), 3.25 - 1.75);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn ks_of_perfect_grid_is_half_step() {
        let n = 100;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&v, |x| x);
        assert_relative_eq!(d, 0.5 / n as f64, epsilon = 1e-15);
    }
}
