//! Invariant checks shared by the property tests and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use srm_core::kernel::{BandwidthRule, Kernel, KernelCdf, KernelEstimatorConfig};
use srm_core::riskmeasure::{
    distortion_eval, empirical_srm, kernel_srm, LStatWeights, RiskSpectrum, Spectrum,
};

pub fn spectra() -> impl Strategy<Value = RiskSpectrum> {
    prop_oneof![
        (0.01f64..200.0).prop_map(|b| RiskSpectrum::exponential(b).unwrap()),
        (0.05f64..0.95).prop_map(|g| RiskSpectrum::power_low(g).unwrap()),
        (1.05f64..6.0).prop_map(|g| RiskSpectrum::power_high(g).unwrap()),
        (0.01f64..=1.0).prop_map(|p| RiskSpectrum::expected_shortfall(p).unwrap()),
    ]
}

pub fn kernels() -> impl Strategy<Value = Kernel> {
    prop_oneof![Just(Kernel::Gaussian), Just(Kernel::Epanechnikov)]
}

/// Samples with at least two distinct values.
pub fn samples(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 2..max_len)
        .prop_filter("needs two distinct values", |v| v.iter().any(|x| *x != v[0]))
}

fn fixed(b: f64) -> KernelEstimatorConfig {
    KernelEstimatorConfig::fast().with_bandwidth(BandwidthRule::Fixed { value: b })
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn weights_sum_to_one(s: &RiskSpectrum, n: usize) -> Result<(), TestCaseError> {
    let w = LStatWeights::new(s, n).unwrap();
    prop_assert!((w.sum() - 1.0).abs() <= 1e-12, "{s}: sum {}", w.sum());
    prop_assert!(w.weights.iter().all(|c| *c >= 0.0));
    Ok(())
}

pub fn distortion_endpoints(s: &RiskSpectrum) -> Result<(), TestCaseError> {
    let d = s.distortion_function();
    prop_assert_eq!(distortion_eval(&d, 0.0).unwrap(), 0.0);
    prop_assert!((distortion_eval(&d, 1.0).unwrap() - 1.0).abs() <= 1e-15);
    prop_assert!(s.distortion(0.3) <= s.distortion(0.7));
    Ok(())
}

pub fn kernel_cdf_monotone(data: &[f64], b: f64, k: Kernel, mut xs: Vec<f64>) -> Result<(), TestCaseError> {
    let f = KernelCdf::new(data, b, k).unwrap();
    xs.sort_by(f64::total_cmp);
    let vals: Vec<f64> = xs.iter().map(|&x| f.eval(x)).collect();
    prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
    prop_assert!(vals.windows(2).all(|w| w[0] <= w[1]), "{vals:?}");
    Ok(())
}

pub fn quantile_round_trip(data: &[f64], b: f64, k: Kernel, u: f64) -> Result<(), TestCaseError> {
    let f = KernelCdf::new(data, b, k).unwrap();
    let q = f.quantile(u, 1e-12, 400).unwrap();
    prop_assert!((f.eval(q) - u).abs() <= 1e-10, "u {u} F(q) {}", f.eval(q));
    Ok(())
}

/// Shifting returns by c lowers the loss-side estimate by c.
pub fn translation_equivariance(data: &[f64], b: f64, s: &RiskSpectrum, c: f64) -> Result<(), TestCaseError> {
    let shifted: Vec<f64> = data.iter().map(|x| x + c).collect();
    let e0 = empirical_srm(data, s).unwrap().point;
    let e1 = empirical_srm(&shifted, s).unwrap().point;
    prop_assert!(close(e1, e0 - c, 1e-10), "empirical {e0} {e1}");
    let k0 = kernel_srm(data, s, &fixed(b)).unwrap().point;
    let k1 = kernel_srm(&shifted, s, &fixed(b)).unwrap().point;
    prop_assert!(close(k1, k0 - c, 1e-8), "kernel {k0} {k1}");
    Ok(())
}

/// Scaling returns by λ scales both estimates, the kernel one with b
/// scaled too.
pub fn scale_equivariance(data: &[f64], b: f64, s: &RiskSpectrum, lambda: f64) -> Result<(), TestCaseError> {
    let scaled: Vec<f64> = data.iter().map(|x| lambda * x).collect();
    let e0 = empirical_srm(data, s).unwrap().point;
    let e1 = empirical_srm(&scaled, s).unwrap().point;
    prop_assert!(close(e1, lambda * e0, 1e-11), "empirical {e0} {e1}");
    let k0 = kernel_srm(data, s, &fixed(b)).unwrap().point;
    let k1 = kernel_srm(&scaled, s, &fixed(lambda * b)).unwrap().point;
    prop_assert!(close(k1, lambda * k0, 1e-8), "kernel {k0} {k1}");
    Ok(())
}

/// Loss-side exponential SRMs do not decrease in β.
pub fn beta_monotone(data: &[f64], b: f64, beta1: f64, beta2: f64) -> Result<(), TestCaseError> {
    let (lo, hi) = if beta1 <= beta2 { (beta1, beta2) } else { (beta2, beta1) };
    let s_lo = RiskSpectrum::exponential(lo).unwrap();
    let s_hi = RiskSpectrum::exponential(hi).unwrap();
    let scale = data.iter().fold(0.0f64, |m, x| m.max(x.abs())) + b;
    let tol = 1e-10 * scale;
    let e = (empirical_srm(data, &s_lo).unwrap().point, empirical_srm(data, &s_hi).unwrap().point);
    prop_assert!(e.0 <= e.1 + tol, "empirical {e:?}");
    let k = (
        kernel_srm(data, &s_lo, &fixed(b)).unwrap().point,
        kernel_srm(data, &s_hi, &fixed(b)).unwrap().point,
    );
    prop_assert!(k.0 <= k.1 + tol, "kernel {k:?}");
    Ok(())
}
