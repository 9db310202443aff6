//! The empirical L-statistic and the kernel estimator of a spectral risk
//! measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{KernelCdf, KernelEstimatorConfig, QuadratureRoute};
use crate::quadrature::GaussLegendre;
use crate::riskmeasure::report::{EstimateReport, EstimatorKind};
use crate::riskmeasure::spectrum::{LStatWeights, RiskSpectrum, Spectrum};
use crate::stats::{pairwise_sum, sorted_copy};

fn losses_sorted(returns: &[f64]) -> Result<Vec<f64>> {
    if returns.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: returns.len() });
    }
    if returns.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("returns must be finite"));
    }
    let losses: Vec<f64> = returns.iter().map(|r| -r).collect();
    Ok(sorted_copy(&losses))
}

/// Σ c_ni L_(i) over ascending sorted losses.
pub fn empirical_srm_losses(sorted_losses: &[f64], spectrum: &dyn Spectrum) -> Result<f64> {
    let w = LStatWeights::new(spectrum, sorted_losses.len())?;
    Ok(w.apply(sorted_losses))
}

/// Empirical L-statistic estimate from returns; losses are -returns.
pub fn empirical_srm(returns: &[f64], spectrum: &RiskSpectrum) -> Result<EstimateReport> {
    let losses = losses_sorted(returns)?;
    let point = empirical_srm_losses(&losses, spectrum)?;
    Ok(EstimateReport::new(EstimatorKind::Empirical, point, losses.len(), *spectrum))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelSrmValue {
    pub value: f64,
    pub bandwidth: f64,
    /// Value from the refined quantile-domain mesh when the doubling check
    /// ran.
    pub refined: Option<f64>,
    pub warning: Option<String>,
}

/// Kernel estimate ∫ F_{n,b}⁻¹(u) φ(u) du for the kernel CDF of the losses.
pub fn kernel_srm_cdf(
    f: &KernelCdf,
    spectrum: &dyn Spectrum,
    config: &KernelEstimatorConfig,
) -> Result<KernelSrmValue> {
    config.validate()?;
    match config.quadrature {
        QuadratureRoute::QuantileDomain { epsilon, panels, order } => {
            let value = quantile_domain(f, spectrum, config, epsilon, panels, order)?;
            let (refined, warning) = if config.doubling_check {
                let fine = quantile_domain(f, spectrum, config, 0.5 * epsilon, 2 * panels, order)?;
                let rel = (fine - value).abs() / value.abs().max(f64::MIN_POSITIVE);
                let warning = (rel > config.doubling_threshold).then(|| {
                    format!(
                        "quadrature not converged: halving eps and doubling panels moved the estimate by {rel:.3e} (relative)"
                    )
                });
                (Some(fine), warning)
            } else {
                (None, None)
            };
            Ok(KernelSrmValue { value, bandwidth: f.bandwidth(), refined, warning })
        }
        QuadratureRoute::DistributionDomain { order } => Ok(KernelSrmValue {
            value: distribution_domain(f, spectrum, order),
            bandwidth: f.bandwidth(),
            refined: None,
            warning: None,
        }),
    }
}

/// Kernel estimate from ascending sorted losses, resolving the bandwidth
/// from the configured rule.
pub fn kernel_srm_losses(
    sorted_losses: &[f64],
    spectrum: &dyn Spectrum,
    config: &KernelEstimatorConfig,
) -> Result<KernelSrmValue> {
    let b = config.bandwidth.resolve(sorted_losses)?;
    let f = KernelCdf::from_sorted(sorted_losses.to_vec(), b, config.kernel)?;
    kernel_srm_cdf(&f, spectrum, config)
}

pub fn kernel_srm(
    returns: &[f64],
    spectrum: &RiskSpectrum,
    config: &KernelEstimatorConfig,
) -> Result<EstimateReport> {
    let losses = losses_sorted(returns)?;
    let v = match kernel_srm_or_atom(&losses, spectrum, config)? {
        Some(v) => v,
        None => {
            let mut report = EstimateReport::new(EstimatorKind::Kernel, losses[0], losses.len(), *spectrum);
            report.warnings.push(ATOM_WARNING.into());
            return Ok(report);
        }
    };
    let mut report = EstimateReport::new(EstimatorKind::Kernel, v.value, losses.len(), *spectrum);
    report.bandwidth = Some(v.bandwidth);
    report.warnings.extend(v.warning);
    report.warnings.extend(wide_bandwidth_warning(&losses, v.bandwidth));
    Ok(report)
}

/// Flags a bandwidth wider than the whole sample, which happens with the
/// Swanepoel rule on data of small scale (σ^{-4/7} grows as σ shrinks).
pub(crate) fn wide_bandwidth_warning(sorted: &[f64], b: f64) -> Option<String> {
    let range = sorted[sorted.len() - 1] - sorted[0];
    (b > range).then(|| {
        format!(
            "bandwidth {b:.4e} exceeds the data range {range:.4e}; the Swanepoel rule is not scale-equivariant, consider the scale-equivariant rule or rescaled data"
        )
    })
}

pub(crate) const ATOM_WARNING: &str = "all-equal sample: kernel estimate replaced by the common value";

/// `None` when the sample is all-equal and the rule has no scale to work
/// with; the estimate is then the common value, the b → 0 limit.
pub(crate) fn kernel_srm_or_atom(
    sorted_losses: &[f64],
    spectrum: &dyn Spectrum,
    config: &KernelEstimatorConfig,
) -> Result<Option<KernelSrmValue>> {
    match kernel_srm_losses(sorted_losses, spectrum, config) {
        Ok(v) => Ok(Some(v)),
        Err(Error::DegenerateScale) => Ok(None),
        Err(e) => Err(e),
    }
}

fn quantile_domain(
    f: &KernelCdf,
    spectrum: &dyn Spectrum,
    config: &KernelEstimatorConfig,
    epsilon: f64,
    panels: usize,
    order: usize,
) -> Result<f64> {
    let gl = GaussLegendre::new(order);
    let (mut us, mut cs, ws) = graded_panels(&gl, epsilon, panels);
    us.insert(0, epsilon);
    cs.insert(0, 1.0 - epsilon);
    us.push(1.0 - epsilon);
    cs.push(epsilon);
    let qs = f.quantiles_sorted(&us, &cs, config.inversion_tol, config.inversion_max_iter)?;
    let m = us.len() - 1;
    let mut terms: Vec<f64> = us[1..m]
        .iter()
        .zip(&cs[1..m])
        .zip(ws.iter().zip(&qs[1..m]))
        .map(|((&u, &c), (&w, &q))| w * spectrum.phi_pair(u, c) * q)
        .collect();

    // ends by parts: ∫_0^ε q dD = q(ε) D(ε) - ∫_{-∞}^{q(ε)} D(F) dx, and
    // the mirror image on [1-ε, 1] with U(S)
    let (q_lo, q_hi) = (qs[0], qs[m]);
    let (lo_end, hi_end) = f.support();
    terms.push(q_lo * spectrum.distortion(epsilon));
    x_integral(f, spectrum, lo_end, q_lo, false, order, &mut terms);
    terms.push(q_hi * spectrum.upper_weight(epsilon));
    x_integral(f, spectrum, q_hi, hi_end, true, order, &mut terms);
    Ok(pairwise_sum(&terms))
}

/// Composite Gauss–Legendre nodes on [ε, 1-ε] with panel edges
/// ε + (1-2ε) P(k/m), P(t) = 3t² - 2t³, so panels shrink toward both ends
/// where the quantile function steepens. Returns nodes, complements and
/// weights; the complements are formed from the mirrored edges.
fn graded_panels(gl: &GaussLegendre, epsilon: f64, panels: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let span = 1.0 - 2.0 * epsilon;
    let p = |t: f64| t * t * (3.0 - 2.0 * t);
    let edge = |k: usize| {
        let t = k as f64 / panels as f64;
        (epsilon + span * p(t), epsilon + span * p(1.0 - t))
    };
    let cap = panels * gl.order();
    let (mut us, mut cs, mut ws) = (Vec::with_capacity(cap), Vec::with_capacity(cap), Vec::with_capacity(cap));
    for k in 0..panels {
        let (u0, _) = edge(k);
        let (u1, c1) = edge(k + 1);
        let h = 0.5 * (u1 - u0);
        for (&x, &w) in gl.nodes().iter().zip(gl.weights()) {
            us.push(u0 + h * (1.0 + x));
            cs.push(c1 + h * (1.0 - x));
            ws.push(h * w);
        }
    }
    (us, cs, ws)
}

/// Appends a Gauss–Legendre rule for -∫ D(F) dx (lower) or ∫ U(S) dx
/// (upper) over [a, e]. Panels are at most b wide and, for kernels with
/// compact support, split at the kinks X_i ± b.
fn x_integral(
    f: &KernelCdf,
    spectrum: &dyn Spectrum,
    a: f64,
    e: f64,
    upper: bool,
    order: usize,
    terms: &mut Vec<f64>,
) {
    if !(e > a) {
        return;
    }
    let b = f.bandwidth();
    let gl = GaussLegendre::new(order);
    let mut cuts = vec![a];
    if f.kernel().has_kinks() {
        let data = f.data();
        let lo = data.partition_point(|&x| x + b <= a);
        let hi = data.partition_point(|&x| x - b < e);
        let mut inner: Vec<f64> = data[lo..hi]
            .iter()
            .flat_map(|&x| [x - b, x + b])
            .filter(|&t| t > a && t < e)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        cuts.extend(inner);
    }
    cuts.push(e);
    for w in cuts.windows(2) {
        let (s, t) = (w[0], w[1]);
        if !(t > s) {
            continue;
        }
        let panels = ((t - s) / b).ceil().max(1.0) as usize;
        let (xs, ws) = gl.composite_nodes(s, t, panels);
        for (x, wt) in xs.into_iter().zip(ws) {
            if upper {
                terms.push(wt * spectrum.upper_weight(f.survival(x)));
            } else {
                terms.push(-wt * spectrum.distortion(f.eval(x)));
            }
        }
    }
}

/// ρ = m + ∫_m^∞ (1 - D(F)) dx - ∫_{-∞}^m D(F) dx with m the sample median.
/// Between merged kernel windows F_{n,b} is constant (k/n) and the integral
/// is exact; inside windows Gauss–Legendre panels are at most b wide.
fn distribution_domain(f: &KernelCdf, spectrum: &dyn Spectrum, order: usize) -> f64 {
    let data = f.data();
    let n = data.len();
    let nf = n as f64;
    let r = f.kernel().radius() * f.bandwidth();
    let pivot = data[n / 2];

    let mut terms: Vec<f64> = vec![pivot];
    let mut i = 0;
    while i < n {
        let start = data[i] - r;
        let mut j = i;
        while j + 1 < n && data[j + 1] - r <= data[j] + r {
            j += 1;
        }
        let end = data[j] + r;
        x_integral(f, spectrum, start, end.min(pivot), false, order, &mut terms);
        x_integral(f, spectrum, start.max(pivot), end, true, order, &mut terms);
        // gap up to the next window, where F = (j+1)/n exactly
        if j + 1 < n {
            let gap_lo = end;
            let gap_hi = data[j + 1] - r;
            let k = (j + 1) as f64;
            if gap_hi > gap_lo {
                if gap_lo >= pivot {
                    terms.push((gap_hi - gap_lo) * spectrum.upper_weight((nf - k) / nf));
                } else {
                    terms.push(-(gap_hi - gap_lo) * spectrum.distortion(k / nf));
                }
            }
        }
        i = j + 1;
    }
    pairwise_sum(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{BandwidthRule, Kernel};
    use approx::assert_relative_eq;

    fn sample_returns(n: usize, seed: u64) -> Vec<f64> {
        let m = crate::distributions::ModelSpec::standard_normal();
        crate::distributions::sample(&m, n, crate::rng::SeedPath::new(seed, 0)).unwrap().values
    }

    #[test]
    fn empirical_constant_and_uniform_examples() {
        let s = RiskSpectrum::exponential(5.0).unwrap();
        let r = empirical_srm(&[0.02; 7], &s).unwrap();
        assert_relative_eq!(r.point, -0.02, epsilon = 1e-16);
        let uniform = RiskSpectrum::expected_shortfall(1.0).unwrap();
        let r = empirical_srm(&[-3.0, -1.0, 2.0], &uniform).unwrap();
        assert_relative_eq!(r.point, 2.0 / 3.0, epsilon = 1e-15);
        assert!(empirical_srm(&[1.0], &s).is_err());
    }

    #[test]
    fn expected_shortfall_matches_tail_mean() {
        let data = sample_returns(103, 9);
        let s = RiskSpectrum::expected_shortfall(0.1).unwrap();
        let est = empirical_srm(&data, &s).unwrap().point;
        let mut losses: Vec<f64> = data.iter().map(|r| -r).collect();
        losses.sort_by(|a, b| b.total_cmp(a));
        // 10.3 observations: ten full weights and 0.3 of the eleventh
        let k = 10;
        let frac = 103.0 * 0.1 - k as f64;
        let expected = (losses[..k].iter().sum::<f64>() + frac * losses[k]) / (103.0 * 0.1);
        assert_relative_eq!(est, expected, epsilon = 1e-12);
    }

    #[test]
    fn routes_agree() {
        let data = sample_returns(300, 4);
        let losses = sorted_copy(&data.iter().map(|r| -r).collect::<Vec<_>>());
        for beta in [1.0, 5.0, 20.0, 200.0] {
            let s = RiskSpectrum::exponential(beta).unwrap();
            for kernel in [Kernel::Gaussian, Kernel::Epanechnikov] {
                let slow = KernelEstimatorConfig { kernel, doubling_check: false, ..Default::default() };
                let fast = KernelEstimatorConfig { kernel, ..KernelEstimatorConfig::fast() };
                let a = kernel_srm_losses(&losses, &s, &slow).unwrap().value;
                let b = kernel_srm_losses(&losses, &s, &fast).unwrap().value;
                // compact kernels leave kinks in the quantile function
                let tol = if kernel == Kernel::Gaussian { 1e-8 } else { 1e-4 };
                assert_relative_eq!(a, b, max_relative = tol);
            }
        }
    }

    #[test]
    fn distribution_route_is_exact_for_uniform_spectrum() {
        // with φ ≡ 1 the estimate is the mean of F_{n,b}, i.e. the sample mean
        let data = sample_returns(50, 2);
        let losses = sorted_copy(&data.iter().map(|r| -r).collect::<Vec<_>>());
        let s = RiskSpectrum::expected_shortfall(1.0).unwrap();
        for kernel in [Kernel::Gaussian, Kernel::Epanechnikov] {
            for b in [0.01, 0.3, 2.0] {
                let cfg = KernelEstimatorConfig {
                    kernel,
                    bandwidth: BandwidthRule::Fixed { value: b },
                    ..KernelEstimatorConfig::fast()
                };
                let v = kernel_srm_losses(&losses, &s, &cfg).unwrap().value;
                assert_relative_eq!(v, crate::stats::mean(&losses), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn constant_data_bias_is_order_b() {
        let s = RiskSpectrum::exponential(5.0).unwrap();
        let b = 0.05;
        let cfg = KernelEstimatorConfig::default().with_bandwidth(BandwidthRule::Fixed { value: b });
        let r = kernel_srm(&[0.01; 20], &s, &cfg).unwrap();
        assert!((r.point + 0.01).abs() <= 5.0 * b);
        // Swanepoel cannot be resolved on constant data
        let losses = [-0.01; 20];
        assert!(matches!(
            kernel_srm_losses(&losses, &s, &KernelEstimatorConfig::default()),
            Err(Error::DegenerateScale)
        ));
        let r = kernel_srm(&[0.01; 20], &s, &KernelEstimatorConfig::default()).unwrap();
        assert_eq!(r.point, -0.01);
        assert_eq!(r.bandwidth, None);
        assert_eq!(r.warnings, vec![ATOM_WARNING.to_string()]);
    }

    #[test]
    fn quadrature_is_stable_under_refinement() {
        let data = sample_returns(400, 8);
        let s = RiskSpectrum::exponential(5.0).unwrap();
        let r = kernel_srm(&data, &s, &KernelEstimatorConfig::default()).unwrap();
        assert!(r.warnings.is_empty(), "{:?}", r.warnings);
        let coarse = kernel_srm_losses(
            &sorted_copy(&data.iter().map(|r| -r).collect::<Vec<_>>()),
            &s,
            &KernelEstimatorConfig::default(),
        )
        .unwrap();
        let fine = coarse.refined.unwrap();
        assert!((fine - coarse.value).abs() / coarse.value.abs() < 1e-5);
    }
}
