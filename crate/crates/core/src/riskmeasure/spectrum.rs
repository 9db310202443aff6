//! Risk spectra φ, their distortion functions D and L-statistic weights.
//!
//! All spectra weight the loss quantile function: φ is nondecreasing on
//! (0, 1), D(u) = ∫₀ᵘ φ, and large u means large loss.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{tanh_sinh, GaussLegendre};

/// Largest accepted exponential risk aversion; e^β overflows soon after.
pub const MAX_BETA: f64 = 700.0;

/// A weight density on (0, 1) in the loss-quantile orientation.
pub trait Spectrum: Send + Sync {
    /// φ(u), with `c = 1 - u` passed separately so spectra singular at
    /// u = 1 keep full precision.
    fn phi_pair(&self, u: f64, c: f64) -> f64;

    fn phi(&self, u: f64) -> f64 {
        self.phi_pair(u, 1.0 - u)
    }

    /// D(u) = ∫₀ᵘ φ(s) ds.
    fn distortion(&self, u: f64) -> f64;

    /// 1 - D(1 - c), the weight carried by the top `c` of the loss
    /// distribution.
    fn upper_weight(&self, c: f64) -> f64 {
        1.0 - self.distortion(1.0 - c)
    }

    /// Points in (0, 1) where φ may jump.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }

    fn label(&self) -> String;
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiskSpectrum {
    Exponential { beta: f64 },
    /// φ(u) = γ(1-u)^{γ-1}, 0 < γ < 1.
    PowerLow { gamma: f64 },
    /// φ(u) = γu^{γ-1}, γ > 1.
    PowerHigh { gamma: f64 },
    /// Uniform weight 1/p on the top `p` of losses.
    ExpectedShortfall { p: f64 },
}

impl RiskSpectrum {
    pub fn exponential(beta: f64) -> Result<Self> {
        RiskSpectrum::Exponential { beta }.validated()
    }

    pub fn power_low(gamma: f64) -> Result<Self> {
        RiskSpectrum::PowerLow { gamma }.validated()
    }

    pub fn power_high(gamma: f64) -> Result<Self> {
        RiskSpectrum::PowerHigh { gamma }.validated()
    }

    pub fn expected_shortfall(p: f64) -> Result<Self> {
        RiskSpectrum::ExpectedShortfall { p }.validated()
    }

    /// Checks the parameter ranges. p = 1 is accepted for ES and gives the
    /// uniform spectrum (the plain mean of losses).
    pub fn validated(self) -> Result<Self> {
        match self {
            RiskSpectrum::Exponential { beta } => {
                if !(beta > 0.0 && beta < MAX_BETA) {
                    return Err(Error::param(format!(
                        "exponential spectrum needs 0 < beta < {MAX_BETA}, got {beta}"
                    )));
                }
            }
            RiskSpectrum::PowerLow { gamma } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::param(format!("powlow needs 0 < gamma < 1, got {gamma}")));
                }
            }
            RiskSpectrum::PowerHigh { gamma } => {
                if !(gamma > 1.0 && gamma.is_finite()) {
                    return Err(Error::param(format!("powhigh needs gamma > 1, got {gamma}")));
                }
            }
            RiskSpectrum::ExpectedShortfall { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::param(format!("es needs 0 < p <= 1, got {p}")));
                }
            }
        }
        Ok(self)
    }

    pub fn distortion_function(self) -> DistortionFunction {
        DistortionFunction { spectrum: self }
    }
}

impl Spectrum for RiskSpectrum {
    fn phi_pair(&self, u: f64, c: f64) -> f64 {
        match *self {
            RiskSpectrum::Exponential { beta } => beta * (-beta * c).exp() / -(-beta).exp_m1(),
            RiskSpectrum::PowerLow { gamma } => gamma * c.powf(gamma - 1.0),
            RiskSpectrum::PowerHigh { gamma } => gamma * u.powf(gamma - 1.0),
            RiskSpectrum::ExpectedShortfall { p } => {
                if c < p {
                    1.0 / p
                } else {
                    0.0
                }
            }
        }
    }

    fn distortion(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match *self {
            // (e^{-β(1-u)} - e^{-β}) / (1 - e^{-β}) without forming e^{βu}
            RiskSpectrum::Exponential { beta } => {
                (-beta * (1.0 - u)).exp() * (-beta * u).exp_m1() / (-beta).exp_m1()
            }
            RiskSpectrum::PowerLow { gamma } => -(gamma * (-u).ln_1p()).exp_m1(),
            RiskSpectrum::PowerHigh { gamma } => u.powf(gamma),
            RiskSpectrum::ExpectedShortfall { p } => ((u - (1.0 - p)) / p).clamp(0.0, 1.0),
        }
    }

    fn upper_weight(&self, c: f64) -> f64 {
        let c = c.clamp(0.0, 1.0);
        match *self {
            RiskSpectrum::Exponential { beta } => (-beta * c).exp_m1() / (-beta).exp_m1(),
            RiskSpectrum::PowerLow { gamma } => c.powf(gamma),
            RiskSpectrum::PowerHigh { gamma } => -(gamma * (-c).ln_1p()).exp_m1(),
            RiskSpectrum::ExpectedShortfall { p } => (c / p).min(1.0),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match *self {
            RiskSpectrum::ExpectedShortfall { p } if p < 1.0 => vec![1.0 - p],
            _ => Vec::new(),
        }
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RiskSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RiskSpectrum::Exponential { beta } => write!(f, "exp:{beta}"),
            RiskSpectrum::PowerLow { gamma } => write!(f, "powlow:{gamma}"),
            RiskSpectrum::PowerHigh { gamma } => write!(f, "powhigh:{gamma}"),
            RiskSpectrum::ExpectedShortfall { p } => write!(f, "es:{p}"),
        }
    }
}

impl FromStr for RiskSpectrum {
    type Err = Error;

    /// Parses `exp:β`, `powlow:γ`, `powhigh:γ` or `es:p`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("spectrum '{s}' must look like exp:5")))?;
        let x: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("spectrum parameter '{value}' is not a number")))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "exp" | "exponential" => RiskSpectrum::exponential(x),
            "powlow" => RiskSpectrum::power_low(x),
            "powhigh" => RiskSpectrum::power_high(x),
            "es" => RiskSpectrum::expected_shortfall(x),
            other => Err(Error::Parse(format!("unknown spectrum kind '{other}'"))),
        }
    }
}

/// D(u) = ∫₀ᵘ φ for one of the built-in spectra.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistortionFunction {
    pub spectrum: RiskSpectrum,
}

impl DistortionFunction {
    pub fn eval(&self, u: f64) -> f64 {
        self.spectrum.distortion(u)
    }
}

/// Evaluates φ on the closed interval, where the endpoint value is the
/// limit (possibly infinite for the power spectra).
pub fn phi(spectrum: &dyn Spectrum, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain { value: u, domain: "[0, 1]" });
    }
    Ok(spectrum.phi(u))
}

pub fn distortion_eval(d: &DistortionFunction, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::Domain { value: u, domain: "[0, 1]" });
    }
    Ok(d.eval(u))
}

/// Weights c_ni = D(i/n) - D((i-1)/n) of the empirical L-statistic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LStatWeights {
    pub n: usize,
    pub weights: Vec<f64>,
}

impl LStatWeights {
    pub fn new(spectrum: &dyn Spectrum, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        let nf = n as f64;
        let weights = (1..=n)
            .map(|i| {
                let hi = i as f64 / nf;
                let lo = (i - 1) as f64 / nf;
                let d_hi = spectrum.distortion(hi);
                if d_hi <= 0.5 {
                    d_hi - spectrum.distortion(lo)
                } else {
                    // difference of upper weights keeps precision near D = 1
                    spectrum.upper_weight((n - i + 1) as f64 / nf)
                        - spectrum.upper_weight((n - i) as f64 / nf)
                }
            })
            .collect();
        Ok(LStatWeights { n, weights })
    }

    pub fn sum(&self) -> f64 {
        crate::stats::pairwise_sum(&self.weights)
    }

    /// Σ c_ni L_(i) for ascending sorted losses.
    pub fn apply(&self, sorted_losses: &[f64]) -> f64 {
        assert_eq!(sorted_losses.len(), self.n, "weights built for a different sample size");
        let terms: Vec<f64> = self.weights.iter().zip(sorted_losses).map(|(c, x)| c * x).collect();
        crate::stats::pairwise_sum(&terms)
    }
}

pub fn lstat_weights(spectrum: &dyn Spectrum, n: usize) -> Result<LStatWeights> {
    LStatWeights::new(spectrum, n)
}

/// A spectrum read in the opposite orientation, φ_m(u) = φ(1 - u). Used to
/// express spectra written for the return (gain-side) quantile function.
#[derive(Clone, Debug)]
pub struct Mirrored<S>(pub S);

impl<S: Spectrum> Mirrored<S> {
    pub fn canonical(&self) -> &S {
        &self.0
    }
}

impl<S: Spectrum> Spectrum for Mirrored<S> {
    fn phi_pair(&self, u: f64, c: f64) -> f64 {
        self.0.phi_pair(c, u)
    }

    fn distortion(&self, u: f64) -> f64 {
        self.0.upper_weight(u)
    }

    fn upper_weight(&self, c: f64) -> f64 {
        self.0.distortion(c)
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints().into_iter().map(|b| 1.0 - b).collect()
    }

    fn label(&self) -> String {
        format!("mirrored({})", self.0.label())
    }
}

/// A user-supplied φ. D is obtained by quadrature.
#[derive(Clone)]
pub struct CustomSpectrum {
    name: String,
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    breakpoints: Vec<f64>,
}

impl CustomSpectrum {
    pub fn new(name: impl Into<String>, phi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        CustomSpectrum { name: name.into(), phi: Arc::new(phi), breakpoints: Vec::new() }
    }

    pub fn with_breakpoints(mut self, mut points: Vec<f64>) -> Self {
        points.sort_by(f64::total_cmp);
        self.breakpoints = points;
        self
    }
}

impl fmt::Debug for CustomSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomSpectrum").field("name", &self.name).finish()
    }
}

impl Spectrum for CustomSpectrum {
    fn phi_pair(&self, u: f64, _c: f64) -> f64 {
        (self.phi)(u)
    }

    fn distortion(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let gl = GaussLegendre::new(8);
        let mut cuts = vec![0.0];
        cuts.extend(self.breakpoints.iter().copied().filter(|&b| b > 0.0 && b < u));
        cuts.push(u);
        cuts.windows(2).map(|w| gl.composite(w[0], w[1], 64, |s| (self.phi)(s))).sum()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }

    fn label(&self) -> String {
        self.name.clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Monotonicity {
    Nondecreasing,
    /// Weights the gain side; the spectrum is written in the mirrored
    /// convention and passes after `Mirrored` is undone.
    Nonincreasing,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub spectrum: String,
    pub nonnegative: bool,
    pub min_phi: f64,
    pub normalized: bool,
    pub integral: f64,
    pub monotonicity: Monotonicity,
}

impl AdmissibilityReport {
    pub fn monotone(&self) -> bool {
        self.monotonicity == Monotonicity::Nondecreasing
    }

    pub fn passes(&self) -> bool {
        self.nonnegative && self.normalized && self.monotone()
    }
}

const ADMISSIBILITY_GRID: usize = 10_000;

/// Numerical check of φ ≥ 0, ∫φ = 1 (to 1e-8) and monotonicity on a
/// 10⁴-point grid.
pub fn validate_admissible(spectrum: &dyn Spectrum) -> AdmissibilityReport {
    let grid: Vec<f64> = (0..ADMISSIBILITY_GRID)
        .map(|k| spectrum.phi((k as f64 + 0.5) / ADMISSIBILITY_GRID as f64))
        .collect();
    let min_phi = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let scale = grid.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1.0);
    let slack = 1e-12 * scale;
    let up = grid.windows(2).all(|w| w[1] >= w[0] - slack);
    let down = grid.windows(2).all(|w| w[1] <= w[0] + slack);
    let monotonicity = match (up, down) {
        (true, _) => Monotonicity::Nondecreasing,
        (false, true) => Monotonicity::Nonincreasing,
        _ => Monotonicity::Neither,
    };

    let mut cuts = vec![0.0];
    cuts.extend(spectrum.breakpoints().into_iter().filter(|&b| b > 0.0 && b < 1.0));
    cuts.push(1.0);
    let integral = cuts
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            // (x, b - x) from the quadrature; u and 1 - u for φ
            tanh_sinh(a, b, 1e-12, 12, |x, to_b| spectrum.phi_pair(x, (1.0 - b) + to_b))
                .map(|r| r.value)
                .unwrap_or(f64::NAN)
        })
        .sum::<f64>();

    AdmissibilityReport {
        spectrum: spectrum.label(),
        nonnegative: min_phi >= 0.0,
        min_phi,
        normalized: (integral - 1.0).abs() <= 1e-8,
        integral,
        monotonicity,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exponential_endpoint_and_midpoint() {
        let s = RiskSpectrum::exponential(1.0).unwrap();
        assert_relative_eq!(phi(&s, 1.0).unwrap(), 1.581_976_706_869_326_4, epsilon = 1e-14);
        let d = s.distortion_function();
        assert_relative_eq!(distortion_eval(&d, 0.5).unwrap(), 0.377_540_668_798_145_4, epsilon = 1e-15);
        let s5 = RiskSpectrum::exponential(5.0).unwrap().distortion_function();
        assert_eq!(s5.eval(0.0), 0.0);
        assert_eq!(s5.eval(1.0), 1.0);
    }

    #[test]
    fn expected_shortfall_indicator() {
        let s = RiskSpectrum::expected_shortfall(0.05).unwrap();
        assert_eq!(s.phi(0.97), 20.0);
        assert_eq!(s.phi(0.90), 0.0);
    }

    #[test]
    fn power_low_distortion_matches_quadrature() {
        let s = RiskSpectrum::power_low(0.5).unwrap();
        let gl = GaussLegendre::new(8);
        let numeric = gl.composite(0.0, 0.25, 64, |u| s.phi(u));
        assert_relative_eq!(s.distortion(0.25), numeric, epsilon = 1e-12);
        assert_relative_eq!(s.distortion(0.25), 0.133_974_596_215_561_3, epsilon = 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        assert!(RiskSpectrum::exponential(0.0).is_err());
        assert!(RiskSpectrum::exponential(700.0).is_err());
        assert!(RiskSpectrum::power_low(1.0).is_err());
        assert!(RiskSpectrum::power_high(1.0).is_err());
        assert!(RiskSpectrum::expected_shortfall(0.0).is_err());
        assert!(RiskSpectrum::expected_shortfall(1.0).is_ok());
        assert!(phi(&RiskSpectrum::exponential(1.0).unwrap(), 1.5).is_err());
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["exp:5", "powlow:0.5", "powhigh:2", "es:0.05"] {
            let s: RiskSpectrum = text.parse().unwrap();
            assert_eq!(s.to_string(), text);
        }
        assert!("exp".parse::<RiskSpectrum>().is_err());
        assert!("exp:x".parse::<RiskSpectrum>().is_err());
        assert!("wang:0.5".parse::<RiskSpectrum>().is_err());
    }

    #[test]
    fn lstat_weights_examples() {
        let w = lstat_weights(&RiskSpectrum::expected_shortfall(0.5).unwrap(), 4).unwrap();
        assert_eq!(w.weights, vec![0.0, 0.0, 0.5, 0.5]);
        let w = lstat_weights(&RiskSpectrum::exponential(3.0).unwrap(), 1).unwrap();
        assert_eq!(w.weights, vec![1.0]);
        let w = lstat_weights(&RiskSpectrum::exponential(10.0).unwrap(), 100).unwrap();
        assert!(w.weights.windows(2).all(|p| p[1] > p[0]));
        assert_relative_eq!(w.sum(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn admissibility_of_builtin_spectra() {
        for s in ["exp:5", "exp:200", "powlow:0.5", "powhigh:2", "es:0.05", "es:1"] {
            let s: RiskSpectrum = s.parse().unwrap();
            let r = validate_admissible(&s);
            assert!(r.passes(), "{r:?}");
        }
    }

    #[test]
    fn mirrored_spectrum_is_flagged_then_canonicalised() {
        let m = Mirrored(RiskSpectrum::power_high(2.0).unwrap());
        let r = validate_admissible(&m);
        assert_eq!(r.monotonicity, Monotonicity::Nonincreasing);
        assert!(r.nonnegative && r.normalized);
        assert!(validate_admissible(m.canonical()).passes());
        assert_relative_eq!(m.distortion(0.3) + m.0.distortion(0.7), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sign_flipped_custom_spectrum_fails_nonnegativity() {
        // 2u normalised, negated on the lower half and rescaled to integrate to 1
        let raw = |u: f64| if u < 0.5 { -2.0 * u } else { 2.0 * u };
        let mass = 0.75 - 0.25;
        let s = CustomSpectrum::new("signflip", move |u| raw(u) / mass).with_breakpoints(vec![0.5]);
        let r = validate_admissible(&s);
        assert!(!r.nonnegative);
        assert!(r.normalized, "{r:?}");
        assert!(!r.passes());
    }
}
