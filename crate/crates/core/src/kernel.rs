//! Kernel distribution-function estimation: F_{n,b}, its density and
//! inverse, bandwidth rules, and the weighted-distance diagnostics used by
//! the theory checks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{open_uniform, SeedPath};
use crate::stats::{iqr_sorted, normal_cdf, normal_pdf, normal_sf, sample_sd, sorted_copy};

/// [375√3/(28π)]^{1/7}.
pub const SWANEPOEL_CONSTANT: f64 = 1.330_578_709_810_044_3;

/// Kernels with bounded density, zero mean and finite variance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Gaussian,
    /// Integrated Epanechnikov kernel, support [-1, 1].
    Epanechnikov,
}

impl Kernel {
    /// Integrated kernel K(z).
    #[inline]
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            Kernel::Gaussian => normal_cdf(z),
            Kernel::Epanechnikov => {
                if z <= -1.0 {
                    0.0
                } else if z >= 1.0 {
                    1.0
                } else {
                    0.5 + 0.75 * z - 0.25 * z * z * z
                }
            }
        }
    }

    /// 1 - K(z) computed directly.
    #[inline]
    pub fn sf(self, z: f64) -> f64 {
        match self {
            Kernel::Gaussian => normal_sf(z),
            Kernel::Epanechnikov => self.cdf(-z),
        }
    }

    #[inline]
    pub fn pdf(self, z: f64) -> f64 {
        match self {
            Kernel::Gaussian => normal_pdf(z),
            Kernel::Epanechnikov => {
                if z.abs() >= 1.0 {
                    0.0
                } else {
                    0.75 * (1.0 - z * z)
                }
            }
        }
    }

    /// Half-width (in bandwidth units) beyond which K is 0 or 1 to double
    /// precision.
    pub fn radius(self) -> f64 {
        match self {
            // Φ(-9) ≈ 1.1e-19
            Kernel::Gaussian => 9.0,
            Kernel::Epanechnikov => 1.0,
        }
    }

    /// True when the integrated kernel is only piecewise smooth.
    pub fn has_kinks(self) -> bool {
        matches!(self, Kernel::Epanechnikov)
    }
}

impl FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Kernel::Gaussian),
            "epanechnikov" | "epa" => Ok(Kernel::Epanechnikov),
            other => Err(Error::Parse(format!("unknown kernel '{other}'"))),
        }
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kernel::Gaussian => "gaussian",
            Kernel::Epanechnikov => "epanechnikov",
        })
    }
}

/// σ = min(S, IQR/1.349); when exactly one of the two is zero the other
/// is used.
pub fn scale_estimate(sorted: &[f64]) -> Result<f64> {
    if sorted.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: sorted.len() });
    }
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegenerateScale);
    }
    let s = sample_sd(sorted);
    let r = iqr_sorted(sorted) / 1.349;
    match (s > 0.0, r > 0.0) {
        (true, true) => Ok(s.min(r)),
        (true, false) => Ok(s),
        (false, true) => Ok(r),
        (false, false) => Err(Error::DegenerateScale),
    }
}

pub fn swanepoel_formula(sigma: f64, n: usize) -> f64 {
    SWANEPOEL_CONSTANT * sigma.powf(-4.0 / 7.0) * (n as f64).powf(-1.0 / 7.0)
}

/// b = C σ^{-4/7} n^{-1/7}.
pub fn bandwidth_swanepoel(data: &[f64]) -> Result<f64> {
    let sorted = sorted_copy(data);
    Ok(swanepoel_formula(scale_estimate(&sorted)?, sorted.len()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// C σ^{-4/7} n^{-1/7}.
    #[default]
    Swanepoel,
    /// C σ n^{-1/7}; scales with the data.
    ScaleEquivariant,
    /// constant · σ · n^{-exponent}.
    Rate { constant: f64, exponent: f64 },
    Fixed { value: f64 },
}

impl BandwidthRule {
    pub fn resolve(&self, sorted: &[f64]) -> Result<f64> {
        let n = sorted.len();
        let b = match *self {
            BandwidthRule::Swanepoel => swanepoel_formula(scale_estimate(sorted)?, n),
            BandwidthRule::ScaleEquivariant => {
                SWANEPOEL_CONSTANT * scale_estimate(sorted)? * (n as f64).powf(-1.0 / 7.0)
            }
            BandwidthRule::Rate { constant, exponent } => {
                constant * scale_estimate(sorted)? * (n as f64).powf(-exponent)
            }
            BandwidthRule::Fixed { value } => value,
        };
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param(format!("bandwidth must be positive and finite, got {b}")));
        }
        Ok(b)
    }
}

impl fmt::Display for BandwidthRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandwidthRule::Swanepoel => f.write_str("swanepoel"),
            BandwidthRule::ScaleEquivariant => f.write_str("scale-equivariant"),
            BandwidthRule::Rate { constant, exponent } => write!(f, "rate:{constant},{exponent}"),
            BandwidthRule::Fixed { value } => write!(f, "{value}"),
        }
    }
}

impl FromStr for BandwidthRule {
    type Err = Error;

    /// `swanepoel`, `scale-equivariant`, `rate:c,e`, or a positive number.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s.to_ascii_lowercase().as_str() {
            "swanepoel" => return Ok(BandwidthRule::Swanepoel),
            "scale-equivariant" | "equivariant" => return Ok(BandwidthRule::ScaleEquivariant),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("rate:") {
            let parts: Vec<&str> = rest.split(',').collect();
            let nums: Vec<f64> = parts.iter().filter_map(|p| p.trim().parse().ok()).collect();
            if nums.len() != 2 || parts.len() != 2 || !(nums[0] > 0.0) || !(nums[1] > 0.0) {
                return Err(Error::Parse(format!("bandwidth '{s}' must be rate:constant,exponent")));
            }
            return Ok(BandwidthRule::Rate { constant: nums[0], exponent: nums[1] });
        }
        let value: f64 = s
            .strip_prefix("fixed:")
            .unwrap_or(s)
            .parse()
            .map_err(|_| Error::Parse(format!("unknown bandwidth '{s}'")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::param(format!("bandwidth must be positive, got {value}")));
        }
        Ok(BandwidthRule::Fixed { value })
    }
}

/// How the kernel SRM integral is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum QuadratureRoute {
    /// Gauss–Legendre in u on [ε, 1-ε] with `panels` panels of `order`
    /// nodes, each node inverted numerically.
    QuantileDomain { epsilon: f64, panels: usize, order: usize },
    /// The same integral after the substitution u = F_{n,b}(x): Gauss–Legendre
    /// panels no wider than b over the support, exact on gaps between data.
    DistributionDomain { order: usize },
}

impl QuadratureRoute {
    pub fn quantile_default() -> Self {
        QuadratureRoute::QuantileDomain { epsilon: 1e-6, panels: 512, order: 8 }
    }

    pub fn distribution_default() -> Self {
        QuadratureRoute::DistributionDomain { order: 10 }
    }
}

impl Default for QuadratureRoute {
    fn default() -> Self {
        QuadratureRoute::quantile_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelEstimatorConfig {
    pub kernel: Kernel,
    pub bandwidth: BandwidthRule,
    pub inversion_tol: f64,
    pub inversion_max_iter: usize,
    pub quadrature: QuadratureRoute,
    /// Repeat the quantile-domain integral with ε/2 and 2m and warn when
    /// the relative change exceeds `doubling_threshold`.
    pub doubling_check: bool,
    pub doubling_threshold: f64,
}

impl Default for KernelEstimatorConfig {
    fn default() -> Self {
        KernelEstimatorConfig {
            kernel: Kernel::Gaussian,
            bandwidth: BandwidthRule::Swanepoel,
            inversion_tol: 1e-10,
            inversion_max_iter: 200,
            quadrature: QuadratureRoute::quantile_default(),
            doubling_check: true,
            doubling_threshold: 1e-5,
        }
    }
}

impl KernelEstimatorConfig {
    /// Settings for Monte-Carlo work: distribution-domain integration and no
    /// doubling check.
    pub fn fast() -> Self {
        KernelEstimatorConfig {
            quadrature: QuadratureRoute::distribution_default(),
            doubling_check: false,
            ..KernelEstimatorConfig::default()
        }
    }

    pub fn with_bandwidth(mut self, rule: BandwidthRule) -> Self {
        self.bandwidth = rule;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.inversion_tol > 0.0) || self.inversion_max_iter == 0 {
            return Err(Error::param("inversion tolerance and iteration cap must be positive"));
        }
        match self.quadrature {
            QuadratureRoute::QuantileDomain { epsilon, panels, order } => {
                if !(epsilon > 0.0 && epsilon < 0.5) || panels == 0 || order == 0 {
                    return Err(Error::param("quantile-domain quadrature needs 0 < eps < 0.5 and positive panels/order"));
                }
            }
            QuadratureRoute::DistributionDomain { order } => {
                if order == 0 {
                    return Err(Error::param("quadrature order must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// F_{n,b}(x) = (1/n) Σ K((x - X_i)/b) over sorted data.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelCdf {
    data: Vec<f64>,
    b: f64,
    kernel: Kernel,
}

impl KernelCdf {
    pub fn new(data: &[f64], b: f64, kernel: Kernel) -> Result<Self> {
        Self::from_sorted(sorted_copy(data), b, kernel)
    }

    pub fn from_sorted(sorted: Vec<f64>, b: f64, kernel: Kernel) -> Result<Self> {
        if sorted.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if sorted.iter().any(|x| !x.is_finite()) {
            return Err(Error::param("data must be finite"));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param(format!("bandwidth must be positive and finite, got {b}")));
        }
        debug_assert!(sorted.windows(2).all(|w| w[0] <= w[1]));
        Ok(KernelCdf { data: sorted, b, kernel })
    }

    /// Builds the estimator with a bandwidth chosen by `rule`.
    pub fn with_rule(data: &[f64], rule: &BandwidthRule, kernel: Kernel) -> Result<Self> {
        let sorted = sorted_copy(data);
        let b = rule.resolve(&sorted)?;
        Self::from_sorted(sorted, b, kernel)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn bandwidth(&self) -> f64 {
        self.b
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Index range of observations within one kernel radius of x.
    #[inline]
    fn window(&self, x: f64) -> (usize, usize) {
        let r = self.kernel.radius() * self.b;
        let lo = self.data.partition_point(|&v| v < x - r);
        let hi = lo + self.data[lo..].partition_point(|&v| v <= x + r);
        (lo, hi)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.window(x);
        let inside: f64 = self.data[lo..hi].iter().map(|&v| self.kernel.cdf((x - v) / self.b)).sum();
        ((lo as f64 + inside) / self.data.len() as f64).min(1.0)
    }

    /// 1 - F_{n,b}(x) without cancellation.
    pub fn survival(&self, x: f64) -> f64 {
        let (lo, hi) = self.window(x);
        let inside: f64 = self.data[lo..hi].iter().map(|&v| self.kernel.sf((x - v) / self.b)).sum();
        (((self.data.len() - hi) as f64 + inside) / self.data.len() as f64).min(1.0)
    }

    pub fn density(&self, x: f64) -> f64 {
        let (lo, hi) = self.window(x);
        let s: f64 = self.data[lo..hi].iter().map(|&v| self.kernel.pdf((x - v) / self.b)).sum();
        s / (self.data.len() as f64 * self.b)
    }

    /// F (or S when `upper`) together with the density.
    #[inline]
    fn eval_with_density(&self, x: f64, upper: bool) -> (f64, f64) {
        let (lo, hi) = self.window(x);
        let n = self.data.len() as f64;
        let mut acc = 0.0;
        let mut dens = 0.0;
        for &v in &self.data[lo..hi] {
            let z = (x - v) / self.b;
            acc += if upper { self.kernel.sf(z) } else { self.kernel.cdf(z) };
            dens += self.kernel.pdf(z);
        }
        let base = if upper { self.data.len() - hi } else { lo };
        ((base as f64 + acc) / n, dens / (n * self.b))
    }

    /// Interval outside which F is 0 or 1 to working precision.
    pub fn support(&self) -> (f64, f64) {
        let r = self.kernel.radius() * self.b;
        (self.data[0] - r, self.data[self.data.len() - 1] + r)
    }

    fn initial_bracket(&self) -> (f64, f64) {
        let pad = 10.0 * self.b;
        (self.data[0] - pad, self.data[self.data.len() - 1] + pad)
    }

    /// Signed residual F(x) - u, computed through S for u > 1/2.
    #[inline]
    fn residual(&self, x: f64, u: f64, c: f64) -> f64 {
        if u > 0.5 {
            c - self.survival(x)
        } else {
            self.eval(x) - u
        }
    }

    /// F_{n,b}⁻¹(u) by bracketed bisection until |F(x) - u| ≤ tol.
    pub fn quantile(&self, u: f64, tol: f64, max_iter: usize) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain { value: u, domain: "(0, 1)" });
        }
        let c = 1.0 - u;
        let (mut lo, mut hi) = self.initial_bracket();
        let mut width = hi - lo;
        while self.residual(lo, u, c) > 0.0 {
            width *= 2.0;
            lo -= width;
        }
        while self.residual(hi, u, c) < 0.0 {
            width *= 2.0;
            hi += width;
        }
        for _ in 0..max_iter {
            let mid = 0.5 * (lo + hi);
            let r = self.residual(mid, u, c);
            if r.abs() <= tol {
                return Ok(mid);
            }
            if r < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::InversionFailure { u, lo, hi, iterations: max_iter })
    }

    /// Quantiles at ascending probabilities, sweeping left to right with a
    /// bracketed Newton iteration; each root becomes the next lower bracket.
    /// `cs` holds the complements 1 - u.
    pub fn quantiles_sorted(
        &self,
        us: &[f64],
        cs: &[f64],
        tol: f64,
        max_iter: usize,
    ) -> Result<Vec<f64>> {
        assert_eq!(us.len(), cs.len());
        let (mut floor, mut ceiling) = self.initial_bracket();
        let mut width = ceiling - floor;
        if let Some(&u0) = us.first() {
            while self.residual(floor, u0, 1.0 - u0) > 0.0 {
                width *= 2.0;
                floor -= width;
            }
        }
        if let Some(&ul) = us.last() {
            while self.residual(ceiling, ul, 1.0 - ul) < 0.0 {
                width *= 2.0;
                ceiling += width;
            }
        }
        let mut out = Vec::with_capacity(us.len());
        for (&u, &c) in us.iter().zip(cs) {
            if !(u > 0.0 && u < 1.0) {
                return Err(Error::Domain { value: u, domain: "(0, 1)" });
            }
            let upper = u > 0.5;
            let target = if upper { c } else { u };
            let (mut lo, mut hi) = (floor, ceiling);
            let mut x = floor;
            let mut found = false;
            for _ in 0..max_iter {
                let (v, dens) = self.eval_with_density(x, upper);
                let r = if upper { target - v } else { v - target };
                if r.abs() <= tol {
                    found = true;
                    break;
                }
                if r < 0.0 {
                    lo = x;
                } else {
                    hi = x;
                }
                let newton = x - r / dens;
                x = if dens > 0.0 && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
            }
            if !found {
                return Err(Error::InversionFailure { u, lo, hi, iterations: max_iter });
            }
            out.push(x);
            floor = x;
        }
        Ok(out)
    }
}

pub fn kernel_cdf_eval(f: &KernelCdf, x: f64) -> f64 {
    f.eval(x)
}

pub fn kernel_quantile(f: &KernelCdf, u: f64, config: &KernelEstimatorConfig) -> Result<f64> {
    f.quantile(u, config.inversion_tol, config.inversion_max_iter)
}

/// Weight functions h for the d_h distance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum WeightFunctionH {
    /// h ≡ 1, giving the plain sup distance.
    Unit,
    /// h(t) = [t(1-t)]^{1-δ/2}.
    Standard { delta: f64 },
    /// h*(t) = [t(1-t)]^{1-δ/4}.
    Star { delta: f64 },
}

impl WeightFunctionH {
    pub fn standard(delta: f64) -> Result<Self> {
        WeightFunctionH::Standard { delta }.validated()
    }

    pub fn star(delta: f64) -> Result<Self> {
        WeightFunctionH::Star { delta }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            WeightFunctionH::Standard { delta } | WeightFunctionH::Star { delta } => {
                if !(delta > 0.0 && delta < 2.0) {
                    return Err(Error::param(format!("weight exponent delta must be in (0, 2), got {delta}")));
                }
            }
            WeightFunctionH::Unit => {}
        }
        Ok(self)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let base = t * (1.0 - t);
        match *self {
            WeightFunctionH::Unit => 1.0,
            WeightFunctionH::Standard { delta } => base.powf(1.0 - 0.5 * delta),
            WeightFunctionH::Star { delta } => base.powf(1.0 - 0.25 * delta),
        }
    }
}

fn interior_grid(grid_size: usize) -> Vec<f64> {
    (1..=grid_size).map(|k| k as f64 / (grid_size + 1) as f64).collect()
}

/// sup |f(t) - t| / h(t) over the interior grid t = k/(G+1), k = 1..G.
pub fn dh_distance_fn(f: impl Fn(f64) -> f64, h: &WeightFunctionH, grid_size: usize) -> Result<f64> {
    if grid_size < 100 {
        return Err(Error::param(format!("d_h grid needs at least 100 points, got {grid_size}")));
    }
    h.validated()?;
    Ok(interior_grid(grid_size)
        .into_iter()
        .map(|t| (f(t) - t).abs() / h.eval(t))
        .fold(0.0, f64::max))
}

/// Grid approximation of d_h(F_{n,b}, F) for data on [0, 1] with F the
/// uniform CDF.
pub fn dh_distance(f: &KernelCdf, h: &WeightFunctionH, grid_size: usize) -> Result<f64> {
    if let Some(&bad) = f.data().iter().find(|&&x| !(0.0..=1.0).contains(&x)) {
        return Err(Error::Domain { value: bad, domain: "[0, 1]" });
    }
    dh_distance_fn(|t| f.eval(t), h, grid_size)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundItem {
    pub item: usize,
    pub holds: bool,
    /// Smallest (bound slack) over the grid; negative means violated.
    pub worst_margin: f64,
    pub worst_t: f64,
    pub points_checked: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub n: usize,
    pub bandwidth: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub lambda: f64,
    pub grid_size: usize,
    pub items: Vec<BoundItem>,
}

impl BoundReport {
    pub fn all_hold(&self) -> bool {
        self.items.iter().all(|i| i.holds)
    }

    pub fn item(&self, k: usize) -> &BoundItem {
        &self.items[k - 1]
    }
}

const BOUND_SLACK: f64 = 1e-9;
pub const DEFAULT_BOUND_GRID: usize = 200;

fn check_bound_params(tau1: f64, tau2: f64, lambda: f64) -> Result<()> {
    if !(tau1 > 1.0 && tau2 > 1.0) {
        return Err(Error::param(format!("tau1 and tau2 must exceed 1, got {tau1}, {tau2}")));
    }
    if !(lambda > 0.0 && lambda < 0.5) {
        return Err(Error::param(format!("lambda must be in (0, 1/2), got {lambda}")));
    }
    Ok(())
}

/// Evaluates the six nearly-linear envelope inequalities for F_{n,b} and
/// its inverse on the interior grid t = k/(G+1).
pub fn nearly_linear_bounds_on(
    f: &KernelCdf,
    tau1: f64,
    tau2: f64,
    lambda: f64,
    grid_size: usize,
    inversion_tol: f64,
) -> Result<BoundReport> {
    check_bound_params(tau1, tau2, lambda)?;
    if grid_size < 10 {
        return Err(Error::param("bound grid needs at least 10 points"));
    }
    let n = f.len();
    let ts = interior_grid(grid_size);
    let cs: Vec<f64> = (1..=grid_size).rev().map(|k| k as f64 / (grid_size + 1) as f64).collect();
    let fs: Vec<f64> = ts.iter().map(|&t| f.eval(t)).collect();
    let qs = f.quantiles_sorted(&ts, &cs, inversion_tol, 200)?;

    let upper_env = |t: f64| (t / lambda).powf(1.0 / tau1);
    let lower_env = |t: f64| 1.0 - ((1.0 - t) / lambda).powf(1.0 / tau2);
    let low_lin = |t: f64| lambda * t.powf(tau1);
    let high_lin = |t: f64| 1.0 - lambda * (1.0 - t).powf(tau2);

    let mut items = Vec::with_capacity(6);
    let mut record = |item: usize, margins: Vec<(f64, f64)>| {
        let (worst_t, worst_margin) = margins
            .iter()
            .copied()
            .fold((f64::NAN, f64::INFINITY), |acc, (t, m)| if m < acc.1 { (t, m) } else { acc });
        items.push(BoundItem {
            item,
            holds: worst_margin >= -BOUND_SLACK,
            worst_margin,
            worst_t,
            points_checked: margins.len(),
        });
    };
    let grid = ts.iter().copied().zip(fs.iter().copied()).zip(qs.iter().copied());

    record(1, grid.clone().map(|((t, v), _)| (t, (v - lower_env(t)).min(upper_env(t) - v))).collect());
    record(2, grid.clone().filter(|((_, v), _)| *v > 0.0).map(|((t, v), _)| (t, v - low_lin(t))).collect());
    record(3, grid.clone().filter(|((_, v), _)| *v < 1.0).map(|((t, v), _)| (t, high_lin(t) - v)).collect());
    record(4, grid.clone().map(|((t, _), q)| (t, (q - low_lin(t)).min(high_lin(t) - q))).collect());
    let nf = n as f64;
    record(5, grid.clone().filter(|((t, _), _)| *t >= 1.0 / nf).map(|((t, _), q)| (t, upper_env(t) - q)).collect());
    record(6, grid.filter(|((t, _), _)| *t <= 1.0 - 1.0 / nf).map(|((t, _), q)| (t, q - lower_env(t))).collect());

    Ok(BoundReport { n, bandwidth: f.bandwidth(), tau1, tau2, lambda, grid_size, items })
}

/// Draws n uniform(0,1) points from `seed_path` and checks the bounds with
/// bandwidth b on the default grid.
pub fn nearly_linear_bounds_check(
    n: usize,
    b: f64,
    tau1: f64,
    tau2: f64,
    lambda: f64,
    seed_path: SeedPath,
) -> Result<BoundReport> {
    check_bound_params(tau1, tau2, lambda)?;
    if n == 0 {
        return Err(Error::param("need at least one observation"));
    }
    let mut rng = seed_path.rng();
    let data: Vec<f64> = (0..n).map(|_| open_uniform(&mut rng)).collect();
    let f = KernelCdf::new(&data, b, Kernel::Gaussian)?;
    nearly_linear_bounds_on(&f, tau1, tau2, lambda, DEFAULT_BOUND_GRID, 1e-12)
}
