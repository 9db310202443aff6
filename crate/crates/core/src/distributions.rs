//! Simulation models, their samplers, quantile functions and true-SRM
//! oracles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quadrature::tanh_sinh;
use crate::riskmeasure::{LStatWeights, Spectrum};
use crate::rng::{open_uniform, SeedPath};
use crate::stats::{normal_cdf, normal_quantile_pair, normal_sf};

pub const DEFAULT_GARCH_ALPHA1: f64 = 0.061;
pub const DEFAULT_GARCH_BETA1: f64 = 0.932;
/// 1 - α1 - β1, giving unit unconditional variance.
pub const DEFAULT_GARCH_OMEGA: f64 = 0.007;
pub const DEFAULT_BURN_IN: usize = 500;
pub const DEFAULT_GARCH_ORACLE_DRAWS: usize = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelSpec {
    Gpd { shape: f64, scale: f64, location: f64 },
    StudentT { df: f64, scale: f64, location: f64 },
    Normal { location: f64, scale: f64 },
    Garch { omega: f64, alpha1: f64, beta1: f64 },
}

/// How model draws enter the risk measure: as losses directly, or as
/// returns whose negatives are the losses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawRole {
    #[default]
    Loss,
    Return,
}

impl ModelSpec {
    pub fn gpd(shape: f64) -> Result<Self> {
        ModelSpec::Gpd { shape, scale: 1.0, location: 0.0 }.validated()
    }

    pub fn student_t(df: f64) -> Result<Self> {
        ModelSpec::StudentT { df, scale: 1.0, location: 0.0 }.validated()
    }

    pub fn standard_normal() -> Self {
        ModelSpec::Normal { location: 0.0, scale: 1.0 }
    }

    pub fn garch(alpha1: f64, beta1: f64, omega: f64) -> Result<Self> {
        ModelSpec::Garch { omega, alpha1, beta1 }.validated()
    }

    pub fn default_garch() -> Self {
        ModelSpec::Garch {
            omega: DEFAULT_GARCH_OMEGA,
            alpha1: DEFAULT_GARCH_ALPHA1,
            beta1: DEFAULT_GARCH_BETA1,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let scale_ok = |s: f64| s > 0.0 && s.is_finite();
        match self {
            ModelSpec::Gpd { shape, scale, location } => {
                if !(shape > 0.0 && shape.is_finite()) {
                    return Err(Error::param(format!("GPD shape must be positive, got {shape}")));
                }
                if !scale_ok(scale) || !location.is_finite() {
                    return Err(Error::param("GPD scale must be positive and location finite"));
                }
            }
            ModelSpec::StudentT { df, scale, location } => {
                if !(df > 2.0 && df.is_finite()) {
                    return Err(Error::param(format!("Student-t needs df > 2, got {df}")));
                }
                if !scale_ok(scale) || !location.is_finite() {
                    return Err(Error::param("Student-t scale must be positive and location finite"));
                }
            }
            ModelSpec::Normal { location, scale } => {
                if !scale_ok(scale) || !location.is_finite() {
                    return Err(Error::param("normal scale must be positive and location finite"));
                }
            }
            ModelSpec::Garch { omega, alpha1, beta1 } => {
                if !(omega >= 0.0 && alpha1 >= 0.0 && beta1 >= 0.0)
                    || !(omega + alpha1 + beta1).is_finite()
                {
                    return Err(Error::param("GARCH coefficients must be nonnegative"));
                }
                if alpha1 + beta1 >= 1.0 {
                    return Err(Error::NonStationary(alpha1 + beta1));
                }
            }
        }
        Ok(self)
    }

    pub fn is_garch(&self) -> bool {
        matches!(self, ModelSpec::Garch { .. })
    }

    /// Short name used for table columns.
    pub fn short_name(&self) -> String {
        match self {
            ModelSpec::Gpd { shape, .. } => format!("GPD(xi={})", fmt_shape(*shape)),
            ModelSpec::StudentT { df, .. } => format!("t({df})"),
            ModelSpec::Normal { location, scale } => format!("N({location},{scale})"),
            ModelSpec::Garch { .. } => "GARCH(1,1)".to_string(),
        }
    }

    /// Lower quantile F⁻¹(u), 0 < u < 1.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain { value: u, domain: "(0, 1)" });
        }
        self.quantile_pair(u, 1.0 - u)
    }

    /// F⁻¹(u) given u and c = 1 - u computed without cancellation.
    pub fn quantile_pair(&self, u: f64, c: f64) -> Result<f64> {
        match *self {
            ModelSpec::Gpd { shape, scale, location } => {
                Ok(location + scale * (-shape * c.ln()).exp_m1() / shape)
            }
            ModelSpec::StudentT { df, scale, location } => {
                Ok(location + scale * student_t_quantile(df, u, c))
            }
            ModelSpec::Normal { location, scale } => {
                Ok(location + scale * normal_quantile_pair(u, c))
            }
            ModelSpec::Garch { .. } => Err(Error::UnsupportedQuantile("GARCH(1,1)")),
        }
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        match *self {
            ModelSpec::Gpd { shape, scale, location } => {
                let z = (x - location) / scale;
                if z <= 0.0 {
                    Ok(0.0)
                } else {
                    Ok(-((-1.0 / shape) * (shape * z).ln_1p()).exp_m1())
                }
            }
            ModelSpec::StudentT { df, scale, location } => {
                Ok(student_t_cdf(df, (x - location) / scale))
            }
            ModelSpec::Normal { location, scale } => Ok(normal_cdf((x - location) / scale)),
            ModelSpec::Garch { .. } => Err(Error::UnsupportedQuantile("GARCH(1,1)")),
        }
    }

    /// Plain-text `key=value` form, one pair per line.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.config_pairs() {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    fn config_pairs(&self) -> Vec<(&'static str, String)> {
        match *self {
            ModelSpec::Gpd { shape, scale, location } => vec![
                ("kind", "gpd".into()),
                ("shape", shape.to_string()),
                ("scale", scale.to_string()),
                ("location", location.to_string()),
            ],
            ModelSpec::StudentT { df, scale, location } => vec![
                ("kind", "t".into()),
                ("df", df.to_string()),
                ("scale", scale.to_string()),
                ("location", location.to_string()),
            ],
            ModelSpec::Normal { location, scale } => vec![
                ("kind", "normal".into()),
                ("location", location.to_string()),
                ("scale", scale.to_string()),
            ],
            ModelSpec::Garch { omega, alpha1, beta1 } => vec![
                ("kind", "garch".into()),
                ("alpha1", alpha1.to_string()),
                ("beta1", beta1.to_string()),
                ("omega", omega.to_string()),
            ],
        }
    }

    /// Reads the `key=value` form written by [`ModelSpec::to_config`].
    /// Missing keys take the defaults of the compact syntax.
    pub fn from_config(text: &str) -> Result<Self> {
        let pairs = parse_kv(text)?;
        ModelSpec::from_pairs(&pairs)
    }

    pub fn from_pairs(pairs: &BTreeMap<String, String>) -> Result<Self> {
        let get = |key: &str, default: f64| -> Result<f64> {
            match pairs.get(key) {
                None => Ok(default),
                Some(v) => v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("model key {key}: '{v}' is not a number"))),
            }
        };
        let kind = pairs
            .get("kind")
            .ok_or_else(|| Error::Parse("model config needs a kind= line".into()))?;
        match kind.trim() {
            "gpd" => ModelSpec::Gpd {
                shape: get("shape", 1.0 / 3.0)?,
                scale: get("scale", 1.0)?,
                location: get("location", 0.0)?,
            },
            "t" | "student_t" => ModelSpec::StudentT {
                df: get("df", 4.0)?,
                scale: get("scale", 1.0)?,
                location: get("location", 0.0)?,
            },
            "normal" => ModelSpec::Normal {
                location: get("location", 0.0)?,
                scale: get("scale", 1.0)?,
            },
            "garch" => ModelSpec::Garch {
                omega: get("omega", DEFAULT_GARCH_OMEGA)?,
                alpha1: get("alpha1", DEFAULT_GARCH_ALPHA1)?,
                beta1: get("beta1", DEFAULT_GARCH_BETA1)?,
            },
            other => return Err(Error::Parse(format!("unknown model kind '{other}'"))),
        }
        .validated()
    }
}

fn fmt_shape(x: f64) -> String {
    if (x - 1.0 / 3.0).abs() < 1e-12 {
        "1/3".into()
    } else {
        x.to_string()
    }
}

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub fn parse_kv(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", i + 1)))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Gpd { shape, scale, location } => write!(f, "gpd:{shape},{scale},{location}"),
            ModelSpec::StudentT { df, scale, location } => write!(f, "t:{df},{scale},{location}"),
            ModelSpec::Normal { location, scale } => write!(f, "normal:{location},{scale}"),
            ModelSpec::Garch { omega, alpha1, beta1 } => write!(f, "garch:{alpha1},{beta1},{omega}"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    /// Compact forms: `normal[:loc,scale]`, `t[:df[,scale,loc]]`,
    /// `gpd[:shape[,scale,loc]]`, `garch[:alpha1,beta1[,omega]]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let args: Vec<f64> = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|a| {
                    a.trim()
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("model argument '{a}' is not a number")))
                })
                .collect::<Result<_>>()?
        };
        let arg = |i: usize, default: f64| args.get(i).copied().unwrap_or(default);
        let max_args = |m: usize| -> Result<()> {
            if args.len() > m {
                Err(Error::Parse(format!("model '{s}' takes at most {m} arguments")))
            } else {
                Ok(())
            }
        };
        match kind.trim().to_ascii_lowercase().as_str() {
            "normal" | "n" => {
                max_args(2)?;
                ModelSpec::Normal { location: arg(0, 0.0), scale: arg(1, 1.0) }
            }
            "t" | "student" | "student_t" => {
                max_args(3)?;
                ModelSpec::StudentT { df: arg(0, 4.0), scale: arg(1, 1.0), location: arg(2, 0.0) }
            }
            "gpd" => {
                max_args(3)?;
                ModelSpec::Gpd { shape: arg(0, 1.0 / 3.0), scale: arg(1, 1.0), location: arg(2, 0.0) }
            }
            "garch" => {
                max_args(3)?;
                ModelSpec::Garch {
                    alpha1: arg(0, DEFAULT_GARCH_ALPHA1),
                    beta1: arg(1, DEFAULT_GARCH_BETA1),
                    omega: arg(2, DEFAULT_GARCH_OMEGA),
                }
            }
            other => return Err(Error::Parse(format!("unknown model '{other}'"))),
        }
        .validated()
    }
}

/// One replicate of draws together with the stream that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub values: Vec<f64>,
    pub seed_path: SeedPath,
    pub model: ModelSpec,
}

/// Draws `n` values by inverse CDF (models i–iii) or by the GARCH recursion
/// with the default burn-in.
pub fn sample(model: &ModelSpec, n: usize, seed_path: SeedPath) -> Result<SampleBatch> {
    model.validated()?;
    if n == 0 {
        return Err(Error::param("sample size must be at least 1"));
    }
    if model.is_garch() {
        return simulate_garch(model, n, DEFAULT_BURN_IN, seed_path);
    }
    let mut rng = seed_path.rng();
    let values = (0..n)
        .map(|_| {
            let u = open_uniform(&mut rng);
            model.quantile_pair(u, 1.0 - u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch { values, seed_path, model: *model })
}

/// X_i = σ_i Z_i with σ²_i = ω + α1 X²_{i-1} + β1 σ²_{i-1}; returns the last
/// `n` of `burn_in + n` steps. σ²_0 is the unconditional variance, or 1 when
/// ω = 0 (the variance then decays to zero).
pub fn simulate_garch(
    model: &ModelSpec,
    n: usize,
    burn_in: usize,
    seed_path: SeedPath,
) -> Result<SampleBatch> {
    let ModelSpec::Garch { omega, alpha1, beta1 } = model.validated()? else {
        return Err(Error::param("simulate_garch needs a GARCH model"));
    };
    if n == 0 {
        return Err(Error::param("sample size must be at least 1"));
    }
    let mut var = if omega > 0.0 {
        omega / (1.0 - alpha1 - beta1)
    } else {
        log::warn!("GARCH with omega = 0 has no constant term; the variance decays to zero");
        1.0
    };
    let mut rng = seed_path.rng();
    let mut values = Vec::with_capacity(n);
    for step in 0..burn_in + n {
        let u = open_uniform(&mut rng);
        let x = var.sqrt() * normal_quantile_pair(u, 1.0 - u);
        if step >= burn_in {
            values.push(x);
        }
        var = omega + alpha1 * x * x + beta1 * var;
    }
    Ok(SampleBatch { values, seed_path, model: *model })
}

/// Student-t CDF at x for `df` degrees of freedom.
pub fn student_t_cdf(df: f64, x: f64) -> f64 {
    let tail = student_t_upper_tail(df, x.abs());
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// P(T > x) for x ≥ 0, accurate in relative terms in both regimes.
fn student_t_upper_tail(df: f64, x: f64) -> f64 {
    let x2 = x * x;
    if x2 < df {
        0.5 - 0.5 * beta_reg(0.5, 0.5 * df, x2 / (df + x2))
    } else {
        0.5 * beta_reg(0.5 * df, 0.5, df / (df + x2))
    }
}

fn student_t_ln_pdf(df: f64, x: f64) -> f64 {
    ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - 0.5 * (df + 1.0) * (x * x / df).ln_1p()
}

/// Student-t quantile from u and c = 1 - u: Newton on the log upper tail,
/// bracketed, starting from a Cornish–Fisher or power-tail guess.
pub fn student_t_quantile(df: f64, u: f64, c: f64) -> f64 {
    if u == 0.5 {
        return 0.0;
    }
    let (p, sign) = if u < 0.5 { (u, -1.0) } else { (c, 1.0) };
    if p <= 0.0 {
        return sign * f64::INFINITY;
    }
    let ln_p = p.ln();
    let z = normal_quantile_pair(p, 1.0 - p).abs();
    let cf = z + (z.powi(3) + z) / (4.0 * df) + (5.0 * z.powi(5) + 16.0 * z.powi(3) + 3.0 * z) / (96.0 * df * df);
    // P(T > x) ~ K x^{-ν} with K = ν^{ν/2 - 1} Γ((ν+1)/2) / (√π Γ(ν/2))
    let ln_k = (0.5 * df - 1.0) * df.ln() + ln_gamma(0.5 * (df + 1.0))
        - 0.5 * std::f64::consts::PI.ln()
        - ln_gamma(0.5 * df);
    let power = ((ln_k - ln_p) / df).exp();
    let mut x = if p < 1e-3 { power.max(cf) } else { cf };

    let (mut lo, mut hi) = (0.0_f64, f64::INFINITY);
    for _ in 0..200 {
        let tail = student_t_upper_tail(df, x);
        let f = tail.ln() - ln_p;
        if f > 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if f == 0.0 {
            break;
        }
        // d/dx ln S = -pdf / S
        let slope = -(student_t_ln_pdf(df, x) - tail.ln()).exp();
        let mut next = x - f / slope;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                if lo > 0.0 && hi / lo > 4.0 {
                    (lo * hi).sqrt()
                } else {
                    0.5 * (lo + hi)
                }
            } else {
                2.0 * x.max(1.0)
            };
        }
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs() {
            x = next;
            break;
        }
        x = next;
    }
    sign * x
}

/// Result of a true-SRM oracle evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValue {
    pub value: f64,
    /// True for the large-sample GARCH oracle, which carries Monte-Carlo
    /// error of order sd/√draws.
    pub approximate: bool,
    pub method: String,
    pub seed_path: Option<SeedPath>,
    pub draws: Option<usize>,
    pub refinement_change: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    pub tol: f64,
    pub role: DrawRole,
    pub garch_draws: usize,
    pub garch_burn_in: usize,
    pub garch_seed: SeedPath,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions {
            tol: 1e-10,
            role: DrawRole::Loss,
            garch_draws: DEFAULT_GARCH_ORACLE_DRAWS,
            garch_burn_in: DEFAULT_BURN_IN,
            garch_seed: SeedPath::new(0x6a72_6368, 0),
        }
    }
}

/// ∫₀¹ q(u) φ(u) du for the loss quantile q, by tanh–sinh refined until
/// successive levels differ by less than `tol`. Model draws are losses.
pub fn true_srm(model: &ModelSpec, spectrum: &dyn Spectrum, tol: f64) -> Result<f64> {
    true_srm_with(model, spectrum, &OracleOptions { tol, ..OracleOptions::default() })
        .map(|o| o.value)
}

pub fn true_srm_with(
    model: &ModelSpec,
    spectrum: &dyn Spectrum,
    opts: &OracleOptions,
) -> Result<OracleValue> {
    if !(opts.tol > 0.0) {
        return Err(Error::param(format!("oracle tolerance must be positive, got {}", opts.tol)));
    }
    model.validated()?;
    if model.is_garch() {
        return garch_oracle(model, spectrum, opts);
    }
    let mut cuts = vec![0.0];
    cuts.extend(spectrum.breakpoints().into_iter().filter(|&b| b > 0.0 && b < 1.0));
    cuts.push(1.0);
    let mut value = 0.0;
    let mut change = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut failure = None;
        let r = tanh_sinh(a, b, opts.tol, 14, |x, to_b| {
            let c = (1.0 - b) + to_b;
            let weight = spectrum.phi_pair(x, c);
            if weight == 0.0 {
                return 0.0;
            }
            let q = match opts.role {
                DrawRole::Loss => model.quantile_pair(x, c),
                DrawRole::Return => model.quantile_pair(c, x).map(|q| -q),
            };
            match q {
                Ok(q) => q * weight,
                Err(e) => {
                    failure = Some(e);
                    0.0
                }
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        let r = r?;
        value += r.value;
        change += r.last_change;
    }
    Ok(OracleValue {
        value,
        approximate: false,
        method: "tanh-sinh quadrature of the quantile integral".into(),
        seed_path: None,
        draws: None,
        refinement_change: Some(change),
    })
}

/// L-statistic on one long burnt-in path. The marginal law of the GARCH
/// process has no closed-form quantile.
fn garch_oracle(model: &ModelSpec, spectrum: &dyn Spectrum, opts: &OracleOptions) -> Result<OracleValue> {
    if opts.garch_draws < 1000 {
        return Err(Error::param("GARCH oracle needs at least 1000 draws"));
    }
    let batch = simulate_garch(model, opts.garch_draws, opts.garch_burn_in, opts.garch_seed)?;
    let mut losses = batch.values;
    if opts.role == DrawRole::Return {
        losses.iter_mut().for_each(|x| *x = -*x);
    }
    losses.sort_by(f64::total_cmp);
    let weights = LStatWeights::new(spectrum, losses.len())?;
    Ok(OracleValue {
        value: weights.apply(&losses),
        approximate: true,
        method: format!("empirical L-statistic on {} simulated draws", opts.garch_draws),
        seed_path: Some(opts.garch_seed),
        draws: Some(opts.garch_draws),
        refinement_change: None,
    })
}

/// Survival function of a model, used by goodness-of-fit checks.
pub fn survival(model: &ModelSpec, x: f64) -> Result<f64> {
    match *model {
        ModelSpec::Normal { location, scale } => Ok(normal_sf((x - location) / scale)),
        ModelSpec::StudentT { df, scale, location } => Ok(student_t_cdf(df, -(x - location) / scale)),
        _ => model.cdf(x).map(|f| 1.0 - f),
    }
}
