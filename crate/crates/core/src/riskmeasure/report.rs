use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::riskmeasure::spectrum::RiskSpectrum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Empirical,
    Kernel,
}

/// Sign of reported numbers: `Loss` gives positive risk for losses,
/// `Return` negates (the presentation used for return-quoted tables).
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignConvention {
    #[default]
    Loss,
    Return,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    Raw,
    /// Raw log returns × 100.
    DailyPercent,
}

impl Units {
    pub fn label(self) -> &'static str {
        match self {
            Units::Raw => "raw",
            Units::DailyPercent => "daily %",
        }
    }
}

fn factor(sign: SignConvention, units: Units) -> f64 {
    let s = match sign {
        SignConvention::Loss => 1.0,
        SignConvention::Return => -1.0,
    };
    match units {
        Units::Raw => s,
        Units::DailyPercent => 100.0 * s,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntervalMethod {
    Clt,
    Percentile,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub method: IntervalMethod,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical JSON of `config`.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub config: serde_json::Value,
}

impl Provenance {
    pub fn new(config: &impl Serialize, seeds: Vec<u64>) -> Self {
        let config = serde_json::to_value(config).unwrap_or(serde_json::Value::Null);
        Provenance {
            tool: "srm".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config_hash(&config),
            seeds,
            config,
        }
    }
}

pub fn config_hash(config: &serde_json::Value) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    hex::encode(Sha256::digest(text.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: EstimatorKind,
    pub point: f64,
    pub sd: Option<f64>,
    pub ci: Option<Interval>,
    pub n: usize,
    pub bandwidth: Option<f64>,
    pub spectrum: RiskSpectrum,
    pub sign: SignConvention,
    pub units: Units,
    pub warnings: Vec<String>,
    pub provenance: Option<Provenance>,
}

impl EstimateReport {
    /// A loss-side, raw-unit report.
    pub fn new(estimator: EstimatorKind, point: f64, n: usize, spectrum: RiskSpectrum) -> Self {
        EstimateReport {
            estimator,
            point: point + 0.0,
            sd: None,
            ci: None,
            n,
            bandwidth: None,
            spectrum,
            sign: SignConvention::Loss,
            units: Units::Raw,
            warnings: Vec::new(),
            provenance: None,
        }
    }

    /// Re-expresses point, sd and interval in another sign convention and
    /// unit. Bandwidth stays in raw data units.
    pub fn presented(mut self, sign: SignConvention, units: Units) -> Self {
        let k = factor(sign, units) / factor(self.sign, self.units);
        // + 0.0 turns a negative zero positive
        self.point = self.point * k + 0.0;
        self.sd = self.sd.map(|s| s * k.abs());
        self.ci = self.ci.map(|ci| {
            let (a, b) = (ci.lo * k, ci.hi * k);
            Interval { lo: a.min(b), hi: a.max(b), ..ci }
        });
        self.sign = sign;
        self.units = units;
        self
    }

    /// Point estimate as a loss-side raw number.
    pub fn loss_point(&self) -> f64 {
        self.point / factor(self.sign, self.units)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presentation_round_trip() {
        let mut r = EstimateReport::new(EstimatorKind::Kernel, 0.02, 100, RiskSpectrum::Exponential { beta: 5.0 });
        r.sd = Some(0.001);
        r.ci = Some(Interval { lo: 0.018, hi: 0.023, level: 0.9, method: IntervalMethod::Percentile });
        let shown = r.clone().presented(SignConvention::Return, Units::DailyPercent);
        assert!((shown.point + 2.0).abs() < 1e-12);
        let ci = shown.ci.unwrap();
        assert!((ci.lo + 2.3).abs() < 1e-12 && (ci.hi + 1.8).abs() < 1e-12);
        assert!((shown.sd.unwrap() - 0.1).abs() < 1e-12);
        assert!((shown.loss_point() - 0.02).abs() < 1e-15);
        let back = shown.presented(SignConvention::Loss, Units::Raw);
        assert!((back.point - 0.02).abs() < 1e-15);
    }

    #[test]
    fn config_hash_is_stable() {
        let a = Provenance::new(&serde_json::json!({"n": 30, "beta": [1, 5]}), vec![1]);
        let b = Provenance::new(&serde_json::json!({"n": 30, "beta": [1, 5]}), vec![1]);
        assert_eq!(a.config_hash, b.config_hash);
        assert_eq!(a.config_hash.len(), 64);
        let c = Provenance::new(&serde_json::json!({"n": 31, "beta": [1, 5]}), vec![1]);
        assert_ne!(a.config_hash, c.config_hash);
    }
}
