use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelEstimatorConfig;
use crate::riskmeasure::estimate::{kernel_srm_or_atom, wide_bandwidth_warning, ATOM_WARNING};
use crate::riskmeasure::{
    EstimateReport, EstimatorKind, Interval, IntervalMethod, Provenance, RiskSpectrum,
};
use crate::rng::{derive_seed, label_seed, SeedPath};
use crate::stats::{sample_sd, sorted_copy};

pub const DEFAULT_BOOTSTRAP_REPLICATES: usize = 10_000;
pub const DEFAULT_CI_LEVEL: f64 = 0.90;
const BOOTSTRAP_STREAM: u64 = 0xb007;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum ResampleScheme {
    #[default]
    Iid,
    /// Circular moving blocks of the given length.
    Block { length: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub scheme: ResampleScheme,
    pub ci_level: f64,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool. Results do not depend
    /// on it, so it is left out of serialized configs.
    #[serde(skip)]
    pub workers: Option<usize>,
    pub kernel: KernelEstimatorConfig,
}

impl BootstrapConfig {
    pub fn new(master_seed: u64) -> Self {
        BootstrapConfig {
            replicates: DEFAULT_BOOTSTRAP_REPLICATES,
            scheme: ResampleScheme::Iid,
            ci_level: DEFAULT_CI_LEVEL,
            master_seed,
            workers: None,
            kernel: KernelEstimatorConfig::fast(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates < 100 {
            return Err(Error::param(format!("bootstrap needs at least 100 replicates, got {}", self.replicates)));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::param(format!("ci level must be in (0, 1), got {}", self.ci_level)));
        }
        if let ResampleScheme::Block { length } = self.scheme {
            if length == 0 {
                return Err(Error::param("block length must be positive"));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::param("worker count must be positive"));
        }
        self.kernel.validate()
    }
}

fn estimate_or_atom(sorted: &[f64], spectrum: &RiskSpectrum, cfg: &KernelEstimatorConfig) -> Result<(f64, bool)> {
    Ok(match kernel_srm_or_atom(sorted, spectrum, cfg)? {
        Some(v) => (v.value, false),
        None => (sorted[0], true),
    })
}

fn resample(data: &[f64], scheme: ResampleScheme, path: SeedPath) -> Vec<f64> {
    let n = data.len();
    let mut rng = path.rng();
    match scheme {
        ResampleScheme::Iid => (0..n).map(|_| data[rng.gen_range(0..n)]).collect(),
        ResampleScheme::Block { length } => {
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let start = rng.gen_range(0..n);
                out.extend((0..length.min(n - out.len())).map(|k| data[(start + k) % n]));
            }
            out
        }
    }
}

/// Loss-side kernel estimates on each resample of the returns, in
/// replicate order, plus whether any resample was all-equal.
pub fn bootstrap_replicates(
    returns: &[f64],
    spectrum: &RiskSpectrum,
    cfg: &BootstrapConfig,
) -> Result<(Vec<f64>, bool)> {
    cfg.validate()?;
    if returns.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: returns.len() });
    }
    if returns.iter().any(|x| !x.is_finite()) {
        return Err(Error::param("returns must be finite"));
    }
    let losses: Vec<f64> = returns.iter().map(|r| -r).collect();
    let master = derive_seed(cfg.master_seed, BOOTSTRAP_STREAM);
    let run = || {
        (0..cfg.replicates as u64)
            .into_par_iter()
            .map(|j| {
                let x = sorted_copy(&resample(&losses, cfg.scheme, SeedPath::new(master, j)));
                estimate_or_atom(&x, spectrum, &cfg.kernel)
            })
            .collect::<Result<Vec<_>>>()
    };
    let pairs = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::param(format!("cannot start {w} workers: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let degenerate = pairs.iter().any(|p| p.1);
    Ok((pairs.into_iter().map(|p| p.0).collect(), degenerate))
}

/// Nearest-rank percentile of sorted values: the ⌈pR⌉-th smallest.
pub fn percentile_nearest_rank(sorted: &[f64], p: f64) -> f64 {
    let r = sorted.len();
    let k = (p * r as f64).ceil() as usize;
    sorted[k.clamp(1, r) - 1]
}

/// Kernel point estimate with bootstrap SD and percentile interval, all on
/// the loss side in raw units.
pub fn bootstrap_distribution(
    returns: &[f64],
    spectrum: &RiskSpectrum,
    cfg: &BootstrapConfig,
) -> Result<EstimateReport> {
    let (reps, degenerate) = bootstrap_replicates(returns, spectrum, cfg)?;
    let losses = sorted_copy(&returns.iter().map(|r| -r).collect::<Vec<_>>());
    let (point, point_atom) = estimate_or_atom(&losses, spectrum, &cfg.kernel)?;
    let sorted = sorted_copy(&reps);
    let alpha = 1.0 - cfg.ci_level;
    let ci = Interval {
        lo: percentile_nearest_rank(&sorted, 0.5 * alpha),
        hi: percentile_nearest_rank(&sorted, 1.0 - 0.5 * alpha),
        level: cfg.ci_level,
        method: IntervalMethod::Percentile,
    };

    let mut report = EstimateReport::new(EstimatorKind::Kernel, point, losses.len(), *spectrum);
    report.sd = Some(sample_sd(&reps));
    report.ci = Some(ci);
    report.bandwidth = if point_atom { None } else { cfg.kernel.bandwidth.resolve(&losses).ok() };
    report.warnings.extend(report.bandwidth.and_then(|b| wide_bandwidth_warning(&losses, b)));
    if losses.len() < 30 {
        report.warnings.push(format!("bootstrap on only {} observations; 30 or more recommended", losses.len()));
    }
    if point_atom || degenerate {
        report.warnings.push(ATOM_WARNING.into());
    }
    report.provenance = Some(Provenance::new(
        &serde_json::json!({ "bootstrap": cfg, "spectrum": spectrum }),
        vec![cfg.master_seed],
    ));
    Ok(report)
}

/// Point, SD and interval for each instrument and β.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table2 {
    pub betas: Vec<f64>,
    pub instruments: Vec<String>,
    /// rows[i][k] is instrument i at β k.
    pub rows: Vec<Vec<EstimateReport>>,
}

/// Bootstrap every (instrument, β) cell; each cell draws from streams
/// selected by its instrument name and β.
pub fn table2(
    instruments: &[(String, Vec<f64>)],
    betas: &[f64],
    cfg: &BootstrapConfig,
    mut progress: impl FnMut(&str, f64),
) -> Result<Table2> {
    if instruments.is_empty() {
        return Err(Error::param("table needs at least one instrument"));
    }
    let mut rows = Vec::with_capacity(instruments.len());
    for (name, returns) in instruments {
        let mut row = Vec::with_capacity(betas.len());
        for &beta in betas {
            let s = RiskSpectrum::exponential(beta)?;
            let cell = BootstrapConfig { master_seed: label_seed(cfg.master_seed, &format!("{name}|{beta}")), ..*cfg };
            row.push(bootstrap_distribution(returns, &s, &cell)?);
            progress(name, beta);
        }
        rows.push(row);
    }
    Ok(Table2 {
        betas: betas.to_vec(),
        instruments: instruments.iter().map(|(n, _)| n.clone()).collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{sample, ModelSpec};
    use crate::stats::median;

    fn cfg(replicates: usize) -> BootstrapConfig {
        BootstrapConfig { replicates, ..BootstrapConfig::new(21) }
    }

    #[test]
    fn constant_data_is_degenerate() {
        let s = RiskSpectrum::exponential(5.0).unwrap();
        let r = bootstrap_distribution(&[0.01; 40], &s, &cfg(100)).unwrap();
        assert_eq!(r.sd, Some(0.0));
        let ci = r.ci.unwrap();
        assert!((ci.lo - r.point).abs() <= 1e-10 && (ci.hi - r.point).abs() <= 1e-10);
        assert_eq!(r.point, -0.01);
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let data = sample(&ModelSpec::standard_normal(), 60, SeedPath::new(1, 0)).unwrap().values;
        let s = RiskSpectrum::exponential(20.0).unwrap();
        let one = bootstrap_distribution(&data, &s, &BootstrapConfig { workers: Some(1), ..cfg(200) }).unwrap();
        let three = bootstrap_distribution(&data, &s, &BootstrapConfig { workers: Some(3), ..cfg(200) }).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn interval_brackets_the_median_replicate() {
        let data = sample(&ModelSpec::student_t(4.0).unwrap(), 50, SeedPath::new(2, 0)).unwrap().values;
        let s = RiskSpectrum::exponential(5.0).unwrap();
        let c = cfg(300);
        let (reps, _) = bootstrap_replicates(&data, &s, &c).unwrap();
        let r = bootstrap_distribution(&data, &s, &c).unwrap();
        let ci = r.ci.unwrap();
        let m = median(&reps);
        assert!(ci.lo <= m && m <= ci.hi);
        assert!(reps.contains(&ci.lo) && reps.contains(&ci.hi));
    }

    #[test]
    fn small_samples_warn_and_block_scheme_runs() {
        let data: Vec<f64> = (0..12).map(|i| (i as f64 * 0.37).sin()).collect();
        let s = RiskSpectrum::exponential(1.0).unwrap();
        let r = bootstrap_distribution(&data, &s, &cfg(100)).unwrap();
        assert!(r.warnings.iter().any(|w| w.contains("30")));
        let block = BootstrapConfig { scheme: ResampleScheme::Block { length: 4 }, ..cfg(100) };
        assert!(bootstrap_distribution(&data, &s, &block).unwrap().sd.unwrap() > 0.0);
        assert!(bootstrap_distribution(&data, &s, &cfg(99)).is_err());
    }

    #[test]
    fn nearest_rank_examples() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0];
        assert_eq!(percentile_nearest_rank(&v, 0.05), 1.0);
        assert_eq!(percentile_nearest_rank(&v, 0.95), 10.0);
        assert_eq!(percentile_nearest_rank(&v, 0.5), 5.0);
        assert_eq!(percentile_nearest_rank(&v, 0.0), 1.0);
    }
}
