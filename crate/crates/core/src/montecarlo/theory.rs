use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, true_srm_with, DrawRole, ModelSpec, OracleOptions};
use crate::error::{Error, Result};
use crate::kernel::{
    dh_distance, nearly_linear_bounds_check, BandwidthRule, Kernel, KernelCdf, KernelEstimatorConfig,
    WeightFunctionH,
};
use crate::riskmeasure::{asymptotic_variance, kernel_srm_losses, AsymptoticSpec, RiskSpectrum, DEFAULT_VARIANCE_GRID};
use crate::rng::{derive_seed, open_uniform, SeedPath};
use crate::stats::{ks_statistic, mean, median, normal_cdf, sample_variance, sorted_copy};

/// Per-n medians of some error measure over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub label: String,
    pub ns: Vec<usize>,
    pub medians: Vec<f64>,
    pub seeds: usize,
    /// Whether the medians strictly decrease; absent for a single n.
    pub strictly_decreasing: Option<bool>,
}

impl DecayReport {
    fn new(label: String, ns: &[usize], medians: Vec<f64>, seeds: usize) -> Self {
        let strictly_decreasing = (ns.len() > 1).then(|| medians.windows(2).all(|w| w[1] < w[0]));
        DecayReport { label, ns: ns.to_vec(), medians, seeds, strictly_decreasing }
    }
}

fn check_grid(n_grid: &[usize], seeds: usize) -> Result<()> {
    if n_grid.is_empty() || seeds == 0 {
        return Err(Error::param("need a nonempty n grid and at least one seed"));
    }
    if let Some(&n) = n_grid.iter().find(|&&n| n < 2) {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    Ok(())
}

/// Median |ρ̂ᵇ - ρ| over `seeds` samples for each n.
pub fn consistency_sweep(
    model: &ModelSpec,
    spectrum: &RiskSpectrum,
    n_grid: &[usize],
    seeds: usize,
    master_seed: u64,
    config: &KernelEstimatorConfig,
) -> Result<DecayReport> {
    check_grid(n_grid, seeds)?;
    let truth = true_srm_with(model, spectrum, &OracleOptions::default())?.value;
    let mut medians = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let master = derive_seed(master_seed, n as u64);
        let errs: Vec<f64> = (0..seeds as u64)
            .into_par_iter()
            .map(|j| {
                let x = sorted_copy(&sample(model, n, SeedPath::new(master, j))?.values);
                Ok((kernel_srm_losses(&x, spectrum, config)?.value - truth).abs())
            })
            .collect::<Result<_>>()?;
        medians.push(median(&errs));
    }
    Ok(DecayReport::new(format!("{model} {spectrum}"), n_grid, medians, seeds))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CltReport {
    pub n: usize,
    pub replicates: usize,
    pub truth: f64,
    pub sigma2: f64,
    /// KS distance of √n(ρ̂ᵇ - ρ)/σ to N(0, 1).
    pub ks: f64,
    /// Sample variance of √n ρ̂ᵇ over σ².
    pub variance_ratio: f64,
    /// Mean of the standardized values.
    pub mean_standardized: f64,
    pub mean_bandwidth: f64,
}

pub fn clt_check(
    model: &ModelSpec,
    spectrum: &RiskSpectrum,
    n: usize,
    replicates: usize,
    master_seed: u64,
    config: &KernelEstimatorConfig,
) -> Result<CltReport> {
    if replicates < 2 {
        return Err(Error::param(format!("need at least 2 replicates, got {replicates}")));
    }
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let spec = AsymptoticSpec::for_model(model, spectrum, DrawRole::Loss)?;
    let sigma2 = asymptotic_variance(&spec, DEFAULT_VARIANCE_GRID)?.value;
    if !(sigma2 > 0.0) {
        return Err(Error::OracleFailure("asymptotic variance is zero".into()));
    }
    let truth = true_srm_with(model, spectrum, &OracleOptions::default())?.value;
    let fits: Vec<(f64, f64)> = (0..replicates as u64)
        .into_par_iter()
        .map(|j| {
            let x = sorted_copy(&sample(model, n, SeedPath::new(master_seed, j))?.values);
            let v = kernel_srm_losses(&x, spectrum, config)?;
            Ok((v.value, v.bandwidth))
        })
        .collect::<Result<_>>()?;
    let root_n = (n as f64).sqrt();
    let sigma = sigma2.sqrt();
    let z = sorted_copy(&fits.iter().map(|f| root_n * (f.0 - truth) / sigma).collect::<Vec<_>>());
    let scaled: Vec<f64> = fits.iter().map(|f| root_n * f.0).collect();
    let bws: Vec<f64> = fits.iter().map(|f| f.1).collect();
    Ok(CltReport {
        n,
        replicates,
        truth,
        sigma2,
        ks: ks_statistic(&z, normal_cdf),
        variance_ratio: sample_variance(&scaled) / sigma2,
        mean_standardized: mean(&z),
        mean_bandwidth: mean(&bws),
    })
}

pub const DH_GRID: usize = 999;

/// Median d_h(F_{n,b}, U(0,1)) over seeds for uniform samples, Gaussian
/// kernel, bandwidth from `rule`.
pub fn theory_check_theorem1(
    h: &WeightFunctionH,
    n_grid: &[usize],
    seeds: usize,
    master_seed: u64,
    rule: &BandwidthRule,
) -> Result<DecayReport> {
    check_grid(n_grid, seeds)?;
    h.validated()?;
    let mut medians = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let master = derive_seed(master_seed, n as u64);
        let d: Vec<f64> = (0..seeds as u64)
            .into_par_iter()
            .map(|j| {
                let mut rng = SeedPath::new(master, j).rng();
                let data: Vec<f64> = (0..n).map(|_| open_uniform(&mut rng)).collect();
                let f = KernelCdf::with_rule(&data, rule, Kernel::Gaussian)?;
                dh_distance(&f, h, DH_GRID)
            })
            .collect::<Result<_>>()?;
        medians.push(median(&d));
    }
    Ok(DecayReport::new(format!("d_h {h:?}"), n_grid, medians, seeds))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundsSummary {
    pub n: usize,
    pub bandwidth: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub lambda: f64,
    pub seeds: usize,
    /// Seeds on which all six bounds held.
    pub all_hold: usize,
    /// Violations per bound item 1..6.
    pub failures: [usize; 6],
}

/// Counts the seeds on which all six nearly-linear bounds hold.
pub fn theory_check_theorem2(
    n: usize,
    bandwidth: f64,
    tau1: f64,
    tau2: f64,
    lambda: f64,
    seeds: usize,
    master_seed: u64,
) -> Result<BoundsSummary> {
    if seeds == 0 {
        return Err(Error::param("need at least one seed"));
    }
    let reports = (0..seeds as u64)
        .into_par_iter()
        .map(|j| nearly_linear_bounds_check(n, bandwidth, tau1, tau2, lambda, SeedPath::new(master_seed, j)))
        .collect::<Result<Vec<_>>>()?;
    let mut failures = [0; 6];
    for r in &reports {
        for item in &r.items {
            if !item.holds {
                failures[item.item - 1] += 1;
            }
        }
    }
    Ok(BoundsSummary {
        n,
        bandwidth,
        tau1,
        tau2,
        lambda,
        seeds,
        all_hold: reports.iter().filter(|r| r.all_hold()).count(),
        failures,
    })
}

/// Largest λ among `candidates` for which the bounds hold on every scan
/// seed; the scan uses streams disjoint from the evaluation run.
pub fn prescan_lambda(
    n: usize,
    bandwidth: f64,
    tau1: f64,
    tau2: f64,
    candidates: &[f64],
    scan_seeds: usize,
    master_seed: u64,
) -> Result<Option<f64>> {
    let scan_master = derive_seed(master_seed, 0x5ca9);
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    for lambda in sorted {
        let s = theory_check_theorem2(n, bandwidth, tau1, tau2, lambda, scan_seeds, scan_master)?;
        if s.all_hold == scan_seeds {
            return Ok(Some(lambda));
        }
    }
    Ok(None)
}
