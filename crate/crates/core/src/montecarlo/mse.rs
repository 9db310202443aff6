use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, true_srm_with, ModelSpec, OracleOptions, OracleValue};
use crate::error::{Error, Result};
use crate::kernel::KernelEstimatorConfig;
use crate::riskmeasure::{empirical_srm_losses, kernel_srm_losses, RiskSpectrum};
use crate::rng::{label_seed, SeedPath};
use crate::stats::{pairwise_sum, sorted_copy};

pub const DEFAULT_REPLICATES: usize = 1000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseExperimentConfig {
    pub model: ModelSpec,
    pub n: usize,
    pub beta: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub kernel: KernelEstimatorConfig,
    /// Known true value; computed by the model oracle when absent.
    pub truth: Option<f64>,
}

impl MseExperimentConfig {
    pub fn new(model: ModelSpec, n: usize, beta: f64, master_seed: u64) -> Self {
        MseExperimentConfig {
            model,
            n,
            beta,
            replicates: DEFAULT_REPLICATES,
            master_seed,
            kernel: KernelEstimatorConfig::fast(),
            truth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validated()?;
        if self.replicates < 2 {
            return Err(Error::param(format!("need at least 2 replicates, got {}", self.replicates)));
        }
        if self.n < 2 {
            return Err(Error::InsufficientData { needed: 2, got: self.n });
        }
        if let Some(t) = self.truth {
            if !t.is_finite() {
                return Err(Error::OracleFailure(format!("truth must be finite, got {t}")));
            }
        }
        RiskSpectrum::exponential(self.beta)?;
        self.kernel.validate()
    }

    pub fn spectrum(&self) -> Result<RiskSpectrum> {
        RiskSpectrum::exponential(self.beta)
    }

    /// Text identifying the cell; also selects its random streams inside a
    /// grid.
    pub fn cell_label(&self) -> String {
        format!("{}|{}|{}", self.model, self.n, self.beta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MseRatioReport {
    pub model: ModelSpec,
    pub n: usize,
    pub beta: f64,
    pub replicates: usize,
    pub master_seed: u64,
    pub truth: f64,
    pub truth_approximate: bool,
    pub oracle_seed: Option<SeedPath>,
    /// MSE of the empirical estimator.
    pub mse1: f64,
    /// MSE of the kernel estimator.
    pub mse2: f64,
    pub ratio: f64,
    /// Delta-method Monte-Carlo standard error of the ratio.
    pub ratio_se: f64,
    pub bias1: f64,
    pub bias2: f64,
}

/// True value for the model and exponential spectrum.
pub fn experiment_truth(model: &ModelSpec, beta: f64) -> Result<OracleValue> {
    let s = RiskSpectrum::exponential(beta)?;
    let o = true_srm_with(model, &s, &OracleOptions::default())?;
    if !o.value.is_finite() {
        return Err(Error::OracleFailure(format!("non-finite truth for {model} at beta = {beta}")));
    }
    Ok(o)
}

/// MSE2/MSE1 for the empirical (1) and kernel (2) estimators with the
/// configured kernel settings.
pub fn mse_ratio_experiment(cfg: &MseExperimentConfig) -> Result<MseRatioReport> {
    cfg.validate()?;
    let oracle = match cfg.truth {
        Some(value) => OracleValue {
            value,
            approximate: false,
            method: "supplied".into(),
            seed_path: None,
            draws: None,
            refinement_change: None,
        },
        None => experiment_truth(&cfg.model, cfg.beta)?,
    };
    run_with_oracle(cfg, &oracle)
}

fn run_with_oracle(cfg: &MseExperimentConfig, oracle: &OracleValue) -> Result<MseRatioReport> {
    let s = cfg.spectrum()?;
    let kcfg = cfg.kernel;
    let mut report = mse_ratio_with(
        cfg,
        oracle.value,
        |x| empirical_srm_losses(x, &s),
        |x| kernel_srm_losses(x, &s, &kcfg).map(|v| v.value),
    )?;
    report.truth_approximate = oracle.approximate;
    report.oracle_seed = oracle.seed_path;
    Ok(report)
}

/// The ratio experiment with caller-supplied estimators, each applied to
/// the ascending sorted draws of a replicate (draws are losses).
pub fn mse_ratio_with<E1, E2>(
    cfg: &MseExperimentConfig,
    truth: f64,
    first: E1,
    second: E2,
) -> Result<MseRatioReport>
where
    E1: Fn(&[f64]) -> Result<f64> + Sync,
    E2: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if !truth.is_finite() {
        return Err(Error::OracleFailure(format!("truth must be finite, got {truth}")));
    }
    let errors: Vec<(f64, f64)> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|j| {
            let batch = sample(&cfg.model, cfg.n, SeedPath::new(cfg.master_seed, j))?;
            let sorted = sorted_copy(&batch.values);
            Ok((first(&sorted)? - truth, second(&sorted)? - truth))
        })
        .collect::<Result<_>>()?;

    let b = errors.len() as f64;
    let sq1: Vec<f64> = errors.iter().map(|e| e.0 * e.0).collect();
    let sq2: Vec<f64> = errors.iter().map(|e| e.1 * e.1).collect();
    let mse1 = pairwise_sum(&sq1) / b;
    let mse2 = pairwise_sum(&sq2) / b;
    if !(mse1 > 0.0) {
        return Err(Error::OracleFailure("first estimator has zero MSE; the ratio is undefined".into()));
    }
    let ratio = mse2 / mse1;
    // Var(R) ≈ Var(e2² - R e1²) / (B · MSE1²)
    let lin: Vec<f64> = sq1.iter().zip(&sq2).map(|(a, c)| c - ratio * a).collect();
    let lin_mean = pairwise_sum(&lin) / b;
    let dev: Vec<f64> = lin.iter().map(|d| (d - lin_mean) * (d - lin_mean)).collect();
    let var_lin = pairwise_sum(&dev) / (b - 1.0);
    let ratio_se = (var_lin / b).sqrt() / mse1;
    let e1: Vec<f64> = errors.iter().map(|e| e.0).collect();
    let e2: Vec<f64> = errors.iter().map(|e| e.1).collect();

    Ok(MseRatioReport {
        model: cfg.model,
        n: cfg.n,
        beta: cfg.beta,
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        truth,
        truth_approximate: false,
        oracle_seed: None,
        mse1,
        mse2,
        ratio,
        ratio_se,
        bias1: pairwise_sum(&e1) / b,
        bias2: pairwise_sum(&e2) / b,
    })
}

/// Models, sample sizes and β values of a ratio table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1Spec {
    pub models: Vec<ModelSpec>,
    pub ns: Vec<usize>,
    pub betas: Vec<f64>,
    pub replicates: usize,
    pub master_seed: u64,
    pub kernel: KernelEstimatorConfig,
}

impl Table1Spec {
    /// GPD(1/3), Student-t(4), N(0,1) and GARCH(1,1) × n ∈ {30, 100, 250}
    /// × β ∈ {10, 5, 1}, B = 1000.
    pub fn full(master_seed: u64) -> Self {
        Table1Spec {
            models: vec![
                ModelSpec::gpd(1.0 / 3.0).expect("valid shape"),
                ModelSpec::student_t(4.0).expect("valid df"),
                ModelSpec::standard_normal(),
                ModelSpec::default_garch(),
            ],
            ns: vec![30, 100, 250],
            betas: vec![10.0, 5.0, 1.0],
            replicates: DEFAULT_REPLICATES,
            master_seed,
            kernel: KernelEstimatorConfig::fast(),
        }
    }

    /// Cells in table order: β, then n, then model.
    pub fn cells(&self) -> Vec<MseExperimentConfig> {
        let mut out = Vec::new();
        for &beta in &self.betas {
            for &n in &self.ns {
                for model in &self.models {
                    let mut cfg = MseExperimentConfig::new(*model, n, beta, 0);
                    cfg.replicates = self.replicates;
                    cfg.kernel = self.kernel;
                    cfg.master_seed = label_seed(self.master_seed, &cfg.cell_label());
                    out.push(cfg);
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table1 {
    pub spec: Table1Spec,
    pub cells: Vec<MseRatioReport>,
}

impl Table1 {
    pub fn cell(&self, model: &ModelSpec, n: usize, beta: f64) -> Option<&MseRatioReport> {
        self.cells.iter().find(|c| c.model == *model && c.n == n && c.beta == beta)
    }
}

/// Runs every cell of the grid, computing each (model, β) truth once.
/// `progress` sees each finished cell in order.
pub fn run_table1(spec: &Table1Spec, mut progress: impl FnMut(usize, usize, &MseRatioReport)) -> Result<Table1> {
    let cells = spec.cells();
    let mut truths: BTreeMap<String, OracleValue> = BTreeMap::new();
    let mut out = Vec::with_capacity(cells.len());
    for (i, cfg) in cells.iter().enumerate() {
        let key = format!("{}|{}", cfg.model, cfg.beta);
        if !truths.contains_key(&key) {
            log::info!("computing truth for {} at beta = {}", cfg.model, cfg.beta);
            truths.insert(key.clone(), experiment_truth(&cfg.model, cfg.beta)?);
        }
        let report = run_with_oracle(cfg, &truths[&key])?;
        log::info!(
            "cell {}/{}: {} n={} beta={} ratio={:.4} (se {:.4})",
            i + 1,
            cells.len(),
            cfg.model,
            cfg.n,
            cfg.beta,
            report.ratio,
            report.ratio_se
        );
        progress(i + 1, cells.len(), &report);
        out.push(report);
    }
    Ok(Table1 { spec: spec.clone(), cells: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelSpec) -> MseExperimentConfig {
        let mut cfg = MseExperimentConfig::new(model, 30, 5.0, 11);
        cfg.replicates = 50;
        cfg
    }

    #[test]
    fn identical_estimators_give_unit_ratio() {
        let cfg = small(ModelSpec::standard_normal());
        let s = cfg.spectrum().unwrap();
        let est = |x: &[f64]| empirical_srm_losses(x, &s);
        let r = mse_ratio_with(&cfg, 1.0, est, est).unwrap();
        assert_eq!(r.ratio, 1.0);
        assert_eq!(r.ratio_se, 0.0);
    }

    #[test]
    fn swapping_estimators_gives_the_reciprocal() {
        let mut cfg = small(ModelSpec::student_t(4.0).unwrap());
        cfg.truth = Some(1.0);
        let s = cfg.spectrum().unwrap();
        let k = cfg.kernel;
        let emp = |x: &[f64]| empirical_srm_losses(x, &s);
        let ker = |x: &[f64]| kernel_srm_losses(x, &s, &k).map(|v| v.value);
        let a = mse_ratio_with(&cfg, 1.0, emp, ker).unwrap();
        let b = mse_ratio_with(&cfg, 1.0, ker, emp).unwrap();
        assert_eq!(a.mse1, b.mse2);
        assert_eq!(a.mse2, b.mse1);
        assert_eq!(b.ratio, a.mse1 / a.mse2);
        assert!((a.ratio * b.ratio - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rerun_is_bit_identical() {
        let cfg = small(ModelSpec::gpd(1.0 / 3.0).unwrap());
        let a = mse_ratio_experiment(&cfg).unwrap();
        let b = mse_ratio_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.ratio > 0.0 && a.ratio_se > 0.0);
    }

    #[test]
    fn config_errors() {
        let mut cfg = small(ModelSpec::standard_normal());
        cfg.replicates = 1;
        assert!(mse_ratio_experiment(&cfg).is_err());
        let mut cfg = small(ModelSpec::standard_normal());
        cfg.truth = Some(f64::NAN);
        assert!(matches!(mse_ratio_experiment(&cfg), Err(Error::OracleFailure(_))));
    }

    #[test]
    fn grid_cells_keep_their_streams() {
        let mut spec = Table1Spec::full(3);
        let full = spec.cells();
        spec.models.truncate(1);
        spec.ns = vec![100];
        spec.betas = vec![5.0];
        let part = spec.cells();
        assert_eq!(full.len(), 36);
        assert_eq!(part.len(), 1);
        assert!(full.contains(&part[0]));
    }
}
