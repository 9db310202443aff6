use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use srm_core::data::{
    filter_period, load_prices_csv, log_returns, parse_date, render_report, verify_report, write_report,
    ReportBody, ReportDoc, ReportFormat, ReturnSeries,
};
use srm_core::distributions::{parse_kv, ModelSpec};
use srm_core::kernel::{BandwidthRule, Kernel, KernelCdf, KernelEstimatorConfig, QuadratureRoute, WeightFunctionH};
use srm_core::montecarlo::{
    bootstrap_distribution, clt_check, consistency_sweep, mse_ratio_experiment, prescan_lambda, run_table1,
    table2, theory_check_theorem1, theory_check_theorem2, BootstrapConfig, MseExperimentConfig, ResampleScheme,
    Table1Spec,
};
use srm_core::riskmeasure::{
    clt_interval, empirical_srm, kernel_srm, plug_in_variance, EstimateReport, Interval, IntervalMethod,
    Provenance, RiskSpectrum, SignConvention, Units, DEFAULT_VARIANCE_GRID,
};
use srm_core::stats::sorted_copy;

const DEFAULT_SEED: &str = "20190101";

/// Spectral risk measures from return data: empirical and kernel estimators,
/// bootstrap intervals and the Monte-Carlo experiments.
#[derive(Parser, Debug)]
#[command(name = "srm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Estimate SRMs of one price series.
    Estimate(EstimateArgs),
    /// MSE ratio of the empirical to the kernel estimator for one model cell.
    SimulateMse(SimulateArgs),
    /// Kernel estimate with bootstrap SD and percentile interval.
    Bootstrap(BootstrapArgs),
    /// Numerical checks of the large-sample results.
    TheoryCheck(TheoryArgs),
    /// Table of MSE ratios over models, sample sizes and β.
    Table1(Table1Args),
    /// Bootstrap table over instruments and β.
    Table2(Table2Args),
}

#[derive(Args, Debug, Serialize)]
struct Output {
    /// Master seed.
    #[arg(long, env = "SRM_SEED", default_value = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Tabular)]
    #[serde(skip)]
    format: FormatArg,
    /// Report file; standard output when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
    /// key = value file whose entries override flags of the same name.
    #[arg(long)]
    #[serde(skip)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct PriceInput {
    /// Price CSV with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "Date")]
    date_col: String,
    #[arg(long, default_value = "Close")]
    close_col: String,
    /// First date kept (inclusive).
    #[arg(long)]
    start: Option<String>,
    /// Last date kept (inclusive).
    #[arg(long)]
    end: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct KernelArgs {
    /// swanepoel, scale-equivariant, rate:c,e or a fixed positive value.
    #[arg(long, default_value = "swanepoel")]
    bandwidth: BandwidthRule,
    /// gaussian or epanechnikov.
    #[arg(long, default_value = "gaussian")]
    kernel: Kernel,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FormatArg {
    Tabular,
    Structured,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SignArg {
    Loss,
    Return,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum UnitsArg {
    Raw,
    Percent,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum EstimatorArg {
    Empirical,
    Kernel,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum RouteArg {
    Quantile,
    Distribution,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum CheckArg {
    /// Weighted sup distance of the kernel CDF, uniform data.
    Distance,
    /// The six nearly-linear bounds, uniform data.
    Bounds,
    /// Median absolute error of the kernel SRM over n.
    Consistency,
    /// Standardized kernel SRM against N(0, 1).
    Clt,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum WeightArg {
    Unit,
    Standard,
    Star,
}

#[derive(Args, Debug, Serialize)]
struct EstimateArgs {
    #[command(flatten)]
    input: PriceInput,
    /// exp:β, powlow:γ, powhigh:γ or es:p; repeatable.
    #[arg(long, value_delimiter = ',', default_value = "exp:5")]
    spectrum: Vec<RiskSpectrum>,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Kernel)]
    estimator: EstimatorArg,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Quadrature for the kernel estimator.
    #[arg(long, value_enum, default_value_t = RouteArg::Quantile)]
    route: RouteArg,
    /// Add a plug-in CLT interval.
    #[arg(long)]
    clt: bool,
    #[arg(long, default_value_t = 0.90)]
    ci_level: f64,
    #[arg(long, value_enum, default_value_t = SignArg::Loss)]
    sign: SignArg,
    #[arg(long, value_enum, default_value_t = UnitsArg::Raw)]
    units: UnitsArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct SimulateArgs {
    /// normal[:loc,scale], t[:df,scale,loc], gpd[:shape,scale,loc] or garch[:alpha1,beta1,omega].
    #[arg(long, default_value = "normal")]
    model: ModelSpec,
    #[arg(long, default_value_t = 30)]
    n: usize,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Monte-Carlo replicates.
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct BootstrapArgs {
    #[command(flatten)]
    input: PriceInput,
    #[arg(long, default_value = "exp:5")]
    spectrum: RiskSpectrum,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 10000)]
    replicates: usize,
    #[arg(long, default_value_t = 0.90)]
    ci_level: f64,
    /// Circular block resampling with this block length; i.i.d. when absent.
    #[arg(long)]
    block_length: Option<usize>,
    /// Worker threads; all cores when absent. Does not change results.
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = SignArg::Loss)]
    sign: SignArg,
    #[arg(long, value_enum, default_value_t = UnitsArg::Raw)]
    units: UnitsArg,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct TheoryArgs {
    #[arg(long, value_enum, default_value_t = CheckArg::Distance)]
    check: CheckArg,
    /// Sample sizes; repeatable. bounds and clt use the first.
    #[arg(long, value_delimiter = ',', default_values_t = [100, 1000, 10000])]
    n: Vec<usize>,
    /// Independent samples per n.
    #[arg(long, default_value_t = 100)]
    seeds: usize,
    #[arg(long, value_enum, default_value_t = WeightArg::Standard)]
    weight: WeightArg,
    /// Exponent δ of the weight function.
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value = "normal")]
    model: ModelSpec,
    #[arg(long, default_value = "exp:5")]
    spectrum: RiskSpectrum,
    /// Monte-Carlo replicates for the clt check.
    #[arg(long, default_value_t = 200)]
    replicates: usize,
    /// Fixed bandwidth for bounds; n^(-1/2) when absent.
    #[arg(long)]
    fixed_bandwidth: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    tau1: f64,
    #[arg(long, default_value_t = 2.0)]
    tau2: f64,
    /// λ for bounds; scanned from --lambda-candidates when absent.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.45, 0.4, 0.3, 0.2, 0.1, 0.05, 0.02, 0.01])]
    lambda_candidates: Vec<f64>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct Table1Args {
    /// Models; repeatable.
    #[arg(long, value_delimiter = ',', default_values = ["gpd", "t", "normal", "garch"])]
    models: Vec<ModelSpec>,
    /// Sample sizes; repeatable.
    #[arg(long, value_delimiter = ',', default_values_t = [30, 100, 250])]
    n: Vec<usize>,
    /// β values; repeatable.
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 5.0, 1.0])]
    beta: Vec<f64>,
    /// Monte-Carlo replicates per cell.
    #[arg(long, default_value_t = 1000)]
    replicates: usize,
    #[command(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug, Serialize)]
struct Table2Args {
    /// Price CSV per instrument, as PATH or NAME=PATH; repeatable.
    #[arg(long, required = true)]
    input: Vec<String>,
    #[arg(long, default_value = "Date")]
    date_col: String,
    #[arg(long, default_value = "Close")]
    close_col: String,
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    end: Option<String>,
    /// β values; repeatable.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 5.0, 10.0, 20.0, 100.0, 200.0])]
    beta: Vec<f64>,
    /// Bootstrap replicates per cell.
    #[arg(long, default_value_t = 10000)]
    replicates: usize,
    #[arg(long, default_value_t = 0.90)]
    ci_level: f64,
    #[arg(long)]
    block_length: Option<usize>,
    #[arg(long)]
    #[serde(skip)]
    workers: Option<usize>,
    #[command(flatten)]
    kernel: KernelArgs,
    #[arg(long, value_enum, default_value_t = SignArg::Loss)]
    sign: SignArg,
    #[arg(long, value_enum, default_value_t = UnitsArg::Percent)]
    units: UnitsArg,
    /// Also write the percentile intervals as a second report.
    #[arg(long)]
    #[serde(skip)]
    intervals_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

impl From<SignArg> for SignConvention {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Loss => SignConvention::Loss,
            SignArg::Return => SignConvention::Return,
        }
    }
}

impl From<UnitsArg> for Units {
    fn from(u: UnitsArg) -> Self {
        match u {
            UnitsArg::Raw => Units::Raw,
            UnitsArg::Percent => Units::DailyPercent,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Tabular => ReportFormat::Tabular,
            FormatArg::Structured => ReportFormat::Structured,
        }
    }
}

/// Rewrites argv so that entries of the `--config` file replace flags of
/// the same name. Keys are long flag names without dashes; list values
/// are comma separated.
fn apply_config_file(mut argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let Some(path) = argv.iter().enumerate().find_map(|(i, a)| {
        a.strip_prefix("--config=").map(str::to_string).or_else(|| (a == "--config").then(|| argv.get(i + 1).cloned()).flatten())
    }) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config file {path}"))?;
    let pairs = parse_kv(&text)?;
    let command = Cli::command();
    let sub = argv
        .iter()
        .skip(1)
        .find_map(|a| command.find_subcommand(a))
        .ok_or_else(|| anyhow!("config file given without a subcommand"))?;
    for (key, value) in pairs {
        let flag = key.replace('_', "-");
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(flag.as_str()))
            .ok_or_else(|| anyhow!("config key '{key}' is not a flag of '{}'", sub.get_name()))?;
        if flag == "config" {
            continue;
        }
        let takes_value = arg.get_action().takes_values();
        let long = format!("--{flag}");
        let mut kept = Vec::with_capacity(argv.len());
        let mut it = argv.into_iter();
        while let Some(a) = it.next() {
            if a == long {
                if takes_value {
                    it.next();
                }
            } else if !a.starts_with(&format!("{long}=")) {
                kept.push(a);
            }
        }
        argv = kept;
        if takes_value {
            argv.push(format!("{long}={value}"));
        } else if matches!(value.to_ascii_lowercase().as_str(), "true" | "yes" | "1") {
            argv.push(long);
        }
    }
    Ok(argv)
}

fn parse_day(text: &Option<String>, what: &str) -> anyhow::Result<Option<srm_core::data::NaiveDate>> {
    text.as_deref()
        .map(|t| parse_date(t).ok_or_else(|| srm_core::Error::Parse(format!("{what} date '{t}' is not a date"))))
        .transpose()
        .map_err(Into::into)
}

fn load_returns(
    path: &Path,
    date_col: &str,
    close_col: &str,
    start: &Option<String>,
    end: &Option<String>,
) -> anyhow::Result<(ReturnSeries, Vec<String>)> {
    let load = load_prices_csv(path, date_col, close_col)?;
    let mut prices = load.prices;
    let (lo, hi) = (parse_day(start, "start")?, parse_day(end, "end")?);
    if lo.is_some() || hi.is_some() {
        let lo = lo.unwrap_or(srm_core::data::NaiveDate::MIN);
        let hi = hi.unwrap_or(srm_core::data::NaiveDate::MAX);
        prices = filter_period(&prices, lo, hi);
    }
    let mut notes = Vec::new();
    if load.dropped_rows > 0 {
        notes.push(format!("{}: {} rows without a close were skipped", path.display(), load.dropped_rows));
    }
    Ok((log_returns(&prices)?, notes))
}

fn provenance(command: &Command, seeds: Vec<u64>) -> Provenance {
    Provenance::new(command, seeds)
}

fn emit(doc: &ReportDoc, output: &Output) -> anyhow::Result<()> {
    emit_to(doc, output.out.as_deref(), output.format.into())
}

fn emit_to(doc: &ReportDoc, out: Option<&Path>, format: ReportFormat) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            write_report(doc, path, format)?;
            verify_report(doc, path, format)?;
        }
        None => print!("{}", render_report(doc, format)?),
    }
    Ok(())
}

fn run_estimate(a: &EstimateArgs, command: &Command) -> anyhow::Result<()> {
    let (returns, notes) =
        load_returns(&a.input.input, &a.input.date_col, &a.input.close_col, &a.input.start, &a.input.end)?;
    let config = KernelEstimatorConfig {
        kernel: a.kernel.kernel,
        bandwidth: a.kernel.bandwidth,
        quadrature: match a.route {
            RouteArg::Quantile => QuadratureRoute::quantile_default(),
            RouteArg::Distribution => QuadratureRoute::distribution_default(),
        },
        ..KernelEstimatorConfig::default()
    };
    let x = &returns.values;
    let mut reports = Vec::with_capacity(a.spectrum.len());
    for spectrum in &a.spectrum {
        let mut r = match a.estimator {
            EstimatorArg::Empirical => empirical_srm(x, spectrum)?,
            EstimatorArg::Kernel => kernel_srm(x, spectrum, &config)?,
        };
        if a.clt {
            add_clt(&mut r, x, spectrum, &config, a.ci_level)?;
        }
        r.warnings.extend(notes.iter().cloned());
        reports.push(r.presented(a.sign.into(), a.units.into()));
    }
    let doc = ReportDoc::new(ReportBody::Estimates(reports), Some(provenance(command, vec![a.output.seed])));
    emit(&doc, &a.output)
}

/// point ± z √(σ̂²/n) with σ̂² from the kernel quantile function of the
/// sample; all-equal samples get σ̂² = 0.
fn add_clt(
    r: &mut EstimateReport,
    returns: &[f64],
    spectrum: &RiskSpectrum,
    config: &KernelEstimatorConfig,
    level: f64,
) -> anyhow::Result<()> {
    let losses = sorted_copy(&returns.iter().map(|v| -v).collect::<Vec<_>>());
    let sigma2 = match config.bandwidth.resolve(&losses) {
        Ok(b) => {
            let f = KernelCdf::from_sorted(losses, b, config.kernel)?;
            plug_in_variance(&f, spectrum, config, DEFAULT_VARIANCE_GRID)?.value
        }
        Err(srm_core::Error::DegenerateScale) => 0.0,
        Err(e) => return Err(e.into()),
    };
    let (lo, hi) = clt_interval(r.point, sigma2, r.n, level)?;
    r.sd = Some((sigma2 / r.n as f64).sqrt());
    r.ci = Some(Interval { lo, hi, level, method: IntervalMethod::Clt });
    Ok(())
}

fn mc_kernel(k: &KernelArgs) -> KernelEstimatorConfig {
    KernelEstimatorConfig { kernel: k.kernel, bandwidth: k.bandwidth, ..KernelEstimatorConfig::fast() }
}

fn run_simulate(a: &SimulateArgs, command: &Command) -> anyhow::Result<()> {
    let mut cfg = MseExperimentConfig::new(a.model, a.n, a.beta, a.output.seed);
    cfg.replicates = a.replicates;
    cfg.kernel = mc_kernel(&a.kernel);
    let r = mse_ratio_experiment(&cfg)?;
    let mut seeds = vec![a.output.seed];
    seeds.extend(r.oracle_seed.map(|p| p.master));
    let doc = ReportDoc::new(ReportBody::MseRatios(vec![r]), Some(provenance(command, seeds)));
    emit(&doc, &a.output)
}

fn bootstrap_config(
    seed: u64,
    replicates: usize,
    ci_level: f64,
    block_length: Option<usize>,
    workers: Option<usize>,
    kernel: &KernelArgs,
) -> BootstrapConfig {
    BootstrapConfig {
        replicates,
        ci_level,
        scheme: block_length.map_or(ResampleScheme::Iid, |length| ResampleScheme::Block { length }),
        workers,
        kernel: mc_kernel(kernel),
        ..BootstrapConfig::new(seed)
    }
}

fn run_bootstrap(a: &BootstrapArgs, command: &Command) -> anyhow::Result<()> {
    let (returns, notes) =
        load_returns(&a.input.input, &a.input.date_col, &a.input.close_col, &a.input.start, &a.input.end)?;
    let cfg = bootstrap_config(a.output.seed, a.replicates, a.ci_level, a.block_length, a.workers, &a.kernel);
    let mut r = bootstrap_distribution(&returns.values, &a.spectrum, &cfg)?;
    r.warnings.extend(notes);
    r.provenance = None;
    let r = r.presented(a.sign.into(), a.units.into());
    let doc = ReportDoc::new(ReportBody::Estimates(vec![r]), Some(provenance(command, vec![a.output.seed])));
    emit(&doc, &a.output)
}

fn run_theory(a: &TheoryArgs, command: &Command) -> anyhow::Result<()> {
    let seed = a.output.seed;
    let first_n = *a.n.first().ok_or_else(|| srm_core::Error::Parse("--n needs at least one value".into()))?;
    let body = match a.check {
        CheckArg::Distance => {
            let h = match a.weight {
                WeightArg::Unit => WeightFunctionH::Unit,
                WeightArg::Standard => WeightFunctionH::standard(a.delta)?,
                WeightArg::Star => WeightFunctionH::star(a.delta)?,
            };
            ReportBody::Decay(vec![theory_check_theorem1(&h, &a.n, a.seeds, seed, &a.kernel.bandwidth)?])
        }
        CheckArg::Consistency => {
            let cfg = mc_kernel(&a.kernel);
            ReportBody::Decay(vec![consistency_sweep(&a.model, &a.spectrum, &a.n, a.seeds, seed, &cfg)?])
        }
        CheckArg::Clt => {
            let cfg = mc_kernel(&a.kernel);
            ReportBody::Clt(vec![clt_check(&a.model, &a.spectrum, first_n, a.replicates, seed, &cfg)?])
        }
        CheckArg::Bounds => {
            let b = a.fixed_bandwidth.unwrap_or(1.0 / (first_n as f64).sqrt());
            let lambda = match a.lambda {
                Some(l) => l,
                None => prescan_lambda(first_n, b, a.tau1, a.tau2, &a.lambda_candidates, 10, seed)?
                    .ok_or_else(|| srm_core::Error::OracleFailure("no candidate λ passed the scan".into()))?,
            };
            ReportBody::Bounds(vec![theory_check_theorem2(first_n, b, a.tau1, a.tau2, lambda, a.seeds, seed)?])
        }
    };
    let doc = ReportDoc::new(body, Some(provenance(command, vec![seed])));
    emit(&doc, &a.output)
}

fn run_table1_cmd(a: &Table1Args, command: &Command) -> anyhow::Result<()> {
    let spec = Table1Spec {
        models: a.models.clone(),
        ns: a.n.clone(),
        betas: a.beta.clone(),
        replicates: a.replicates,
        master_seed: a.output.seed,
        kernel: mc_kernel(&a.kernel),
    };
    let table = run_table1(&spec, |i, total, r| {
        eprintln!("[{}/{}] {} n={} beta={}: ratio {:.4} (se {:.4})", i, total, r.model, r.n, r.beta, r.ratio, r.ratio_se)
    })?;
    let mut seeds = vec![a.output.seed];
    seeds.extend(table.cells.iter().filter_map(|c| c.oracle_seed.map(|p| p.master)));
    seeds.dedup();
    let doc = ReportDoc::new(ReportBody::Table1(table), Some(provenance(command, seeds)));
    emit(&doc, &a.output)
}

fn run_table2_cmd(a: &Table2Args, command: &Command) -> anyhow::Result<()> {
    let mut instruments = Vec::with_capacity(a.input.len());
    let mut notes = Vec::new();
    for spec in &a.input {
        let (name, path) = match spec.split_once('=') {
            Some((name, path)) => (Some(name.to_string()), PathBuf::from(path)),
            None => (None, PathBuf::from(spec)),
        };
        let (series, n) = load_returns(&path, &a.date_col, &a.close_col, &a.start, &a.end)?;
        notes.extend(n);
        instruments.push((name.unwrap_or(series.instrument), series.values));
    }
    let cfg = bootstrap_config(a.output.seed, a.replicates, a.ci_level, a.block_length, a.workers, &a.kernel);
    let mut t = table2(&instruments, &a.beta, &cfg, |name, beta| eprintln!("{name} beta={beta} done"))?;
    for row in &mut t.rows {
        for cell in row.iter_mut() {
            let mut r = std::mem::replace(cell, cell.clone()).presented(a.sign.into(), a.units.into());
            r.provenance = None;
            r.warnings.extend(notes.iter().cloned());
            *cell = r;
        }
    }
    let prov = provenance(command, vec![a.output.seed]);
    if let Some(path) = &a.intervals_out {
        let doc = ReportDoc::new(ReportBody::Intervals(t.clone()), Some(prov.clone()));
        emit_to(&doc, Some(path), a.output.format.into())?;
    }
    let doc = ReportDoc::new(ReportBody::Table2(t), Some(prov));
    emit(&doc, &a.output)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let c = &cli.command;
    match c {
        Command::Estimate(a) => run_estimate(a, c),
        Command::SimulateMse(a) => run_simulate(a, c),
        Command::Bootstrap(a) => run_bootstrap(a, c),
        Command::TheoryCheck(a) => run_theory(a, c),
        Command::Table1(a) => run_table1_cmd(a, c),
        Command::Table2(a) => run_table2_cmd(a, c),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<srm_core::Error>()) {
        Some(e) if !e.is_input_error() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv = match apply_config_file(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let cli = Cli::parse_from(argv);
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
