use agethresh_core::asymptotics::{
    classify_regime, limiting_aoi, optimize_parameters_with, pivot_chain_aoi, AoiEvaluation,
    OptimizerOptions, RegimeConstraint, RootAnalysis,
};
use agethresh_core::exact::{active_pmf, enumerate_stationary, success_prob_q0};
use agethresh_core::sim::{
    simulate_with, AttemptSampling, Init, SimConfig, SimReport, DEFAULT_BUDGET,
};
use agethresh_core::{AsymptoticParams, PolicyParams, Purpose};
use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::output::OutputArgs;
use crate::parse;
use crate::policy::{PolicyArgs, PolicyName};

#[derive(Debug, Clone, Args, Serialize)]
pub struct ExactParamArgs {
    #[arg(long, value_parser = parse::size)]
    pub n: usize,
    #[arg(long, value_parser = parse::count)]
    pub gamma: u64,
    #[arg(long, value_parser = parse::real)]
    pub tau: f64,
}

impl ExactParamArgs {
    fn params(&self) -> Result<PolicyParams> {
        Ok(PolicyParams::new(self.n, self.gamma, self.tau).validate(Purpose::ExactAnalysis)?)
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub params: ExactParamArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct AnalyzeReport {
    mode: usize,
    mode_fraction: f64,
    /// Local maxima of the pmf, as active counts.
    peaks: Vec<usize>,
    peak_fractions: Vec<f64>,
    mean: f64,
    mean_fraction: f64,
    support_min: usize,
    q0: f64,
    q0_scaled: f64,
    pivot_chain_aoi: f64,
    pivot_chain_aoi_over_n: f64,
    pmf: Vec<f64>,
}

#[derive(Serialize)]
struct PmfRow {
    m: usize,
    probability: f64,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<()> {
    let params = args.params.params()?;
    let pmf = active_pmf(&params)?;
    let n = params.n as f64;
    let q0 = success_prob_q0(&pmf, params.tau);
    let aoi = pivot_chain_aoi(params.gamma, q0)?;
    let peaks = pmf.local_maxima();
    let report = AnalyzeReport {
        mode: pmf.mode(),
        mode_fraction: pmf.mode() as f64 / n,
        peak_fractions: peaks.iter().map(|&m| m as f64 / n).collect(),
        peaks,
        mean: pmf.mean(),
        mean_fraction: pmf.mean() / n,
        support_min: pmf.support_min(),
        q0,
        q0_scaled: q0 * n,
        pivot_chain_aoi: aoi,
        pivot_chain_aoi_over_n: aoi / n,
        pmf: pmf.probabilities(),
    };
    args.out.emit("analyze", &args.params, &report, || {
        report
            .pmf
            .iter()
            .enumerate()
            .map(|(m, &probability)| PmfRow { m, probability })
            .collect()
    })
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScaledArgs {
    #[arg(long, value_parser = parse::real)]
    pub r: f64,
    #[arg(long, value_parser = parse::real)]
    pub alpha: f64,
}

#[derive(Debug, Args)]
pub struct RootsArgs {
    #[command(flatten)]
    pub params: ScaledArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct RootsReport {
    #[serde(flatten)]
    analysis: RootAnalysis,
    limit: AoiEvaluation,
}

#[derive(Serialize)]
struct RootRow {
    index: usize,
    root: f64,
    selected: bool,
    regime: String,
}

pub fn roots(args: &RootsArgs) -> Result<()> {
    let p = AsymptoticParams::new(args.params.r, args.params.alpha)?;
    let analysis = classify_regime(&p)?;
    let limit = limiting_aoi(&p)?;
    let report = RootsReport { analysis, limit };
    args.out.emit("roots", &args.params, &report, || {
        let a = &report.analysis;
        a.roots
            .iter()
            .enumerate()
            .map(|(index, &root)| RootRow {
                index,
                root,
                selected: root == a.k_star,
                regime: a.regime.to_string(),
            })
            .collect()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeArg {
    Any,
    SinglePeak,
}

#[derive(Debug, Args, Serialize)]
pub struct OptimizeArgs {
    #[arg(long, value_enum, default_value_t = RegimeArg::Any)]
    pub regime: RegimeArg,
    /// Lattice spacing of the reported optimum; 0 reports the continuous one.
    #[arg(long, value_parser = parse::real, default_value_t = 0.01)]
    pub resolution: f64,
    /// Coarse grid points per axis.
    #[arg(long, value_parser = parse::size, default_value_t = 200)]
    pub grid: usize,
    /// Nelder-Mead parameter tolerance.
    #[arg(long, value_parser = parse::real, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, value_parser = parse::real, num_args = 2, value_names = ["LO", "HI"], default_values_t = [1.2, 4.0])]
    pub r_range: Vec<f64>,
    #[arg(long, value_parser = parse::real, num_args = 2, value_names = ["LO", "HI"], default_values_t = [1.0, 10.0])]
    pub alpha_range: Vec<f64>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct OptimumRow {
    regime_constraint: &'static str,
    r: f64,
    alpha: f64,
    k0: f64,
    g: f64,
    aoi_over_n: f64,
    throughput: f64,
    regime: String,
}

pub fn optimize(args: &OptimizeArgs) -> Result<()> {
    if args.resolution < 0.0 {
        bail!("resolution must be >= 0");
    }
    let mut opts = OptimizerOptions {
        r_range: (args.r_range[0], args.r_range[1]),
        alpha_range: (args.alpha_range[0], args.alpha_range[1]),
        grid: args.grid,
        resolution: (args.resolution > 0.0).then_some(args.resolution),
        ..Default::default()
    };
    opts.nelder_mead.param_tol = args.tol;
    let constraint = match args.regime {
        RegimeArg::Any => RegimeConstraint::Any,
        RegimeArg::SinglePeak => RegimeConstraint::SinglePeakOnly,
    };
    let opt = optimize_parameters_with(Some(constraint), &opts)?;
    args.out.emit("optimize", args, &opt, || {
        let e = &opt.evaluation;
        vec![OptimumRow {
            regime_constraint: match args.regime {
                RegimeArg::Any => "any",
                RegimeArg::SinglePeak => "single-peak",
            },
            r: opt.params.r,
            alpha: opt.params.alpha,
            k0: e.k_star,
            g: e.g_offered,
            aoi_over_n: e.aoi_scaled,
            throughput: e.throughput,
            regime: e.regime.to_string(),
        }]
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitArg {
    RandomDistinct,
    AllActive,
}

impl From<InitArg> for Init {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::RandomDistinct => Init::RandomDistinct,
            InitArg::AllActive => Init::AllActive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingArg {
    /// Geometric gaps between attempts (same law, faster)
    Clock,
    /// One Bernoulli draw per active source per slot
    PerSlot,
}

impl From<SamplingArg> for AttemptSampling {
    fn from(s: SamplingArg) -> Self {
        match s {
            SamplingArg::Clock => AttemptSampling::Clock,
            SamplingArg::PerSlot => AttemptSampling::PerSlot,
        }
    }
}

/// Run-length, seeding and guard flags shared by simulate and sweep.
#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    /// Measured slots after warmup.
    #[arg(long, value_parser = parse::count, default_value = "1e6")]
    pub slots: u64,
    /// Warmup slots; default max(10 gamma, 1e5).
    #[arg(long, value_parser = parse::count)]
    pub warmup: Option<u64>,
    #[arg(long, value_enum, default_value_t = InitArg::RandomDistinct)]
    pub init: InitArg,
    /// Upper bound on n * (warmup + slots).
    #[arg(long, value_parser = parse::count, default_value_t = DEFAULT_BUDGET as u64)]
    pub budget: u64,
    #[arg(long, value_enum, default_value_t = SamplingArg::Clock)]
    pub sampling: SamplingArg,
}

impl RunArgs {
    pub fn config(&self, seed: u64) -> SimConfig {
        SimConfig {
            slots: self.slots,
            warmup: self.warmup,
            seed,
            init: self.init.into(),
            budget: self.budget as u128,
            sampling: self.sampling.into(),
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = PolicyName::Ta)]
    pub policy: PolicyName,
    #[arg(long, value_parser = parse::size)]
    pub n: usize,
    #[command(flatten)]
    pub policy_args: PolicyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
pub struct SummaryRow {
    pub policy: &'static str,
    pub n: usize,
    pub gamma: u64,
    pub seed: u64,
    pub slots: u64,
    pub aoi: f64,
    pub aoi_over_n: f64,
    pub throughput: f64,
    pub active_fraction: f64,
    pub tx_per_slot: f64,
    pub rx_per_slot: f64,
    pub contention_aoi: Option<f64>,
}

impl SummaryRow {
    pub fn from_report(policy: PolicyName, gamma: u64, r: &SimReport) -> Self {
        Self {
            policy: policy.label(),
            n: r.n,
            gamma,
            seed: r.seed,
            slots: r.slots_simulated,
            aoi: r.network_avg_aoi,
            aoi_over_n: r.aoi_over_n(),
            throughput: r.throughput,
            active_fraction: r.active_fraction_mean,
            tx_per_slot: r.tx_events_per_slot,
            rx_per_slot: r.rx_events_per_slot,
            contention_aoi: r.arrivals.as_ref().map(|a| a.network_avg_contention_age),
        }
    }
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    if args.policy == PolicyName::SaFormula {
        bail!("sa-formula is analytical; use sweep");
    }
    let resolved = args.policy_args.resolve(args.policy, args.n)?;
    let report = simulate_with(resolved.kind, args.n, &args.run.config(args.seed))?;
    args.out.emit("simulate", args, &report, || {
        vec![SummaryRow::from_report(
            args.policy,
            resolved.gamma,
            &report,
        )]
    })
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub params: ExactParamArgs,
    /// Largest accepted entrywise discrepancy.
    #[arg(long, value_parser = parse::real, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Serialize)]
struct OracleReport {
    states: usize,
    closed_form: Vec<f64>,
    enumerated: Vec<f64>,
    max_abs_discrepancy: f64,
    max_equal_type_spread: f64,
    residual: f64,
    within_tolerance: bool,
}

#[derive(Serialize)]
struct OracleRow {
    m: usize,
    closed_form: f64,
    enumerated: f64,
    abs_diff: f64,
}

pub fn oracle(args: &OracleArgs) -> Result<()> {
    let params = args.params.params()?;
    let closed_form = active_pmf(&params)?.probabilities();
    let dist = enumerate_stationary(&params)?;
    let enumerated = dist.active_marginal();
    let max_abs_discrepancy = closed_form
        .iter()
        .zip(&enumerated)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let report = OracleReport {
        states: dist.len(),
        max_abs_discrepancy,
        max_equal_type_spread: dist.max_type_spread(),
        residual: dist.residual(),
        within_tolerance: max_abs_discrepancy <= args.tol,
        closed_form,
        enumerated,
    };
    args.out.emit("oracle", &args.params, &report, || {
        report
            .closed_form
            .iter()
            .zip(&report.enumerated)
            .enumerate()
            .map(|(m, (&a, &b))| OracleRow {
                m,
                closed_form: a,
                enumerated: b,
                abs_diff: (a - b).abs(),
            })
            .collect()
    })?;
    if !report.within_tolerance {
        bail!(
            "max discrepancy {:.3e} exceeds tolerance {:.3e}",
            report.max_abs_discrepancy,
            args.tol
        );
    }
    Ok(())
}
