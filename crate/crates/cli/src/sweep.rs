use std::collections::BTreeMap;
use std::path::PathBuf;

use agethresh_core::asymptotics::{slotted_aloha_aoi, throughput_at_load};
use agethresh_core::sim::simulate_with;
use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::RunArgs;
use crate::output::OutputArgs;
use crate::parse;
use crate::policy::{PolicyArgs, PolicyName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepKind {
    /// AoI against network size, one row per (policy, n, seed).
    Aoi,
    /// G e^-G against offered load G.
    Load,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, value_enum, default_value_t = SweepKind::Aoi)]
    pub kind: SweepKind,
    /// Comma-separated policies.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "ta")]
    pub policy: Vec<PolicyName>,
    /// Network sizes: `start:stop:step` and/or a comma list.
    #[arg(long, value_parser = parse::sizes, default_value = "50:500:50")]
    #[serde(serialize_with = "sizes_as_list")]
    pub n: parse::SizeList,
    /// Offered-load grid for `--kind load`.
    #[arg(long, value_parser = parse::grid, default_value = "0:3:0.01")]
    #[serde(serialize_with = "grid_as_list")]
    pub g: parse::RealGrid,
    #[command(flatten)]
    pub policy_args: PolicyArgs,
    #[command(flatten)]
    pub run: RunArgs,
    /// Replications per configuration; seeds are `seed..seed+seeds`.
    #[arg(long, value_parser = parse::count, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, short, default_value_t = 0)]
    pub jobs: usize,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

fn sizes_as_list<S: serde::Serializer>(v: &parse::SizeList, s: S) -> Result<S::Ok, S::Error> {
    v.0.serialize(s)
}

fn grid_as_list<S: serde::Serializer>(v: &parse::RealGrid, s: S) -> Result<S::Ok, S::Error> {
    v.0.serialize(s)
}

/// One sweep row. Column order is part of the output format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub policy: String,
    pub n: usize,
    pub aoi: f64,
    pub aoi_over_n: f64,
    pub throughput: f64,
    pub seed: u64,
    pub gamma: u64,
    pub tau: Option<f64>,
    pub slots: u64,
    pub active_fraction: Option<f64>,
    pub tx_per_slot: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct LoadRow {
    #[serde(rename = "G")]
    g: f64,
    throughput: f64,
}

fn run_one(args: &SweepArgs, policy: PolicyName, n: usize, seed: u64) -> Result<SweepRow> {
    let resolved = args.policy_args.resolve(policy, n)?;
    if policy == PolicyName::SaFormula {
        let tau = resolved.tau.expect("slotted rule has a fixed tau");
        let aoi = slotted_aloha_aoi(n, tau)?;
        return Ok(SweepRow {
            policy: policy.label().into(),
            n,
            aoi,
            aoi_over_n: aoi / n as f64,
            throughput: n as f64 * tau * (1.0 - tau).powi(n as i32 - 1),
            seed,
            gamma: 1,
            tau: Some(tau),
            slots: 0,
            active_fraction: None,
            tx_per_slot: None,
        });
    }
    let r = simulate_with(resolved.kind, n, &args.run.config(seed))
        .with_context(|| format!("{} at n = {n}, seed = {seed}", policy.label()))?;
    Ok(SweepRow {
        policy: policy.label().into(),
        n,
        aoi: r.network_avg_aoi,
        aoi_over_n: r.aoi_over_n(),
        throughput: r.throughput,
        seed,
        gamma: resolved.gamma,
        tau: resolved.tau,
        slots: r.slots_simulated,
        active_fraction: Some(r.active_fraction_mean),
        tx_per_slot: Some(r.tx_events_per_slot),
    })
}

pub fn sweep(args: &SweepArgs) -> Result<()> {
    if args.kind == SweepKind::Load {
        let rows: Vec<LoadRow> = args
            .g
            .0
            .iter()
            .map(|&g| LoadRow {
                g,
                throughput: throughput_at_load(g),
            })
            .collect();
        return args.out.emit("sweep", args, &rows, || rows.clone());
    }
    if args.seeds == 0 {
        bail!("--seeds must be >= 1");
    }
    let mut policies = args.policy.clone();
    policies.sort();
    policies.dedup();
    let mut jobs = Vec::new();
    for &p in &policies {
        for &n in &args.n.0 {
            for seed in args.seed..args.seed + args.seeds {
                jobs.push((p, n, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()?;
    // collect() keeps input order, which is already sorted by key
    let rows: Vec<SweepRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(p, n, seed)| run_one(args, p, n, seed))
            .collect::<Result<_>>()
    })?;
    args.out.emit("sweep", args, &rows, || rows.clone())
}

#[derive(Debug, Args, Serialize)]
pub struct SummarizeArgs {
    /// Sweep CSV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    #[serde(skip)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub policy: String,
    pub n: usize,
    pub replications: usize,
    pub aoi_mean: f64,
    pub aoi_stderr: Option<f64>,
    pub aoi_over_n_mean: f64,
    pub aoi_over_n_stderr: Option<f64>,
    pub throughput_mean: f64,
    pub throughput_stderr: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Summary {
    rows: Vec<SummaryRow>,
    /// Least-squares slope of mean AoI against n, per policy.
    slopes: BTreeMap<String, f64>,
}

fn mean_stderr(xs: &[f64]) -> (f64, Option<f64>) {
    let k = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / k;
    if xs.len() < 2 {
        return (mean, None);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, Some((var / k).sqrt()))
}

pub fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn summarize(args: &SummarizeArgs) -> Result<()> {
    let mut groups: BTreeMap<(String, usize), Vec<SweepRow>> = BTreeMap::new();
    for path in &args.inputs {
        let mut reader =
            csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
        for row in reader.deserialize() {
            let row: SweepRow = row.with_context(|| format!("reading {}", path.display()))?;
            groups
                .entry((row.policy.clone(), row.n))
                .or_default()
                .push(row);
        }
    }
    if groups.is_empty() {
        bail!("no rows in input");
    }
    let rows: Vec<SummaryRow> = groups
        .into_iter()
        .map(|((policy, n), rs)| {
            let col = |f: fn(&SweepRow) -> f64| rs.iter().map(f).collect::<Vec<_>>();
            let (aoi_mean, aoi_stderr) = mean_stderr(&col(|r| r.aoi));
            let (aoi_over_n_mean, aoi_over_n_stderr) = mean_stderr(&col(|r| r.aoi_over_n));
            let (throughput_mean, throughput_stderr) = mean_stderr(&col(|r| r.throughput));
            SummaryRow {
                policy,
                n,
                replications: rs.len(),
                aoi_mean,
                aoi_stderr,
                aoi_over_n_mean,
                aoi_over_n_stderr,
                throughput_mean,
                throughput_stderr,
            }
        })
        .collect();
    let mut by_policy: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for r in &rows {
        by_policy
            .entry(r.policy.clone())
            .or_default()
            .push((r.n as f64, r.aoi_mean));
    }
    let slopes = by_policy
        .into_iter()
        .filter_map(|(p, pts)| least_squares_slope(&pts).map(|s| (p, s)))
        .collect();
    let summary = Summary { rows, slopes };
    args.out
        .emit("summarize", args, &summary, || summary.rows.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (1..6).map(|x| (x as f64, 2.5 * x as f64 + 1.0)).collect();
        assert!((least_squares_slope(&pts).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(least_squares_slope(&pts[..1]), None);
    }

    #[test]
    fn stderr() {
        let (m, s) = mean_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(mean_stderr(&[4.0]), (4.0, None));
    }
}
