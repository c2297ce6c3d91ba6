use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{Context, Result};
use homonym_core::collision::{write_curve_csv, write_replicates_csv, LabelSource};
use homonym_core::dist::{loglog_alpha, rank_counts};
use homonym_core::extrapolate::{fit_with, write_predictions_csv, FitOptions};
use homonym_core::pairs::write_residuals_csv;
use homonym_core::*;
use serde::Serialize;

use crate::manifest::OutputDir;
use crate::{ExtrapolateArgs, FitZipfArgs, IndependenceArgs, Mode, PeriodReportArgs, SimulateArgs};

/// Invalid flag combinations detected after parsing.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn in_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon_pool(workers)?;
    Ok(pool.install(f))
}

fn rayon_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .context("starting worker pool")
}

fn frequency_dist(table: &FrequencyTable) -> Result<CategoricalDist> {
    Ok(CategoricalDist::new(
        table.labels.clone(),
        table.counts.iter().map(|&c| c as f64).collect(),
    )?)
}

#[derive(Serialize)]
struct ZipfReport {
    alpha: f64,
    k: usize,
    log_likelihood: f64,
    normalizer: f64,
    /// Least-squares slope on log-log axes; diagnostic only.
    loglog_alpha: Option<f64>,
    total: u64,
}

pub fn fit_zipf(seed: u64, args: FitZipfArgs) -> Result<()> {
    let table = load_frequency_table(&args.input)?;
    let fit = homonym_core::fit_zipf(&table.counts)?;

    let mut out = OutputDir::create(&args.out)?;
    out.json("ingest_report.json", &table.report)?;
    out.json(
        "zipf_fit.json",
        &ZipfReport {
            alpha: fit.alpha,
            k: fit.k,
            log_likelihood: fit.log_likelihood,
            normalizer: fit.normalizer,
            loglog_alpha: loglog_alpha(&table.counts),
            total: table.counts.iter().sum(),
        },
    )?;

    // Stable descending order, matching the ranks used by the fit.
    let mut order: Vec<usize> = (0..table.counts.len()).filter(|&i| table.counts[i] > 0).collect();
    order.sort_by(|&a, &b| table.counts[b].cmp(&table.counts[a]));
    debug_assert_eq!(
        order.iter().map(|&i| table.counts[i]).collect::<Vec<_>>(),
        rank_counts(&table.counts)
    );
    let total = table.counts.iter().sum::<u64>() as f64;
    let mut w = csv::Writer::from_writer(out.file("rank_frequency.csv")?);
    w.write_record([
        "rank",
        "label",
        "count",
        "empirical",
        "fitted",
        "log10_rank",
        "log10_empirical",
        "log10_fitted",
    ])?;
    for (r, &i) in order.iter().enumerate() {
        let rank = r + 1;
        let empirical = table.counts[i] as f64 / total;
        let fitted = fit.pmf(rank);
        w.write_record([
            rank.to_string(),
            table.labels[i].clone(),
            table.counts[i].to_string(),
            empirical.to_string(),
            fitted.to_string(),
            (rank as f64).log10().to_string(),
            empirical.log10().to_string(),
            fitted.log10().to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    out.finish("fit-zipf", seed, &args, &[args.input.as_path()])
}

pub fn simulate(seed: u64, args: SimulateArgs) -> Result<()> {
    let plan = SimulationPlan::new(args.grid.0.clone(), args.replicates, seed)?;
    let mut out = OutputDir::create(&args.out)?;
    let mut inputs: Vec<&Path> = Vec::new();

    let source: Box<dyn LabelSource> = if let Some(path) = &args.pairs {
        let (joint, report) = load_pair_records(path)?;
        out.json("ingest_report.json", &report)?;
        inputs.push(path);
        match args.mode {
            Mode::Pair => Box::new(empirical_pair_sampler(&joint)),
            Mode::Independent => Box::new(independent_product_sampler(&joint)),
        }
    } else {
        if args.mode != Mode::Pair {
            return Err(usage("--mode applies only to --pairs input"));
        }
        if let Some(path) = &args.freq {
            let table = load_frequency_table(path)?;
            out.json("ingest_report.json", &table.report)?;
            inputs.push(path);
            Box::new(frequency_dist(&table)?)
        } else if let Some(z) = &args.zipf {
            let alpha: f64 = z[0]
                .parse()
                .map_err(|_| usage(format!("bad Zipf exponent `{}`", z[0])))?;
            let k: usize = z[1]
                .parse()
                .map_err(|_| usage(format!("bad Zipf support size `{}`", z[1])))?;
            Box::new(zipf_pmf(alpha, k)?)
        } else if let Some(k) = args.uniform {
            Box::new(CategoricalDist::uniform(k)?)
        } else {
            return Err(usage("one of --pairs, --freq, --zipf, --uniform is required"));
        }
    };

    let curve = in_pool(args.workers, || estimate_curve(&plan, source.as_ref()))?;
    write_curve_csv(&curve, true, out.file("curve.csv")?)?;
    if args.long {
        write_replicates_csv(&curve, out.file("replicates.csv")?)?;
    }
    #[derive(Serialize)]
    struct Config<'a> {
        source: String,
        #[serde(flatten)]
        args: &'a SimulateArgs,
    }
    let config = Config {
        source: curve.source.clone(),
        args: &args,
    };
    out.finish("simulate", seed, &config, &inputs)
}

pub fn extrapolate(seed: u64, args: ExtrapolateArgs) -> Result<()> {
    let file = std::fs::File::open(&args.curve).map_err(|source| homonym_core::Error::FileUnreadable {
        path: args.curve.clone(),
        source,
    })?;
    let curve = homonym_core::collision::read_curve_csv(file, &args.curve.display().to_string())?;
    let fit = fit_with(
        &curve,
        &FitOptions {
            transform: args.transform,
            window: args.window,
            weighted: args.weighted,
        },
    )?;
    let mut out = OutputDir::create(&args.out)?;
    out.json("fit.json", &fit)?;
    write_predictions_csv(&fit, &args.targets, out.file("predictions.csv")?)?;
    out.finish("extrapolate", seed, &args, &[args.curve.as_path()])
}

#[derive(Serialize)]
struct ChiSquareReport {
    chi_square: f64,
    dof: u64,
    p_value: f64,
    rows: usize,
    cols: usize,
    total: u64,
}

pub fn independence(seed: u64, args: IndependenceArgs) -> Result<()> {
    if args.m == 0 {
        return Err(usage("--m must be at least 1"));
    }
    let (joint, report) = load_pair_records(&args.pairs)?;
    let rows = args.m.min(joint.k_first());
    let cols = args.m.min(joint.k_last());
    if rows < args.m || cols < args.m {
        eprintln!(
            "warning: --m {} exceeds the support ({} first, {} last names); clipped to {rows}x{cols}",
            args.m,
            joint.k_first(),
            joint.k_last()
        );
    }
    let table = pearson_residuals(&joint, rows, cols)?;
    let mut out = OutputDir::create(&args.out)?;
    out.json("ingest_report.json", &report)?;
    write_residuals_csv(&joint, &table, out.file("residuals.csv")?)?;
    out.json(
        "chi_square.json",
        &ChiSquareReport {
            chi_square: table.chi_square,
            dof: table.dof,
            p_value: table.p_value,
            rows: table.rows.len(),
            cols: table.cols.len(),
            total: joint.total(),
        },
    )?;
    out.finish("independence", seed, &args, &[args.pairs.as_path()])
}

pub fn period_report(seed: u64, args: PeriodReportArgs) -> Result<()> {
    let firsts: BTreeMap<&str, &Path> = args.first.iter().map(|(p, f)| (p.as_str(), f.as_path())).collect();
    let lasts: BTreeMap<&str, &Path> = args.last.iter().map(|(p, f)| (p.as_str(), f.as_path())).collect();
    if firsts.len() != args.first.len() || lasts.len() != args.last.len() {
        return Err(usage("a period is given more than once"));
    }
    if firsts.keys().ne(lasts.keys()) {
        return Err(usage("--first and --last must name the same periods"));
    }
    let plan = SimulationPlan::new(args.grid.0.clone(), args.replicates, seed)?;
    let pool = rayon_pool(args.workers)?;

    let mut out = OutputDir::create(&args.out)?;
    let mut reports = BTreeMap::new();
    let mut shares = csv::Writer::from_writer(out.file("top_share.csv")?);
    shares.write_record(["period", "kind", "size", "distinct", "top10", "top100"])?;
    let mut curves = csv::Writer::from_writer(out.file("period_curves.csv")?);
    curves.write_record(["period", "n", "mean", "stderr", "replicates"])?;

    // Periods in the order given on the command line.
    let mut seen = Vec::new();
    for (period, _) in &args.first {
        if seen.contains(period) {
            continue;
        }
        seen.push(period.clone());
        let mut dists = Vec::with_capacity(2);
        for (kind, path) in [("first", firsts[period.as_str()]), ("last", lasts[period.as_str()])] {
            let table = load_frequency_table(path).with_context(|| format!("period {period}, {kind} names"))?;
            let size: u64 = table.counts.iter().sum();
            shares.write_record([
                period.clone(),
                kind.to_string(),
                size.to_string(),
                table.counts.iter().filter(|&&c| c > 0).count().to_string(),
                top_share(&table.counts, 10)?.to_string(),
                top_share(&table.counts, 100)?.to_string(),
            ])?;
            dists.push(frequency_dist(&table)?);
            reports.insert(format!("{period}/{kind}"), table.report);
        }
        let last = dists.pop().unwrap();
        let first = dists.pop().unwrap();
        let sampler = IndependentPairSampler::from_marginals(first, last);
        let curve = pool.install(|| estimate_curve(&plan, &sampler));
        for p in &curve.points {
            curves.write_record([
                period.clone(),
                p.n.to_string(),
                p.mean.to_string(),
                p.stderr.to_string(),
                p.replicates.to_string(),
            ])?;
        }
    }
    shares.flush()?;
    curves.flush()?;
    drop((shares, curves));
    out.json("ingest_reports.json", &reports)?;
    let inputs: Vec<&Path> = args
        .first
        .iter()
        .chain(&args.last)
        .map(|(_, p)| p.as_path())
        .collect();
    out.finish("period-report", seed, &args, &inputs)
}

