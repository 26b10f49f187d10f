//! Batch experiments over generated instances.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{cost_ratio_hypothesis, exact_optimum, theoretical_bounds, DEFAULT_CANDIDATE_LIMIT};
use crate::greedy::{check_feasibility, smart_select};
use crate::lpbound::{lp_lower_bound, LpOptions};
use crate::model::Instance;
use crate::repair::{destroy_and_repair, improvement_percent, RepairConfig};
use crate::scenarios::{generate, Setup};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HOPNET_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    SmartSelect,
    DestroyRepair,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown algorithm `{0}`; expected ss or dr")]
pub struct UnknownAlgorithm(pub String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ss" | "smartselect" => Ok(Algorithm::SmartSelect),
            "dr" => Ok(Algorithm::DestroyRepair),
            other => Err(UnknownAlgorithm(other.to_string())),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BatchConfig {
    pub setup: Setup,
    pub seeds: Vec<u64>,
    pub algorithms: BTreeSet<Algorithm>,
    pub with_lp: bool,
    pub with_exact: bool,
    pub lp: LpOptions<f64>,
    pub repair: RepairConfig,
    pub exact_limit: usize,
}

impl BatchConfig {
    pub fn new(setup: Setup, seeds: Vec<u64>) -> Self {
        BatchConfig {
            setup,
            seeds,
            algorithms: BTreeSet::from([Algorithm::SmartSelect, Algorithm::DestroyRepair]),
            with_lp: true,
            with_exact: false,
            lp: LpOptions::default(),
            repair: RepairConfig::default(),
            exact_limit: DEFAULT_CANDIDATE_LIMIT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BenchError {
    #[error("no seeds given")]
    NoSeeds,
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Wall-clock seconds per algorithm call.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowTiming {
    pub ss: Option<f64>,
    pub dr: Option<f64>,
    pub lp: Option<f64>,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRow {
    pub seed: u64,
    pub feasible: bool,
    pub ss: Option<f64>,
    pub dr: Option<f64>,
    pub lp: Option<f64>,
    pub lp_early_stopped: Option<bool>,
    pub exact: Option<f64>,
    /// Failures of individual algorithms on this instance.
    pub errors: Vec<String>,
    pub timing: RowTiming,
}

/// Ratios against the LP bound over rows that have both values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ratios {
    /// Mean cost over the rows used.
    pub mean_cost: Option<f64>,
    /// Mean cost divided by mean LP bound.
    pub average: Option<f64>,
    pub worst: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregates {
    pub instances: usize,
    pub feasible: usize,
    pub mean_lp: Option<f64>,
    pub ss: Ratios,
    pub dr: Ratios,
    pub exact: Ratios,
    /// `100 (mean SS - mean DR) / mean SS` over rows with both costs.
    pub improvement_mean: Option<f64>,
    /// Largest per-instance improvement of DR over SS, in percent.
    pub improvement_max: Option<f64>,
    /// Worst-case greedy guarantee for this setup's source count and costs.
    pub theoretical_ss_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stat {
    pub mean: Option<f64>,
    pub max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSummary {
    pub ss: Stat,
    pub dr: Stat,
    pub lp: Stat,
    pub exact: Stat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchReport {
    pub setup: u8,
    pub rows: Vec<InstanceRow>,
    pub aggregates: Aggregates,
    pub timing: TimingSummary,
}

/// Worker count: `HOPNET_THREADS` if set to a positive integer, otherwise
/// the available parallelism.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    std::env::var(THREADS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()).filter(|&n| n > 0).unwrap_or(available)
}

fn to_f64(c: &Rational64) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed().as_secs_f64())
}

fn run_instance(instance: &Instance, seed: u64, config: &BatchConfig) -> InstanceRow {
    let mut row = InstanceRow {
        seed,
        feasible: check_feasibility(instance).feasible,
        ss: None,
        dr: None,
        lp: None,
        lp_early_stopped: None,
        exact: None,
        errors: Vec::new(),
        timing: RowTiming::default(),
    };
    if !row.feasible {
        return row;
    }

    let wants_ss = config.algorithms.contains(&Algorithm::SmartSelect);
    let wants_dr = config.algorithms.contains(&Algorithm::DestroyRepair);
    if wants_ss || wants_dr {
        let (greedy, t_ss) = timed(|| smart_select(instance));
        match greedy {
            Ok(greedy) => {
                if wants_ss {
                    row.ss = Some(to_f64(&greedy.design.cost));
                    row.timing.ss = Some(t_ss);
                }
                if wants_dr {
                    // the repair phase starts from the greedy design, so its time is included
                    let (out, t_dr) = timed(|| destroy_and_repair(instance, &greedy.design, &config.repair));
                    row.dr = Some(to_f64(&out.design.cost));
                    row.timing.dr = Some(t_ss + t_dr);
                }
            }
            Err(e) => row.errors.push(format!("smartselect: {e}")),
        }
    }
    if config.with_lp {
        let (cert, t) = timed(|| lp_lower_bound::<_, f64>(instance, &config.lp));
        match cert {
            Ok(cert) => {
                row.lp = Some(cert.bound);
                row.lp_early_stopped = Some(cert.early_stopped);
                row.timing.lp = Some(t);
            }
            Err(e) => row.errors.push(format!("lp: {e}")),
        }
    }
    if config.with_exact {
        let (sol, t) = timed(|| exact_optimum(instance, config.exact_limit));
        match sol {
            Ok(Some(sol)) => {
                row.exact = Some(to_f64(&sol.design.cost));
                row.timing.exact = Some(t);
            }
            Ok(None) => row.errors.push("exact: no feasible design".into()),
            Err(e) => row.errors.push(format!("exact: {e}")),
        }
    }
    row
}

/// Runs the configured algorithms on every seed, in parallel, and
/// aggregates the results in seed order.
pub fn run_batch(config: &BatchConfig) -> Result<BenchReport, BenchError> {
    if config.seeds.is_empty() {
        return Err(BenchError::NoSeeds);
    }
    let pool =
        rayon::ThreadPoolBuilder::new().num_threads(worker_count()).build().map_err(|e| BenchError::Pool(e.to_string()))?;
    let rows: Vec<InstanceRow> = pool.install(|| {
        use rayon::prelude::*;
        config
            .seeds
            .par_iter()
            .map(|&seed| {
                let instance: Instance = generate(config.setup, seed);
                run_instance(&instance, seed, config)
            })
            .collect()
    });
    Ok(assemble(config.setup, rows))
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

fn max(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    values.into_iter().fold(None, |m, v| Some(m.map_or(v, |m: f64| m.max(v))))
}

/// Ratio aggregates for one cost column.
pub fn ratios(rows: &[InstanceRow], cost: impl Fn(&InstanceRow) -> Option<f64>) -> Ratios {
    let pairs: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.feasible).filter_map(|r| Some((cost(r)?, r.lp?))).collect();
    let costs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let bounds: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let average = mean(&costs).zip(mean(&bounds)).map(|(c, b)| c / b);
    Ratios { mean_cost: mean(&costs), average, worst: max(pairs.iter().map(|&(c, b)| c / b)) }
}

/// Greedy guarantee with the largest `m̄` satisfying the cost-ratio
/// hypothesis, if any.
pub fn theoretical_ss_bound(setup: Setup) -> Option<f64> {
    let s = setup.scenario();
    let c_s = Rational64::from_integer(s.c_s);
    let c_r = Rational64::from_integer(s.c_r);
    let m_bar = (1..s.sources).take_while(|&mb| cost_ratio_hypothesis(mb, s.h_max, &c_s, &c_r)).last()?;
    theoretical_bounds(s.sources, m_bar, s.h_max, &c_s, &c_r).ok().map(|b| to_f64(&b.smart_select))
}

/// Builds the report from per-instance rows.
pub fn assemble(setup: Setup, rows: Vec<InstanceRow>) -> BenchReport {
    let feasible: Vec<&InstanceRow> = rows.iter().filter(|r| r.feasible).collect();
    let both: Vec<(f64, f64)> = feasible.iter().filter_map(|r| Some((r.ss?, r.dr?))).collect();
    let mean_ss = mean(&both.iter().map(|p| p.0).collect::<Vec<_>>());
    let mean_dr = mean(&both.iter().map(|p| p.1).collect::<Vec<_>>());
    let lp: Vec<f64> = feasible.iter().filter_map(|r| r.lp).collect();
    let aggregates = Aggregates {
        instances: rows.len(),
        feasible: feasible.len(),
        mean_lp: mean(&lp),
        ss: ratios(&rows, |r| r.ss),
        dr: ratios(&rows, |r| r.dr),
        exact: ratios(&rows, |r| r.exact),
        improvement_mean: mean_ss.zip(mean_dr).map(|(s, d)| improvement_percent(s, d)),
        improvement_max: max(both.iter().map(|&(s, d)| improvement_percent(s, d))),
        theoretical_ss_bound: theoretical_ss_bound(setup),
    };
    let stat = |f: fn(&RowTiming) -> Option<f64>| {
        let v: Vec<f64> = rows.iter().filter_map(|r| f(&r.timing)).collect();
        Stat { mean: mean(&v), max: max(v.iter().copied()) }
    };
    let timing = TimingSummary { ss: stat(|t| t.ss), dr: stat(|t| t.dr), lp: stat(|t| t.lp), exact: stat(|t| t.exact) };
    BenchReport { setup: setup.number(), rows, aggregates, timing }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown format `{0}`; expected table, json or csv")]
pub struct UnknownFormat(pub String);

impl FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(Format::Table),
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

fn cell(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.digits$}"))
}

pub fn emit_report(report: &BenchReport, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Csv => emit_csv(report),
        Format::Table => emit_table(report),
    }
}

fn emit_csv(report: &BenchReport) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "setup", "seed", "feasible", "ss", "dr", "lp", "lp_early_stopped", "exact", "errors", "ss_time", "dr_time",
        "lp_time", "exact_time",
    ])
    .expect("in-memory write");
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in &report.rows {
        w.write_record([
            report.setup.to_string(),
            r.seed.to_string(),
            r.feasible.to_string(),
            opt(r.ss),
            opt(r.dr),
            opt(r.lp),
            r.lp_early_stopped.map(|b| b.to_string()).unwrap_or_default(),
            opt(r.exact),
            r.errors.join("; "),
            opt(r.timing.ss),
            opt(r.timing.dr),
            opt(r.timing.lp),
            opt(r.timing.exact),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn emit_table(report: &BenchReport) -> String {
    let a = &report.aggregates;
    let mut out = String::new();
    let _ = writeln!(out, "setup {}: {} instances, {} feasible", report.setup, a.instances, a.feasible);
    let _ = writeln!(out);
    let _ = writeln!(out, "{:>6} {:>8} {:>8} {:>8} {:>10} {:>8} {:>7} {:>7}", "seed", "feasible", "SS", "DR", "LP", "exact", "SS/LP", "DR/LP");
    for r in &report.rows {
        let ratio = |c: Option<f64>| c.zip(r.lp).map(|(c, b)| c / b);
        let lp = match (r.lp, r.lp_early_stopped) {
            (Some(v), Some(true)) => format!("{v:.3}*"),
            (v, _) => cell(v, 3),
        };
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>8} {:>8} {:>10} {:>8} {:>7} {:>7}",
            r.seed,
            if r.feasible { "yes" } else { "no" },
            cell(r.ss, 2),
            cell(r.dr, 2),
            lp,
            cell(r.exact, 2),
            cell(ratio(r.ss), 3),
            cell(ratio(r.dr), 3),
        );
        for e in &r.errors {
            let _ = writeln!(out, "{:>6} error: {e}", "");
        }
    }
    if report.rows.iter().any(|r| r.lp_early_stopped == Some(true)) {
        let _ = writeln!(out, "  * LP stopped at the round limit; the value is still a lower bound");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<6} {:>13} {:>11} {:>15}", "", "average ratio", "worst ratio", "theoretical SS");
    let _ = writeln!(out, "{:<6} {:>13} {:>11} {:>15}", "SS", cell(a.ss.average, 3), cell(a.ss.worst, 3), cell(a.theoretical_ss_bound, 3));
    let _ = writeln!(out, "{:<6} {:>13} {:>11} {:>15}", "DR", cell(a.dr.average, 3), cell(a.dr.worst, 3), "");
    if a.exact.mean_cost.is_some() {
        let _ = writeln!(out, "{:<6} {:>13} {:>11} {:>15}", "exact", cell(a.exact.average, 3), cell(a.exact.worst, 3), "");
    }
    let _ = writeln!(out);
    let _ = writeln!(out, "DR improvement over SS (%): mean {}, max {}", cell(a.improvement_mean, 2), cell(a.improvement_max, 2));
    let _ = writeln!(out);
    let t = &report.timing;
    let _ = writeln!(out, "{:<10} {:>10} {:>10}", "time (s)", "mean", "max");
    for (name, s) in [("SS", &t.ss), ("DR", &t.dr), ("LP", &t.lp), ("exact", &t.exact)] {
        if s.mean.is_some() {
            let _ = writeln!(out, "{:<10} {:>10} {:>10}", name, cell(s.mean, 4), cell(s.max, 4));
        }
    }
    out
}

/// Plain coordinate listing for external plotting: one `node id kind x y`
/// line per node, then one `edge a b` line per edge.
pub fn layout_text(instance: &Instance) -> String {
    let mut out = String::new();
    for n in instance.nodes() {
        let (x, y) = n.position.unwrap_or((f64::NAN, f64::NAN));
        let _ = writeln!(out, "node {} {} {} {}", n.id, n.kind.label(), x, y);
    }
    for (a, b) in instance.edges() {
        let _ = writeln!(out, "edge {a} {b}");
    }
    out
}
