//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bench::{self, emit_report, layout_text, run_batch, Algorithm, BatchConfig};
use crate::exact::{exact_optimum, DEFAULT_CANDIDATE_LIMIT};
use crate::greedy::smart_select;
use crate::lpbound::{certificate_to_json, lp_lower_bound, LpCertificate, LpOptions};
use crate::model::{design_to_json, instance_to_json, read_design, read_instance, validate, Design, Instance};
use crate::repair::{destroy_and_repair, RepairConfig};
use crate::scenarios::{generate, Setup};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hopnet", version, about = "Sink and relay placement under a hop constraint")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random instance of one of the experimental setups.
    Generate {
        #[arg(long)]
        setup: Setup,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a design for an instance.
    Solve {
        #[arg(long, value_enum, default_value_t = Algo::Smartselect)]
        algo: Algo,
        #[arg(long = "in")]
        input: PathBuf,
        /// Sweep limit of destroy-and-repair.
        #[arg(long, default_value_t = 25)]
        max_iter: usize,
        /// Candidate limit of the exact search.
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_LIMIT)]
        limit: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// LP relaxation lower bound with its cut certificate.
    Bound {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        max_rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
        format: OutputFormat,
    },
    /// Check a design against an instance.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        design: PathBuf,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
    },
    /// Run algorithms over a batch of seeds and report ratios and timings.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    setup: Setup,
    /// `a..b` (end exclusive), `a..=b`, a comma list, or a single seed.
    #[arg(long, value_parser = parse_seeds, default_value = "0..20")]
    seeds: Seeds,
    /// Comma-separated subset of `ss,dr`.
    #[arg(long, value_delimiter = ',', default_value = "ss,dr")]
    algos: Vec<Algorithm>,
    /// Compute the LP lower bound.
    #[arg(long)]
    lp: bool,
    /// Compute exact optima (small instances only).
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 200)]
    max_rounds: usize,
    #[arg(long, default_value = "table", value_parser = ["table", "json", "csv"])]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory receiving one coordinate file per seed.
    #[arg(long)]
    dump_layout: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Smartselect,
    Dr,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Seeds(Vec<u64>);

fn parse_seeds(s: &str) -> Result<Seeds, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|e| format!("bad seed `{t}`: {e}"));
    let seeds = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if seeds.is_empty() {
        return Err(format!("`{s}` names no seeds"));
    }
    Ok(Seeds(seeds))
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(bench::worker_count()).build_global();
    match execute(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILED
        }
    }
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => out.write_all(text.as_bytes()).context("writing output"),
    }
}

fn load(path: &Path) -> Result<Instance> {
    read_instance(path).with_context(|| format!("reading instance {}", path.display()))
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Generate { setup, seed, out: path } => {
            let instance: Instance = generate(setup, seed);
            emit(&instance_to_json(&instance), path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Solve { algo, input, max_iter, limit, out: path, format } => {
            let instance = load(&input)?;
            let design = match solve(&instance, algo, max_iter, limit) {
                Ok(d) => d,
                Err(message) => {
                    writeln!(err, "error: {message}")?;
                    return Ok(EXIT_FAILED);
                }
            };
            let text = match format {
                OutputFormat::Json => design_to_json(&design),
                OutputFormat::Text => design_summary(&design),
            };
            emit(&text, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Bound { input, tol, max_rounds, out: path, format } => {
            let instance = load(&input)?;
            let options = LpOptions { tolerance: tol, max_rounds };
            let cert: LpCertificate<f64> = match lp_lower_bound(&instance, &options) {
                Ok(c) => c,
                Err(e) => {
                    writeln!(err, "error: {e}")?;
                    return Ok(EXIT_FAILED);
                }
            };
            let text = match format {
                OutputFormat::Json => certificate_to_json(&cert),
                OutputFormat::Text => format!(
                    "bound {}\nrounds {}\ncuts {}\nearly stopped {}\n",
                    cert.bound,
                    cert.rounds,
                    cert.constraints.len(),
                    cert.early_stopped
                ),
            };
            emit(&text, path.as_deref(), out)?;
            Ok(EXIT_OK)
        }
        Command::Verify { instance, design, format } => {
            let inst = load(&instance)?;
            let design: Design =
                read_design(&design).with_context(|| format!("reading design {}", design.display()))?;
            let report = validate(&inst, &design);
            let messages: Vec<String> = report.violations.iter().map(ToString::to_string).collect();
            let text = match format {
                OutputFormat::Json => {
                    #[derive(Serialize)]
                    struct Doc<'a> {
                        valid: bool,
                        violations: &'a [String],
                    }
                    let mut s = serde_json::to_string_pretty(&Doc { valid: report.ok(), violations: &messages })?;
                    s.push('\n');
                    s
                }
                OutputFormat::Text if report.ok() => "valid\n".to_string(),
                OutputFormat::Text => {
                    let mut s = format!("invalid: {} violation(s)\n", messages.len());
                    for m in &messages {
                        s.push_str(&format!("  {m}\n"));
                    }
                    s
                }
            };
            out.write_all(text.as_bytes())?;
            Ok(if report.ok() { EXIT_OK } else { EXIT_FAILED })
        }
        Command::Bench(args) => {
            let mut config = BatchConfig::new(args.setup, args.seeds.0);
            config.algorithms = args.algos.into_iter().collect();
            config.with_lp = args.lp;
            config.with_exact = args.exact;
            config.lp.max_rounds = args.max_rounds;
            if let Some(dir) = &args.dump_layout {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                for &seed in &config.seeds {
                    let instance: Instance = generate(config.setup, seed);
                    let path = dir.join(format!("setup{}_seed{seed}.txt", config.setup));
                    fs::write(&path, layout_text(&instance)).with_context(|| format!("writing {}", path.display()))?;
                }
            }
            let report = run_batch(&config)?;
            let format = args.format.parse().expect("restricted by clap");
            emit(&emit_report(&report, format), args.out.as_deref(), out)?;
            Ok(EXIT_OK)
        }
    }
}

fn solve(instance: &Instance, algo: Algo, max_iter: usize, limit: usize) -> Result<Design, String> {
    match algo {
        Algo::Smartselect => smart_select(instance).map(|s| s.design).map_err(|e| e.to_string()),
        Algo::Dr => {
            let initial = smart_select(instance).map_err(|e| e.to_string())?.design;
            let config = RepairConfig { max_iterations: max_iter, ..RepairConfig::default() };
            Ok(destroy_and_repair(instance, &initial, &config).design)
        }
        Algo::Exact => match exact_optimum(instance, limit) {
            Ok(Some(sol)) => Ok(sol.design),
            Ok(None) => Err("infeasible: no design meets the hop bound".into()),
            Err(e) => Err(e.to_string()),
        },
    }
}

fn design_summary(design: &Design) -> String {
    let ids = |set: &std::collections::BTreeSet<_>| set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
    let mut s = format!("cost {}\nsinks {}\nrelays {}\n", design.cost, ids(&design.selected_sinks), ids(&design.selected_relays));
    for (q, route) in &design.routes {
        let path: Vec<String> = route.path.iter().map(ToString::to_string).collect();
        s.push_str(&format!("route {q}: {}\n", path.join(" -> ")));
    }
    s
}
