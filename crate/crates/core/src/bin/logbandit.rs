//! Experiment harness: parses a TOML config, dispatches to the matching
//! experiment, and writes trajectory CSVs, a rounded summary JSON, and a
//! manifest hashing every output file.
//!
//! Each subcommand corresponds to one config `kind` and refuses configs of
//! any other kind. Exit status is zero iff the experiment ran and all of its
//! embedded property checks passed, so batch drivers can gate on it.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use logbandit::checks::{run_all, SuiteBudget, SuiteReport};
use logbandit::config::{Config, Kind};
use logbandit::report::{
    output_path, timestamp_now, write_summary_json, write_trajectory_csv, RunManifest,
};
use logbandit::sim::experiments::{
    coverage_experiment, lowerbound_experiment, run_experiment, scaling_experiment,
    transitory_experiment,
};

#[derive(Parser)]
#[command(
    name = "logbandit",
    version,
    about = "Logistic-bandit experiments: confidence-set coverage, optimistic planning, regret scaling, and lower-bound packings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every data-producing subcommand.
#[derive(Args)]
struct DataArgs {
    /// Experiment config (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Base seed; overrides the config's `seed` when given.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Output directory (created if missing).
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
    /// Worker threads for replications; 0 uses all cores.
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct LemmasArgs {
    /// Optional config carrying a `[lemmas]` budget section.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed for the fuzzers; overrides the config's `seed`.
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    /// Directory for the suite report; print-only when absent.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Accepted for interface symmetry; the suites are single-threaded.
    #[arg(long, value_name = "N", default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one policy for a fixed horizon and write its trajectories.
    Run(DataArgs),
    /// Estimate confidence-set coverage under round-robin logging.
    Coverage(DataArgs),
    /// Sweep parameter norms and measure regret against the kappa scaling.
    Scaling(DataArgs),
    /// Compare detrimental-arm pull dynamics across policies.
    Transitory(DataArgs),
    /// Run the packing construction against the optimistic policy.
    Lowerbound(DataArgs),
    /// Fuzz the supporting analytic inequalities.
    VerifyLemmas(LemmasArgs),
}

/// One entry of the summary's pass/fail table.
#[derive(Debug, Serialize)]
struct PropertyCheck {
    name: &'static str,
    passed: bool,
    detail: String,
}

impl PropertyCheck {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        PropertyCheck { name, passed, detail }
    }
}

/// The summary file layout shared by every kind: the experiment's own
/// results plus the config echo and the property table.
#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    kind: &'a str,
    seed: u64,
    config: &'a Config,
    results: &'a T,
    property_checks: &'a [PropertyCheck],
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("one or more property checks failed");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => data_command(args, Kind::Run),
        Command::Coverage(args) => data_command(args, Kind::Coverage),
        Command::Scaling(args) => data_command(args, Kind::Scaling),
        Command::Transitory(args) => data_command(args, Kind::Transitory),
        Command::Lowerbound(args) => data_command(args, Kind::Lowerbound),
        Command::VerifyLemmas(args) => verify_lemmas(args),
    }
}

fn init_threads(threads: usize) -> Result<()> {
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("thread pool already initialized")?;
    }
    Ok(())
}

fn load_config(path: &Path, expected: Kind) -> Result<Config> {
    let cfg = Config::from_path(path)
        .with_context(|| format!("loading config {}", path.display()))?;
    if cfg.kind != expected {
        bail!(
            "config {} has kind `{}` but the `{}` subcommand was invoked",
            path.display(),
            cfg.kind.as_str(),
            expected.as_str()
        );
    }
    Ok(cfg)
}

fn data_command(args: DataArgs, kind: Kind) -> Result<bool> {
    init_threads(args.threads)?;
    let cfg = load_config(&args.config, kind)?;
    let seed = args.seed.or(cfg.seed).unwrap_or(0);
    let started_at = timestamp_now();

    let inst = cfg
        .require_instance()?
        .to_instance()
        .context("building the problem instance")?;

    // Run the experiment; on failure, still leave a manifest recording what
    // was attempted and why it aborted.
    let outcome = dispatch(&cfg, kind, &inst, seed, &args.out);
    let (files, checks) = match outcome {
        Ok(v) => v,
        Err(e) => {
            let manifest = manifest_for(&cfg, kind, seed, args.threads, started_at)?;
            std::fs::create_dir_all(&args.out)?;
            let failed = RunManifest { error: Some(format!("{e:#}")), ..manifest };
            failed.write(&args.out, &[])?;
            return Err(e);
        }
    };

    let manifest = manifest_for(&cfg, kind, seed, args.threads, started_at)?;
    manifest.write(&args.out, &files)?;

    let all_passed = report_checks(&checks);
    println!(
        "{}: wrote {} file(s) to {}",
        kind.as_str(),
        files.len() + 1,
        args.out.display()
    );
    Ok(all_passed)
}

fn manifest_for(
    cfg: &Config,
    kind: Kind,
    seed: u64,
    threads: usize,
    started_at: String,
) -> Result<RunManifest> {
    Ok(RunManifest {
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        kind: kind.as_str().to_string(),
        config_digest: cfg.digest()?,
        seed,
        threads,
        started_at,
        finished_at: timestamp_now(),
        files: Vec::new(),
        error: None,
    })
}

/// Runs the experiment for `kind`, writes its data files, and returns the
/// file list plus the property table.
fn dispatch(
    cfg: &Config,
    kind: Kind,
    inst: &logbandit::problem::ProblemInstance,
    seed: u64,
    out: &Path,
) -> Result<(Vec<String>, Vec<PropertyCheck>)> {
    let mut files = Vec::new();
    let checks = match kind {
        Kind::Run => {
            let section = cfg.run.as_ref().expect("validated");
            let (summary, records) = run_experiment(inst, section, seed)?;
            for (k, rec) in records.iter().enumerate() {
                let name = format!("trajectory_{k:03}.csv");
                write_trajectory_csv(&output_path(out, &name)?, &rec.rows)?;
                files.push(name);
            }
            let checks = vec![
                PropertyCheck::new(
                    "optimism_under_coverage",
                    summary.optimism_failures == 0,
                    format!("{} failures / {} checked", summary.optimism_failures, summary.optimism_checked),
                ),
                PropertyCheck::new(
                    "deviation_relaxed_bound",
                    summary.deviation_relaxed_failures == 0,
                    format!(
                        "{} failures / {} checked",
                        summary.deviation_relaxed_failures, summary.deviation_checked
                    ),
                ),
            ];
            write_summary(out, &mut files, cfg, seed, &summary, &checks)?;
            checks
        }
        Kind::Coverage => {
            let section = cfg.coverage.as_ref().expect("validated");
            let summary = coverage_experiment(inst, section, seed)?;
            let bound = section.delta + 3.0 * summary.exact_failure_se;
            let checks = vec![
                PropertyCheck::new(
                    "coverage_within_delta",
                    summary.degenerate_delta || summary.exact_failure_probability <= bound,
                    format!(
                        "failure rate {:.4} vs delta + 3se = {:.4}",
                        summary.exact_failure_probability, bound
                    ),
                ),
                PropertyCheck::new(
                    "relaxed_covers_exact",
                    summary.episodes_with_relaxed_failure <= summary.episodes_with_exact_failure,
                    format!(
                        "relaxed failures {} <= exact failures {}",
                        summary.episodes_with_relaxed_failure, summary.episodes_with_exact_failure
                    ),
                ),
            ];
            write_summary(out, &mut files, cfg, seed, &summary, &checks)?;
            checks
        }
        Kind::Scaling => {
            let section = cfg.scaling.as_ref().expect("validated");
            let summary = scaling_experiment(inst, section, seed)?;
            let optimism_failures: u64 = summary.cells.iter().map(|c| c.optimism_failures).sum();
            let deviation_relaxed: u64 =
                summary.cells.iter().map(|c| c.deviation_relaxed_failures).sum();
            let checks = vec![
                PropertyCheck::new(
                    "optimism_under_coverage",
                    optimism_failures == 0,
                    format!("{optimism_failures} failures across cells"),
                ),
                PropertyCheck::new(
                    "deviation_relaxed_bound",
                    deviation_relaxed == 0,
                    format!("{deviation_relaxed} failures across cells"),
                ),
            ];
            write_summary(out, &mut files, cfg, seed, &summary, &checks)?;
            checks
        }
        Kind::Transitory => {
            let section = cfg.transitory.as_ref().expect("validated");
            let summary = transitory_experiment(inst, section, seed)?;
            let checks = Vec::new();
            write_summary(out, &mut files, cfg, seed, &summary, &checks)?;
            checks
        }
        Kind::Lowerbound => {
            let section = cfg.lowerbound.as_ref().expect("validated");
            let summary = lowerbound_experiment(inst, section, seed)?;
            let mut checks = vec![PropertyCheck::new(
                "constant_policy_floor",
                summary.constant_policy.clears_half_closed_form,
                format!(
                    "measured {:.3} vs half closed form {:.3}",
                    summary.constant_policy.measured_regret,
                    0.5 * summary.constant_policy.closed_form
                ),
            )];
            if summary.in_asymptotic_regime {
                checks.push(PropertyCheck::new(
                    "packing_ratio_floor",
                    summary.ratio_to_target >= 0.02,
                    format!("worst-member ratio {:.4} vs floor 0.02", summary.ratio_to_target),
                ));
            }
            write_summary(out, &mut files, cfg, seed, &summary, &checks)?;
            checks
        }
        Kind::VerifyLemmas => unreachable!("handled by its own subcommand"),
    };
    Ok((files, checks))
}

fn write_summary<T: Serialize>(
    out: &Path,
    files: &mut Vec<String>,
    cfg: &Config,
    seed: u64,
    results: &T,
    checks: &[PropertyCheck],
) -> Result<()> {
    let summary = Summary {
        kind: cfg.kind.as_str(),
        seed,
        config: cfg,
        results,
        property_checks: checks,
    };
    write_summary_json(&output_path(out, "summary.json")?, &summary)?;
    files.push("summary.json".to_string());
    Ok(())
}

/// Prints the property table; returns whether everything passed.
fn report_checks(checks: &[PropertyCheck]) -> bool {
    let mut all = true;
    for c in checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        println!("[{status}] {}: {}", c.name, c.detail);
        all &= c.passed;
    }
    all
}

#[derive(Serialize)]
struct LemmasResults {
    cases: u64,
    sequences: u64,
    sequence_horizon: usize,
    suites: Vec<SuiteReport>,
}

fn verify_lemmas(args: LemmasArgs) -> Result<bool> {
    init_threads(args.threads)?;
    let cfg = match &args.config {
        Some(path) => Some(load_config(path, Kind::VerifyLemmas)?),
        None => None,
    };
    let section = cfg
        .as_ref()
        .and_then(|c| c.lemmas.clone())
        .unwrap_or_default();
    let seed = args
        .seed
        .or(cfg.as_ref().and_then(|c| c.seed))
        .unwrap_or(0);
    let budget = SuiteBudget {
        scalar_cases: section.cases,
        matrix_sequences: section.sequences,
        matrix_horizon: section.sequence_horizon,
    };

    let started_at = timestamp_now();
    let reports = run_all(seed, &budget);

    println!(
        "{:<28} {:>10} {:>11} {:>14}  status",
        "suite", "cases", "violations", "worst margin"
    );
    let mut all = true;
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        println!(
            "{:<28} {:>10} {:>11} {:>14.3e}  {status}",
            r.name, r.cases, r.violations, r.worst_margin
        );
        all &= r.passed();
    }

    if let Some(out) = &args.out {
        let results = LemmasResults {
            cases: budget.scalar_cases,
            sequences: budget.matrix_sequences,
            sequence_horizon: budget.matrix_horizon,
            suites: reports.clone(),
        };
        let checks: Vec<PropertyCheck> = reports
            .iter()
            .map(|r| {
                PropertyCheck::new(
                    r.name,
                    r.passed(),
                    format!("{} violations / {} cases", r.violations, r.cases),
                )
            })
            .collect();
        let mut files = Vec::new();
        let fallback = Config {
            kind: Kind::VerifyLemmas,
            seed: None,
            instance: None,
            run: None,
            coverage: None,
            scaling: None,
            transitory: None,
            lowerbound: None,
            lemmas: Some(section.clone()),
        };
        let cfg_ref = cfg.as_ref().unwrap_or(&fallback);
        write_summary(out, &mut files, cfg_ref, seed, &results, &checks)?;
        let manifest = RunManifest {
            package_version: env!("CARGO_PKG_VERSION").to_string(),
            kind: Kind::VerifyLemmas.as_str().to_string(),
            config_digest: cfg_ref.digest()?,
            seed,
            threads: args.threads,
            started_at,
            finished_at: timestamp_now(),
            files: Vec::new(),
            error: None,
        };
        manifest.write(out, &files)?;
    }
    Ok(all)
}
