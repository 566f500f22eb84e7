//! `cda` — generate, verify, analyze, and localize with constrained
//! detecting arrays.
//!
//! Exit codes: 0 success (verification passed / generation finished, even
//! on budget exhaustion), 1 verification violation, 2 usage or budget
//! errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use cda_core::cda_heuristic::generate_heuristic_cda;
use cda_core::cda_sat::{generate_min_cda_with, SatSearchOptions};
use cda_core::localize::{annotate, identify, reduce_to_minimal, run_tests, Diagnosis};
use cda_core::model::SutModel;
use cda_core::verify::{self, Mode, Variant, Verdict, VerifyOptions, Violation};
use cda_core::{cca, interactions, io, Algorithm, GenerationReport};

/// Default generation budget when neither `--budget-ms` nor the
/// `CDA_BUDGET_MS` environment variable is set (the benchmark protocol's
/// per-run timeout).
const DEFAULT_BUDGET_MS: u64 = 1_800_000;

#[derive(Parser)]
#[command(
    name = "cda",
    version,
    about = "Constrained detecting arrays: generation, verification, and fault localization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an array and write it with its report.
    Generate(GenerateArgs),
    /// Verify an array against a model.
    Verify(VerifyArgs),
    /// Print interaction-space statistics for a model.
    Analyze(AnalyzeArgs),
    /// Identify faulty interactions from a test outcome.
    Localize(LocalizeArgs),
    /// Run the generators repeatedly over a directory of models.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Algo {
    Sat,
    Heuristic,
    Cca,
}

#[derive(Args)]
struct GenerateArgs {
    /// Model file (.sut).
    #[arg(long)]
    model: PathBuf,
    #[arg(long, value_enum)]
    algo: Algo,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Wall-clock budget in milliseconds; defaults to CDA_BUDGET_MS or 1800000.
    #[arg(long)]
    budget_ms: Option<u64>,
    /// Run this many seeds (seed, seed+1, ...) and keep the smallest array.
    #[arg(long, default_value_t = 1)]
    repeat: u64,
    /// Output array CSV path (default `<model>_<algo>_d<d>_t<t>.csv`).
    #[arg(long)]
    out_array: Option<PathBuf>,
    /// Output report JSON path (default `<model>_<algo>_d<d>_t<t>.json`).
    #[arg(long)]
    out_report: Option<PathBuf>,
    /// Dump each size's CNF query in DIMACS format into this directory.
    #[arg(long)]
    dump_dimacs: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Array CSV to check.
    #[arg(long)]
    array: PathBuf,
    /// Property to check.
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long)]
    t: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    d_mode: ModeArg,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    t_mode: ModeArg,
    /// Report every violation instead of the first.
    #[arg(long)]
    all_witnesses: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    Cca,
    Cla,
    Cda,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Exact,
    AtMost,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::AtMost => Mode::AtMost,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Emit machine-readable JSON instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct LocalizeArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    array: PathBuf,
    /// Outcome CSV (`row,PASS|FAIL`); field-data mode.
    #[arg(long, conflicts_with = "faulty")]
    outcome: Option<PathBuf>,
    /// Faulty interactions to simulate, e.g. `price=usd50,address=domestic;payment=gift_card`.
    #[arg(long)]
    faulty: Option<String>,
    /// Target strength.
    #[arg(long)]
    t: usize,
    /// Identify interactions of strength at most t instead of exactly t.
    #[arg(long)]
    at_most: bool,
    /// Prune flagged interactions that contain another flagged interaction.
    #[arg(long)]
    reduce_minimal: bool,
    /// Annotate against this assumed faulty set (defaults to --faulty).
    #[arg(long)]
    assume: Option<String>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory holding .sut model files.
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value_t = 1)]
    d: usize,
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Comma-separated algorithms to run.
    #[arg(long, default_value = "sat,heuristic")]
    algos: String,
    /// Repetitions per model and algorithm; seeds are 0..repeat.
    #[arg(long, default_value_t = 5)]
    repeat: u64,
    #[arg(long)]
    budget_ms: Option<u64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    // Die quietly when a pipe reader (e.g. `head`) closes early.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Analyze(args) => cmd_analyze(args),
        Command::Localize(args) => cmd_localize(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn budget_from(arg: Option<u64>) -> Duration {
    let ms = arg
        .or_else(|| {
            std::env::var("CDA_BUDGET_MS")
                .ok()
                .and_then(|v| v.parse().ok())
        })
        .unwrap_or(DEFAULT_BUDGET_MS);
    Duration::from_millis(ms)
}

fn load_model(path: &Path) -> anyhow::Result<SutModel> {
    io::load_model(path).with_context(|| format!("loading model {}", path.display()))
}

fn check_strength(m: &SutModel, t: usize) -> anyhow::Result<()> {
    if t < 1 || t > m.k() {
        bail!(
            "strength t={t} out of range for a model with {} parameters",
            m.k()
        );
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// generate
// ---------------------------------------------------------------------------

fn run_one(
    m: &SutModel,
    algo: Algo,
    d: usize,
    t: usize,
    seed: u64,
    budget: Duration,
    dimacs: &Option<PathBuf>,
) -> cda_core::Result<GenerationReport> {
    match algo {
        Algo::Heuristic => generate_heuristic_cda(m, d, t, seed),
        Algo::Sat => {
            let opts = SatSearchOptions {
                dimacs_dir: dimacs.clone(),
            };
            generate_min_cda_with(m, d, t, seed, budget, &opts)
        }
        Algo::Cca => {
            let started = std::time::Instant::now();
            let array = cca::cca_upper_bound(m, d, t, seed)?;
            let universe = interactions::compute_universe(m, d, t)?;
            let stats = cda_core::AnalysisStats::from_universe(m, &universe)?;
            if !interactions::satisfies_universe(array.rows(), &universe) {
                return Err(cda_core::Error::Format(
                    "covering array failed the detecting check".into(),
                ));
            }
            Ok(GenerationReport {
                model: m.name.clone(),
                algorithm: Algorithm::Cca,
                d,
                t,
                variant: Variant::EXACT,
                size: array.len(),
                wall_time_ms: started.elapsed().as_millis() as u64,
                seed,
                optimal: false,
                stats,
                trace: None,
                size_log: None,
                array,
            })
        }
    }
}

fn cmd_generate(args: GenerateArgs) -> anyhow::Result<ExitCode> {
    let m = load_model(&args.model)?;
    check_strength(&m, args.t)?;
    let budget = budget_from(args.budget_ms);
    if args.repeat == 0 {
        bail!("--repeat must be at least 1");
    }

    // Independent seeded runs; smallest array wins, ties to the lowest seed.
    let seeds: Vec<u64> = (0..args.repeat).map(|i| args.seed + i).collect();
    let mut runs: Vec<GenerationReport> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| {
                let m = &m;
                let dimacs = &args.dump_dimacs;
                scope.spawn(move || run_one(m, args.algo, args.d, args.t, seed, budget, dimacs))
            })
            .collect();
        for handle in handles {
            runs.push(handle.join().expect("generation thread panicked")?);
        }
        anyhow::Ok(())
    })?;
    let report = runs
        .into_iter()
        .min_by_key(|r| (r.size, r.seed))
        .expect("at least one run");

    let stem = args
        .model
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "model".into());
    let algo_name = match args.algo {
        Algo::Sat => "sat",
        Algo::Heuristic => "heuristic",
        Algo::Cca => "cca",
    };
    let base = format!("{stem}_{algo_name}_d{}_t{}", args.d, args.t);
    let array_path = args
        .out_array
        .unwrap_or_else(|| PathBuf::from(format!("{base}.csv")));
    let report_path = args
        .out_report
        .unwrap_or_else(|| PathBuf::from(format!("{base}.json")));

    io::write_array(&array_path, &m, &report.array)?;
    std::fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "{}: {} rows (d={}, t={}, seed {}, {} ms{}) -> {}, {}",
        report.algorithm,
        report.size,
        report.d,
        report.t,
        report.seed,
        report.wall_time_ms,
        if report.optimal { ", optimal" } else { "" },
        array_path.display(),
        report_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

fn violation_json(m: &SutModel, v: &Violation) -> serde_json::Value {
    let label_set = |s: &Option<cda_core::InteractionSet>| {
        s.as_ref()
            .map(|s| s.iter().map(|t| t.label(m)).collect::<Vec<_>>())
    };
    serde_json::json!({
        "kind": v.kind,
        "target": v.target,
        "target_label": v.target.as_ref().map(|t| t.label(m)),
        "set": v.set,
        "set_labels": label_set(&v.set),
        "set2": v.set2,
        "set2_labels": label_set(&v.set2),
        "rows_target": v.rows_target,
        "rows_set": v.rows_set,
    })
}

fn cmd_verify(args: VerifyArgs) -> anyhow::Result<ExitCode> {
    let m = load_model(&args.model)?;
    check_strength(&m, args.t)?;
    let array = io::read_array(&args.array, &m)
        .with_context(|| format!("reading array {}", args.array.display()))?;
    let variant = Variant {
        d_mode: args.d_mode.into(),
        t_mode: args.t_mode.into(),
    };
    let opts = VerifyOptions {
        all_witnesses: args.all_witnesses,
        ..VerifyOptions::default()
    };

    let violations: Vec<Violation> = match args.kind {
        Kind::Cca => match verify::is_cca(&m, &array, args.t) {
            Verdict::Pass => vec![],
            Verdict::Fail(w) => vec![w],
        },
        Kind::Cda => verify::cda_violations(&m, &array, args.d, args.t, variant, &opts)?,
        Kind::Cla => verify::cla_violations(&m, &array, args.d, args.t, variant, &opts)?,
    };

    if violations.is_empty() {
        println!("pass");
        Ok(ExitCode::SUCCESS)
    } else {
        let witnesses: Vec<serde_json::Value> =
            violations.iter().map(|v| violation_json(&m, v)).collect();
        println!("{}", serde_json::to_string_pretty(&witnesses)?);
        Ok(ExitCode::from(1))
    }
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn cmd_analyze(args: AnalyzeArgs) -> anyhow::Result<ExitCode> {
    let m = load_model(&args.model)?;
    check_strength(&m, args.t)?;
    let stats = cda_core::AnalysisStats::compute(&m, args.d, args.t)?;
    if args.json {
        let value = serde_json::json!({
            "model": m.name,
            "parameters": m.k(),
            "constraints": m.constraints.len(),
            "d": args.d,
            "t": args.t,
            "valid_interactions": stats.valid_interactions,
            "invalid_interactions": stats.invalid_interactions,
            "masked_pairs": stats.masked_pairs,
        });
        println!("{}", serde_json::to_string_pretty(&value)?);
    } else {
        println!("model: {}", m.name);
        println!("parameters: {}", m.k());
        println!("constraints: {}", m.constraints.len());
        println!(
            "valid {}-way interactions: {}",
            args.t, stats.valid_interactions
        );
        println!(
            "invalid {}-way interactions: {}",
            args.t, stats.invalid_interactions
        );
        println!("masked pairs (d={}): {}", args.d, stats.masked_pairs);
    }
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// localize
// ---------------------------------------------------------------------------

fn diagnosis_json(
    m: &SutModel,
    diag: &Diagnosis,
    failed: &std::collections::BTreeSet<usize>,
) -> serde_json::Value {
    let flagged: Vec<serde_json::Value> = diag
        .flagged
        .iter()
        .map(|t| {
            serde_json::json!({
                "interaction": t,
                "label": t.label(m),
                "annotation": diag.annotations.get(t),
            })
        })
        .collect();
    serde_json::json!({
        "failed_rows": failed,
        "flagged": flagged,
    })
}

fn cmd_localize(args: LocalizeArgs) -> anyhow::Result<ExitCode> {
    let m = load_model(&args.model)?;
    check_strength(&m, args.t)?;
    let array = io::read_array(&args.array, &m)?;

    let outcome = match (&args.outcome, &args.faulty) {
        (Some(path), None) => io::read_outcome(path, array.len())
            .with_context(|| format!("reading outcome {}", path.display()))?,
        (None, Some(spec)) => {
            let faulty = io::parse_interaction_list(&m, spec)?;
            run_tests(&array, &faulty)
        }
        _ => bail!("exactly one of --outcome or --faulty is required"),
    };

    let mut diag = identify(&array, &outcome, args.t, args.at_most);
    let assumed_spec = args.assume.as_ref().or(args.faulty.as_ref());
    if let Some(spec) = assumed_spec {
        let assumed = io::parse_interaction_list(&m, spec)?;
        diag = annotate(&m, &diag, &assumed);
    }
    if args.reduce_minimal {
        diag = reduce_to_minimal(&diag);
    }
    let failed = outcome.failed_rows();
    println!(
        "{}",
        serde_json::to_string_pretty(&diagnosis_json(&m, &diag, &failed))?
    );
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

fn cmd_bench(args: BenchArgs) -> anyhow::Result<ExitCode> {
    let budget = budget_from(args.budget_ms);
    let algos: Vec<Algo> = args
        .algos
        .split(',')
        .map(|s| match s.trim() {
            "sat" => Ok(Algo::Sat),
            "heuristic" => Ok(Algo::Heuristic),
            "cca" => Ok(Algo::Cca),
            other => bail!("unknown algorithm `{other}`"),
        })
        .collect::<anyhow::Result<_>>()?;

    let mut model_paths: Vec<PathBuf> = std::fs::read_dir(&args.models)
        .with_context(|| format!("reading {}", args.models.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "sut"))
        .collect();
    model_paths.sort();
    if model_paths.is_empty() {
        bail!("no .sut files in {}", args.models.display());
    }

    let mut csv = String::from("model,algorithm,repetition,seed,size,time_ms,optimal\n");
    for path in &model_paths {
        let m = load_model(path)?;
        for &algo in &algos {
            let mut sizes = Vec::new();
            let mut times = Vec::new();
            for rep in 0..args.repeat {
                let report = run_one(&m, algo, args.d, args.t, rep, budget, &None)?;
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    m.name,
                    report.algorithm,
                    rep,
                    rep,
                    report.size,
                    report.wall_time_ms,
                    report.optimal
                ));
                sizes.push(report.size);
                times.push(report.wall_time_ms);
            }
            let avg_size = sizes.iter().sum::<usize>() as f64 / sizes.len() as f64;
            let avg_time = times.iter().sum::<u64>() as f64 / times.len() as f64;
            eprintln!(
                "{} {}: size min {} max {} avg {:.1}; time ms min {} max {} avg {:.1}",
                m.name,
                match algo {
                    Algo::Sat => "sat",
                    Algo::Heuristic => "heuristic",
                    Algo::Cca => "cca",
                },
                sizes.iter().min().unwrap(),
                sizes.iter().max().unwrap(),
                avg_size,
                times.iter().min().unwrap(),
                times.iter().max().unwrap(),
                avg_time
            );
        }
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}
