//! Command-line front end: generate ensembles (`gen`), run verifier suites
//! (`verify`), analyze single states (`markov`), and scan the trace statistic
//! (`scan`).
//!
//! Exit code contract: 0 exactly when every sample passed (for `markov`, when
//! the verdict is conclusive). The `ENTROPY_GAP_THREADS` environment variable
//! caps the worker pool; numeric report content never depends on it.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::markov::{self, EnsembleKind, MarkovVerdict};
use crate::report::{self, ReportFormat, RunConfig, Suite};
use crate::states::{derive_seed, MultipartiteState};

pub const THREADS_ENV: &str = "ENTROPY_GAP_THREADS";

#[derive(Parser)]
#[command(
    name = "entropy-gap",
    version,
    about = "Verify entropy inequality chains and Markov operators on sampled quantum states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an ensemble of state files.
    Gen(GenArgs),
    /// Run a verifier suite and write a report; nonzero exit on any failure.
    Verify(VerifyArgs),
    /// Full Markov-operator diagnostics for one tripartite state.
    Markov(MarkovArgs),
    /// Scan the Markov-operator trace statistic over a random ensemble.
    Scan(ScanArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Ensemble kind.
    #[arg(long, value_enum, default_value = "hs")]
    kind: CliEnsemble,
    /// Subsystem dimensions, comma separated (e.g. 2,2,2).
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    dims: Vec<usize>,
    /// Number of states to generate.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Base seed; state i uses seed ^ i.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for the state files.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliEnsemble {
    Hs,
    Pure,
    MarkovClassicalC,
}

impl From<CliEnsemble> for EnsembleKind {
    fn from(k: CliEnsemble) -> Self {
        match k {
            CliEnsemble::Hs => EnsembleKind::Hs,
            CliEnsemble::Pure => EnsembleKind::Pure,
            CliEnsemble::MarkovClassicalC => EnsembleKind::MarkovClassicalC,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Which suite to run (`all` runs every suite).
    #[arg(long, value_enum)]
    suite: CliSuite,
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    dims: Vec<usize>,
    /// Samples per suite (ignored when --input files are given).
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Tolerance for exact identities.
    #[arg(long = "tol-id", default_value_t = 1e-8)]
    tol_identity: f64,
    /// Slack for inequalities.
    #[arg(long = "tol-ineq", default_value_t = 1e-8)]
    tol_inequality: f64,
    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    format: CliFormat,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// State files to verify instead of generated samples. Suites over pairs
    /// consume two files per sample in order; the general identity consumes
    /// four (the tripartite state, then the AC, BC and C operators).
    #[arg(long, num_args = 1..)]
    input: Vec<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliSuite {
    Substate,
    NormSandwich,
    Monotonicity,
    Bipartite,
    Cmi,
    Berta,
    BertaGeneral,
    MarginalMono,
    SuperSsa,
    SigmaSubstate,
    TwoMarginal,
    GoldenThompson,
    Markov,
    Scan,
    All,
}

impl From<CliSuite> for Suite {
    fn from(s: CliSuite) -> Self {
        match s {
            CliSuite::Substate => Suite::Substate,
            CliSuite::NormSandwich => Suite::NormSandwich,
            CliSuite::Monotonicity => Suite::Monotonicity,
            CliSuite::Bipartite => Suite::Bipartite,
            CliSuite::Cmi => Suite::Cmi,
            CliSuite::Berta => Suite::Berta,
            CliSuite::BertaGeneral => Suite::BertaGeneral,
            CliSuite::MarginalMono => Suite::MarginalMono,
            CliSuite::SuperSsa => Suite::SuperSsa,
            CliSuite::SigmaSubstate => Suite::SigmaSubstate,
            CliSuite::TwoMarginal => Suite::TwoMarginal,
            CliSuite::GoldenThompson => Suite::GoldenThompson,
            CliSuite::Markov => Suite::Markov,
            CliSuite::Scan => Suite::Scan,
            CliSuite::All => Suite::All,
        }
    }
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum CliFormat {
    Json,
    Csv,
}

#[derive(Args)]
struct MarkovArgs {
    /// Tripartite state file to analyze; a random state is generated from
    /// --dims/--seed when omitted.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Tolerance for the trace criterion.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,2,2")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Ensemble to scan.
    #[arg(long, value_enum, default_value = "hs")]
    kind: CliEnsemble,
    /// Summary path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn install_thread_cap() -> Result<()> {
    if let Ok(raw) = std::env::var(THREADS_ENV) {
        let n: usize = raw.parse().map_err(|_| {
            Error::InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
        if n == 0 {
            return Err(Error::InvalidConfig(format!("{THREADS_ENV} must be >= 1")));
        }
        // a second initialization keeps the first pool; that only affects
        // speed, never report content
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn write_or_print(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            std::fs::write(path, text)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_gen(args: GenArgs) -> Result<ExitCode> {
    if args.n < 1 {
        return Err(Error::InvalidConfig("--n must be >= 1".into()));
    }
    std::fs::create_dir_all(&args.out)?;
    let kind: EnsembleKind = args.kind.into();
    let dims_tag = args
        .dims
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("x");
    let kind_tag = match kind {
        EnsembleKind::Hs => "hs",
        EnsembleKind::Pure => "pure",
        EnsembleKind::MarkovClassicalC => "markov-classical-c",
    };
    for i in 0..args.n as u64 {
        let st = kind.sample(&args.dims, derive_seed(args.seed, i))?;
        let name = format!("{kind_tag}_d{dims_tag}_s{}_i{i:04}.json", args.seed);
        st.write_json(&args.out.join(name))?;
    }
    eprintln!("wrote {} state file(s) to {}", args.n, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = RunConfig {
        suite: args.suite.into(),
        dims: args.dims,
        n_samples: args.n,
        seed: args.seed,
        tol_identity: args.tol_identity,
        tol_inequality: args.tol_inequality,
        input_files: args.input,
        output: args.out.clone(),
        format: match args.format {
            CliFormat::Json => ReportFormat::Json,
            CliFormat::Csv => ReportFormat::Csv,
        },
    };
    let started = Instant::now();
    let suite_report = report::run_suite(&config)?;
    let wall = started.elapsed();

    let rendered = report::write_report(&suite_report, args.out.as_deref())?;
    if args.out.is_none() {
        println!("{rendered}");
    }
    for section in &suite_report.sections {
        let agg = &section.aggregate;
        eprintln!(
            "suite {:<16} {:>6}/{} pass, worst gap {}, worst seed {}",
            section.suite.name(),
            agg.pass_count,
            agg.pass_count + agg.fail_count,
            agg.worst_gap
                .map(|g| format!("{g:.3e}"))
                .unwrap_or_else(|| "n/a".into()),
            agg.worst_sample_seed
                .map(|s| s.to_string())
                .unwrap_or_else(|| "n/a".into()),
        );
    }
    eprintln!("wall time: {:.3}s", wall.as_secs_f64());
    Ok(if suite_report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_markov(args: MarkovArgs) -> Result<ExitCode> {
    let state = match &args.input {
        Some(path) => MultipartiteState::read_json(path)?,
        None => crate::states::random_multipartite_hs(&args.dims, args.seed),
    };
    let report = markov::check_markov_trace_theorem(&state, args.tol)?;
    let text = serde_json::to_string_pretty(&report)?;
    write_or_print(&text, args.out.as_ref())?;
    eprintln!(
        "verdict: {:?} (Tr M = {}, cmi = {:.3e})",
        report.verdict, report.trace_m, report.cmi_rho
    );
    Ok(match report.verdict {
        MarkovVerdict::Markov | MarkovVerdict::NotMarkov => ExitCode::SUCCESS,
        MarkovVerdict::Indeterminate => ExitCode::FAILURE,
    })
}

fn cmd_scan(args: ScanArgs) -> Result<ExitCode> {
    let summary = markov::scan_trace_statistic(&args.dims, args.n, args.seed, args.kind.into())?;
    let text = serde_json::to_string_pretty(&summary)?;
    write_or_print(&text, args.out.as_ref())?;
    eprintln!(
        "Tr M over {} samples: min {:.12}, mean {:.12}, max {:.12}",
        summary.n_samples, summary.min, summary.mean, summary.max
    );
    Ok(ExitCode::SUCCESS)
}

/// Parse arguments, dispatch, and map errors to a nonzero exit.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let result = install_thread_cap().and_then(|()| match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Markov(args) => cmd_markov(args),
        Command::Scan(args) => cmd_scan(args),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
