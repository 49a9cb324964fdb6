//! `pi1-obstruct`: list, certify and verify circle-action obstruction cases.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use pi1_core::certify::certify;
use pi1_core::verify::{run_suite, Suite};
use pi1_core::zoo::cases::{case_by_id, case_ids};

use config::{CaseConfig, FileConfig, Format, LoadError, Overrides, RunConfig};
use output::{CaseOutcome, CertifyDocument, ListRow, VerifyDocument};

/// Exit statuses.
const OK: u8 = 0;
const EXPECTATION_FAILED: u8 = 1;
const USAGE: u8 = 2;
const IO: u8 = 3;

/// Caps the rayon pool size.
const THREADS_ENV: &str = "PI1_OBSTRUCT_THREADS";

#[derive(Parser)]
#[command(
    name = "pi1-obstruct",
    version,
    about = "Certify circle-action obstruction integrals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in cases.
    List {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Run the certification pipeline and write a report.
    Certify(CertifyArgs),
    /// Run property suites (all when none given).
    Verify(VerifyArgs),
}

#[derive(Args)]
struct CertifyArgs {
    /// Case ids, comma separated or repeated; `all` for every case.
    #[arg(long = "case", value_name = "ID")]
    cases: Vec<String>,
    /// TOML file with global keys and `[case.<id>]` sections.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid nodes per axis.
    #[arg(long)]
    nodes: Option<usize>,
    /// Monte Carlo samples.
    #[arg(long)]
    samples: Option<usize>,
    /// Monte Carlo seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_membership: Option<f64>,
    #[arg(long)]
    tol_invariance: Option<f64>,
    /// Report path; stdout when absent. Existing files are not overwritten without --force.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Include per-case wall time; reports are then no longer reproducible byte for byte.
    #[arg(long)]
    timings: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// curvature, kernels, loopspace, quadrature.
    suites: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    force: bool,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| match cli.command {
        Command::List { format } => list(format),
        Command::Certify(args) => certify_cmd(args),
        Command::Verify(args) => verify_cmd(args),
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        fail(
            USAGE,
            format!("{THREADS_ENV} must be a positive integer, got '{raw}'"),
        )
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| fail(USAGE, format!("cannot size thread pool: {e}")))
}

fn list(format: Format) -> Result<u8, Failure> {
    let rows = case_ids()
        .iter()
        .map(|id| case_by_id(id).map(|c| ListRow::of(&c)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| fail(USAGE, e.to_string()))?;
    print!("{}", output::render_list(&rows, format));
    Ok(OK)
}

fn certify_cmd(args: CertifyArgs) -> Result<u8, Failure> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path).map_err(|e| match e {
            LoadError::Io(m) => fail(IO, m),
            LoadError::Parse(m) => fail(USAGE, m),
        })?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        nodes: args.nodes,
        samples: args.samples,
        seed: args.seed,
        tol_membership: args.tol_membership,
        tol_invariance: args.tol_invariance,
    };
    let config =
        RunConfig::resolve(file, &args.cases, flags, args.format).map_err(|e| fail(USAGE, e.0))?;
    if let (Some(out), Some(cfg)) = (&args.out, &args.config) {
        if same_path(out, cfg) {
            return Err(fail(
                IO,
                format!(
                    "output path {} collides with the config file",
                    out.display()
                ),
            ));
        }
    }
    check_output(args.out.as_ref(), args.force)?;

    let outcomes: Vec<CaseOutcome> = config
        .cases
        .par_iter()
        .map(|id| run_case(id, config.overrides_for(id, &flags), args.timings))
        .collect();
    let all_met = outcomes.iter().all(CaseOutcome::expectation_met);
    let doc = CertifyDocument {
        config: &config,
        reports: outcomes,
        all_expectations_met: all_met,
    };
    write_output(
        args.out.as_ref(),
        &output::render_certify(&doc, config.format),
    )?;
    Ok(if all_met { OK } else { EXPECTATION_FAILED })
}

fn run_case(id: &str, overrides: Overrides, timings: bool) -> CaseOutcome {
    let start = Instant::now();
    let mut case = match case_by_id(id) {
        Ok(c) => c,
        Err(e) => return CaseOutcome::error(id, "", None, e.to_string(), None),
    };
    overrides.apply(&mut case);
    let result = certify(&case);
    let ms = timings.then(|| start.elapsed().as_millis() as u64);
    let config = CaseConfig::of(&case);
    match result {
        Ok(report) => CaseOutcome::Report {
            report,
            config,
            wall_time_ms: ms,
        },
        Err(e) => CaseOutcome::error(
            id,
            &case.section,
            Some((case.expected, config)),
            e.to_string(),
            ms,
        ),
    }
}

fn verify_cmd(args: VerifyArgs) -> Result<u8, Failure> {
    let suites = if args.suites.is_empty() {
        Suite::ALL.to_vec()
    } else {
        args.suites
            .iter()
            .map(|s| s.parse::<Suite>().map_err(|e| fail(USAGE, e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    };
    check_output(args.out.as_ref(), args.force)?;
    let results: Vec<_> = suites.into_iter().flat_map(run_suite).collect();
    let passed = results.iter().all(|r| r.passed);
    let doc = VerifyDocument {
        all_passed: passed,
        properties: results,
    };
    write_output(args.out.as_ref(), &output::render_verify(&doc, args.format))?;
    Ok(if passed { OK } else { EXPECTATION_FAILED })
}

fn same_path(a: &PathBuf, b: &PathBuf) -> bool {
    match (a.canonicalize(), b.canonicalize()) {
        (Ok(x), Ok(y)) => x == y,
        _ => a == b,
    }
}

/// Refuses to clobber an existing report unless forced.
fn check_output(out: Option<&PathBuf>, force: bool) -> Result<(), Failure> {
    match out {
        Some(path) if path.exists() && !force => Err(fail(
            IO,
            format!(
                "output path {} already exists; pass --force to overwrite",
                path.display()
            ),
        )),
        Some(path) if path.is_dir() => Err(fail(
            IO,
            format!("output path {} is a directory", path.display()),
        )),
        _ => Ok(()),
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| fail(IO, format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
