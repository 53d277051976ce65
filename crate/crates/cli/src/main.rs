use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use jtwist_core::boundary::CaseId;
use jtwist_core::error::Error;
use jtwist_core::report::{self, Format, OmegaDisplay, RunConfig, VerificationReport};

/// Exact symbolic and numeric verification of the boundary heat-kernel coefficient
/// of a twisted Dirac operator.
#[derive(Parser, Debug)]
#[command(name = "jtwist", version)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the lemma suites (Clifford traces, relations, residues, sphere moments,
    /// fixture audit, symbol composition).
    Lemmas,
    /// Compute one case, compare it with its published table and adjudicate any mismatch.
    /// Takes exactly one `--case`.
    Phi,
    /// Every case, every published table, the oracle, the degeneration checks and the lemmas.
    All,
    /// Compare every selected case with the numeric pipeline on random instances.
    Oracle,
}

#[derive(Args, Debug)]
struct Opts {
    /// Key-value run configuration; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Boundary-point fixture replacing the shipped one.
    #[arg(long, global = true)]
    fixture: Option<PathBuf>,
    /// Directory of target tables overriding the shipped ones.
    #[arg(long, global = true)]
    targets: Option<PathBuf>,
    /// Case(s) to run: a1, a2, a3, b, c or a table label such as phi4 (comma separated).
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_case)]
    case: Option<Vec<CaseId>>,
    /// Number of random instances for oracle checks.
    #[arg(long, global = true)]
    seeds: Option<usize>,
    /// Relative tolerance of oracle comparisons.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Relative tolerance of the quadrature.
    #[arg(long, global = true)]
    quad_tolerance: Option<f64>,
    #[arg(long, global = true, value_enum)]
    omega: Option<OmegaArg>,
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Output directory.
    #[arg(long, global = true, env = "JTWIST_OUT_DIR")]
    out: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum OmegaArg {
    Evaluated,
    Factored,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Md,
    Both,
}

fn parse_case(s: &str) -> Result<CaseId, String> {
    s.parse::<CaseId>().map_err(|e| e.to_string())
}

fn config(o: &Opts) -> jtwist_core::error::Result<RunConfig> {
    let mut c = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = &o.fixture {
        c.fixture = Some(v.clone());
    }
    if let Some(v) = &o.targets {
        c.targets = Some(v.clone());
    }
    if let Some(v) = &o.case {
        c.cases = v.clone();
    }
    if let Some(v) = o.seeds {
        c.seeds = v;
    }
    if let Some(v) = o.tolerance {
        c.tolerance = v;
    }
    if let Some(v) = o.quad_tolerance {
        c.quad_tolerance = v;
    }
    if let Some(v) = o.omega {
        c.omega = match v {
            OmegaArg::Evaluated => OmegaDisplay::Evaluated,
            OmegaArg::Factored => OmegaDisplay::Factored,
        };
    }
    if let Some(v) = o.format {
        c.format = match v {
            FormatArg::Json => Format::Json,
            FormatArg::Md => Format::Md,
            FormatArg::Both => Format::Both,
        };
    }
    if let Some(v) = &o.out {
        c.out = v.clone();
    }
    let src = o.config.as_ref().map_or("command line".into(), |p| p.display().to_string());
    c.validate().map_err(|msg| Error::Config { file: src, line: 0, msg })?;
    Ok(c)
}

fn run(cli: &Cli) -> anyhow::Result<VerificationReport> {
    let cfg = config(&cli.opts)?;
    let fx = cfg.load_fixture()?;
    let rep = match &cli.cmd {
        Cmd::Lemmas => report::run_lemma_report(&cfg, &fx)?,
        Cmd::Phi => match cli.opts.case.as_deref() {
            Some([case]) => report::run_phi(&cfg, &fx, *case)?,
            _ => return Err(Error::Config { file: "command line".into(), line: 0, msg: "`phi` needs exactly one --case".into() }.into()),
        },
        Cmd::All => report::run_all(&cfg, &fx)?,
        Cmd::Oracle => report::run_oracle(&cfg, &fx)?,
    };
    let written = rep.write(&cfg.out, cfg.format).with_context(|| format!("writing report to {}", cfg.out.display()))?;
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(rep)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rep) => {
            let s = &rep.summary;
            for w in &s.explained_mismatches {
                eprintln!("warning: {w}");
            }
            for e in s.fixture_problems.iter().chain(&s.unexplained).chain(&s.failed_checks) {
                eprintln!("error: {e}");
            }
            println!("{}", if rep.exit_code() == 0 { "PASS" } else { "FAIL" });
            ExitCode::from(rep.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let input = matches!(
                e.downcast_ref::<Error>(),
                Some(Error::Fixture { .. } | Error::Config { .. } | Error::UnknownId(_) | Error::Parse(_))
            );
            ExitCode::from(if input { 2 } else { 1 })
        }
    }
}
