use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qrex::harness::{emit, parse_config, run_scenario, ExperimentConfig, Format, OutputConfig, Records, RunOptions, Scenario};
use qrex::Error;

#[derive(Parser)]
#[command(name = "qrex", version, about = "Spectral gaps, mixing times and replica exchange for quantum Gibbs samplers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral gap of the single and replica-exchange generators at one point.
    Gap(Flags),
    /// Gap sweep over J or β.
    Sweep(Flags),
    /// Trace-distance mixing time with gap-based bounds.
    Mixing(Flags),
    /// Run every invariant check; exit code 1 on any failure.
    Verify(Flags),
    /// Closed-form θ against quadrature on 401 points.
    Theta(Flags),
    /// Classical Glauber and replica-exchange baseline.
    Classical(Flags),
}

#[derive(Args)]
struct Flags {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest superoperator side length.
    #[arg(long)]
    max_dim: Option<usize>,
    /// Worker threads for independent points.
    #[arg(long)]
    parallel: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 2,
        Error::ResourceGuard(_) => 3,
        _ => 1,
    }
}

fn load(scenario: Scenario, flags: &Flags) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &flags.config {
        Some(p) => parse_config(p)?,
        None => ExperimentConfig::default_for(scenario),
    };
    if cfg.scenario != scenario {
        return Err(Error::Config(format!(
            "scenario: configuration declares {:?} but the {:?} subcommand was invoked",
            cfg.scenario.name(),
            scenario.name()
        )));
    }
    if let Some(s) = flags.seed {
        cfg.seed = s;
    }
    if let Some(m) = flags.max_dim {
        cfg.max_dim = m;
    }
    if flags.out.is_some() || flags.format.is_some() {
        let base = cfg.output.clone().unwrap_or(OutputConfig { path: None, format: Format::Json });
        cfg.output = Some(OutputConfig {
            path: flags.out.as_ref().map(|p| p.display().to_string()).or(base.path),
            format: flags.format.map(Format::from).unwrap_or(base.format),
        });
    }
    if flags.parallel == Some(0) {
        return Err(Error::Config("--parallel: must be at least 1".into()));
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(scenario: Scenario, flags: &Flags) -> Result<bool, Error> {
    let cfg = load(scenario, flags)?;
    let report = run_scenario(&cfg, RunOptions { parallel: flags.parallel })?;
    let (path, format) = match &cfg.output {
        Some(o) => (o.path.as_ref().map(PathBuf::from), o.format),
        None => (None, Format::Json),
    };
    emit(&report, format, path.as_deref())?;
    if let Records::Verify(rows) = &report.records {
        for r in rows.iter().filter(|r| !r.passed) {
            eprintln!("FAIL {}: value {:e}, threshold {:e}", r.name, r.value, r.threshold);
        }
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, flags) = match &cli.command {
        Command::Gap(f) => (Scenario::Gap, f),
        Command::Sweep(f) => (Scenario::Sweep, f),
        Command::Mixing(f) => (Scenario::Mixing, f),
        Command::Verify(f) => (Scenario::Verify, f),
        Command::Theta(f) => (Scenario::Theta, f),
        Command::Classical(f) => (Scenario::Classical, f),
    };
    match run(scenario, flags) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
