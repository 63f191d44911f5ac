//! `rcx`: experiment driver for the random-cluster toolkit.

mod commands;
mod config;
mod output;

use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Overrides, Settings};
use output::{Artifacts, ErrorRecord};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] rcx_core::Error),
    #[error("io: {0}")]
    Io(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        use rcx_core::Error as E;
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                E::CapExceeded { .. } => "cap_exceeded",
                E::NotCoalesced { .. } => "not_coalesced",
                E::IndexOverflow { .. } => "index_overflow",
                E::Divisibility { .. } => "divisibility",
                E::InvalidBoundary(_) => "invalid_boundary",
                E::NonIntegerQ(_) => "non_integer_q",
                E::WindowTooSmall(_) => "window_too_small",
                E::InvalidArgument(_) => "invalid_argument",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Core(rcx_core::Error::CapExceeded { .. }) => 3,
            CliError::Core(rcx_core::Error::NotCoalesced { .. }) => 4,
            CliError::Config(_) | CliError::Core(_) => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "rcx", version, about = "Random-cluster dynamics experiments")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Exact partition functions, identities and the tilted pressure.
    Enumerate,
    /// Perfect samples of a window by coupling from the past.
    SampleCftp,
    /// Sandwiched Glauber runs for a fixed time.
    GlauberRun,
    /// Good/bad classification and information-cluster tails.
    CoarseScan,
    /// Polymer weights and the cluster-expansion series at one activity.
    Expand,
    /// Perturbative pressure over the activity grid.
    Pressure,
    /// Correlation ratio for a set of edges over the activity grid.
    Correlate,
    /// Boundary-influence and closedness probes for n = 1..N.
    ProbeHypotheses,
    /// Point disagreement of the sandwich after time alpha * n.
    MixingProbe,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Enumerate => "enumerate",
            Command::SampleCftp => "sample-cftp",
            Command::GlauberRun => "glauber-run",
            Command::CoarseScan => "coarse-scan",
            Command::Expand => "expand",
            Command::Pressure => "pressure",
            Command::Correlate => "correlate",
            Command::ProbeHypotheses => "probe-hypotheses",
            Command::MixingProbe => "mixing-probe",
        }
    }

    fn run(self, s: &Settings, out: &mut Artifacts) -> Result<(), CliError> {
        match self {
            Command::Enumerate => commands::enumerate(s, out),
            Command::SampleCftp => commands::sample_cftp(s, out),
            Command::GlauberRun => commands::glauber_run(s, out),
            Command::CoarseScan => commands::coarse_scan(s, out),
            Command::Expand => commands::expand(s, out),
            Command::Pressure => commands::pressure(s, out),
            Command::Correlate => commands::correlate(s, out),
            Command::ProbeHypotheses => commands::probe_hypotheses(s, out),
            Command::MixingProbe => commands::mixing_probe(s, out),
        }
    }
}

fn report(e: &CliError) {
    let record = ErrorRecord::from(e);
    match serde_json::to_string(&record) {
        Ok(text) => eprintln!("{text}"),
        Err(_) => eprintln!("{e}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let name = cli.command.name();
    let out_dir = cli.overrides.out.clone().unwrap_or_else(|| Settings::default().out);
    let mut artifacts = match Artifacts::create(&out_dir) {
        Ok(a) => a,
        Err(e) => {
            report(&e);
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let (settings, result) = match Settings::resolve(&cli.overrides) {
        Ok(s) => {
            let r = cli.command.run(&s, &mut artifacts);
            (Some(s), r)
        }
        Err(e) => (None, Err(e)),
    };
    let error = result.err();
    let seconds = start.elapsed().as_secs_f64();
    if let Err(e) = artifacts.finish(name, settings.as_ref(), error.as_ref(), seconds) {
        report(&e);
        return ExitCode::from(e.exit_code() as u8);
    }
    match error {
        Some(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
        None => ExitCode::SUCCESS,
    }
}
