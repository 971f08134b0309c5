use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mapt::driver::{emit_trace, run_file, Method, RunConfig};
use mapt::io::InputFormat;
use mapt::RunError;

#[derive(Parser)]
#[command(name = "mapt", version, about = "Tighten LP relaxations of MAP-MRF problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum MethodArg {
    Sac,
    Fr,
    Fr1,
    None,
}

#[derive(Copy, Clone, ValueEnum)]
enum FormatArg {
    Uai,
    Native,
}

#[derive(Subcommand)]
enum Command {
    /// Run dual ascent with cluster tightening and print the bound trace.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "uai")]
        format: FormatArg,
        #[arg(long, value_enum, default_value = "sac")]
        method: MethodArg,
        /// Wall-clock budget in seconds.
        #[arg(long, default_value_t = 300.0)]
        time_limit: f64,
        #[arg(long, default_value_t = 100)]
        stage_passes: usize,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 3)]
        dmax: usize,
        /// Write the bound trace as CSV here instead of stdout.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Build and verify one certificate per SAC stage.
        #[arg(long)]
        certify: bool,
    },
}

fn main() -> ExitCode {
    let Command::Solve {
        input,
        format,
        method,
        time_limit,
        stage_passes,
        eps,
        dmax,
        trace,
        certify,
    } = Cli::parse().command;
    let config = RunConfig {
        method: match method {
            MethodArg::Sac => Method::Sac,
            MethodArg::Fr => Method::Fr,
            MethodArg::Fr1 => Method::Fr1,
            MethodArg::None => Method::None,
        },
        time_limit,
        stage_passes,
        eps0: eps,
        dmax0: dmax,
        certify,
        ..RunConfig::default()
    };
    let format = match format {
        FormatArg::Uai => InputFormat::Uai,
        FormatArg::Native => InputFormat::Native,
    };
    let outcome = match run_file(&input, format, &config) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                RunError::Parse(_) => 1,
                _ => 2,
            });
        }
    };
    for c in &outcome.certificates {
        eprintln!(
            "certificate stage {} (r={}, s={}, eps={}, gain={}, max B={}): {}",
            c.stage,
            c.r,
            c.s,
            c.eps,
            c.gain,
            c.max_branching,
            if c.passed { "verified" } else { "FAILED" }
        );
        for line in c.detail.lines() {
            eprintln!("  {line}");
        }
    }
    let written = match &trace {
        Some(path) => emit_trace(&outcome.trace, path),
        None => mapt::driver::write_trace(&outcome.trace, std::io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    eprintln!(
        "final bound {:.9} with {} triplets ({:?})",
        outcome.trace.final_bound().unwrap_or(f64::NAN),
        outcome.model.num_triplets(),
        outcome.stop
    );
    if outcome.certificates.iter().any(|c| !c.passed) {
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
