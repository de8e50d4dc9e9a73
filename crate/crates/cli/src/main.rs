use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use revkam::{dispatch, parse_system, CandidateKind, CliError, CliResult, Command, Output, RunConfig};

/// Normal forms, KAM iteration and torus checks for reversible systems.
#[derive(Debug, Parser)]
#[command(name = "revkam", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// System description (JSON).
    system: PathBuf,
    /// Cut-off γ; measure-scan uses the ladder γ, γ/10, γ/100.
    #[arg(long)]
    gamma: Option<f64>,
    /// Diophantine exponent τ (default d + 0.5).
    #[arg(long)]
    tau: Option<f64>,
    /// Fourier radius |k|∞ of the computation (default K).
    #[arg(long)]
    kmax: Option<usize>,
    /// Normal-form order (default N).
    #[arg(long)]
    order: Option<usize>,
    /// Number of KAM stages.
    #[arg(long)]
    mmax: Option<usize>,
    /// Grid nodes per axis (kam-run), sweep points (freq-map) or phases
    /// (verify-torus).
    #[arg(long)]
    grid: Option<usize>,
    /// Seed for Monte-Carlo and ball sampling
    #[arg(long)]
    seed: Option<u64>,
    /// Integrator tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Monte-Carlo sample count.
    #[arg(long)]
    samples: Option<usize>,
    /// Integration horizon T.
    #[arg(long)]
    horizon: Option<f64>,
    /// Parameter point ξ (comma separated); the sweep direction for freq-map.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    xi: Option<Vec<f64>>,
    /// Frequency η (comma separated).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eta: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    candidate: Option<CandidateKind>,
    /// Report path; CSV tables go beside it as <stem>.<table>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

fn emit(out: &Output, path: Option<&Path>) -> CliResult<()> {
    let json = out.report.to_json();
    let Some(path) = path else {
        print!("{json}");
        return Ok(());
    };
    write(path, &json)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("report");
    for t in &out.tables {
        let csv = path.with_file_name(format!("{stem}.{}.csv", t.name));
        write(&csv, &t.to_csv())?;
        eprintln!("wrote {}", csv.display());
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn run(args: Args) -> CliResult<()> {
    let loaded = parse_system(&args.system)?;
    let cfg = RunConfig {
        gamma: args.gamma,
        tau: args.tau,
        kmax: args.kmax,
        order: args.order,
        m_max: args.mmax,
        grid: args.grid,
        seed: args.seed,
        tol: args.tol,
        samples: args.samples,
        horizon: args.horizon,
        xi: args.xi,
        eta: args.eta,
        candidate: args.candidate,
        out: args.out.clone(),
    };
    let out = dispatch(args.command, &loaded, &cfg)?;
    emit(&out, args.out.as_deref())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
