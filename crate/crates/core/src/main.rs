use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apdg::study::{emit_outputs, run_study, StudyConfig, StudyKind};

#[derive(Parser)]
#[command(name = "apdg", about = "Run verification and convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kinetic solution against the drift-diffusion limit over ε.
    EpsSweep(RunArgs),
    /// Limit solver against a manufactured solution over h.
    HSweep(RunArgs),
    /// Discrete Maxwellian certification.
    Maxwellian(RunArgs),
    /// Energy and moment bounds across ε.
    Stability(RunArgs),
    /// Structural and evolution identities.
    Identities(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// TOML study configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (falls back to the config, then APDG_OUT, then out/<study>).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (falls back to APDG_THREADS).
    #[arg(long)]
    threads: Option<usize>,
}

fn run(kind: StudyKind, args: RunArgs) -> apdg::Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => StudyConfig::load_for(kind, path)?,
        None => StudyConfig::new(kind),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.out.clone())
        .or_else(|| std::env::var_os("APDG_OUT").map(|d| PathBuf::from(d).join(kind.name())))
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let threads = match args.threads {
        Some(n) => Some(n),
        None => match std::env::var("APDG_THREADS") {
            Ok(v) => Some(v.parse().map_err(|_| apdg::Error::Config(format!("APDG_THREADS={v} is not a count")))?),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| apdg::Error::Config(e.to_string()))?;
    let result = pool.install(|| run_study(&cfg))?;
    let files = emit_outputs(&result, &out)?;
    for c in &result.criteria {
        println!("[{}] {}", if c.passed { "PASS" } else { "FAIL" }, c.describe());
    }
    for n in &result.notes {
        println!("note: {n}");
    }
    if result.criteria.is_empty() {
        println!("no assertions");
    }
    println!("wrote {}", files.csv.display());
    Ok(result.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::EpsSweep(a) => (StudyKind::EpsSweep, a),
        Command::HSweep(a) => (StudyKind::HSweep, a),
        Command::Maxwellian(a) => (StudyKind::Maxwellian, a),
        Command::Stability(a) => (StudyKind::Stability, a),
        Command::Identities(a) => (StudyKind::Identities, a),
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
