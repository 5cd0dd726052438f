use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use riemopt_bench::output::{write_json, write_outputs};
use riemopt_bench::run::diverged;
use riemopt_bench::verify_cmd::VERIFY_TOLERANCE;
use riemopt_bench::{run_experiment, sweep, BenchError, ExperimentConfig, SweepConfig};

#[derive(Parser)]
#[command(name = "bench", version, about = "Run riemopt experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Online Fréchet mean on hyperbolic space
    Frechet(Common),
    /// Quadratic logdet game on SPD matrices
    Quadgame(Common),
    /// Robust geometry-aware PCA game
    RobustPca(Common),
    /// Geometry probes
    Verify(Common),
    /// Several configs, seeds and horizons in parallel
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rounds: Option<usize>,
}

fn single(expected: &str, args: &Common) -> Result<(), BenchError> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.name() != expected {
        return Err(BenchError::Config(format!(
            "experiment: config is `{}` but the subcommand expects `{expected}`",
            cfg.name()
        )));
    }
    if let Some(s) = args.seed {
        cfg.set_seed(s);
    }
    if let Some(r) = args.rounds {
        if r == 0 {
            return Err(BenchError::Config("rounds: must be at least 1".into()));
        }
        cfg.set_rounds(r);
    }
    let out = run_experiment(&cfg)?;
    for p in write_outputs(&args.out, cfg.name(), &out)? {
        println!("{}", p.display());
    }
    let bad = diverged(&out.summary);
    if !bad.is_empty() {
        return Err(BenchError::Numeric(format!("diverged: {}", bad.join(", "))));
    }
    if expected == "verify" && out.summary["passed"] != serde_json::Value::Bool(true) {
        return Err(BenchError::Numeric(format!(
            "geometry probes exceeded {VERIFY_TOLERANCE:e}"
        )));
    }
    Ok(())
}

fn run_sweep(args: &Common) -> Result<(), BenchError> {
    let mut cfg = SweepConfig::load(&args.config)?;
    if let Some(s) = args.seed {
        cfg.seeds = vec![s];
    }
    if let Some(r) = args.rounds {
        cfg.rounds = vec![r];
    }
    let summary = sweep(&cfg, Some(&args.out))?;
    let path = args.out.join("sweep.summary.json");
    write_json(&path, &summary)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Frechet(a) => single("frechet", a),
        Command::Quadgame(a) => single("quadgame", a),
        Command::RobustPca(a) => single("robust_pca", a),
        Command::Verify(a) => single("verify", a),
        Command::Sweep(a) => run_sweep(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
