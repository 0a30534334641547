use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinphonon_cli::{config, run_and_emit, CliError, Kind, RunConfig};

/// Output directory override, below `--out` and above the config file.
const OUT_ENV: &str = "SPINPHONON_OUT";

#[derive(Parser)]
#[command(name = "spinphonon", version, about = "Spin-phonon STIRAP simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single-phonon preparation by optically driven Rabi oscillation.
    Odro(Common),
    /// Phonon population vs two-laser offset and time.
    Chevron(Common),
    /// Phonon-mediated two-spin swap.
    Swap(Common),
    /// STIRAP CZ gate with process tomography.
    Cz(Common),
    /// CZ process fidelity over spin coherence times.
    Robustness(Common),
    /// One-excitation Dicke state preparation.
    Dicke(Common),
    /// ODRO vs STIRAP under static spectral diffusion.
    SdBenchmark(Common),
    /// Dark-subspace leakage along the CZ schedule.
    Leakage(Common),
    /// Carrier light shift fit against the closed form.
    AcStark(Common),
    /// CZ schedule design: hold durations, phases and pulse table.
    PulseDesign(Common),
    /// Dark-state amplitudes for given drive amplitudes.
    Darkstate(Common),
    /// Print the JSON schema of summary.json.
    Schema,
}

#[derive(clap::Args)]
struct Common {
    /// TOML configuration; omitted fields take the table defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; defaults to the available cores.
    #[arg(long)]
    jobs: Option<usize>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Check the configuration, print the effective version and stop.
    #[arg(long)]
    validate_only: bool,
}

fn dispatch(kind: Kind, args: Common) -> Result<(), CliError> {
    let raw = match &args.config {
        Some(p) => config::parse_config(p)?,
        None => RunConfig::default(),
    };
    let mut raw = raw;
    if let Some(s) = args.seed {
        raw.seed = Some(s);
        raw.sd.seed = s;
    }
    let cfg = raw.resolve(kind)?;
    if args.validate_only {
        print!("{}", config::to_toml(&cfg)?);
        return Ok(());
    }
    if let Some(j) = args.jobs {
        if j == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    }
    let out = args
        .out
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let summary = run_and_emit(&cfg, &out, args.plot)?;
    println!("{}", serde_json::to_string_pretty(&summary["results"]).unwrap_or_default());
    eprintln!("wrote {}", out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Odro(a) => (Kind::Odro, a),
        Command::Chevron(a) => (Kind::Chevron, a),
        Command::Swap(a) => (Kind::Swap, a),
        Command::Cz(a) => (Kind::Cz, a),
        Command::Robustness(a) => (Kind::Robustness, a),
        Command::Dicke(a) => (Kind::Dicke, a),
        Command::SdBenchmark(a) => (Kind::SdBenchmark, a),
        Command::Leakage(a) => (Kind::Leakage, a),
        Command::AcStark(a) => (Kind::AcStark, a),
        Command::PulseDesign(a) => (Kind::PulseDesign, a),
        Command::Darkstate(a) => (Kind::Darkstate, a),
        Command::Schema => {
            print!("{}", spinphonon_cli::schema::SUMMARY_SCHEMA);
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(kind, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
