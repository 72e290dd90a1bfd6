use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use nhbath_cli::{apply_override, build_id, config_from_value, run_experiment, Experiment};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "nhbath", version = build_version(), about = "Non-Hermitian photonic bath experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bloch or real-space spectrum, defectivity and optional point-gap winding.
    Spectrum(RunArgs),
    /// Single- or many-emitter dynamics with photon densities.
    Emit(RunArgs),
    /// Excitation transfer between emitters.
    Transfer(RunArgs),
    /// Effective emitter coupling matrix.
    Heff(RunArgs),
    /// Analytic dressed state at the exceptional point.
    Dressed(RunArgs),
    /// Localization measures over a list of loss rates.
    SweepGamma(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a configuration key; the value is parsed as JSON when possible.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn build_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

fn configure_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("NHBATH_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().with_context(|| format!("NHBATH_THREADS={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads()?;

    let (experiment, args) = match cli.command {
        Command::Spectrum(a) => (Experiment::Spectrum, a),
        Command::Emit(a) => (Experiment::Emit, a),
        Command::Transfer(a) => (Experiment::Transfer, a),
        Command::Heff(a) => (Experiment::Heff, a),
        Command::Dressed(a) => (Experiment::Dressed, a),
        Command::SweepGamma(a) => (Experiment::SweepGamma, a),
    };

    let mut value = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => json!({}),
    };
    for assignment in &args.overrides {
        apply_override(&mut value, assignment)?;
    }
    let map = value.as_object_mut().context("configuration must be a JSON object")?;
    match map.get("experiment").and_then(Value::as_str).map(Experiment::parse) {
        None => {
            map.insert("experiment".into(), json!(experiment.as_str()));
        }
        Some(Some(e)) if e == experiment => {}
        Some(_) => bail!("configuration is for experiment {:?}, not {experiment}", map["experiment"]),
    }

    let config = config_from_value(&value)?;
    let files = run_experiment(&config)?;
    println!("{} wrote {} files to {}", build_id(), files.len(), config.output_dir.display());
    for f in files {
        println!("  {f}");
    }
    Ok(())
}
