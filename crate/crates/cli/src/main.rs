//! `selforg`: run catalog scenarios or JSON configs into output bundles.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use cavity_selforg::config::{parse_config_value, RunConfig};
use cavity_selforg::scenarios::{catalog, SCENARIO_NAMES};
use cavity_selforg::{runner, Error};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "selforg", version, about = "Cold atoms self-organizing in a driven lossy cavity")]
struct Cli {
    /// Only print warnings and errors.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a catalog scenario, a JSON config, or replay a bundle manifest.
    Run(RunArgs),
    /// List catalog scenarios with their members.
    ListScenarios,
    /// Resolve a config or scenario name and print it without running.
    Validate {
        /// Scenario name or path to a JSON config.
        target: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario name or path to a JSON config / manifest.
    target: String,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $SELFORG_OUT_DIR/<scenario>, else ./selforg-out/<scenario>].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores). Does not change results.
    #[arg(long)]
    workers: Option<usize>,
    /// Multiply the number of initial conditions.
    #[arg(long)]
    scale_ensemble: Option<f64>,
    /// Multiply run times and switch times.
    #[arg(long)]
    scale_time: Option<f64>,
    /// Multiply N at fixed collective couplings.
    #[arg(long)]
    scale_atoms: Option<f64>,
    /// Replace an earlier bundle in the output directory.
    #[arg(long)]
    force: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let mut msg = e.to_string();
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(&format!("\n  caused by: {s}"));
                src = s.source();
            }
            eprintln!("error: {msg}");
            ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_RUNTIME })
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::ListScenarios => {
            for name in SCENARIO_NAMES {
                let set = catalog(name)?;
                println!("{name}");
                for s in set {
                    println!(
                        "  {:<28} N={:<5} trajectories={:<6} t_end={:<8} {}",
                        s.label,
                        s.params.n_atoms,
                        s.ensemble.len(),
                        s.integrator.t_end,
                        s.description
                    );
                }
            }
            Ok(())
        }
        Command::Validate { target } => {
            let config = parse_config_value(load_target(&target)?)?;
            let text = serde_json::to_string_pretty(&config).expect("config serializes");
            println!("{text}");
            Ok(())
        }
        Command::Run(args) => run(args),
    }
}

fn run(args: RunArgs) -> Result<(), Error> {
    let mut value = load_target(&args.target)?;
    let is_manifest = value.get("schema_version").is_some();
    let result_flags = args.seed.is_some()
        || args.scale_ensemble.is_some()
        || args.scale_time.is_some()
        || args.scale_atoms.is_some();
    if is_manifest && result_flags {
        return Err(Error::invalid("target", "a manifest replay takes only --out, --workers and --force"));
    }
    if !is_manifest {
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::Parse { path: ".".into(), message: "config must be a JSON object".into() })?;
        if let Some(seed) = args.seed {
            obj.insert("master_seed".into(), json!(seed));
        }
        for (key, v) in [("ensemble", args.scale_ensemble), ("time", args.scale_time), ("atoms", args.scale_atoms)] {
            if let Some(v) = v {
                let scale = obj.entry("scale").or_insert_with(|| json!({}));
                if let Some(scale) = scale.as_object_mut() {
                    scale.insert(key.into(), json!(v));
                }
            }
        }
    }
    let mut config: RunConfig = parse_config_value(value)?;
    if let Some(w) = args.workers {
        config.workers = w;
    }
    let out = args
        .out
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| default_out_dir(&config.source));
    let bundle = runner::execute(&config, &out, args.force)?;
    log::info!("wrote {} files to {}", bundle.files.len() + 2, bundle.root.display());
    println!("{}", bundle.root.display());
    Ok(())
}

fn default_out_dir(source: &str) -> PathBuf {
    let base = std::env::var_os("SELFORG_OUT_DIR").map_or_else(|| PathBuf::from("selforg-out"), PathBuf::from);
    base.join(source)
}

/// A catalog name becomes `{"scenario": name}`; anything else is read as a
/// JSON file.
fn load_target(target: &str) -> Result<Value, Error> {
    if SCENARIO_NAMES.contains(&target) {
        return Ok(json!({ "scenario": target }));
    }
    let path = PathBuf::from(target);
    if !path.exists() {
        return Err(Error::UnknownScenario(format!(
            "{target} (not a file; known scenarios: {})",
            SCENARIO_NAMES.join(", ")
        )));
    }
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: format!("{}: line {} column {}", path.display(), e.line(), e.column()),
        message: e.to_string(),
    })
}
