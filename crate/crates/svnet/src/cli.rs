//! Command-line front end: `run`, `verify`, `figures`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config error,
//! 3 numeric failure.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{
    self, parse_config_with_overrides, resolve, spec_to_manifest, ExperimentConfigFile,
    ResolvedExperiments,
};
use crate::error::{Error, Result};
use crate::sim::{build_instance, monte_carlo, NmsdTrace};
use crate::verify::all_checks;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Bundled experiment behind `figures`: Gaussian noise at alpha = 2.
pub const FIG1_CONFIG: &str = include_str!("../configs/fig1.toml");
/// Bundled experiment behind `figures`: alpha-stable noise, ramp 1.2 -> 1.8.
pub const FIG2_CONFIG: &str = include_str!("../configs/fig2.toml");

#[derive(Debug, Parser)]
#[command(
    name = "svnet",
    version,
    about = "Diffusion estimation of sparse Volterra kernels over sensor networks"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunFlags {
    /// Output directory; overrides the config's `out_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Config override as a dotted path, e.g. `--set runs=1` or
    /// `--set algorithms.0.mu=0.05`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for Monte-Carlo runs (default: rayon's choice).
    #[arg(long)]
    threads: Option<usize>,
    /// Master seed; overrides the config's `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every algorithm variant in a config file; write one CSV trace
    /// and one manifest per variant.
    Run {
        /// Experiment config (TOML).
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the built-in verification checks and report pass/fail per check.
    Verify,
    /// Run the bundled figure experiments (Gaussian and alpha-stable) and
    /// write one combined NMSD-dB CSV per figure. With `--config`, runs
    /// that single experiment into `<stem>.csv` instead.
    Figures {
        /// Optional config replacing the bundled pair.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        flags: RunFlags,
    },
}

/// Parse arguments and dispatch; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path too
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, flags } => exit_code(cmd_run(&config, &flags)),
        Command::Verify => cmd_verify(),
        Command::Figures { config, flags } => exit_code(cmd_figures(config.as_deref(), &flags)),
    }
}

fn exit_code(result: Result<()>) -> i32 {
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::NumericFailure(_) => EXIT_NUMERIC,
                _ => EXIT_CONFIG,
            }
        }
    }
}

fn parse_set_args(set: &[String]) -> Result<Vec<(String, String)>> {
    set.iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got {kv:?}")))
        })
        .collect()
}

fn load_config_file(path: &Path, flags: &RunFlags) -> Result<ExperimentConfigFile> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
    config_from_text(&text, flags)
}

fn config_from_text(text: &str, flags: &RunFlags) -> Result<ExperimentConfigFile> {
    let overrides = parse_set_args(&flags.set)?;
    let mut file = parse_config_with_overrides(text, &overrides)?;
    if let Some(seed) = flags.seed {
        if seed > config::MAX_MASTER_SEED {
            return Err(Error::Config(format!(
                "--seed must be <= {}",
                config::MAX_MASTER_SEED
            )));
        }
        file.master_seed = seed;
    }
    if let Some(out) = &flags.out {
        file.out_dir = out.display().to_string();
    }
    Ok(file)
}

fn with_threads<F>(threads: Option<usize>, f: F) -> Result<()>
where
    F: FnOnce() -> Result<()> + Send,
{
    match threads {
        None => f(),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Config(format!("cannot build {t}-thread pool: {e}")))?
            .install(f),
    }
}

fn name_numeric_failure(e: Error, variant: &str) -> Error {
    match e {
        Error::NumericFailure(msg) => Error::NumericFailure(format!("variant {variant:?}: {msg}")),
        other => other,
    }
}

/// Dump the topology and combine weights the experiments will share.
fn write_network_files(out_dir: &Path, resolved: &ResolvedExperiments) -> Result<()> {
    let (_, first) = &resolved.variants[0];
    let inst = build_instance(first)?;
    fs::write(out_dir.join("topology.txt"), inst.topology.to_text())?;
    fs::write(out_dir.join("weights.txt"), inst.a.to_text())?;
    Ok(())
}

fn cmd_run(config_path: &Path, flags: &RunFlags) -> Result<()> {
    let file = load_config_file(config_path, flags)?;
    let resolved = resolve(&file)?;
    with_threads(flags.threads, || {
        let out_dir = PathBuf::from(&resolved.out_dir);
        fs::create_dir_all(&out_dir)?;
        write_network_files(&out_dir, &resolved)?;
        for (name, spec) in &resolved.variants {
            let trace = monte_carlo(spec).map_err(|e| name_numeric_failure(e, name))?;
            fs::write(out_dir.join(format!("{name}.csv")), trace.to_csv())?;
            fs::write(
                out_dir.join(format!("{name}.manifest")),
                spec_to_manifest(spec)?,
            )?;
            let final_db = 10.0 * trace.values().last().expect("iterations >= 1").log10();
            println!(
                "{name}: {} iterations, final NMSD {final_db:.2} dB",
                trace.len()
            );
        }
        Ok(())
    })
}

fn cmd_verify() -> i32 {
    let outcomes = all_checks();
    let mut failures = 0;
    for o in &outcomes {
        let tag = if o.passed { "PASS" } else { "FAIL" };
        println!("{tag} {} - {}", o.name, o.detail);
        if !o.passed {
            failures += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        outcomes.len() - failures,
        outcomes.len()
    );
    if failures == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    }
}

/// Combined per-figure CSV: one NMSD-dB column per algorithm variant.
fn combined_csv(columns: &[(String, Vec<f64>)]) -> String {
    let mut out = String::from("iteration");
    for (name, _) in columns {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    let rows = columns.first().map(|(_, v)| v.len()).unwrap_or(0);
    for i in 0..rows {
        out.push_str(&i.to_string());
        for (_, values) in columns {
            out.push_str(&format!(",{}", values[i]));
        }
        out.push('\n');
    }
    out
}

fn run_figure(stem: &str, text: &str, flags: &RunFlags) -> Result<()> {
    let file = config_from_text(text, flags)?;
    let resolved = resolve(&file)?;
    with_threads(flags.threads, || {
        let out_dir = PathBuf::from(&resolved.out_dir);
        fs::create_dir_all(&out_dir)?;
        let mut columns: Vec<(String, Vec<f64>)> = Vec::with_capacity(resolved.variants.len());
        for (name, spec) in &resolved.variants {
            let trace: NmsdTrace = monte_carlo(spec).map_err(|e| name_numeric_failure(e, name))?;
            fs::write(
                out_dir.join(format!("{stem}.{name}.manifest")),
                spec_to_manifest(spec)?,
            )?;
            columns.push((name.clone(), trace.to_db()));
        }
        fs::write(out_dir.join(format!("{stem}.csv")), combined_csv(&columns))?;
        println!("{stem}: {} algorithm columns written", columns.len());
        Ok(())
    })
}

fn cmd_figures(config: Option<&Path>, flags: &RunFlags) -> Result<()> {
    match config {
        Some(path) => {
            let stem = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("figure")
                .to_string();
            let text = fs::read_to_string(path).map_err(|e| {
                Error::Config(format!("cannot read config {}: {e}", path.display()))
            })?;
            run_figure(&stem, &text, flags)
        }
        None => {
            run_figure("fig1", FIG1_CONFIG, flags)?;
            run_figure("fig2", FIG2_CONFIG, flags)
        }
    }
}
