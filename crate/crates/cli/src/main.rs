//! `stirap` command-line front end.

mod analyze;
mod presets;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use stirap_core::config::RunConfig;
use stirap_core::output::to_json;
use stirap_core::protocols::run;
use stirap_core::sweep::{scan_with_progress, PointStatus, ScanSpec};
use stirap_core::Error;

const EXIT_CONFIG: u8 = 2;
const EXIT_INTEGRATION: u8 = 3;
const EXIT_INPUT: u8 = 4;

#[derive(Parser)]
#[command(name = "stirap", version, about = "Batch simulations of stimulated Raman adiabatic passage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Source {
    /// Configuration file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Shipped preset name instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Directory for output files; created if missing.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Relative integrator tolerance; overrides the config.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Propagate one configuration and write the time series and report.
    Simulate {
        #[command(flatten)]
        source: Source,
    },
    /// Evaluate the scan block of a configuration on its parameter grid.
    Scan {
        #[command(flatten)]
        source: Source,
        /// Worker threads; defaults to the config, then to all cores.
        #[arg(long, env = "STIRAP_WORKERS")]
        workers: Option<usize>,
    },
    /// Fit a result file and print key=value lines.
    Analyze {
        /// CSV written by `simulate` or `scan`.
        input: PathBuf,
        /// One of: profile, linewidth-scaling, transition-time.
        analysis: String,
        /// Column holding the data to analyze.
        #[arg(long)]
        column: Option<String>,
        /// Threshold for transition-time.
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        /// Pulse delay for transition-time; read from the file when omitted.
        #[arg(long)]
        delay: Option<f64>,
        /// Pulse width for transition-time; read from the file when omitted.
        #[arg(long)]
        width: Option<f64>,
    },
    /// List or print the shipped presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
    Show { name: String },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Integration { .. } => EXIT_INTEGRATION,
            Error::Io(_) => 1,
            _ => EXIT_CONFIG,
        };
        Self::new(code, e.to_string())
    }
}

fn load(source: &Source) -> Result<RunConfig, Failure> {
    let (text, origin) = match (&source.config, &source.preset) {
        (Some(p), _) => (
            std::fs::read_to_string(p).map_err(|e| Failure::new(EXIT_CONFIG, format!("{}: {e}", p.display())))?,
            p.display().to_string(),
        ),
        (None, Some(name)) => (
            presets::get(name)
                .ok_or_else(|| Failure::new(EXIT_CONFIG, format!("unknown preset '{name}'")))?
                .to_string(),
            format!("preset {name}"),
        ),
        (None, None) => return Err(Failure::new(EXIT_CONFIG, "no configuration given")),
    };
    let mut cfg = RunConfig::from_toml(&text).map_err(|e| Failure::new(EXIT_CONFIG, format!("{origin}: {e}")))?;
    if let Some(t) = source.tol {
        cfg.integrator.rel_tol = t;
        cfg.validate().map_err(|e| Failure::new(EXIT_CONFIG, format!("--tol: {e}")))?;
    }
    Ok(cfg)
}

fn out_path(dir: &Path, prefix: &str, suffix: &str) -> PathBuf {
    dir.join(format!("{prefix}_{suffix}"))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(1, format!("{}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::new(1, format!("{}: {e}", dir.display())))
}

fn cmd_simulate(source: &Source) -> Result<(), Failure> {
    let cfg = load(source)?;
    let out = run(&cfg)?;
    ensure_dir(&source.out_dir)?;
    let prefix = &cfg.output.prefix;
    if cfg.output.timeseries {
        write(&out_path(&source.out_dir, prefix, "timeseries.csv"), &out.series.to_csv())?;
    }
    if cfg.output.report {
        write(&out_path(&source.out_dir, prefix, "report.json"), &to_json(&out.report)?)?;
    }
    write(&out_path(&source.out_dir, prefix, "config.toml"), &cfg.to_toml()?)?;
    Ok(())
}

fn cmd_scan(source: &Source, workers: Option<usize>) -> Result<(), Failure> {
    let cfg = load(source)?;
    let mut spec = ScanSpec::from_config(&cfg)?;
    if workers.is_some() {
        spec.workers = workers;
    }
    if spec.workers == Some(0) {
        return Err(Failure::new(EXIT_CONFIG, "--workers must be positive"));
    }
    spec.validate()?;
    let total = spec.len();
    let step = (total / 20).max(1);
    let result = scan_with_progress(&spec, |done| {
        if done % step == 0 || done == total {
            eprint!("\rscan {done}/{total}");
            if done == total {
                eprintln!();
            }
            let _ = std::io::stderr().flush();
        }
    })?;
    ensure_dir(&source.out_dir)?;
    let prefix = &cfg.output.prefix;
    write(&out_path(&source.out_dir, prefix, "scan.csv"), &result.to_table().to_csv())?;
    write(&out_path(&source.out_dir, prefix, "config.toml"), &cfg.to_toml()?)?;
    let faults = result.status.iter().filter(|&&s| s == PointStatus::IntegrationFault).count();
    let invalid = result.status.iter().filter(|&&s| s == PointStatus::InvalidConfig).count();
    if invalid > 0 {
        eprintln!("{invalid} of {total} points had invalid parameters");
    }
    if faults > 0 {
        return Err(Failure::new(EXIT_INTEGRATION, format!("{faults} of {total} points hit an integration fault")));
    }
    Ok(())
}

fn cmd_preset(action: &PresetAction) -> Result<(), Failure> {
    match action {
        PresetAction::List => {
            for (name, text) in presets::PRESETS {
                let summary = text.lines().next().and_then(|l| l.strip_prefix('#')).unwrap_or("").trim();
                println!("{name:<20} {summary}");
            }
            Ok(())
        }
        PresetAction::Show { name } => {
            let text = presets::get(name).ok_or_else(|| Failure::new(EXIT_CONFIG, format!("unknown preset '{name}'")))?;
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Simulate { source } => cmd_simulate(source),
        Command::Scan { source, workers } => cmd_scan(source, *workers),
        Command::Analyze { input, analysis, column, epsilon, delay, width } => {
            let opts = analyze::Options { column: column.clone(), epsilon: *epsilon, delay: *delay, width: *width };
            analyze::run(input, analysis, &opts).map(|lines| {
                for (k, v) in lines {
                    println!("{k}={v}");
                }
            })
        }
        Command::Preset { action } => cmd_preset(action),
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
