use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn, LevelFilter};

use catlattice_cli::config::{resolve, ConfigFile, Scenario};
use catlattice_cli::output::Format;
use catlattice_cli::scenario::{run_bloch, run_oscillator, run_spectrum};
use catlattice_cli::selftest::{failures, report, run_checks, Mutation};
use catlattice_cli::sweep::run_sweep;
use catlattice_cli::CliError;

/// Decoherence of optical cat states in waveguide lattices.
#[derive(Parser)]
#[command(name = "catlattice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with one section per scenario
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Named parameter set, applied before the config file
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// `table` (tab-separated with a commented header) or `tree` (JSON)
    #[arg(long, global = true, default_value = "table")]
    format: Format,

    /// Worker threads for concurrent runs
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Defect guide coupled to a semi-infinite array
    Oscillator,
    /// Beam propagation in an array with an index gradient
    Bloch,
    /// Bound-state census over a coupling/detuning grid
    Spectrum,
    /// Concurrent parameter sweep over the oscillator or bloch scenario
    Sweep,
    /// Invariant suite
    Selftest {
        /// Inject a defect to exercise the suite: sign-flip, small-truncation
        #[arg(long, default_value = "none")]
        inject: Mutation,
    },
}

fn section<T: Clone + Default>(
    config: &ConfigFile,
    pick: impl Fn(&ConfigFile) -> &Option<T>,
    scenario: Scenario,
    preset: Option<&str>,
) -> Result<T, CliError> {
    match (pick(config), preset) {
        (Some(c), _) => Ok(c.clone()),
        (None, Some(p)) => Err(CliError::Config(format!(
            "preset `{p}` has no [{}] section",
            scenario.name()
        ))),
        (None, None) => {
            info!("no [{}] section; using defaults", scenario.name());
            Ok(T::default())
        }
    }
}

fn side_path(out: &Path, tag: &str, format: Format) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.{tag}.{}", format.extension()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let out = cli.out.as_deref();
    let preset = cli.preset.as_deref();
    if let Command::Selftest { inject } = cli.command {
        if cli.config.is_some() || preset.is_some() {
            warn!("selftest ignores --config and --preset");
        }
        let checks = run_checks(inject)?;
        report(&checks, inject).write(out, cli.format)?;
        let failed = failures(&checks);
        return if failed.is_empty() {
            Ok(())
        } else {
            Err(CliError::Selftest(failed))
        };
    }
    let config = resolve(preset, cli.config.as_deref())?;
    match cli.command {
        Command::Oscillator => {
            let cfg = section(&config, |c| &c.oscillator, Scenario::Oscillator, preset)?;
            run_oscillator(&cfg)?.write(out, cli.format)
        }
        Command::Bloch => {
            let cfg = section(&config, |c| &c.bloch, Scenario::Bloch, preset)?;
            if cfg.field_map && out.is_none() {
                return Err(CliError::Config("`field_map` needs --out to place the map files".into()));
            }
            let result = run_bloch(&cfg)?;
            result.table.write(out, cli.format)?;
            if let Some(out) = out {
                for (map, f) in result.field_maps.iter().zip(&cfg.gradients_per_cm) {
                    map.write(Some(&side_path(out, &format!("field-F{f}"), cli.format)), cli.format)?;
                }
            }
            Ok(())
        }
        Command::Spectrum => {
            let cfg = section(&config, |c| &c.spectrum, Scenario::Spectrum, preset)?;
            run_spectrum(&cfg)?.write(out, cli.format)
        }
        Command::Sweep => {
            let outcome = run_sweep(&config, cli.format)?;
            info!("sweep: {} point files", outcome.point_files.len());
            outcome.summary.write(out, cli.format)
        }
        Command::Selftest { .. } => unreachable!(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.verbose { LevelFilter::Info } else { LevelFilter::Warn })
        .parse_default_env()
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
