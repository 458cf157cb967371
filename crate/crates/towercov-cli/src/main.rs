//! `towercov` — coverage simulation and population-coverage analysis CLI.
//!
//! Subcommands: `coverage-table`, `geo-report`, `relocate`, `channel-dump`.
//! Global flags: `--seed`, `--jobs`, `--config`, `--out-dir` (flags override
//! config keys, which override defaults).  Exit codes: 0 success, 1 input or
//! configuration error, 2 numerical failure.  Fatal errors are reported as a
//! single JSON object on stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use towercov::coverage::{Polarization, SiteClass};
use towercov::{Error, Result};

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "towercov",
    version,
    about = "Massive-MIMO coverage simulation and population-coverage analysis",
    propagate_version = true
)]
struct Cli {
    /// Master seed for all randomness (overrides config `seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; results are identical for any value (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// JSON config file; flags override config keys, which override defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Directory artifacts are written into (overrides config `out_dir`).
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the coverage-distance sweep and write the table + curves.
    CoverageTable,
    /// Population-coverage report for a raster and a tower inventory.
    GeoReport(GeoReportArgs),
    /// Re-place TV-tower capacity at optimized positions (greedy max-coverage).
    Relocate(RelocateArgs),
    /// Dump one Monte-Carlo channel realization as CSV.
    ChannelDump(ChannelDumpArgs),
}

#[derive(Debug, Args)]
struct GeoReportArgs {
    /// Population raster (CSV `lat,lon,density` or ESRI ASCII grid).
    #[arg(long, value_name = "PATH")]
    raster: PathBuf,

    /// Tower inventory CSV (`id,lat,lon,kind,height_m`).
    #[arg(long, value_name = "PATH")]
    towers: PathBuf,

    /// Reference total population for percentages (default: raster total).
    #[arg(long)]
    total_population: Option<f64>,
}

#[derive(Debug, Args)]
struct RelocateArgs {
    /// Population raster (CSV or ESRI ASCII grid).
    #[arg(long, value_name = "PATH")]
    raster: PathBuf,

    /// Existing inventory; non-TV sites stay fixed, TV towers are re-placed.
    /// With no inventory the command places towers on an empty map.
    #[arg(long, value_name = "PATH")]
    towers: Option<PathBuf>,

    /// How many towers to place (0 is an explicit no-op).
    #[arg(long)]
    n_towers: usize,

    /// Coverage radius of each placed tower, km.
    #[arg(long)]
    radius_km: f64,

    /// Candidate-grid stride in cells (overrides config `geo.relocate_stride`).
    #[arg(long)]
    stride: Option<usize>,
}

#[derive(Debug, Args)]
struct ChannelDumpArgs {
    /// Drop radius in km (overrides config `channel_dump.distance_km`).
    #[arg(long)]
    distance_km: Option<f64>,

    /// Number of users (overrides config `channel_dump.users`).
    #[arg(long)]
    users: Option<usize>,

    /// Tower class: `legacy` or `high-tower`.
    #[arg(long, value_parser = parse_site_class)]
    site_class: Option<SiteClass>,

    /// Carrier in MHz: 700, 1800 or 3500.
    #[arg(long)]
    carrier_mhz: Option<f64>,

    /// Array polarization: `single` or `dual`.
    #[arg(long, value_parser = parse_polarization)]
    polarization: Option<Polarization>,
}

fn parse_site_class(s: &str) -> std::result::Result<SiteClass, String> {
    match s.to_ascii_lowercase().as_str() {
        "legacy" => Ok(SiteClass::Legacy),
        "high-tower" => Ok(SiteClass::HighTower),
        other => Err(format!("unknown site class {other:?} (expected legacy or high-tower)")),
    }
}

fn parse_polarization(s: &str) -> std::result::Result<Polarization, String> {
    match s.to_ascii_lowercase().as_str() {
        "single" => Ok(Polarization::Single),
        "dual" => Ok(Polarization::Dual),
        other => Err(format!("unknown polarization {other:?} (expected single or dual)")),
    }
}

/// Exit code for a library error: input problems are 1, numerical
/// breakdowns 2 (success is 0).
fn exit_code_for(err: &Error) -> u8 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}

/// Prints the machine-readable error object on stderr.
fn report_error(err: &Error, code: u8) {
    let doc = serde_json::json!({
        "error": err.to_string(),
        "kind": err.kind(),
        "exit_code": code,
    });
    eprintln!("{doc}");
}

/// Applies flag overrides onto the loaded config (flags > config > defaults).
fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let mut config = RunConfig::load(cli.config.as_deref())?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out_dir) = &cli.out_dir {
        config.out_dir = out_dir.clone();
    }
    match &cli.command {
        Command::GeoReport(args) => {
            if let Some(total) = args.total_population {
                config.geo.total_population = Some(total);
            }
        }
        Command::Relocate(args) => {
            if let Some(stride) = args.stride {
                config.geo.relocate_stride = stride;
            }
        }
        Command::ChannelDump(args) => {
            let dump = &mut config.channel_dump;
            if let Some(d) = args.distance_km {
                dump.distance_km = d;
            }
            if let Some(k) = args.users {
                dump.users = k;
            }
            if let Some(class) = args.site_class {
                dump.site_class = class;
            }
            if let Some(fc) = args.carrier_mhz {
                dump.carrier_mhz = fc;
            }
            if let Some(p) = args.polarization {
                dump.polarization = p;
            }
        }
        Command::CoverageTable => {}
    }
    Ok(config)
}

/// Caps the global worker pool when `--jobs` is given.  Results never depend
/// on the pool size; this only trades latency for cores.
#[cfg(feature = "parallel")]
fn init_workers(jobs: Option<usize>) {
    if let Some(jobs) = jobs {
        // A second initialization (e.g. in tests) returns an error we can
        // safely ignore: the pool is already running.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_workers(_jobs: Option<usize>) {}

fn run(cli: &Cli) -> Result<()> {
    let config = resolve_config(cli)?;
    init_workers(cli.jobs);
    commands::ensure_out_dir(&config.out_dir)?;
    match &cli.command {
        Command::CoverageTable => commands::cmd_coverage_table(&config),
        Command::GeoReport(args) => commands::cmd_geo_report(&config, &args.raster, &args.towers),
        Command::Relocate(args) => commands::cmd_relocate(
            &config,
            &args.raster,
            args.towers.as_deref(),
            args.n_towers,
            args.radius_km,
        ),
        Command::ChannelDump(_) => commands::cmd_channel_dump(&config),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version exit 0 with their usual output; real usage
            // errors become machine-readable JSON with exit code 1.
            if e.use_stderr() {
                let doc = serde_json::json!({
                    "error": e.to_string(),
                    "kind": "usage",
                    "exit_code": 1,
                });
                eprintln!("{doc}");
                return ExitCode::from(1);
            }
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let code = exit_code_for(&err);
            report_error(&err, code);
            ExitCode::from(code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_split_input_and_numerical_errors() {
        assert_eq!(exit_code_for(&Error::InvalidConfig("x".into())), 1);
        assert_eq!(exit_code_for(&Error::Parse { line: 1, msg: "x".into() }), 1);
        assert_eq!(exit_code_for(&Error::IllConditioned { cond: 1e18 }), 2);
        assert_eq!(
            exit_code_for(&Error::NonConvergence { what: "bisection", iterations: 5 }),
            2
        );
    }

    #[test]
    fn cli_parses_global_flags_in_any_position() {
        let cli = Cli::try_parse_from([
            "towercov",
            "coverage-table",
            "--seed",
            "7",
            "--jobs",
            "2",
            "--out-dir",
            "artifacts",
        ])
        .unwrap();
        assert_eq!(cli.seed, Some(7));
        assert_eq!(cli.jobs, Some(2));
        assert_eq!(cli.out_dir.as_deref(), Some(std::path::Path::new("artifacts")));
    }

    #[test]
    fn flag_overrides_beat_config_defaults() {
        let cli = Cli::try_parse_from([
            "towercov",
            "--seed",
            "99",
            "channel-dump",
            "--users",
            "4",
            "--site-class",
            "high-tower",
        ])
        .unwrap();
        let config = resolve_config(&cli).unwrap();
        assert_eq!(config.seed, 99);
        assert_eq!(config.channel_dump.users, 4);
        assert_eq!(config.channel_dump.site_class, SiteClass::HighTower);
        // Untouched fields keep their defaults.
        assert_eq!(config.channel_dump.carrier_mhz, 700.0);
    }
}
