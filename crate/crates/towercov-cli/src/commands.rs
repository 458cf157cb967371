//! Subcommand implementations.
//!
//! Each command reads inputs, runs the corresponding library computation,
//! and writes its artifacts into the configured output directory.  Every
//! artifact embeds the resolved config echo: CSV files carry it as a leading
//! `# config=...` comment (which the loaders skip on re-ingestion), JSON and
//! GeoJSON artifacts carry it as a `config` member.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

use towercov::coverage::{coverage_table, CoverageQuery};
use towercov::geo::{
    assign_radii, covered_population, export_geojson, greedy_relocate, load_raster, load_towers,
    scenario_report, towers_csv, PopulationRaster, RelocateGrid, ScenarioReport, TowerKind,
    TowerSite,
};
use towercov::rng::{distance_key, trial_rng};
use towercov::{channel, Error, Result};

use crate::config::RunConfig;

/// Writes one artifact and reports it on stdout.
fn write_artifact(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents)?;
    println!("wrote {}", path.display());
    Ok(())
}

/// Runs the coverage-distance sweep; writes the table CSV and the full
/// per-cell curves as JSON.
pub fn cmd_coverage_table(config: &RunConfig) -> Result<()> {
    let table = coverage_table(&config.sweep, config.seed)?;

    let csv = format!("# config={}\n{}", config.echo(), table.to_csv());
    write_artifact(&config.out_dir.join("coverage_table.csv"), csv.as_bytes())?;

    let curves = json!({
        "config": config.echo_value(),
        "table": table,
    });
    let mut text = serde_json::to_string_pretty(&curves).expect("table serializes");
    text.push('\n');
    write_artifact(&config.out_dir.join("coverage_curves.json"), text.as_bytes())?;

    // Human-readable copy of the table on stdout.
    print!("{}", table.to_csv());
    Ok(())
}

/// Loads a tower inventory and assigns per-kind radii from the config.
fn load_inventory(config: &RunConfig, towers_path: &Path) -> Result<Vec<TowerSite>> {
    let mut towers = load_towers(towers_path)?;
    assign_radii(&mut towers, &config.geo.radius_km_by_kind).map_err(|e| {
        Error::InvalidConfig(format!(
            "{e}; set geo.radius_km_by_kind in the config (or take radii from a coverage run)"
        ))
    })?;
    Ok(towers)
}

/// Warns about sites whose coordinates fall outside the raster extent.
fn warn_external_sites(raster: &PopulationRaster, sites: &[TowerSite]) {
    for site in sites {
        if !raster.contains(site.lat, site.lon) {
            eprintln!(
                "warning: site {:?} at ({:.6}, {:.6}) lies outside the raster bounds",
                site.id, site.lat, site.lon
            );
        }
    }
}

/// Flat CSV rendering of a scenario report: aggregate rows, per-class rows,
/// then per-site load rows.
fn report_csv(report: &ScenarioReport, echo: &str) -> String {
    let mut out = format!("# config={echo}\n");
    out.push_str(
        "row,label,sites,covered_persons,pct_of_total,active_users_low,active_users_high,active_users_early\n",
    );
    out.push_str(&format!("total,population,,{},100,,,\n", report.total_population));
    let mut aggregate = |label: &str, covered: f64, pct: f64| {
        out.push_str(&format!("aggregate,{label},,{covered},{pct},,,\n"));
    };
    aggregate("legacy", report.legacy_covered, report.legacy_pct);
    aggregate("tv-towers", report.tv_covered, report.tv_pct);
    aggregate("combined", report.combined_covered, report.combined_pct);
    aggregate("tv-increment", report.tv_increment, report.tv_increment_pct);
    for class in &report.per_class {
        out.push_str(&format!(
            "class,{},{},{},,,,\n",
            class.kind, class.sites, class.covered_persons
        ));
    }
    for site in &report.per_site {
        out.push_str(&format!(
            "site,{},,{},,{},{},{}\n",
            site.id,
            site.covered_persons,
            site.active_users_low,
            site.active_users_high,
            site.active_users_early
        ));
    }
    out
}

/// Computes the population-coverage scenario report for a raster and tower
/// inventory; writes JSON + CSV reports and the coverage-circle GeoJSON.
pub fn cmd_geo_report(config: &RunConfig, raster_path: &Path, towers_path: &Path) -> Result<()> {
    let raster = load_raster(raster_path)?;
    let towers = load_inventory(config, towers_path)?;
    warn_external_sites(&raster, &towers);

    let total = config.geo.total_population.unwrap_or_else(|| raster.total_population());
    let report = scenario_report(&raster, &towers, &config.geo.scenario, total)?;

    let doc = json!({
        "config": config.echo_value(),
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    write_artifact(&config.out_dir.join("geo_report.json"), text.as_bytes())?;

    let csv = report_csv(&report, &config.echo());
    write_artifact(&config.out_dir.join("geo_report.csv"), csv.as_bytes())?;

    write_geojson_artifact(config, &config.out_dir.join("coverage_map.geojson"), &towers)?;

    println!(
        "legacy {:.2}% | tv {:.2}% | combined {:.2}% | tv increment {:.2}% of {} people",
        report.legacy_pct, report.tv_pct, report.combined_pct, report.tv_increment_pct, total
    );
    Ok(())
}

/// Exports coverage circles with the config echo as a GeoJSON foreign member.
fn write_geojson_artifact(config: &RunConfig, path: &Path, sites: &[TowerSite]) -> Result<()> {
    let text = export_geojson(sites)?;
    let mut doc: serde_json::Value =
        serde_json::from_str(&text).expect("export_geojson emits valid JSON");
    doc["config"] = config.echo_value();
    let mut text = serde_json::to_string_pretty(&doc).expect("GeoJSON serializes");
    text.push('\n');
    write_artifact(path, text.as_bytes())
}

/// Greedy tower relocation: keeps non-TV sites fixed, re-places TV capacity
/// as `n` optimally positioned towers, and reports before/after coverage.
///
/// `n = 0` is an explicit no-op: nothing moves and coverage is unchanged.
pub fn cmd_relocate(
    config: &RunConfig,
    raster_path: &Path,
    towers_path: Option<&Path>,
    n_towers: usize,
    radius_km: f64,
) -> Result<()> {
    let raster = load_raster(raster_path)?;
    let towers = match towers_path {
        Some(path) => load_inventory(config, path)?,
        None => Vec::new(),
    };
    warn_external_sites(&raster, &towers);

    let before = covered_population(&raster, &towers);
    let grid = RelocateGrid { stride: config.geo.relocate_stride };

    let (final_sites, placements, note) = if n_towers == 0 {
        (towers.clone(), Vec::new(), Some("no-op: n_towers = 0, coverage unchanged".to_string()))
    } else {
        let kept: Vec<TowerSite> =
            towers.iter().filter(|s| s.kind != TowerKind::TvTower).cloned().collect();
        let placements = greedy_relocate(&raster, n_towers, radius_km, &grid, &kept)?;
        let mut final_sites = kept;
        final_sites.extend(
            placements
                .iter()
                .enumerate()
                .map(|(i, p)| p.to_site(format!("relocated-{:02}", i + 1), radius_km)),
        );
        (final_sites, placements, None)
    };
    let after = if n_towers == 0 { before } else { covered_population(&raster, &final_sites) };

    let doc = json!({
        "config": config.echo_value(),
        "n_towers": n_towers,
        "radius_km": radius_km,
        "before_covered_persons": before,
        "after_covered_persons": after,
        "gain_persons": after - before,
        "note": note,
        "placements": placements,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    write_artifact(&config.out_dir.join("relocate_report.json"), text.as_bytes())?;

    let csv = format!("# config={}\n{}", config.echo(), towers_csv(&final_sites));
    write_artifact(&config.out_dir.join("relocated_towers.csv"), csv.as_bytes())?;

    // Sites with no radius (e.g. kept candidates from an odd inventory)
    // cannot be drawn; the report above still covers them.
    write_geojson_artifact(config, &config.out_dir.join("relocated_towers.geojson"), &final_sites)?;

    match &note {
        Some(note) => println!("{note}: covered {before}"),
        None => println!("covered before {before} -> after {after} ({:+})", after - before),
    }
    Ok(())
}

/// Dumps the channel matrix of Monte-Carlo trial 0 for the configured table
/// cell and distance, as CSV.
pub fn cmd_channel_dump(config: &RunConfig) -> Result<()> {
    let dump = &config.channel_dump;
    let query: CoverageQuery = config.sweep.query(
        dump.site_class,
        dump.carrier_mhz,
        dump.users,
        dump.polarization,
        config.seed,
    )?;

    // Reproduce exactly what trial 0 of the sweep would have drawn.
    let mut rng = trial_rng(query.master_seed, distance_key(dump.distance_km), 0);
    let drop = channel::UserDrop::uniform_disk(
        query.users,
        dump.distance_km * 1000.0,
        query.rx_height_m,
        &mut rng,
    )?;
    let channel_seed = rand::RngCore::next_u64(&mut rng);
    let h = channel::generate_channel(&query.site, &query.radio, &drop, &query.fading, channel_seed)?;

    let mut bytes = format!("# config={}\n", config.echo()).into_bytes();
    h.write_csv(&mut bytes)?;
    write_artifact(&config.out_dir.join("channel.csv"), &bytes)?;

    println!(
        "channel: {} elements x {} users, {} {} MHz {} at {} km",
        h.elements(),
        h.users(),
        dump.site_class,
        dump.carrier_mhz,
        dump.polarization,
        dump.distance_km
    );
    Ok(())
}

/// Output paths a command is about to write; used to fail early when the
/// output directory cannot be created.
pub fn ensure_out_dir(out_dir: &PathBuf) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    Ok(())
}
