//! Declarative run configuration.
//!
//! One JSON document drives every subcommand.  Precedence is strict:
//! command-line flags override config keys, which override the built-in
//! defaults (the reference system parameters).  Unknown keys are rejected so
//! typos fail loudly instead of silently running defaults.
//!
//! Every artifact embeds the fully-resolved configuration and seed that
//! produced it (the [`RunConfig::echo`] string).  Execution details that
//! cannot change any number — worker count, output directory — are not part
//! of the echo, which is what makes reruns byte-identical at any `--jobs`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use towercov::coverage::{Polarization, SiteClass, SweepConfig};
use towercov::geo::{ScenarioParams, TowerKind};
use towercov::{Error, Result};

/// Root configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Master seed; every random draw in a run descends from it.
    pub seed: u64,
    /// Directory all artifacts are written into.
    pub out_dir: PathBuf,
    /// Coverage-distance sweep definition (defaults: the full 18-cell table).
    pub sweep: SweepConfig,
    /// Geospatial analysis parameters.
    pub geo: GeoConfig,
    /// Channel-dump parameters.
    pub channel_dump: DumpConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            out_dir: PathBuf::from("out"),
            sweep: SweepConfig::default(),
            geo: GeoConfig::default(),
            channel_dump: DumpConfig::default(),
        }
    }
}

/// Geospatial parameters: per-kind coverage radii and subscriber behaviour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeoConfig {
    /// Coverage radius assigned to each tower kind, in km.  Deliberately
    /// empty by default: radii are results (simulated or configured), and
    /// guessing one here would silently fabricate coverage.
    pub radius_km_by_kind: BTreeMap<TowerKind, f64>,
    /// Reference total population for percentages.  When absent, the
    /// raster's own integral is used.
    pub total_population: Option<f64>,
    /// Active-user assumptions for the per-site load estimates.
    pub scenario: ScenarioParams,
    /// Candidate-grid stride (in cells) for `relocate`.
    pub relocate_stride: usize,
}

impl Default for GeoConfig {
    fn default() -> Self {
        Self {
            radius_km_by_kind: BTreeMap::new(),
            total_population: None,
            scenario: ScenarioParams::default(),
            relocate_stride: 1,
        }
    }
}

/// Parameters for `channel-dump`.
///
/// The dump reproduces trial 0 of the coverage Monte-Carlo for the selected
/// table cell at the given distance, so dumped matrices are exactly what the
/// sweep consumed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DumpConfig {
    /// Tower class of the cell to dump.
    pub site_class: SiteClass,
    /// Carrier in MHz (700, 1800 or 3500).
    pub carrier_mhz: f64,
    /// Number of users in the drop.
    pub users: usize,
    /// Array polarization.
    pub polarization: Polarization,
    /// Cell radius the users are dropped in, km.
    pub distance_km: f64,
}

impl Default for DumpConfig {
    fn default() -> Self {
        Self {
            site_class: SiteClass::Legacy,
            carrier_mhz: 700.0,
            users: 20,
            polarization: Polarization::Dual,
            distance_km: 1.0,
        }
    }
}

impl RunConfig {
    /// Loads a config file (strict JSON schema) or the defaults when no path
    /// is given.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path)?;
        let config: RunConfig = serde_json::from_str(&text).map_err(|e| Error::InvalidConfig(
            format!("{}: {e}", path.display()),
        ))?;
        Ok(config)
    }

    /// The single-line JSON echo embedded in every artifact: the resolved
    /// seed plus everything that influences results.
    pub fn echo(&self) -> String {
        #[derive(Serialize)]
        struct Echo<'a> {
            seed: u64,
            sweep: &'a SweepConfig,
            geo: &'a GeoConfig,
            channel_dump: &'a DumpConfig,
        }
        serde_json::to_string(&Echo {
            seed: self.seed,
            sweep: &self.sweep,
            geo: &self.geo,
            channel_dump: &self.channel_dump,
        })
        .expect("config serialization cannot fail")
    }

    /// The echo as a parsed JSON value, for embedding in JSON artifacts.
    pub fn echo_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.echo()).expect("echo is valid JSON")
    }
}
