//! Tower sites: the point set whose coverage disks we intersect with the
//! population raster.
//!
//! Sites come from CSV (`id,lat,lon,kind,height_m`) and carry a coverage
//! radius that is assigned afterwards — either a fixed per-kind figure or a
//! simulated coverage distance from the radio model.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EARTH_RADIUS_KM;
use crate::error::{Error, Result};

/// What kind of mast a site is.
///
/// The two legacy kinds are existing mobile towers (~25 m); `tv-tower` marks
/// tall broadcast masts (~150+ m); `candidate` marks positions produced by
/// the relocation optimizer rather than read from an inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TowerKind {
    #[serde(rename = "legacy-3G")]
    Legacy3G,
    #[serde(rename = "legacy-4G")]
    Legacy4G,
    #[serde(rename = "tv-tower")]
    TvTower,
    #[serde(rename = "candidate")]
    Candidate,
}

impl TowerKind {
    /// All kinds in their canonical (sort) order.
    pub const ALL: [TowerKind; 4] =
        [TowerKind::Legacy3G, TowerKind::Legacy4G, TowerKind::TvTower, TowerKind::Candidate];

    /// Whether this kind belongs to the existing mobile network.
    pub fn is_legacy(self) -> bool {
        matches!(self, TowerKind::Legacy3G | TowerKind::Legacy4G)
    }
}

impl fmt::Display for TowerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TowerKind::Legacy3G => "legacy-3G",
            TowerKind::Legacy4G => "legacy-4G",
            TowerKind::TvTower => "tv-tower",
            TowerKind::Candidate => "candidate",
        };
        f.write_str(s)
    }
}

impl FromStr for TowerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "legacy-3g" => Ok(TowerKind::Legacy3G),
            "legacy-4g" => Ok(TowerKind::Legacy4G),
            "tv-tower" => Ok(TowerKind::TvTower),
            "candidate" => Ok(TowerKind::Candidate),
            other => Err(Error::InvalidArgument(format!(
                "unknown tower kind {other:?} (expected legacy-3G, legacy-4G, tv-tower or candidate)"
            ))),
        }
    }
}

/// One tower site with an assigned coverage radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TowerSite {
    /// Stable identifier used in reports and GeoJSON properties.
    pub id: String,
    /// Latitude in degrees, positive north.
    pub lat: f64,
    /// Longitude in degrees, positive east.
    pub lon: f64,
    /// Mast category.
    pub kind: TowerKind,
    /// Mast height above ground in metres, when the inventory knows it.
    pub height_m: Option<f64>,
    /// Coverage radius in km.  Zero until assigned via [`assign_radii`] or
    /// set directly from a simulated coverage distance.
    pub coverage_radius_km: f64,
}

impl TowerSite {
    /// Creates a site with an explicit radius.
    pub fn new(id: impl Into<String>, lat: f64, lon: f64, kind: TowerKind, radius_km: f64) -> Self {
        Self { id: id.into(), lat, lon, kind, height_m: None, coverage_radius_km: radius_km }
    }

    /// Checks coordinate and radius sanity.
    pub fn validate(&self) -> Result<()> {
        if !(-90.0..=90.0).contains(&self.lat) || !self.lon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "site {:?} has invalid coordinates ({}, {})",
                self.id, self.lat, self.lon
            )));
        }
        if !self.coverage_radius_km.is_finite() || self.coverage_radius_km < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "site {:?} has invalid coverage radius {}",
                self.id, self.coverage_radius_km
            )));
        }
        if let Some(h) = self.height_m {
            if !h.is_finite() || h <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "site {:?} has invalid height {h}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Great-circle distance between two `(lat, lon)` points in km, on a sphere
/// of radius [`EARTH_RADIUS_KM`] (haversine formula).
pub fn haversine_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lat1, lon1) = (a.0.to_radians(), a.1.to_radians());
    let (lat2, lon2) = (b.0.to_radians(), b.1.to_radians());
    let sin_dlat = ((lat2 - lat1) * 0.5).sin();
    let sin_dlon = ((lon2 - lon1) * 0.5).sin();
    let h = sin_dlat * sin_dlat + lat1.cos() * lat2.cos() * sin_dlon * sin_dlon;
    2.0 * EARTH_RADIUS_KM * h.sqrt().atan2((1.0 - h).sqrt())
}

/// Loads tower sites from a CSV file with columns `id,lat,lon,kind,height_m`.
///
/// A header row is recognized and skipped.  `height_m` may be empty when the
/// inventory does not record it.  Coverage radii start at zero; assign them
/// with [`assign_radii`] before running coverage analyses.  Duplicate ids are
/// rejected because reports key on them.
pub fn load_towers(path: &Path) -> Result<Vec<TowerSite>> {
    let text = fs::read_to_string(path)?;
    let mut sites: Vec<TowerSite> = Vec::new();
    let mut saw_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        // Blank lines and `#` comments (e.g. embedded config echoes) are skipped.
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected 5 comma-separated fields (id,lat,lon,kind,height_m), got {}", fields.len()),
            });
        }
        if !saw_data && fields[1].parse::<f64>().is_err() {
            // Header row such as "id,lat,lon,kind,height_m".
            saw_data = true;
            continue;
        }
        saw_data = true;
        let num = |name: &str, s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("{name} is not a number: {s:?}"),
            })
        };
        let height_m = if fields[4].is_empty() { None } else { Some(num("height_m", fields[4])?) };
        let site = TowerSite {
            id: fields[0].to_string(),
            lat: num("lat", fields[1])?,
            lon: num("lon", fields[2])?,
            kind: fields[3].parse().map_err(|e: Error| Error::Parse {
                line: line_no,
                msg: e.to_string(),
            })?,
            height_m,
            coverage_radius_km: 0.0,
        };
        site.validate().map_err(|e| Error::Parse { line: line_no, msg: e.to_string() })?;
        if sites.iter().any(|s| s.id == site.id) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("duplicate site id {:?}", site.id),
            });
        }
        sites.push(site);
    }
    Ok(sites)
}

/// Renders sites in the interchange CSV format
/// (`id,lat,lon,kind,height_m`, six-decimal coordinates).
pub fn towers_csv(sites: &[TowerSite]) -> String {
    let mut out = String::from("id,lat,lon,kind,height_m\n");
    for s in sites {
        let height = s.height_m.map(|h| h.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{:.6},{:.6},{},{}", s.id, s.lat, s.lon, s.kind, height);
    }
    out
}

/// Writes sites to a CSV file; see [`towers_csv`] for the format.
pub fn write_towers(path: &Path, sites: &[TowerSite]) -> Result<()> {
    fs::write(path, towers_csv(sites))?;
    Ok(())
}

/// Assigns each site the coverage radius configured for its kind.
///
/// Errors when a site's kind has no entry, rather than silently leaving a
/// zero radius in a coverage analysis.
pub fn assign_radii(sites: &mut [TowerSite], radius_km_by_kind: &BTreeMap<TowerKind, f64>) -> Result<()> {
    for site in sites.iter_mut() {
        let r = radius_km_by_kind.get(&site.kind).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "no coverage radius configured for tower kind {} (site {:?})",
                site.kind, site.id
            ))
        })?;
        if !r.is_finite() || *r < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "coverage radius for kind {} must be non-negative, got {r}",
                site.kind
            )));
        }
        site.coverage_radius_km = *r;
    }
    Ok(())
}
