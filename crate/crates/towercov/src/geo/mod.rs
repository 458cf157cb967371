//! Geospatial population-coverage analysis.
//!
//! This module answers the geography half of the tower question: given a
//! population-density raster and a set of tower sites with coverage radii,
//! how many people live inside the union of the coverage disks?  It also
//! provides a greedy placement optimizer for relocating a fixed number of
//! towers, and GeoJSON export for inspecting results on a map.
//!
//! # Model
//!
//! Populations live on a regular latitude/longitude grid ([`PopulationRaster`]).
//! Each cell carries a density in persons/km²; its population is density times
//! the latitude-corrected cell area.  A cell counts as covered by a site when
//! the **cell center** is within the site's coverage radius (great-circle
//! distance, spherical Earth).  Coverage of multiple sites is a set union: a
//! person is covered once no matter how many disks overlap them.
//!
//! # Determinism
//!
//! All reductions sum row partials in row order, so results are bitwise
//! reproducible and independent of worker count.  The parallel and sequential
//! scan paths produce identical bits.

mod analysis;
mod geojson;
mod raster;
mod sites;

pub use analysis::{
    covered_counts, covered_population, covered_population_seq, greedy_relocate,
    scenario_from_counts, scenario_report, ClassCoverage, CoverageCounts, Placement,
    RelocateGrid, ScenarioParams, ScenarioReport, SiteLoad,
};
pub use geojson::export_geojson;
pub use raster::{load_raster, synthetic_raster, PopulationRaster};
pub use sites::{assign_radii, haversine_km, load_towers, towers_csv, write_towers, TowerKind, TowerSite};

/// Kilometres per degree of latitude used for **cell areas**.
///
/// One degree of longitude spans the same distance at the equator and shrinks
/// with cos(latitude).  The constant is the conventional 111.195 km/degree
/// figure (mean Earth circumference / 360).
pub const KM_PER_DEGREE: f64 = 111.195;

/// Mean Earth radius in kilometres used for great-circle distances.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
