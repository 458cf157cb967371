//! Population-coverage analyses over a raster and a set of tower sites.
//!
//! Three layers build on one scan primitive:
//!
//! * [`covered_population`] — people inside the union of coverage disks;
//! * [`scenario_report`] — per-class coverage, TV-tower increment over the
//!   legacy network, and expected concurrent active users per site;
//! * [`greedy_relocate`] — place `n` towers on a candidate grid to maximize
//!   (marginal) covered population.
//!
//! All scans follow the row-subtotal summation contract documented on
//! [`PopulationRaster`], so the parallel and sequential paths are bitwise
//! identical and a brute-force reference scan reproduces them exactly.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::raster::PopulationRaster;
use super::sites::{haversine_km, TowerKind, TowerSite};
use super::KM_PER_DEGREE;
use crate::error::{Error, Result};

/// Sites that can possibly reach a row of cells.
///
/// A great-circle distance is never smaller than its meridional component,
/// so a site whose latitude offset alone exceeds `radius + one row` of
/// kilometres cannot cover any cell center in the row.  `KM_PER_DEGREE`
/// overestimates the true meridional scale by < 0.01%, which the one-row
/// margin absorbs with orders of magnitude to spare; the filter therefore
/// never drops a site that the full distance test would accept.
fn sites_near_row<'a>(raster: &PopulationRaster, row: usize, sites: &[&'a TowerSite]) -> Vec<&'a TowerSite> {
    let (row_lat, _) = raster.cell_center(row, 0);
    let margin_km = raster.dlat() * KM_PER_DEGREE;
    sites
        .iter()
        .copied()
        .filter(|s| (s.lat - row_lat).abs() * KM_PER_DEGREE <= s.coverage_radius_km + margin_km)
        .collect()
}

/// Population of one row covered by the site union, per the summation
/// contract: covered densities summed west to east, times the row area.
fn row_covered_population(raster: &PopulationRaster, row: usize, sites: &[&TowerSite]) -> f64 {
    let near = sites_near_row(raster, row, sites);
    if near.is_empty() {
        return 0.0;
    }
    let mut row_sum = 0.0;
    for col in 0..raster.ncols() {
        let d = raster.density(row, col);
        if d == 0.0 {
            // Adding zero to a non-negative sum cannot change its bits.
            continue;
        }
        let center = raster.cell_center(row, col);
        if near.iter().any(|s| haversine_km(center, (s.lat, s.lon)) <= s.coverage_radius_km) {
            row_sum += d;
        }
    }
    row_sum * raster.cell_area_km2(row)
}

/// People living inside the union of the sites' coverage disks.
///
/// A cell counts when its center is within at least one site's radius
/// (great-circle distance); overlapping disks count each person once.  With
/// the `parallel` feature rows are scanned concurrently, but row subtotals
/// are always added in row order, so the result is bitwise identical to
/// [`covered_population_seq`] at any worker count.
pub fn covered_population(raster: &PopulationRaster, sites: &[TowerSite]) -> f64 {
    let refs: Vec<&TowerSite> = sites.iter().collect();
    #[cfg(feature = "parallel")]
    {
        let partials: Vec<f64> = (0..raster.nrows())
            .into_par_iter()
            .map(|row| row_covered_population(raster, row, &refs))
            .collect();
        partials.into_iter().sum()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..raster.nrows()).map(|row| row_covered_population(raster, row, &refs)).sum()
    }
}

/// Sequential reference path for [`covered_population`]; always available
/// and bitwise identical to the parallel scan.
pub fn covered_population_seq(raster: &PopulationRaster, sites: &[TowerSite]) -> f64 {
    let refs: Vec<&TowerSite> = sites.iter().collect();
    (0..raster.nrows()).map(|row| row_covered_population(raster, row, &refs)).sum()
}

/// Coverage of one tower class: how many sites and how many people.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassCoverage {
    /// Tower category this row aggregates.
    pub kind: TowerKind,
    /// Number of sites of this kind.
    pub sites: usize,
    /// People inside the union of this kind's disks alone.
    pub covered_persons: f64,
}

/// Covered population of a single site's own disk (overlaps not deduplicated
/// across sites — this measures the load each cell must carry).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteCoverage {
    /// Site identifier.
    pub id: String,
    /// Site category.
    pub kind: TowerKind,
    /// People inside this one disk.
    pub covered_persons: f64,
}

/// Raw covered-population tallies, before any percentage arithmetic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCounts {
    /// Union coverage of the legacy mobile network (legacy-3G ∪ legacy-4G).
    pub legacy: f64,
    /// Union coverage of the TV towers alone.
    pub tv: f64,
    /// Union coverage of all sites together.
    pub combined: f64,
    /// Per-kind tallies, in canonical kind order, kinds with no sites omitted.
    pub per_class: Vec<ClassCoverage>,
    /// Per-site disk populations, in input order.
    pub per_site: Vec<SiteCoverage>,
}

/// Scans the raster once per aggregate and once per site to produce the raw
/// tallies behind a [`ScenarioReport`].
pub fn covered_counts(raster: &PopulationRaster, sites: &[TowerSite]) -> CoverageCounts {
    let legacy_sites: Vec<TowerSite> =
        sites.iter().filter(|s| s.kind.is_legacy()).cloned().collect();
    let tv_sites: Vec<TowerSite> =
        sites.iter().filter(|s| s.kind == TowerKind::TvTower).cloned().collect();

    let per_class = TowerKind::ALL
        .iter()
        .filter_map(|&kind| {
            let class_sites: Vec<TowerSite> =
                sites.iter().filter(|s| s.kind == kind).cloned().collect();
            if class_sites.is_empty() {
                return None;
            }
            Some(ClassCoverage {
                kind,
                sites: class_sites.len(),
                covered_persons: covered_population(raster, &class_sites),
            })
        })
        .collect();

    let per_site = sites
        .iter()
        .map(|s| SiteCoverage {
            id: s.id.clone(),
            kind: s.kind,
            covered_persons: covered_population(raster, std::slice::from_ref(s)),
        })
        .collect();

    CoverageCounts {
        legacy: covered_population(raster, &legacy_sites),
        tv: covered_population(raster, &tv_sites),
        combined: covered_population(raster, sites),
        per_class,
        per_site,
    }
}

/// Subscriber-behaviour assumptions for the active-user estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioParams {
    /// Lower bound on the fraction of covered people active at once.
    pub active_user_fraction_low: f64,
    /// Upper bound on the fraction of covered people active at once.
    pub active_user_fraction_high: f64,
    /// Early-rollout adoption: fraction of covered people subscribing.
    pub adoption_rate: f64,
    /// Fraction of subscribers active at once in the early-rollout estimate.
    pub active_share: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            active_user_fraction_low: 0.01,
            active_user_fraction_high: 0.02,
            adoption_rate: 0.02,
            active_share: 0.05,
        }
    }
}

impl ScenarioParams {
    /// Checks every fraction lies in (0, 1] and the band is ordered.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("active_user_fraction_low", self.active_user_fraction_low),
            ("active_user_fraction_high", self.active_user_fraction_high),
            ("adoption_rate", self.adoption_rate),
            ("active_share", self.active_share),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in (0, 1], got {v}"
                )));
            }
        }
        if self.active_user_fraction_low > self.active_user_fraction_high {
            return Err(Error::InvalidConfig(format!(
                "active user fraction band is inverted: {} > {}",
                self.active_user_fraction_low, self.active_user_fraction_high
            )));
        }
        Ok(())
    }
}

/// Expected concurrent active users behind one site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteLoad {
    /// Site identifier.
    pub id: String,
    /// Site category.
    pub kind: TowerKind,
    /// People inside this site's own disk.
    pub covered_persons: f64,
    /// Concurrent active users at the low end of the activity band.
    pub active_users_low: f64,
    /// Concurrent active users at the high end of the activity band.
    pub active_users_high: f64,
    /// Concurrent active users under early rollout
    /// (adoption_rate × active_share of the covered population).
    pub active_users_early: f64,
}

/// Full scenario report: coverage by class, the TV-tower increment, and
/// per-site load estimates.
///
/// Every percentage is exactly `100 · count / total_population` computed in
/// f64, and `tv_increment` is exactly `combined − legacy`; recomputing them
/// from the report's own counts reproduces the stored values bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    /// Reference population the percentages are relative to.
    pub total_population: f64,
    /// People covered by the legacy network (union of legacy kinds).
    pub legacy_covered: f64,
    /// Legacy coverage as a percentage of the total population.
    pub legacy_pct: f64,
    /// People covered by TV towers alone.
    pub tv_covered: f64,
    /// TV-tower coverage as a percentage of the total population.
    pub tv_pct: f64,
    /// People covered by the union of all sites.
    pub combined_covered: f64,
    /// Combined coverage as a percentage of the total population.
    pub combined_pct: f64,
    /// People the TV towers add on top of the legacy network.
    pub tv_increment: f64,
    /// That increment as a percentage of the total population.
    pub tv_increment_pct: f64,
    /// Per-kind tallies (kinds with no sites omitted).
    pub per_class: Vec<ClassCoverage>,
    /// Per-site load estimates, in input order.
    pub per_site: Vec<SiteLoad>,
}

/// Pure percentage/load arithmetic on already-computed tallies.
///
/// Split out from [`scenario_report`] so the arithmetic can be exercised with
/// injected counts: with `legacy = 9000` of `total = 200000` this returns
/// exactly 4.5 percent, with no raster scan involved.
pub fn scenario_from_counts(
    counts: &CoverageCounts,
    params: &ScenarioParams,
    total_population: f64,
) -> Result<ScenarioReport> {
    params.validate()?;
    if !total_population.is_finite() || total_population <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "total population must be positive and finite to form percentages, got {total_population}"
        )));
    }
    let pct = |count: f64| 100.0 * count / total_population;
    let tv_increment = counts.combined - counts.legacy;
    let early_fraction = params.adoption_rate * params.active_share;
    let per_site = counts
        .per_site
        .iter()
        .map(|s| SiteLoad {
            id: s.id.clone(),
            kind: s.kind,
            covered_persons: s.covered_persons,
            active_users_low: s.covered_persons * params.active_user_fraction_low,
            active_users_high: s.covered_persons * params.active_user_fraction_high,
            active_users_early: s.covered_persons * early_fraction,
        })
        .collect();
    Ok(ScenarioReport {
        total_population,
        legacy_covered: counts.legacy,
        legacy_pct: pct(counts.legacy),
        tv_covered: counts.tv,
        tv_pct: pct(counts.tv),
        combined_covered: counts.combined,
        combined_pct: pct(counts.combined),
        tv_increment,
        tv_increment_pct: pct(tv_increment),
        per_class: counts.per_class.clone(),
        per_site,
    })
}

/// Computes the full scenario report for a raster and site set.
///
/// `total_population` is passed explicitly rather than taken from the raster:
/// census totals and raster integrals rarely agree exactly, and percentages
/// should be relative to the figure the caller trusts.
pub fn scenario_report(
    raster: &PopulationRaster,
    sites: &[TowerSite],
    params: &ScenarioParams,
    total_population: f64,
) -> Result<ScenarioReport> {
    let counts = covered_counts(raster, sites);
    scenario_from_counts(&counts, params, total_population)
}

/// Candidate grid for [`greedy_relocate`]: every `stride`-th cell center in
/// both axes is a legal tower position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelocateGrid {
    /// Candidate spacing in cells; 1 considers every cell center.
    pub stride: usize,
}

impl Default for RelocateGrid {
    fn default() -> Self {
        Self { stride: 1 }
    }
}

/// One optimized tower position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Latitude of the chosen cell center.
    pub lat: f64,
    /// Longitude of the chosen cell center.
    pub lon: f64,
    /// People this tower covers that nothing before it covered.
    pub covered_gain: f64,
}

impl Placement {
    /// Converts the placement into a site of kind `candidate`.
    pub fn to_site(&self, id: impl Into<String>, radius_km: f64) -> TowerSite {
        TowerSite::new(id, self.lat, self.lon, TowerKind::Candidate, radius_km)
    }
}

/// Marginal population a candidate at `(row, col)` would add, given the
/// already-covered cell mask.  Same row-subtotal association as every other
/// scan, so the value is independent of how candidates are scheduled.
fn candidate_gain(
    raster: &PopulationRaster,
    covered: &[bool],
    row: usize,
    col: usize,
    radius_km: f64,
) -> f64 {
    let center = raster.cell_center(row, col);
    let margin_km = raster.dlat() * KM_PER_DEGREE;
    let mut gain = 0.0;
    for r in 0..raster.nrows() {
        let (row_lat, _) = raster.cell_center(r, 0);
        if (center.0 - row_lat).abs() * KM_PER_DEGREE > radius_km + margin_km {
            continue;
        }
        let mut row_sum = 0.0;
        for c in 0..raster.ncols() {
            let d = raster.density(r, c);
            if d == 0.0 || covered[r * raster.ncols() + c] {
                continue;
            }
            if haversine_km(raster.cell_center(r, c), center) <= radius_km {
                row_sum += d;
            }
        }
        gain += row_sum * raster.cell_area_km2(r);
    }
    gain
}

/// Marks every cell whose center lies within `radius_km` of `center`.
fn mark_covered(raster: &PopulationRaster, covered: &mut [bool], center: (f64, f64), radius_km: f64) {
    let margin_km = raster.dlat() * KM_PER_DEGREE;
    for r in 0..raster.nrows() {
        let (row_lat, _) = raster.cell_center(r, 0);
        if (center.0 - row_lat).abs() * KM_PER_DEGREE > radius_km + margin_km {
            continue;
        }
        for c in 0..raster.ncols() {
            if !covered[r * raster.ncols() + c]
                && haversine_km(raster.cell_center(r, c), center) <= radius_km
            {
                covered[r * raster.ncols() + c] = true;
            }
        }
    }
}

/// Scores all candidates and returns the best `(gain, row, col)` under the
/// total order "higher gain first, ties to the smaller (lat, lon)".
///
/// Rows index latitude ascending and columns longitude ascending, so the
/// lexicographic (row, col) order used here *is* (lat, lon) order.  The
/// comparator is a total order, which makes the parallel reduction
/// associative and hence independent of work splitting.
fn best_candidate(
    raster: &PopulationRaster,
    covered: &[bool],
    candidates: &[(usize, usize)],
    radius_km: f64,
) -> (f64, usize, usize) {
    let score = |&(row, col): &(usize, usize)| -> (f64, usize, usize) {
        (candidate_gain(raster, covered, row, col, radius_km), row, col)
    };
    let better = |a: (f64, usize, usize), b: (f64, usize, usize)| {
        if a.0 > b.0 || (a.0 == b.0 && (a.1, a.2) < (b.1, b.2)) {
            a
        } else {
            b
        }
    };
    #[cfg(feature = "parallel")]
    {
        candidates
            .par_iter()
            .map(score)
            .reduce_with(better)
            .expect("candidate list is validated non-empty")
    }
    #[cfg(not(feature = "parallel"))]
    {
        candidates
            .iter()
            .map(score)
            .reduce(better)
            .expect("candidate list is validated non-empty")
    }
}

/// Greedily places `n_towers` towers of radius `radius_km` on the candidate
/// grid to maximize covered population, marginal-gain style: each round picks
/// the candidate adding the most not-yet-covered people, ties broken by the
/// smaller (lat, lon).
///
/// `existing` sites (e.g. the legacy network) pre-cover their disks, so the
/// optimizer maximizes the *increment* over them; pass an empty slice to
/// optimize raw coverage.  Chosen positions are removed from the candidate
/// pool, so the result contains `n_towers` distinct positions.
///
/// Greedy maximization of a coverage (submodular) objective is within a
/// factor `1 − 1/e` of the optimal placement; on small instances it is
/// usually exactly optimal.
pub fn greedy_relocate(
    raster: &PopulationRaster,
    n_towers: usize,
    radius_km: f64,
    candidate_grid: &RelocateGrid,
    existing: &[TowerSite],
) -> Result<Vec<Placement>> {
    if n_towers == 0 {
        return Err(Error::InvalidArgument("n_towers must be at least 1".into()));
    }
    if !radius_km.is_finite() || radius_km <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "relocation radius must be positive, got {radius_km}"
        )));
    }
    if candidate_grid.stride == 0 {
        return Err(Error::InvalidArgument(
            "candidate grid is empty: stride must be at least 1".into(),
        ));
    }
    let mut candidates: Vec<(usize, usize)> = (0..raster.nrows())
        .step_by(candidate_grid.stride)
        .flat_map(|r| (0..raster.ncols()).step_by(candidate_grid.stride).map(move |c| (r, c)))
        .collect();
    if candidates.len() < n_towers {
        return Err(Error::InvalidArgument(format!(
            "candidate grid has {} positions but {n_towers} towers were requested",
            candidates.len()
        )));
    }

    let mut covered = vec![false; raster.nrows() * raster.ncols()];
    for site in existing {
        mark_covered(raster, &mut covered, (site.lat, site.lon), site.coverage_radius_km);
    }

    let mut placements = Vec::with_capacity(n_towers);
    for _ in 0..n_towers {
        let (gain, row, col) = best_candidate(raster, &covered, &candidates, radius_km);
        let (lat, lon) = raster.cell_center(row, col);
        mark_covered(raster, &mut covered, (lat, lon), radius_km);
        candidates.retain(|&(r, c)| (r, c) != (row, col));
        placements.push(Placement { lat, lon, covered_gain: gain });
    }
    Ok(placements)
}
