//! Monte-Carlo coverage-range estimation.
//!
//! For one configuration (site, radio, user count) and one candidate
//! distance `d`, a trial drops `K` users area-uniformly within `d`, draws a
//! channel, precodes, balances powers and checks who reaches the rate
//! target. Satisfaction is pooled over `trials × K` user instances; a
//! distance passes when the pooled fraction meets the threshold. The
//! coverage range `d_cov` is the largest grid distance that still passes,
//! found by geometric bracketing plus binary refinement on a fixed grid.
//!
//! Trials are seeded by `(master seed, distance, trial index)` — never by
//! scheduling order — so a sweep returns bit-identical results sequentially,
//! in parallel, and for any worker count: per-trial results are integer
//! satisfaction counts, and their sum does not depend on reduction order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::array::ArrayConfig;
use crate::channel::{
    self, Duplex, FadingParams, RadioConfig, SiteConfig, UserDrop,
    MIN_USER_DISTANCE_M,
};
use crate::error::{Error, Result};
use crate::mimo;
use crate::rng;

/// Default Monte-Carlo trials per evaluated distance.
pub const DEFAULT_TRIALS: usize = 100;
/// Default pooled satisfaction threshold.
pub const DEFAULT_THRESHOLD: f64 = 0.95;
/// Default distance grid [km].
pub const DEFAULT_GRID_KM: f64 = 0.1;
/// Default search cap [km].
pub const DEFAULT_MAX_DISTANCE_KM: f64 = 100.0;
/// Default receive height [m]: rooftop CPE antennas.
pub const DEFAULT_RX_HEIGHT_M: f64 = 8.0;
/// z-score of the 95% Wilson interval reported with each curve point.
pub const WILSON_Z95: f64 = 1.96;
/// Stream-key layout supports distances up to this cap (0.1 m quantization
/// into the high bits of a 64-bit stream id, see [`crate::rng`]).
const MAX_SUPPORTED_DISTANCE_KM: f64 = 1600.0;

/// Everything needed to score one configuration at candidate distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageQuery {
    pub site: SiteConfig,
    pub radio: RadioConfig,
    pub fading: FadingParams,
    /// Simultaneously served users `K`.
    pub users: usize,
    /// Receive antenna height [m].
    pub rx_height_m: f64,
    /// Monte-Carlo drops per distance.
    pub trials: usize,
    /// Pooled fraction of satisfied user instances required to pass.
    pub satisfaction_threshold: f64,
    /// Distance grid the search snaps to [km].
    pub distance_grid_km: f64,
    /// Search cap [km].
    pub max_distance_km: f64,
    pub master_seed: u64,
}

impl CoverageQuery {
    /// Query with the study's default Monte-Carlo parameters.
    pub fn new(site: SiteConfig, radio: RadioConfig, users: usize, master_seed: u64) -> Self {
        CoverageQuery {
            fading: FadingParams::for_scenario(site.scenario),
            site,
            radio,
            users,
            rx_height_m: DEFAULT_RX_HEIGHT_M,
            trials: DEFAULT_TRIALS,
            satisfaction_threshold: DEFAULT_THRESHOLD,
            distance_grid_km: DEFAULT_GRID_KM,
            max_distance_km: DEFAULT_MAX_DISTANCE_KM,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.site.validate()?;
        self.radio.validate()?;
        self.fading.validate()?;
        if self.users == 0 {
            return Err(Error::InvalidConfig("need at least one user".into()));
        }
        if self.users > self.site.array.elements() {
            return Err(Error::InvalidConfig(format!(
                "{} users exceed the array's {} elements",
                self.users,
                self.site.array.elements()
            )));
        }
        if !(1.0..=10.0).contains(&self.rx_height_m) {
            return Err(Error::InvalidConfig(format!(
                "receive height must be in [1, 10] m, got {}",
                self.rx_height_m
            )));
        }
        if self.trials == 0 || self.trials as u64 >= rng::MAX_TRIALS {
            return Err(Error::InvalidConfig(format!(
                "trials must be in [1, {}), got {}",
                rng::MAX_TRIALS,
                self.trials
            )));
        }
        if !(self.satisfaction_threshold > 0.0 && self.satisfaction_threshold <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "satisfaction threshold must be in (0, 1], got {}",
                self.satisfaction_threshold
            )));
        }
        if !(self.distance_grid_km.is_finite() && self.distance_grid_km > 0.0) {
            return Err(Error::InvalidConfig("distance grid must be positive".into()));
        }
        if !(self.max_distance_km >= self.distance_grid_km
            && self.max_distance_km <= MAX_SUPPORTED_DISTANCE_KM)
        {
            return Err(Error::InvalidConfig(format!(
                "max distance must be in [grid, {} km], got {}",
                MAX_SUPPORTED_DISTANCE_KM, self.max_distance_km
            )));
        }
        Ok(())
    }
}

/// Pooled satisfaction at one distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub distance_km: f64,
    /// Satisfied user instances over `trials × K`.
    pub satisfied_fraction: f64,
    /// Half-width of the 95% Wilson interval around the fraction.
    pub wilson_halfwidth: f64,
}

/// Half-width of the Wilson score interval for `successes` out of `n`.
pub fn wilson_halfwidth(successes: u64, n: u64, z: f64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf)
}

/// One Monte-Carlo trial; returns how many of the `K` users hit the target.
///
/// With max-min power control all users share one SINR, so a drop almost
/// always passes or fails as a block; the count is kept per user so the
/// pooled fraction stays well-defined if the control strategy changes.
fn run_trial(query: &CoverageQuery, distance_km: f64, trial: u64) -> Result<usize> {
    let mut trial_rng = rng::trial_rng(
        query.master_seed,
        rng::distance_key(distance_km),
        trial,
    );
    let drop = UserDrop::uniform_disk(
        query.users,
        distance_km * 1000.0,
        query.rx_height_m,
        &mut trial_rng,
    )?;
    let channel_seed = rand::RngCore::next_u64(&mut trial_rng);
    let h = channel::generate_channel(
        &query.site,
        &query.radio,
        &drop,
        &query.fading,
        channel_seed,
    )?;
    let noise = query.radio.noise_power_w();
    let power = query.site.tx_power_w;
    let precoding = mimo::rzf_precode(&h.entries, noise, power)?;
    let gains = mimo::effective_gains(&h.entries, &precoding)?;
    let allocation = mimo::maxmin_power(&gains, noise, power)?;
    let rates = mimo::user_rates(&allocation, &gains, &query.radio)?;
    Ok(rates
        .rate_bps
        .iter()
        .filter(|&&r| r >= query.radio.target_rate_bps)
        .count())
}

fn finish_point(query: &CoverageQuery, distance_km: f64, counts: &[usize]) -> DistancePoint {
    let satisfied: u64 = counts.iter().map(|&c| c as u64).sum();
    let n = (query.trials * query.users) as u64;
    DistancePoint {
        distance_km: crate::round6(distance_km),
        satisfied_fraction: satisfied as f64 / n as f64,
        wilson_halfwidth: wilson_halfwidth(satisfied, n, WILSON_Z95),
    }
}

fn check_distance(query: &CoverageQuery, distance_km: f64) -> Result<()> {
    query.validate()?;
    if !(distance_km.is_finite()
        && distance_km * 1000.0 >= MIN_USER_DISTANCE_M
        && distance_km <= MAX_SUPPORTED_DISTANCE_KM)
    {
        return Err(Error::OutOfRange {
            what: "evaluation distance",
            value: distance_km,
            range: "[0.035 km, 1600 km]",
        });
    }
    Ok(())
}

/// Pooled satisfaction at one distance, trials running in parallel.
#[cfg(feature = "parallel")]
pub fn evaluate_distance(query: &CoverageQuery, distance_km: f64) -> Result<DistancePoint> {
    check_distance(query, distance_km)?;
    let counts: Vec<usize> = (0..query.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(query, distance_km, t))
        .collect::<Result<_>>()?;
    Ok(finish_point(query, distance_km, &counts))
}

/// Pooled satisfaction at one distance (sequential build).
#[cfg(not(feature = "parallel"))]
pub fn evaluate_distance(query: &CoverageQuery, distance_km: f64) -> Result<DistancePoint> {
    evaluate_distance_seq(query, distance_km)
}

/// Sequential twin of [`evaluate_distance`]; always available, always
/// bit-identical to the parallel version.
pub fn evaluate_distance_seq(query: &CoverageQuery, distance_km: f64) -> Result<DistancePoint> {
    check_distance(query, distance_km)?;
    let counts: Vec<usize> = (0..query.trials as u64)
        .map(|t| run_trial(query, distance_km, t))
        .collect::<Result<_>>()?;
    Ok(finish_point(query, distance_km, &counts))
}

/// Outcome of a coverage-range search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// Largest passing grid distance [km]; 0 when even the closest grid
    /// point fails.
    pub d_cov_km: f64,
    /// Every evaluated grid point, ascending in distance.
    pub curve: Vec<DistancePoint>,
    /// Present when the search ended at a boundary instead of a bracket.
    pub note: Option<String>,
}

/// Finds the coverage range on the query's distance grid.
///
/// Starting from the closest searchable grid point, the candidate index
/// doubles until a distance fails (geometric bracketing), then the
/// pass/fail boundary is pinned down by bisection on grid indices. Every
/// distance is evaluated at most once and with the same seeds regardless of
/// visit order.
pub fn coverage_distance(query: &CoverageQuery) -> Result<CoverageResult> {
    query.validate()?;
    let grid = query.distance_grid_km;
    let i_min = (MIN_USER_DISTANCE_M / 1000.0 / grid).ceil().max(1.0) as u64;
    let i_max = (query.max_distance_km / grid * (1.0 + 1e-12)).floor() as u64;
    if i_max < i_min {
        return Err(Error::InvalidConfig(format!(
            "max distance {} km leaves no grid point at or above the {} m minimum",
            query.max_distance_km, MIN_USER_DISTANCE_M
        )));
    }

    let mut curve: std::collections::BTreeMap<u64, DistancePoint> = Default::default();
    let mut eval = |i: u64| -> Result<DistancePoint> {
        if let Some(p) = curve.get(&i) {
            return Ok(*p);
        }
        let p = evaluate_distance(query, i as f64 * grid)?;
        curve.insert(i, p);
        Ok(p)
    };
    let passes =
        |p: &DistancePoint| -> bool { p.satisfied_fraction >= query.satisfaction_threshold };

    // Geometric bracketing.
    let first = eval(i_min)?;
    let mut lo = i_min;
    if !passes(&first) {
        return Ok(CoverageResult {
            d_cov_km: 0.0,
            curve: curve.into_values().collect(),
            note: Some(format!(
                "threshold not met even at the minimum searchable distance {} km",
                crate::round6(i_min as f64 * grid)
            )),
        });
    }
    let mut hi = loop {
        let next = (lo * 2).min(i_max);
        if next == lo {
            // Passed at the cap without ever failing.
            return Ok(CoverageResult {
                d_cov_km: crate::round6(i_max as f64 * grid),
                curve: curve.into_values().collect(),
                note: Some(format!(
                    "threshold still met at the {} km search cap; range is at least this",
                    crate::round6(i_max as f64 * grid)
                )),
            });
        }
        if passes(&eval(next)?) {
            lo = next;
        } else {
            break next;
        }
    };

    // Binary refinement between the last pass and the first fail.
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if passes(&eval(mid)?) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(CoverageResult {
        d_cov_km: crate::round6(lo as f64 * grid),
        curve: curve.into_values().collect(),
        note: None,
    })
}

/// Tower archetype of a table row. Orders legacy before high towers so the
/// emitted table reads top-down like the deployment comparison.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum SiteClass {
    Legacy,
    HighTower,
}

impl SiteClass {
    /// The concrete site for this class with the given array.
    pub fn site(self, array: ArrayConfig) -> SiteConfig {
        match self {
            SiteClass::Legacy => SiteConfig::legacy(array),
            SiteClass::HighTower => SiteConfig::high_tower(array),
        }
    }
}

impl std::fmt::Display for SiteClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SiteClass::Legacy => "legacy",
            SiteClass::HighTower => "high-tower",
        })
    }
}

/// Array polarization option swept by the table.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Polarization {
    Single,
    Dual,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::Single => "single",
            Polarization::Dual => "dual",
        })
    }
}

/// Declarative description of a full coverage-table sweep.
///
/// Defaults reproduce the reference study: both tower classes, the three
/// band plans, K ∈ {20, 50, 100}, single and dual polarization on a 32×8
/// half-wavelength array, 100 trials per distance on a 0.1 km grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepConfig {
    pub site_classes: Vec<SiteClass>,
    pub carriers_mhz: Vec<f64>,
    pub users: Vec<usize>,
    pub polarizations: Vec<Polarization>,
    /// Array columns around the cylinder.
    pub m_h: usize,
    /// Array rings.
    pub m_v: usize,
    /// Element spacing [wavelengths].
    pub spacing: f64,
    pub trials: usize,
    pub satisfaction_threshold: f64,
    pub distance_grid_km: f64,
    pub max_distance_km: f64,
    pub rx_height_m: f64,
    pub noise_figure_db: f64,
    pub cp_overhead: f64,
    pub target_rate_mbps: f64,
    pub legacy_height_m: f64,
    pub legacy_power_w: f64,
    pub high_tower_height_m: f64,
    pub high_tower_power_w: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            site_classes: vec![SiteClass::Legacy, SiteClass::HighTower],
            carriers_mhz: vec![700.0, 1800.0, 3500.0],
            users: vec![20, 50, 100],
            polarizations: vec![Polarization::Single, Polarization::Dual],
            m_h: 32,
            m_v: 8,
            spacing: 0.5,
            trials: DEFAULT_TRIALS,
            satisfaction_threshold: DEFAULT_THRESHOLD,
            distance_grid_km: DEFAULT_GRID_KM,
            max_distance_km: DEFAULT_MAX_DISTANCE_KM,
            rx_height_m: DEFAULT_RX_HEIGHT_M,
            noise_figure_db: 7.0,
            cp_overhead: 0.05,
            target_rate_mbps: 10.0,
            legacy_height_m: 25.0,
            legacy_power_w: 40.0,
            high_tower_height_m: 150.0,
            high_tower_power_w: 100.0,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.site_classes.is_empty()
            || self.carriers_mhz.is_empty()
            || self.users.is_empty()
            || self.polarizations.is_empty()
        {
            return Err(Error::InvalidConfig(
                "sweep axes (site classes, carriers, users, polarizations) must be nonempty"
                    .into(),
            ));
        }
        for &fc in &self.carriers_mhz {
            RadioConfig::for_carrier(fc * 1e6)?;
        }
        // The remaining scalars are validated by the queries they feed.
        self.query(
            self.site_classes[0],
            self.carriers_mhz[0],
            self.users[0],
            self.polarizations[0],
            0,
        )?
        .validate()
    }

    fn array(&self, polarization: Polarization) -> ArrayConfig {
        ArrayConfig {
            m_h: self.m_h,
            m_v: self.m_v,
            polarizations: match polarization {
                Polarization::Single => 1,
                Polarization::Dual => 2,
            },
            spacing: self.spacing,
        }
    }

    fn site(&self, class: SiteClass, polarization: Polarization) -> SiteConfig {
        let array = self.array(polarization);
        let (tx_height_m, tx_power_w) = match class {
            SiteClass::Legacy => (self.legacy_height_m, self.legacy_power_w),
            SiteClass::HighTower => (self.high_tower_height_m, self.high_tower_power_w),
        };
        SiteConfig {
            tx_height_m,
            tx_power_w,
            ..class.site(array)
        }
    }

    /// Builds the query for one table cell. The seed is derived from the
    /// cell's identity (class, carrier, users, polarization), so a cell's
    /// result does not change when other cells are added to or removed from
    /// the sweep.
    pub fn query(
        &self,
        class: SiteClass,
        carrier_mhz: f64,
        users: usize,
        polarization: Polarization,
        master_seed: u64,
    ) -> Result<CoverageQuery> {
        let mut radio = RadioConfig::for_carrier(carrier_mhz * 1e6)?;
        radio.noise_figure_db = self.noise_figure_db;
        radio.cp_overhead = self.cp_overhead;
        radio.target_rate_bps = self.target_rate_mbps * 1e6;
        let site = self.site(class, polarization);
        let mut seed = rng::mix64(master_seed, class as u64 + 1);
        seed = rng::mix64(seed, (carrier_mhz * 1000.0).round() as u64);
        seed = rng::mix64(seed, users as u64);
        seed = rng::mix64(seed, polarization as u64 + 1);
        Ok(CoverageQuery {
            fading: FadingParams::for_scenario(site.scenario),
            site,
            radio,
            users,
            rx_height_m: self.rx_height_m,
            trials: self.trials,
            satisfaction_threshold: self.satisfaction_threshold,
            distance_grid_km: self.distance_grid_km,
            max_distance_km: self.max_distance_km,
            master_seed: seed,
        })
    }
}

/// One row of the coverage table: a (class, carrier, K) configuration with
/// single- and dual-polarization results side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub class: SiteClass,
    pub users: usize,
    pub carrier_mhz: f64,
    pub duplex: Duplex,
    pub bandwidth_mhz: f64,
    pub single: Option<CoverageResult>,
    pub dual: Option<CoverageResult>,
    /// Numerical failures of individual cells, if any.
    pub single_error: Option<String>,
    pub dual_error: Option<String>,
}

impl TableRow {
    pub fn d_cov_single_km(&self) -> Option<f64> {
        self.single.as_ref().map(|r| r.d_cov_km)
    }

    pub fn d_cov_dual_km(&self) -> Option<f64> {
        self.dual.as_ref().map(|r| r.d_cov_km)
    }
}

/// Full coverage table, rows sorted by (class, carrier, users).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageTable {
    pub rows: Vec<TableRow>,
}

impl CoverageTable {
    /// Renders the table as CSV with a fixed header. All numbers are in
    /// their shortest decimal form; cells a sweep did not request (or that
    /// failed numerically) are empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("type,users,fc_mhz,duplex,bandwidth_mhz,dcov_single_km,dcov_dual_km\n");
        for row in &self.rows {
            let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                row.class,
                row.users,
                row.carrier_mhz,
                row.duplex,
                row.bandwidth_mhz,
                fmt(row.d_cov_single_km()),
                fmt(row.d_cov_dual_km()),
            ));
        }
        out
    }
}

/// Runs the full sweep described by `config`.
///
/// Input errors (bad configuration) abort the sweep; numerical failures of
/// a single cell are recorded in the row and leave the cell empty, so one
/// pathological configuration cannot take down an hours-long table run.
pub fn coverage_table(config: &SweepConfig, master_seed: u64) -> Result<CoverageTable> {
    config.validate()?;
    let mut keys: Vec<(SiteClass, f64, usize)> = Vec::new();
    for &class in &config.site_classes {
        for &fc in &config.carriers_mhz {
            for &users in &config.users {
                keys.push((class, fc, users));
            }
        }
    }
    keys.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.total_cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });
    keys.dedup();

    let mut rows = Vec::with_capacity(keys.len());
    for (class, fc, users) in keys {
        let radio = RadioConfig::for_carrier(fc * 1e6)?;
        let mut row = TableRow {
            class,
            users,
            carrier_mhz: fc,
            duplex: radio.duplex,
            bandwidth_mhz: radio.bandwidth_hz / 1e6,
            single: None,
            dual: None,
            single_error: None,
            dual_error: None,
        };
        for &pol in &config.polarizations {
            let query = config.query(class, fc, users, pol, master_seed)?;
            let (slot, err_slot) = match pol {
                Polarization::Single => (&mut row.single, &mut row.single_error),
                Polarization::Dual => (&mut row.dual, &mut row.dual_error),
            };
            match coverage_distance(&query) {
                Ok(result) => *slot = Some(result),
                Err(e) if e.is_numerical() => *err_slot = Some(e.to_string()),
                Err(e) => return Err(e),
            }
        }
        rows.push(row);
    }
    Ok(CoverageTable { rows })
}
