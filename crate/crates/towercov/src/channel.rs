//! Rural-macro propagation and small-scale fading.
//!
//! Large-scale loss follows the 3GPP TR 38.901 RMa pathloss curves (two-slope
//! LoS with a breakpoint, NLoS as the max of LoS and the NLoS fit), with
//! log-normal shadowing on top. Small-scale fading is a clustered model: a
//! specular ray weighted by a per-user Rician factor plus a sum of
//! Laplacian-offset diffuse clusters, which reproduces the spatial
//! correlation that beamforming gains depend on at a fraction of the cost of
//! a full geometry-based simulator. Channels are normalized so that
//! `E[‖h_k‖²] = β_k · M`.
//!
//! The coverage study evaluates distances well beyond the RMa fit's nominal
//! 10 km validity; the curves extrapolate smoothly (the LoS far slope is the
//! usual 40 dB/decade) and are used as-is out to the search cap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::array::{self, ArrayConfig};
use crate::error::{Error, Result};

/// Average building height [m] of the RMa scenario.
const AVG_BUILDING_HEIGHT_M: f64 = 5.0;
/// Average street width [m] of the RMa scenario.
const STREET_WIDTH_M: f64 = 20.0;
/// Propagation constant the RMa breakpoint formula is calibrated with [m/s].
const BREAKPOINT_C: f64 = 3.0e8;
/// Thermal noise density at 290 K [dBm/Hz].
const THERMAL_NOISE_DBM_HZ: f64 = -174.0;
/// Users are never dropped closer than this to the mast.
pub const MIN_USER_DISTANCE_M: f64 = 35.0;

/// Breakpoint distance [m] separating the two LoS slopes.
pub fn breakpoint_distance_m(carrier_hz: f64, h_bs_m: f64, h_ut_m: f64) -> f64 {
    2.0 * std::f64::consts::PI * h_bs_m * h_ut_m * carrier_hz / BREAKPOINT_C
}

fn check_pathloss_domain(d2d_m: f64, carrier_hz: f64, h_bs_m: f64, h_ut_m: f64) -> Result<()> {
    if !(d2d_m.is_finite() && d2d_m >= 10.0) {
        return Err(Error::OutOfRange {
            what: "2D distance",
            value: d2d_m,
            range: "[10 m, inf)",
        });
    }
    if !(1.0..=10.0).contains(&h_ut_m) {
        return Err(Error::OutOfRange {
            what: "user height",
            value: h_ut_m,
            range: "[1 m, 10 m]",
        });
    }
    if !(h_bs_m.is_finite() && h_bs_m > h_ut_m) {
        return Err(Error::OutOfRange {
            what: "base-station height",
            value: h_bs_m,
            range: "(h_ut, inf)",
        });
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::OutOfRange {
            what: "carrier frequency",
            value: carrier_hz,
            range: "(0, inf)",
        });
    }
    Ok(())
}

/// First-slope RMa LoS fit, evaluated at a 3D distance.
fn pl1_db(d3d_m: f64, fc_ghz: f64) -> f64 {
    let h = AVG_BUILDING_HEIGHT_M;
    let h172 = h.powf(1.72);
    20.0 * (40.0 * std::f64::consts::PI * d3d_m * fc_ghz / 3.0).log10()
        + (0.03 * h172).min(10.0) * d3d_m.log10()
        - (0.044 * h172).min(14.77)
        + 0.002 * h.log10() * d3d_m
}

/// RMa line-of-sight pathloss [dB].
///
/// Two-slope model: the close-in fit up to the breakpoint, then a
/// 40 dB/decade slope anchored at the breakpoint so the curve is continuous.
/// Distances inside the fits are 3D (`hypot(d2D, h_bs − h_ut)`); the slope
/// switch itself is on the 2D distance.
pub fn pathloss_rma_los(d2d_m: f64, carrier_hz: f64, h_bs_m: f64, h_ut_m: f64) -> Result<f64> {
    check_pathloss_domain(d2d_m, carrier_hz, h_bs_m, h_ut_m)?;
    let fc_ghz = carrier_hz / 1e9;
    let dh = h_bs_m - h_ut_m;
    let d3d = d2d_m.hypot(dh);
    let d_bp = breakpoint_distance_m(carrier_hz, h_bs_m, h_ut_m);
    if d2d_m <= d_bp {
        Ok(pl1_db(d3d, fc_ghz))
    } else {
        let d3d_bp = d_bp.hypot(dh);
        Ok(pl1_db(d3d_bp, fc_ghz) + 40.0 * (d3d / d3d_bp).log10())
    }
}

/// RMa non-line-of-sight pathloss [dB]: `max(PL_LoS, PL'_NLoS)`.
pub fn pathloss_rma_nlos(d2d_m: f64, carrier_hz: f64, h_bs_m: f64, h_ut_m: f64) -> Result<f64> {
    let los = pathloss_rma_los(d2d_m, carrier_hz, h_bs_m, h_ut_m)?;
    let fc_ghz = carrier_hz / 1e9;
    let d3d = d2d_m.hypot(h_bs_m - h_ut_m);
    let h = AVG_BUILDING_HEIGHT_M;
    let nlos = 161.04 - 7.1 * STREET_WIDTH_M.log10() + 7.5 * h.log10()
        - (24.37 - 3.7 * (h / h_bs_m).powi(2)) * h_bs_m.log10()
        + (43.42 - 3.1 * h_bs_m.log10()) * (d3d.log10() - 3.0)
        + 20.0 * fc_ghz.log10()
        - (3.2 * (11.75 * h_ut_m).log10().powi(2) - 4.97);
    Ok(los.max(nlos))
}

/// Propagation regime of a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// Clear line of sight over the clutter (tall towers).
    RmaLos,
    /// Propagation through/around clutter (legacy towers at rooftop height).
    RmaNlos,
}

/// Transmitter site: mast, power and array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteConfig {
    /// Antenna height above ground [m].
    pub tx_height_m: f64,
    /// Total downlink transmit power [W].
    pub tx_power_w: f64,
    /// Propagation regime users of this site experience.
    pub scenario: Scenario,
    pub array: ArrayConfig,
}

impl SiteConfig {
    /// Legacy cellular tower: 25 m mast, 46 dBm, NLoS propagation.
    pub fn legacy(array: ArrayConfig) -> Self {
        SiteConfig {
            tx_height_m: 25.0,
            tx_power_w: 40.0,
            scenario: Scenario::RmaNlos,
            array,
        }
    }

    /// Repurposed TV/radio tower: 150 m mast, 50 dBm, LoS propagation.
    pub fn high_tower(array: ArrayConfig) -> Self {
        SiteConfig {
            tx_height_m: 150.0,
            tx_power_w: 100.0,
            scenario: Scenario::RmaLos,
            array,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tx_height_m.is_finite() && self.tx_height_m > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tx height must be positive, got {}",
                self.tx_height_m
            )));
        }
        if !(self.tx_power_w.is_finite() && self.tx_power_w > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tx power must be positive, got {}",
                self.tx_power_w
            )));
        }
        self.array.validate()
    }

    /// Pathloss [dB] to a user at `d2d_m`, using this site's regime.
    pub fn pathloss_db(&self, d2d_m: f64, carrier_hz: f64, h_ut_m: f64) -> Result<f64> {
        match self.scenario {
            Scenario::RmaLos => pathloss_rma_los(d2d_m, carrier_hz, self.tx_height_m, h_ut_m),
            Scenario::RmaNlos => pathloss_rma_nlos(d2d_m, carrier_hz, self.tx_height_m, h_ut_m),
        }
    }
}

/// Duplexing scheme; decides which share of time/bandwidth serves downlink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Duplex {
    Fdd,
    Tdd,
}

impl Duplex {
    /// Fraction of resources available to the downlink: all of an FDD
    /// carrier, 3/4 of a TDD carrier (typical DL-heavy slot pattern).
    pub fn dl_fraction(self) -> f64 {
        match self {
            Duplex::Fdd => 1.0,
            Duplex::Tdd => 0.75,
        }
    }
}

impl std::fmt::Display for Duplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Duplex::Fdd => "fdd",
            Duplex::Tdd => "tdd",
        })
    }
}

/// Carrier, bandwidth and link-budget bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioConfig {
    /// Carrier frequency [Hz].
    pub carrier_hz: f64,
    /// Total system bandwidth [Hz].
    pub bandwidth_hz: f64,
    pub duplex: Duplex,
    /// Rate fraction lost to cyclic prefix and control overhead.
    pub cp_overhead: f64,
    /// User-equipment receiver noise figure [dB].
    pub noise_figure_db: f64,
    /// Per-user downlink rate target [bit/s].
    pub target_rate_bps: f64,
}

impl RadioConfig {
    /// The studied band plan: 700 MHz / 10 MHz FDD, 1800 MHz / 20 MHz FDD,
    /// 3500 MHz / 100 MHz TDD. Other carriers are rejected.
    pub fn for_carrier(carrier_hz: f64) -> Result<Self> {
        let (bandwidth_hz, duplex) = match carrier_hz as i64 {
            700_000_000 => (10e6, Duplex::Fdd),
            1_800_000_000 => (20e6, Duplex::Fdd),
            3_500_000_000 => (100e6, Duplex::Tdd),
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "unsupported carrier {} Hz (expected 700e6, 1800e6 or 3500e6)",
                    carrier_hz
                )))
            }
        };
        Ok(RadioConfig {
            carrier_hz,
            bandwidth_hz,
            duplex,
            cp_overhead: 0.05,
            noise_figure_db: 7.0,
            target_rate_bps: 10e6,
        })
    }

    /// Bandwidth actually serving the downlink [Hz].
    pub fn dl_bandwidth_hz(&self) -> f64 {
        self.duplex.dl_fraction() * self.bandwidth_hz
    }

    /// Receiver noise power over the downlink bandwidth [W]:
    /// `-174 dBm/Hz + 10·log10(B_dl) + NF`.
    pub fn noise_power_w(&self) -> f64 {
        let dbm = THERMAL_NOISE_DBM_HZ + 10.0 * self.dl_bandwidth_hz().log10() + self.noise_figure_db;
        10f64.powf((dbm - 30.0) / 10.0)
    }

    /// Achievable rate [bit/s] at a given SINR:
    /// `dl_fraction · (1 − cp_overhead) · B · log2(1 + sinr)`.
    pub fn rate_bps(&self, sinr: f64) -> f64 {
        self.duplex.dl_fraction() * (1.0 - self.cp_overhead) * self.bandwidth_hz * (1.0 + sinr).log2()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_hz.is_finite() && self.carrier_hz > 0.0) {
            return Err(Error::InvalidConfig("carrier must be positive".into()));
        }
        if !(self.bandwidth_hz.is_finite() && self.bandwidth_hz > 0.0) {
            return Err(Error::InvalidConfig("bandwidth must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.cp_overhead) {
            return Err(Error::InvalidConfig(format!(
                "cp_overhead must be in [0, 1), got {}",
                self.cp_overhead
            )));
        }
        if !self.noise_figure_db.is_finite() {
            return Err(Error::InvalidConfig("noise figure must be finite".into()));
        }
        if !(self.target_rate_bps.is_finite() && self.target_rate_bps > 0.0) {
            return Err(Error::InvalidConfig("target rate must be positive".into()));
        }
        Ok(())
    }
}

/// Small-scale fading parameters of the clustered channel model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    /// Mean of the per-user Rician K factor [dB] (LoS only).
    pub rician_k_mean_db: f64,
    /// Std of the per-user Rician K factor [dB].
    pub rician_k_std_db: f64,
    /// Number of diffuse clusters.
    pub n_clusters: usize,
    /// R.m.s. azimuth offset of cluster centers [deg], Laplacian-distributed.
    pub azimuth_spread_deg: f64,
    /// R.m.s. zenith/elevation offset of cluster centers [deg].
    pub zenith_spread_deg: f64,
    /// Cross-polarization ratio [dB] of diffuse clusters (dual-pol arrays).
    pub xpr_db: f64,
    /// Shadow-fading std [dB] at or before the LoS breakpoint distance.
    pub shadow_sigma_db_near: f64,
    /// Shadow-fading std [dB] beyond the breakpoint.
    pub shadow_sigma_db_far: f64,
}

impl FadingParams {
    /// RMa LoS defaults.
    pub fn los() -> Self {
        FadingParams {
            rician_k_mean_db: 7.0,
            rician_k_std_db: 4.0,
            n_clusters: 11,
            azimuth_spread_deg: 8.0,
            zenith_spread_deg: 2.0,
            xpr_db: 12.0,
            shadow_sigma_db_near: 4.0,
            shadow_sigma_db_far: 6.0,
        }
    }

    /// RMa NLoS defaults. No specular ray: the Rician mean is -inf so the
    /// generated channel is purely diffuse.
    pub fn nlos() -> Self {
        FadingParams {
            rician_k_mean_db: f64::NEG_INFINITY,
            rician_k_std_db: 0.0,
            n_clusters: 10,
            azimuth_spread_deg: 9.0,
            zenith_spread_deg: 2.0,
            xpr_db: 7.0,
            shadow_sigma_db_near: 8.0,
            shadow_sigma_db_far: 8.0,
        }
    }

    pub fn for_scenario(scenario: Scenario) -> Self {
        match scenario {
            Scenario::RmaLos => Self::los(),
            Scenario::RmaNlos => Self::nlos(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_clusters == 0 {
            return Err(Error::InvalidConfig("need at least one cluster".into()));
        }
        if !(self.azimuth_spread_deg >= 0.0 && self.zenith_spread_deg >= 0.0) {
            return Err(Error::InvalidConfig("angle spreads must be >= 0".into()));
        }
        if !(self.shadow_sigma_db_near >= 0.0 && self.shadow_sigma_db_far >= 0.0) {
            return Err(Error::InvalidConfig("shadow sigmas must be >= 0".into()));
        }
        if self.rician_k_std_db < 0.0 || !self.xpr_db.is_finite() {
            return Err(Error::InvalidConfig("bad Rician/XPR parameters".into()));
        }
        Ok(())
    }
}

/// Polar position of a dropped user relative to the mast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UserPosition {
    pub distance_m: f64,
    pub azimuth_deg: f64,
}

/// One Monte-Carlo drop: `K` users at a common receive height.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserDrop {
    pub users: Vec<UserPosition>,
    pub rx_height_m: f64,
}

impl UserDrop {
    /// Drops `k` users uniformly *by area* on the annulus between the
    /// minimum drop distance and `outer_radius_m`: `r = √(r_min² + u·(R² −
    /// r_min²))`, azimuth uniform. Area-uniform placement is what makes the
    /// satisfied-user fraction an areal coverage statistic.
    pub fn uniform_disk(
        k: usize,
        outer_radius_m: f64,
        rx_height_m: f64,
        rng: &mut ChaCha8Rng,
    ) -> Result<UserDrop> {
        if k == 0 {
            return Err(Error::InvalidArgument("drop needs at least one user".into()));
        }
        if !(outer_radius_m.is_finite() && outer_radius_m >= MIN_USER_DISTANCE_M) {
            return Err(Error::OutOfRange {
                what: "drop radius",
                value: outer_radius_m,
                range: "[35 m, inf)",
            });
        }
        let r_min2 = MIN_USER_DISTANCE_M * MIN_USER_DISTANCE_M;
        let r2_span = outer_radius_m * outer_radius_m - r_min2;
        let users = (0..k)
            .map(|_| {
                let u: f64 = rng.gen();
                let az: f64 = rng.gen::<f64>() * 360.0;
                UserPosition {
                    distance_m: (r_min2 + u * r2_span).sqrt(),
                    azimuth_deg: az,
                }
            })
            .collect();
        Ok(UserDrop {
            users,
            rx_height_m,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.users.is_empty() {
            return Err(Error::InvalidArgument("drop has no users".into()));
        }
        if !(1.0..=10.0).contains(&self.rx_height_m) {
            return Err(Error::OutOfRange {
                what: "receive height",
                value: self.rx_height_m,
                range: "[1 m, 10 m]",
            });
        }
        for u in &self.users {
            if !(u.distance_m.is_finite() && u.distance_m >= MIN_USER_DISTANCE_M) {
                return Err(Error::OutOfRange {
                    what: "user distance",
                    value: u.distance_m,
                    range: "[35 m, inf)",
                });
            }
            if !u.azimuth_deg.is_finite() {
                return Err(Error::InvalidArgument("user azimuth must be finite".into()));
            }
        }
        Ok(())
    }
}

/// Downlink channel of one drop, column `k` = user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    /// `M × K` complex gains.
    pub entries: DMatrix<Complex64>,
    /// Large-scale power gain β per user (pathloss + shadowing, linear).
    pub large_scale_gain: Vec<f64>,
    /// Specular-ray azimuth per user [deg].
    pub user_azimuth_deg: Vec<f64>,
    /// Specular-ray elevation per user [deg] (negative: below the array).
    pub user_elevation_deg: Vec<f64>,
}

impl ChannelMatrix {
    /// Antenna count `M`.
    pub fn elements(&self) -> usize {
        self.entries.nrows()
    }

    /// User count `K`.
    pub fn users(&self) -> usize {
        self.entries.ncols()
    }

    /// Writes `element,user,re,im` rows for cross-checking against external
    /// tools. Values use the shortest round-trip decimal form, so parsing
    /// the CSV back reproduces the exact bits.
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "element,user,re,im")?;
        for k in 0..self.users() {
            for m in 0..self.elements() {
                let z = self.entries[(m, k)];
                writeln!(w, "{},{},{},{}", m, k, z.re, z.im)?;
            }
        }
        Ok(())
    }
}

/// Samples one mean-zero Laplacian offset with the given r.m.s. width.
fn laplacian_offset(rng: &mut ChaCha8Rng, rms_deg: f64) -> f64 {
    // Inverse-CDF sampling; scale b = rms/√2. Clamp the tail so a once-in-2^53
    // draw of exactly u = -0.5 cannot produce an infinite angle.
    let b = rms_deg / std::f64::consts::SQRT_2;
    let u: f64 = rng.gen::<f64>() - 0.5;
    let r = (1.0 - 2.0 * u.abs()).max(f64::MIN_POSITIVE);
    -b * u.signum() * r.ln()
}

/// Standard complex Gaussian CN(0, 1).
fn cn01(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Generates the downlink channel matrix for one drop.
///
/// Per user: pathloss for the site's regime plus log-normal shadowing gives
/// β; the small-scale vector is a Rician mix of the specular steering vector
/// and `n_clusters` diffuse clusters at Laplacian angle offsets. On
/// dual-polarized arrays each cluster splits into co-polar and cross-polar
/// weights with the configured XPR; the specular ray is identical on both
/// slants of a pair, so in the `κ → ∞` limit the channel is exactly
/// `√β · a` and the pair combines fully coherently.
///
/// The generator is deterministic: the same inputs and seed produce a
/// bit-identical matrix. All draws go through one ChaCha stream in a fixed
/// per-user order, independent of threading anywhere else.
pub fn generate_channel(
    site: &SiteConfig,
    radio: &RadioConfig,
    drop: &UserDrop,
    fading: &FadingParams,
    seed: u64,
) -> Result<ChannelMatrix> {
    site.validate()?;
    radio.validate()?;
    fading.validate()?;
    drop.validate()?;
    let geometry = array::build_geometry(&site.array, radio.carrier_hz)?;
    let m_elems = geometry.elements();
    let k_users = drop.users.len();
    if k_users > m_elems {
        return Err(Error::InvalidArgument(format!(
            "{k_users} users exceed {m_elems} antennas"
        )));
    }
    let d_bp = breakpoint_distance_m(radio.carrier_hz, site.tx_height_m, drop.rx_height_m);
    let is_los = site.scenario == Scenario::RmaLos;
    let xpr = 10f64.powf(fading.xpr_db / 10.0);
    let dual = site.array.polarizations == 2;
    // Per-cluster weight normalization keeps E[|w|²] = 1 with or without the
    // cross-polar leakage term.
    let xpr_norm = 1.0 / (1.0 + 1.0 / xpr).sqrt();
    let cluster_scale = 1.0 / (fading.n_clusters as f64).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut entries = DMatrix::<Complex64>::zeros(m_elems, k_users);
    let mut large_scale_gain = Vec::with_capacity(k_users);
    let mut azimuths = Vec::with_capacity(k_users);
    let mut elevations = Vec::with_capacity(k_users);
    let mut steer = vec![Complex64::new(0.0, 0.0); m_elems];
    let mut diffuse = vec![Complex64::new(0.0, 0.0); m_elems];

    for (k, user) in drop.users.iter().enumerate() {
        let pl_db = site.pathloss_db(user.distance_m, radio.carrier_hz, drop.rx_height_m)?;
        let sigma = if user.distance_m <= d_bp {
            fading.shadow_sigma_db_near
        } else {
            fading.shadow_sigma_db_far
        };
        let shadow_db: f64 = rng.sample::<f64, _>(StandardNormal) * sigma;
        let beta = 10f64.powf(-(pl_db + shadow_db) / 10.0);

        let elevation_deg = (drop.rx_height_m - site.tx_height_m)
            .atan2(user.distance_m)
            .to_degrees();

        // Rician split. 1/√(1+1/κ) and 1/√(1+κ) stay exact in the κ → ∞
        // (pure specular) and κ → 0 (pure diffuse) limits.
        let (los_amp, diffuse_amp) = if is_los {
            let k_db = fading.rician_k_mean_db + rng.sample::<f64, _>(StandardNormal) * fading.rician_k_std_db;
            let kappa = 10f64.powf(k_db / 10.0);
            (1.0 / (1.0 + 1.0 / kappa).sqrt(), 1.0 / (1.0 + kappa).sqrt())
        } else {
            (0.0, 1.0)
        };

        diffuse.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for _ in 0..fading.n_clusters {
            let daz = laplacian_offset(&mut rng, fading.azimuth_spread_deg);
            let del = laplacian_offset(&mut rng, fading.zenith_spread_deg);
            array::write_steering(
                &geometry,
                user.azimuth_deg + daz,
                elevation_deg + del,
                &mut steer,
            );
            let c = cn01(&mut rng);
            if dual {
                let d_pos = cn01(&mut rng);
                let d_neg = cn01(&mut rng);
                let w_pos = (c + d_pos / xpr.sqrt()) * xpr_norm;
                let w_neg = (c + d_neg / xpr.sqrt()) * xpr_norm;
                for (m, s) in steer.iter().enumerate() {
                    let w = if geometry.slants_deg[m] >= 0.0 { w_pos } else { w_neg };
                    diffuse[m] += w * s;
                }
            } else {
                for (m, s) in steer.iter().enumerate() {
                    diffuse[m] += c * s;
                }
            }
        }

        let sqrt_beta = beta.sqrt();
        if is_los {
            array::write_steering(&geometry, user.azimuth_deg, elevation_deg, &mut steer);
        }
        let mut col = entries.column_mut(k);
        for m in 0..m_elems {
            let small = if is_los {
                los_amp * steer[m] + diffuse_amp * cluster_scale * diffuse[m]
            } else {
                diffuse_amp * cluster_scale * diffuse[m]
            };
            col[m] = sqrt_beta * small;
        }
        large_scale_gain.push(beta);
        azimuths.push(user.azimuth_deg);
        elevations.push(elevation_deg);
    }

    Ok(ChannelMatrix {
        entries,
        large_scale_gain,
        user_azimuth_deg: azimuths,
        user_elevation_deg: elevations,
    })
}
