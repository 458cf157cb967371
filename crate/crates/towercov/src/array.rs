//! Cylindrical antenna-array geometry and far-field steering vectors.
//!
//! The transmitter is a uniform cylindrical array (UCyA) wrapped around the
//! tower mast: `m_h` equally spaced columns around a circle, stacked in
//! `m_v` rings. Neighboring elements sit a fixed fraction of the carrier
//! wavelength apart both along the circumference (arc length, not chord)
//! and vertically, so one `(m_h, m_v)` grid keeps its electrical size at
//! every carrier. Elements are isotropic; directivity comes entirely from
//! the array factor, which keeps single- and dual-polarized setups directly
//! comparable.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum [m/s], used to convert carriers to wavelengths.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Element slant angles [deg] for one or two polarizations per position.
const SINGLE_POL_SLANTS: [f64; 1] = [0.0];
const DUAL_POL_SLANTS: [f64; 2] = [45.0, -45.0];

/// Layout of a uniform cylindrical array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayConfig {
    /// Antenna columns around the cylinder circumference.
    pub m_h: usize,
    /// Vertically stacked rings.
    pub m_v: usize,
    /// Co-located elements per position: 1, or 2 for a ±45° slanted pair.
    pub polarizations: u8,
    /// Inter-element spacing as a fraction of the carrier wavelength.
    pub spacing: f64,
}

impl Default for ArrayConfig {
    /// The reference deployment: 32 columns × 8 rings at half-wavelength
    /// spacing, single polarization.
    fn default() -> Self {
        ArrayConfig {
            m_h: 32,
            m_v: 8,
            polarizations: 1,
            spacing: 0.5,
        }
    }
}

impl ArrayConfig {
    /// Reference single-polarized array (256 elements).
    pub fn single_pol() -> Self {
        Self::default()
    }

    /// Reference dual-polarized array (512 elements, ±45° pairs).
    pub fn dual_pol() -> Self {
        ArrayConfig {
            polarizations: 2,
            ..Self::default()
        }
    }

    /// Total element count `M = m_h * m_v * polarizations`.
    pub fn elements(&self) -> usize {
        self.m_h * self.m_v * self.polarizations as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_h == 0 || self.m_v == 0 {
            return Err(Error::InvalidConfig(format!(
                "array needs at least one column and one ring, got {}x{}",
                self.m_h, self.m_v
            )));
        }
        if self.polarizations != 1 && self.polarizations != 2 {
            return Err(Error::InvalidConfig(format!(
                "polarizations must be 1 or 2, got {}",
                self.polarizations
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "element spacing must be a positive wavelength fraction, got {}",
                self.spacing
            )));
        }
        Ok(())
    }
}

/// Concrete element positions for an [`ArrayConfig`] at one carrier.
///
/// Positions are in meters in a right-handed frame centered on the array:
/// x/y span the horizontal plane, z points up along the mast. The geometry
/// remembers its carrier so steering-vector evaluation can reject a
/// mismatched frequency instead of silently producing wrong phases.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    /// Element positions [m], one entry per element.
    pub positions: Vec<[f64; 3]>,
    /// Polarization slant per element [deg]; 0 for single-pol elements.
    pub slants_deg: Vec<f64>,
    /// Cylinder radius [m] (0 for a single column).
    pub radius_m: f64,
    /// Vertical aperture [m]: distance between top and bottom rings.
    pub height_m: f64,
    /// Carrier the spacing was computed for [Hz].
    pub carrier_hz: f64,
}

impl ArrayGeometry {
    /// Total element count `M`.
    pub fn elements(&self) -> usize {
        self.positions.len()
    }
}

/// Places every element of `config` for the given carrier.
///
/// The cylinder radius follows from keeping the *arc length* between
/// adjacent columns at `spacing` wavelengths: `r = m_h * s * λ / (2π)`
/// (circumference `m_h * s * λ` divided by `2π`). A single column has no
/// circumference to hold the spacing, so it degenerates to the mast axis
/// (`r = 0`). Rings are `s * λ` apart and centered on z = 0; dual-polarized
/// pairs are co-located with ±45° slants and adjacent element indices.
pub fn build_geometry(config: &ArrayConfig, carrier_hz: f64) -> Result<ArrayGeometry> {
    config.validate()?;
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "carrier frequency must be positive, got {carrier_hz}"
        )));
    }
    let lambda = SPEED_OF_LIGHT / carrier_hz;
    let dz = config.spacing * lambda;
    let radius = if config.m_h == 1 {
        0.0
    } else {
        config.m_h as f64 * config.spacing * lambda / (2.0 * std::f64::consts::PI)
    };
    let height = (config.m_v as f64 - 1.0) * dz;
    let slants: &[f64] = if config.polarizations == 2 {
        &DUAL_POL_SLANTS
    } else {
        &SINGLE_POL_SLANTS
    };

    let mut positions = Vec::with_capacity(config.elements());
    let mut slants_deg = Vec::with_capacity(config.elements());
    for ring in 0..config.m_v {
        let z = ring as f64 * dz - height / 2.0;
        for col in 0..config.m_h {
            let phi = 2.0 * std::f64::consts::PI * col as f64 / config.m_h as f64;
            let (sin_phi, cos_phi) = phi.sin_cos();
            for &slant in slants {
                positions.push([radius * cos_phi, radius * sin_phi, z]);
                slants_deg.push(slant);
            }
        }
    }
    Ok(ArrayGeometry {
        positions,
        slants_deg,
        radius_m: radius,
        height_m: height,
        carrier_hz,
    })
}

/// Far-field steering vector toward (azimuth, elevation), both in degrees.
///
/// Azimuth is measured in the horizontal plane from the x-axis, elevation
/// from the horizon (negative = below the array, the usual case for users on
/// the ground). Entry `m` is `exp(j * 2π/λ * u · x_m)` with `u` the unit
/// vector toward the target, so `|v_m| = 1` and `‖v‖² = M` identically.
///
/// `carrier_hz` must match the geometry's carrier: positions are already
/// scaled for it, and silently reinterpreting them at another frequency
/// would produce a physically wrong phase pattern.
pub fn steering_vector(
    geometry: &ArrayGeometry,
    azimuth_deg: f64,
    elevation_deg: f64,
    carrier_hz: f64,
) -> Result<DVector<Complex64>> {
    check_carrier(geometry, carrier_hz)?;
    if !azimuth_deg.is_finite() || !elevation_deg.is_finite() {
        return Err(Error::InvalidArgument(
            "steering angles must be finite".into(),
        ));
    }
    let mut v = DVector::from_element(geometry.elements(), Complex64::new(0.0, 0.0));
    write_steering(geometry, azimuth_deg, elevation_deg, v.as_mut_slice());
    Ok(v)
}

pub(crate) fn check_carrier(geometry: &ArrayGeometry, carrier_hz: f64) -> Result<()> {
    if (carrier_hz - geometry.carrier_hz).abs() > 1e-6 * geometry.carrier_hz {
        return Err(Error::InvalidArgument(format!(
            "carrier {} Hz does not match the geometry's carrier {} Hz",
            carrier_hz, geometry.carrier_hz
        )));
    }
    Ok(())
}

/// Fills `out` with the steering vector; shared by the public API and the
/// channel generator's per-cluster accumulation (which calls this thousands
/// of times per drop and cannot afford a fresh allocation each time).
pub(crate) fn write_steering(
    geometry: &ArrayGeometry,
    azimuth_deg: f64,
    elevation_deg: f64,
    out: &mut [Complex64],
) {
    debug_assert_eq!(out.len(), geometry.elements());
    let az = azimuth_deg.to_radians();
    let el = elevation_deg.to_radians();
    let (sin_el, cos_el) = el.sin_cos();
    let (sin_az, cos_az) = az.sin_cos();
    let u = [cos_el * cos_az, cos_el * sin_az, sin_el];
    let k = 2.0 * std::f64::consts::PI * geometry.carrier_hz / SPEED_OF_LIGHT;
    for (m, pos) in geometry.positions.iter().enumerate() {
        let phase = k * (u[0] * pos[0] + u[1] * pos[1] + u[2] * pos[2]);
        let (s, c) = phase.sin_cos();
        out[m] = Complex64::new(c, s);
    }
}
