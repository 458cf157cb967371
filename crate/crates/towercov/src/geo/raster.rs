//! Population-density rasters on a regular latitude/longitude grid.
//!
//! A raster stores persons/km² at the centers of equally spaced grid cells.
//! Two on-disk formats are supported: CSV triples (`lat,lon,density`, any row
//! order, grid inferred and validated) and the ESRI ASCII grid format commonly
//! produced by GIS exports.  [`load_raster`] sniffs the format from the file
//! content, so callers never pick a parser by extension.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{haversine_km, KM_PER_DEGREE};
use crate::error::{Error, Result};

/// Relative tolerance for declaring grid spacing uniform when inferring the
/// grid from scattered CSV triples.  Coordinates written with six decimals
/// land within ~1e-7 degrees of the true lattice, far inside this bound.
const SPACING_REL_TOL: f64 = 1e-6;

/// Population density on a regular lat/lon grid, row-major from the
/// southwest corner (row 0 = southernmost, col 0 = westernmost).
///
/// Cell `(row, col)` is centered at `(lat0 + row·dlat, lon0 + col·dlon)` and
/// covers `dlat × dlon` degrees.  Its area uses the standard spherical
/// approximation `(111.195·dlat) · (111.195·dlon·cos lat)` km², so northern
/// cells are narrower than equatorial ones.
///
/// # Summation contract
///
/// Every population reduction over this raster — [`total_population`], the
/// covered-population scans, greedy placement gains — is defined as: sum the
/// selected densities of one row left to right, multiply by that row's cell
/// area, then add the row subtotals south to north.  Pinning the association
/// order makes all implementations (parallel, sequential, brute-force
/// reference) bitwise identical.
///
/// [`total_population`]: PopulationRaster::total_population
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRaster {
    lat0: f64,
    lon0: f64,
    dlat: f64,
    dlon: f64,
    nrows: usize,
    ncols: usize,
    /// Row-major densities in persons/km²; `density[row * ncols + col]`.
    density: Vec<f64>,
}

impl PopulationRaster {
    /// Builds a raster from an explicit grid definition.
    ///
    /// `density` is row-major with `nrows * ncols` entries, row 0 southmost.
    /// Spacings must be positive and densities finite and non-negative.
    pub fn from_grid(
        lat0: f64,
        lon0: f64,
        dlat: f64,
        dlon: f64,
        nrows: usize,
        ncols: usize,
        density: Vec<f64>,
    ) -> Result<Self> {
        if nrows == 0 || ncols == 0 {
            return Err(Error::InvalidConfig("raster must have at least one cell".into()));
        }
        if !(dlat > 0.0 && dlon > 0.0) || !dlat.is_finite() || !dlon.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "raster cell spacing must be positive and finite, got dlat={dlat} dlon={dlon}"
            )));
        }
        if !lat0.is_finite() || !lon0.is_finite() || lat0.abs() > 90.0 {
            return Err(Error::InvalidConfig(format!(
                "raster origin ({lat0}, {lon0}) is not a valid coordinate"
            )));
        }
        if density.len() != nrows * ncols {
            return Err(Error::InvalidConfig(format!(
                "raster needs {} densities for {nrows}x{ncols}, got {}",
                nrows * ncols,
                density.len()
            )));
        }
        if let Some(bad) = density.iter().find(|d| !d.is_finite() || **d < 0.0) {
            return Err(Error::InvalidConfig(format!(
                "raster densities must be finite and non-negative, found {bad}"
            )));
        }
        Ok(Self { lat0, lon0, dlat, dlon, nrows, ncols, density })
    }

    /// Number of grid rows (latitude steps).
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    /// Number of grid columns (longitude steps).
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Latitude spacing in degrees.
    pub fn dlat(&self) -> f64 {
        self.dlat
    }

    /// Longitude spacing in degrees.
    pub fn dlon(&self) -> f64 {
        self.dlon
    }

    /// Density of one cell in persons/km².
    pub fn density(&self, row: usize, col: usize) -> f64 {
        self.density[row * self.ncols + col]
    }

    /// One full row of densities, west to east.
    pub fn row(&self, row: usize) -> &[f64] {
        &self.density[row * self.ncols..(row + 1) * self.ncols]
    }

    /// Center coordinate of a cell as `(lat, lon)` degrees.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (self.lat0 + row as f64 * self.dlat, self.lon0 + col as f64 * self.dlon)
    }

    /// Area of any cell in the given row, in km².
    ///
    /// All cells of a row share a latitude, hence an area:
    /// `(111.195·dlat) · (111.195·dlon·cos lat)`.
    pub fn cell_area_km2(&self, row: usize) -> f64 {
        let lat = self.lat0 + row as f64 * self.dlat;
        (KM_PER_DEGREE * self.dlat) * (KM_PER_DEGREE * self.dlon * lat.to_radians().cos())
    }

    /// Outer edges of the raster as `(lat_min, lat_max, lon_min, lon_max)`,
    /// half a cell beyond the outermost centers.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        (
            self.lat0 - 0.5 * self.dlat,
            self.lat0 + (self.nrows as f64 - 0.5) * self.dlat,
            self.lon0 - 0.5 * self.dlon,
            self.lon0 + (self.ncols as f64 - 0.5) * self.dlon,
        )
    }

    /// Whether a coordinate falls inside the raster's outer edges.
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        let (lat_min, lat_max, lon_min, lon_max) = self.bounds();
        lat >= lat_min && lat <= lat_max && lon >= lon_min && lon <= lon_max
    }

    /// Total population: sum of density × area over all cells, associated
    /// per the row-subtotal contract documented on the type.
    pub fn total_population(&self) -> f64 {
        let mut total = 0.0;
        for row in 0..self.nrows {
            let row_sum: f64 = self.row(row).iter().sum();
            total += row_sum * self.cell_area_km2(row);
        }
        total
    }

    /// Writes the raster as CSV triples with a `lat,lon,density` header.
    ///
    /// Coordinates use fixed six-decimal precision; densities print with
    /// Rust's shortest round-trip formatting, so a write/load cycle
    /// reproduces every density bit for bit.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::with_capacity(self.density.len() * 24 + 16);
        out.push_str("lat,lon,density\n");
        for row in 0..self.nrows {
            for col in 0..self.ncols {
                let (lat, lon) = self.cell_center(row, col);
                let _ = writeln!(out, "{lat:.6},{lon:.6},{}", self.density(row, col));
            }
        }
        fs::write(path, out)?;
        Ok(())
    }
}

/// Loads a raster from disk, auto-detecting CSV triples vs. ESRI ASCII grid.
///
/// The format is sniffed from the first non-blank line: ESRI grids start with
/// an `ncols` header keyword, anything else is parsed as CSV.
pub fn load_raster(path: &Path) -> Result<PopulationRaster> {
    let text = fs::read_to_string(path)?;
    let first = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let looks_esri = first
        .split_whitespace()
        .next()
        .is_some_and(|tok| tok.eq_ignore_ascii_case("ncols") || tok.eq_ignore_ascii_case("nrows"));
    if looks_esri {
        parse_esri_ascii(&text)
    } else {
        parse_csv(&text)
    }
}

/// Parses `lat,lon,density` triples and infers the grid they sit on.
///
/// Rows may arrive in any order.  The distinct latitudes and longitudes must
/// form uniformly spaced ladders, and every (lat, lon) combination must occur
/// exactly once; anything else is rejected with a structural error rather
/// than silently interpolated.
fn parse_csv(text: &str) -> Result<PopulationRaster> {
    let mut points: Vec<(f64, f64, f64)> = Vec::new();
    let mut saw_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        // Blank lines and `#` comments (e.g. embedded config echoes) are skipped.
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split(',').map(str::trim);
        let (a, b, c) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected 3 comma-separated fields, got {line:?}"),
                })
            }
        };
        if !saw_data && a.parse::<f64>().is_err() {
            // Header row such as "lat,lon,density".
            saw_data = true;
            continue;
        }
        saw_data = true;
        let parse = |name: &str, s: &str| -> Result<f64> {
            s.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("{name} is not a number: {s:?}"),
            })
        };
        let (lat, lon, density) = (parse("lat", a)?, parse("lon", b)?, parse("density", c)?);
        if !(-90.0..=90.0).contains(&lat) || !lon.is_finite() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("coordinate ({lat}, {lon}) out of range"),
            });
        }
        if !density.is_finite() || density < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("density must be finite and non-negative, got {density}"),
            });
        }
        points.push((lat, lon, density));
    }
    if points.is_empty() {
        return Err(Error::InvalidConfig("raster CSV contains no data rows".into()));
    }

    let lats = sorted_axis(points.iter().map(|p| p.0));
    let lons = sorted_axis(points.iter().map(|p| p.1));
    let dlat = axis_spacing(&lats, "latitude")?;
    let dlon = axis_spacing(&lons, "longitude")?;
    let (nrows, ncols) = (lats.len(), lons.len());
    if points.len() != nrows * ncols {
        return Err(Error::InvalidConfig(format!(
            "raster CSV is not a complete grid: {nrows} latitudes x {ncols} longitudes \
             needs {} rows, file has {}",
            nrows * ncols,
            points.len()
        )));
    }

    let mut density = vec![f64::NAN; nrows * ncols];
    for (lat, lon, d) in points {
        // Exact lookup: the axis values were parsed from the same text.
        let row = lats.partition_point(|v| *v < lat);
        let col = lons.partition_point(|v| *v < lon);
        let slot = &mut density[row * ncols + col];
        if !slot.is_nan() {
            return Err(Error::InvalidConfig(format!(
                "raster CSV lists cell ({lat}, {lon}) more than once"
            )));
        }
        *slot = d;
    }
    // Completeness: count matched and every combination filled, so no NaN remains.
    PopulationRaster::from_grid(lats[0], lons[0], dlat, dlon, nrows, ncols, density)
}

/// Collects the distinct values of one coordinate axis, ascending.
fn sorted_axis(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut axis: Vec<f64> = values.collect();
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    axis
}

/// Validates uniform spacing of an axis ladder and returns the step.
fn axis_spacing(axis: &[f64], name: &str) -> Result<f64> {
    if axis.len() < 2 {
        return Err(Error::InvalidConfig(format!(
            "raster CSV has a single {name} value; cell size cannot be inferred \
             (use the ESRI grid format or a 2x2+ extent)"
        )));
    }
    let step = axis[1] - axis[0];
    for pair in axis.windows(2) {
        let d = pair[1] - pair[0];
        if (d - step).abs() > SPACING_REL_TOL * step.abs() {
            return Err(Error::InvalidConfig(format!(
                "raster CSV {name} values are not uniformly spaced: found steps {step} and {d}"
            )));
        }
    }
    Ok(step)
}

/// Parses the ESRI ASCII grid format.
///
/// Header keywords are case-insensitive; both `xllcorner`/`yllcorner` and
/// `xllcenter`/`yllcenter` anchors are accepted.  Data rows run north to
/// south (standard for the format) and are flipped into this crate's
/// south-first row order.  `NODATA` cells become density 0.
fn parse_esri_ascii(text: &str) -> Result<PopulationRaster> {
    let mut ncols: Option<usize> = None;
    let mut nrows: Option<usize> = None;
    let mut xll: Option<(f64, bool)> = None; // (value, is_center)
    let mut yll: Option<(f64, bool)> = None;
    let mut cellsize: Option<f64> = None;
    let mut nodata = -9999.0_f64;
    let mut values: Vec<f64> = Vec::new();
    let mut in_data = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let head = toks.next().expect("non-empty line has a token");
        let is_keyword = head.chars().next().is_some_and(|c| c.is_ascii_alphabetic());
        if is_keyword && !in_data {
            let val = toks.next().ok_or_else(|| Error::Parse {
                line: line_no,
                msg: format!("header {head:?} is missing its value"),
            })?;
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("header value is not a number: {s:?}"),
                })
            };
            match head.to_ascii_lowercase().as_str() {
                "ncols" => ncols = Some(num(val)? as usize),
                "nrows" => nrows = Some(num(val)? as usize),
                "xllcorner" => xll = Some((num(val)?, false)),
                "xllcenter" => xll = Some((num(val)?, true)),
                "yllcorner" => yll = Some((num(val)?, false)),
                "yllcenter" => yll = Some((num(val)?, true)),
                "cellsize" => cellsize = Some(num(val)?),
                "nodata_value" => nodata = num(val)?,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("unknown ESRI header keyword {other:?}"),
                    })
                }
            }
        } else {
            in_data = true;
            for tok in std::iter::once(head).chain(toks) {
                let v = tok.parse::<f64>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("grid value is not a number: {tok:?}"),
                })?;
                let density = if v == nodata { 0.0 } else { v };
                if !density.is_finite() || density < 0.0 {
                    return Err(Error::Parse {
                        line: line_no,
                        msg: format!("density must be finite and non-negative, got {v}"),
                    });
                }
                values.push(density);
            }
        }
    }

    let ncols = ncols.ok_or_else(|| Error::InvalidConfig("ESRI grid is missing ncols".into()))?;
    let nrows = nrows.ok_or_else(|| Error::InvalidConfig("ESRI grid is missing nrows".into()))?;
    let cellsize =
        cellsize.ok_or_else(|| Error::InvalidConfig("ESRI grid is missing cellsize".into()))?;
    let (x, x_center) =
        xll.ok_or_else(|| Error::InvalidConfig("ESRI grid is missing xllcorner/xllcenter".into()))?;
    let (y, y_center) =
        yll.ok_or_else(|| Error::InvalidConfig("ESRI grid is missing yllcorner/yllcenter".into()))?;
    if values.len() != nrows * ncols {
        return Err(Error::InvalidConfig(format!(
            "ESRI grid declares {nrows}x{ncols} = {} cells but contains {}",
            nrows * ncols,
            values.len()
        )));
    }

    let lon0 = if x_center { x } else { x + 0.5 * cellsize };
    let lat0 = if y_center { y } else { y + 0.5 * cellsize };
    // The file's first data row is the northernmost; flip to south-first.
    let mut density = vec![0.0; nrows * ncols];
    for file_row in 0..nrows {
        let grid_row = nrows - 1 - file_row;
        let src = &values[file_row * ncols..(file_row + 1) * ncols];
        density[grid_row * ncols..(grid_row + 1) * ncols].copy_from_slice(src);
    }
    PopulationRaster::from_grid(lat0, lon0, cellsize, cellsize, nrows, ncols, density)
}

/// Generates a deterministic synthetic population raster: a light uniform
/// rural base plus `towns` Gaussian population bumps at random centers.
///
/// Useful for demos, benches, and integration fixtures when no census raster
/// is at hand.  The same seed always yields the same raster.
#[allow(clippy::too_many_arguments)]
pub fn synthetic_raster(
    nrows: usize,
    ncols: usize,
    lat0: f64,
    lon0: f64,
    cell_deg: f64,
    base_density: f64,
    towns: usize,
    town_peak_density: f64,
    town_sigma_km: f64,
    seed: u64,
) -> Result<PopulationRaster> {
    if !(base_density >= 0.0 && town_peak_density >= 0.0 && town_sigma_km > 0.0) {
        return Err(Error::InvalidConfig(
            "synthetic raster needs non-negative densities and a positive town sigma".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lat_span = nrows as f64 * cell_deg;
    let lon_span = ncols as f64 * cell_deg;
    let centers: Vec<(f64, f64)> = (0..towns)
        .map(|_| {
            (
                lat0 + rng.gen::<f64>() * (lat_span - cell_deg),
                lon0 + rng.gen::<f64>() * (lon_span - cell_deg),
            )
        })
        .collect();

    let mut density = Vec::with_capacity(nrows * ncols);
    let inv_two_sigma_sq = 1.0 / (2.0 * town_sigma_km * town_sigma_km);
    for row in 0..nrows {
        let lat = lat0 + row as f64 * cell_deg;
        for col in 0..ncols {
            let lon = lon0 + col as f64 * cell_deg;
            let mut d = base_density;
            for &(tlat, tlon) in &centers {
                let dist = haversine_km((lat, lon), (tlat, tlon));
                d += town_peak_density * (-dist * dist * inv_two_sigma_sq).exp();
            }
            density.push(d);
        }
    }
    PopulationRaster::from_grid(lat0, lon0, cell_deg, cell_deg, nrows, ncols, density)
}
