//! GeoJSON export of coverage footprints.
//!
//! Each site becomes a Polygon feature approximating its coverage circle
//! with 64 great-circle segments, ready to drop into any GeoJSON viewer.

use serde_json::json;

use super::sites::TowerSite;
use super::EARTH_RADIUS_KM;
use crate::error::{Error, Result};
use crate::round6;

/// Number of segments used to approximate a coverage circle.
const CIRCLE_SEGMENTS: usize = 64;

/// Destination point `distance_km` from `(lat, lon)` along `bearing_rad`
/// (0 = north, positive clockwise), on the spherical Earth.
fn destination(lat: f64, lon: f64, bearing_rad: f64, distance_km: f64) -> (f64, f64) {
    let delta = distance_km / EARTH_RADIUS_KM;
    let phi1 = lat.to_radians();
    let lambda1 = lon.to_radians();
    let phi2 = (phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * bearing_rad.cos()).asin();
    let lambda2 = lambda1
        + (bearing_rad.sin() * delta.sin() * phi1.cos())
            .atan2(delta.cos() - phi1.sin() * phi2.sin());
    (phi2.to_degrees(), lambda2.to_degrees())
}

/// Closed counterclockwise ring of `[lon, lat]` pairs approximating the
/// circle of `radius_km` around the site, 65 vertices (last repeats first),
/// coordinates rounded to six decimals.
fn circle_ring(lat: f64, lon: f64, radius_km: f64) -> Vec<[f64; 2]> {
    let mut ring = Vec::with_capacity(CIRCLE_SEGMENTS + 1);
    for i in 0..CIRCLE_SEGMENTS {
        // Decreasing bearing walks the circle counterclockwise (RFC 7946
        // exterior-ring winding).
        let bearing = -(i as f64) * std::f64::consts::TAU / CIRCLE_SEGMENTS as f64;
        let (vlat, vlon) = destination(lat, lon, bearing, radius_km);
        ring.push([round6(vlon), round6(vlat)]);
    }
    ring.push(ring[0]);
    ring
}

/// Renders the sites' coverage circles as a GeoJSON FeatureCollection.
///
/// One Polygon feature per site, with `id`, `kind`, `radius_km` and the
/// center coordinate in its properties.  Every site must have a positive,
/// finite coverage radius assigned; zero sites yield an empty (but valid)
/// collection.  Ring vertices sit on the true circle to within the
/// six-decimal coordinate rounding (about 0.11 m).
pub fn export_geojson(sites: &[TowerSite]) -> Result<String> {
    let mut features = Vec::with_capacity(sites.len());
    for site in sites {
        site.validate()?;
        if site.coverage_radius_km <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "site {:?} has no coverage radius assigned; cannot draw its footprint",
                site.id
            )));
        }
        let ring = circle_ring(site.lat, site.lon, site.coverage_radius_km);
        features.push(json!({
            "type": "Feature",
            "geometry": {
                "type": "Polygon",
                "coordinates": [ring],
            },
            "properties": {
                "id": site.id,
                "kind": site.kind,
                "radius_km": site.coverage_radius_km,
                "center": [round6(site.lon), round6(site.lat)],
                "height_m": site.height_m,
            },
        }));
    }
    let collection = json!({
        "type": "FeatureCollection",
        "features": features,
    });
    let mut out = serde_json::to_string_pretty(&collection).expect("JSON value always serializes");
    out.push('\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::sites::{haversine_km, TowerKind};

    fn parse(text: &str) -> Result<serde_json::Value> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse { line: e.line(), msg: format!("invalid GeoJSON: {e}") })
    }

    fn demo_sites() -> Vec<TowerSite> {
        vec![
            TowerSite::new("bts-1", 9.005, 38.763, TowerKind::Legacy4G, 2.5),
            TowerSite::new("tv-1", 9.1, 38.7, TowerKind::TvTower, 30.0),
        ]
    }

    #[test]
    fn export_is_a_valid_feature_collection() {
        let text = export_geojson(&demo_sites()).unwrap();
        let doc = parse(&text).unwrap();
        assert_eq!(doc["type"], "FeatureCollection");
        let features = doc["features"].as_array().unwrap();
        assert_eq!(features.len(), 2);
        for f in features {
            assert_eq!(f["type"], "Feature");
            assert_eq!(f["geometry"]["type"], "Polygon");
            let ring = f["geometry"]["coordinates"][0].as_array().unwrap();
            assert_eq!(ring.len(), CIRCLE_SEGMENTS + 1);
            assert_eq!(ring[0], ring[CIRCLE_SEGMENTS]);
        }
        assert_eq!(features[0]["properties"]["id"], "bts-1");
        assert_eq!(features[0]["properties"]["kind"], "legacy-4G");
        assert_eq!(features[1]["properties"]["radius_km"], 30.0);
    }

    #[test]
    fn circle_vertices_sit_on_the_requested_radius() {
        let sites = demo_sites();
        let text = export_geojson(&sites).unwrap();
        let doc = parse(&text).unwrap();
        for (site, feature) in sites.iter().zip(doc["features"].as_array().unwrap()) {
            let ring = feature["geometry"]["coordinates"][0].as_array().unwrap();
            for v in ring {
                let lon = v[0].as_f64().unwrap();
                let lat = v[1].as_f64().unwrap();
                let d = haversine_km((site.lat, site.lon), (lat, lon));
                let rel = (d - site.coverage_radius_km).abs() / site.coverage_radius_km;
                assert!(rel < 5e-3, "vertex {v} is {d} km from a {} km circle", site.coverage_radius_km);
            }
        }
    }

    #[test]
    fn rings_wind_counterclockwise() {
        let text = export_geojson(&demo_sites()).unwrap();
        let doc = parse(&text).unwrap();
        for feature in doc["features"].as_array().unwrap() {
            let ring = feature["geometry"]["coordinates"][0].as_array().unwrap();
            let mut area2 = 0.0;
            for pair in ring.windows(2) {
                let (x1, y1) = (pair[0][0].as_f64().unwrap(), pair[0][1].as_f64().unwrap());
                let (x2, y2) = (pair[1][0].as_f64().unwrap(), pair[1][1].as_f64().unwrap());
                area2 += x1 * y2 - x2 * y1;
            }
            assert!(area2 > 0.0, "ring winds clockwise (signed area {area2})");
        }
    }

    #[test]
    fn coordinates_are_rounded_to_six_decimals() {
        let text = export_geojson(&demo_sites()).unwrap();
        let doc = parse(&text).unwrap();
        let ring = doc["features"][0]["geometry"]["coordinates"][0].as_array().unwrap();
        for v in ring {
            for coord in [v[0].as_f64().unwrap(), v[1].as_f64().unwrap()] {
                assert_eq!(round6(coord), coord, "coordinate {coord} is not 6-decimal clean");
            }
        }
    }

    #[test]
    fn empty_site_list_exports_an_empty_collection() {
        let text = export_geojson(&[]).unwrap();
        let doc = parse(&text).unwrap();
        assert_eq!(doc["features"].as_array().unwrap().len(), 0);
    }

    #[test]
    fn unassigned_radius_is_rejected() {
        let site = TowerSite::new("x", 9.0, 38.7, TowerKind::Candidate, 0.0);
        assert!(export_geojson(std::slice::from_ref(&site)).is_err());
    }
}
