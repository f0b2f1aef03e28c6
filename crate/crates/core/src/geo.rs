//! Pixel and geographic coordinates, the north-up image georeference, and
//! great-circle distances.
//!
//! Trigonometry goes through `libm` so that lengths are bit-identical on every
//! platform; plan files and benchmark CSVs depend on it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius in meters (IUGG).
pub const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Tolerance used when comparing two geographic points for equality.
pub const GEO_EPS_DEG: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("point ({lat}, {lon}) is outside latitude/longitude bounds")]
    OutOfBounds { lat: f64, lon: f64 },
    #[error("polyline must contain at least one point")]
    EmptyPolyline,
}

/// A point in image space. `x` is the column, `y` the row; `y` grows downward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PixelPoint {
    pub x: f64,
    pub y: f64,
}

impl PixelPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &PixelPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Latitude/longitude in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPoint {
    pub lat: f64,
    pub lon: f64,
}

impl GeoPoint {
    /// Builds a point, rejecting non-finite or out-of-range coordinates.
    pub fn new(lat: f64, lon: f64) -> Result<Self, GeoError> {
        if !(lat.is_finite() && lon.is_finite())
            || !(-90.0..=90.0).contains(&lat)
            || !(-180.0..=180.0).contains(&lon)
        {
            return Err(GeoError::OutOfBounds { lat, lon });
        }
        Ok(Self { lat, lon })
    }

    pub fn approx_eq(&self, other: &GeoPoint) -> bool {
        (self.lat - other.lat).abs() <= GEO_EPS_DEG && (self.lon - other.lon).abs() <= GEO_EPS_DEG
    }
}

/// North-up affine georeference of one image: pixel (0,0) maps to the origin,
/// x runs east and y runs south.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoTransform {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub deg_per_px_x: f64,
    pub deg_per_px_y: f64,
}

impl GeoTransform {
    pub fn new(
        origin_lat: f64,
        origin_lon: f64,
        deg_per_px_x: f64,
        deg_per_px_y: f64,
    ) -> Result<Self, GeoError> {
        let t = Self {
            origin_lat,
            origin_lon,
            deg_per_px_x,
            deg_per_px_y,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), GeoError> {
        if !(self.deg_per_px_x.is_finite() && self.deg_per_px_x > 0.0) {
            return Err(GeoError::InvalidTransform(format!(
                "deg_per_px_x must be finite and > 0, got {}",
                self.deg_per_px_x
            )));
        }
        if !(self.deg_per_px_y.is_finite() && self.deg_per_px_y > 0.0) {
            return Err(GeoError::InvalidTransform(format!(
                "deg_per_px_y must be finite and > 0, got {}",
                self.deg_per_px_y
            )));
        }
        GeoPoint::new(self.origin_lat, self.origin_lon)
            .map_err(|_| GeoError::InvalidTransform("origin outside lat/lon bounds".into()))?;
        Ok(())
    }

    pub fn geo_from_pixel(&self, p: PixelPoint) -> Result<GeoPoint, GeoError> {
        let lat = self.origin_lat - p.y * self.deg_per_px_y;
        let lon = self.origin_lon + p.x * self.deg_per_px_x;
        GeoPoint::new(lat, lon).map_err(|_| {
            GeoError::InvalidTransform(format!(
                "pixel ({}, {}) maps outside lat/lon bounds ({lat}, {lon})",
                p.x, p.y
            ))
        })
    }

    pub fn pixel_from_geo(&self, g: GeoPoint) -> PixelPoint {
        PixelPoint {
            x: (g.lon - self.origin_lon) / self.deg_per_px_x,
            y: (self.origin_lat - g.lat) / self.deg_per_px_y,
        }
    }

    /// Meters per pixel along x and y, evaluated at `lat_deg`.
    pub fn meters_per_px_at(&self, lat_deg: f64) -> (f64, f64) {
        let m_per_deg = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;
        let mx = self.deg_per_px_x * m_per_deg * libm::cos(lat_deg.to_radians());
        let my = self.deg_per_px_y * m_per_deg;
        (mx, my)
    }
}

/// Great-circle distance in meters.
pub fn haversine_m(a: GeoPoint, b: GeoPoint) -> f64 {
    let lat1 = a.lat.to_radians();
    let lat2 = b.lat.to_radians();
    let dlat = lat2 - lat1;
    let dlon = (b.lon - a.lon).to_radians();
    let s_lat = libm::sin(dlat * 0.5);
    let s_lon = libm::sin(dlon * 0.5);
    let h = s_lat * s_lat + libm::cos(lat1) * libm::cos(lat2) * s_lon * s_lon;
    2.0 * EARTH_RADIUS_M * libm::asin(h.min(1.0).sqrt())
}

/// Sum of great-circle distances between consecutive points.
pub fn polyline_length_m(points: &[GeoPoint]) -> Result<f64, GeoError> {
    if points.is_empty() {
        return Err(GeoError::EmptyPolyline);
    }
    Ok(points.windows(2).map(|w| haversine_m(w[0], w[1])).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(lat: f64, lon: f64, dx: f64, dy: f64) -> GeoTransform {
        GeoTransform::new(lat, lon, dx, dy).unwrap()
    }

    fn g(lat: f64, lon: f64) -> GeoPoint {
        GeoPoint::new(lat, lon).unwrap()
    }

    /// Independent haversine evaluation in the atan2 form.
    fn haversine_oracle(a: (f64, f64), b: (f64, f64)) -> f64 {
        let r = 6371008.8_f64;
        let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
        let dp = p2 - p1;
        let dl = (b.1 - a.1).to_radians();
        let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
        2.0 * r * h.sqrt().atan2((1.0 - h).sqrt())
    }

    #[test]
    fn pixel_to_geo_examples() {
        let tr = t(10.0, 20.0, 0.001, 0.001);
        let o = tr.geo_from_pixel(PixelPoint::new(0.0, 0.0)).unwrap();
        assert_eq!((o.lat, o.lon), (10.0, 20.0));
        let p = tr.geo_from_pixel(PixelPoint::new(100.0, 50.0)).unwrap();
        assert!((p.lat - 9.95).abs() < 1e-12 && (p.lon - 20.1).abs() < 1e-12);
        let tr0 = t(0.0, 0.0, 0.001, 0.001);
        let q = tr0.geo_from_pixel(PixelPoint::new(-5.0, 0.0)).unwrap();
        assert!((q.lat - 0.0).abs() < 1e-12 && (q.lon + 0.005).abs() < 1e-12);
    }

    #[test]
    fn geo_to_pixel_examples() {
        let tr = t(10.0, 20.0, 0.001, 0.001);
        let p = tr.pixel_from_geo(g(10.0, 20.0));
        assert_eq!((p.x, p.y), (0.0, 0.0));
        let p = tr.pixel_from_geo(g(9.95, 20.1));
        assert!((p.x - 100.0).abs() < 1e-9 && (p.y - 50.0).abs() < 1e-9);
        let p = t(0.0, 0.0, 0.001, 0.001).pixel_from_geo(g(0.0, -0.005));
        assert!((p.x + 5.0).abs() < 1e-9 && p.y.abs() < 1e-9);
        let p = t(10.0, 20.0, 0.002, 0.004).pixel_from_geo(g(9.996, 20.02));
        assert!((p.x - 10.0).abs() < 1e-9 && (p.y - 1.0).abs() < 1e-9);
    }

    #[test]
    fn geo_from_pixel_rejects_out_of_bounds() {
        let tr = t(89.0, 0.0, 0.01, 0.01);
        assert!(tr.geo_from_pixel(PixelPoint::new(0.0, -200.0)).is_err());
    }

    #[test]
    fn transform_rejects_nonpositive_scale() {
        assert!(GeoTransform::new(0.0, 0.0, 0.0, 0.001).is_err());
        assert!(GeoTransform::new(0.0, 0.0, 0.001, -0.001).is_err());
        assert!(GeoTransform::new(91.0, 0.0, 0.001, 0.001).is_err());
    }

    #[test]
    fn haversine_examples() {
        assert_eq!(haversine_m(g(0.0, 0.0), g(0.0, 0.0)), 0.0);
        // R·π/180 with R = 6371008.8
        let oracle = haversine_oracle((0.0, 0.0), (0.0, 1.0));
        assert!((oracle - 111195.08).abs() < 0.01, "oracle {oracle}");
        assert!((haversine_m(g(0.0, 0.0), g(0.0, 1.0)) - oracle).abs() < 0.01);
    }

    #[test]
    fn polyline_examples() {
        assert_eq!(polyline_length_m(&[g(3.0, 4.0)]).unwrap(), 0.0);
        assert_eq!(polyline_length_m(&[]), Err(GeoError::EmptyPolyline));
        let expected = 2.0 * haversine_oracle((0.0, 0.0), (0.0, 1.0));
        assert!((expected - 222390.16).abs() < 0.01);
        let len = polyline_length_m(&[g(0.0, 0.0), g(0.0, 1.0), g(0.0, 2.0)]).unwrap();
        assert!((len - expected).abs() < 0.01);
    }

    fn geo_strategy() -> impl Strategy<Value = GeoPoint> {
        (-89.0..89.0f64, -179.0..179.0f64).prop_map(|(lat, lon)| g(lat, lon))
    }

    proptest! {
        #[test]
        fn round_trip_pixel_geo(x in 0.0..4096.0f64, y in 0.0..4096.0f64,
                                lat in -60.0..60.0f64, lon in -170.0..170.0f64,
                                dx in 1e-6..1e-3f64, dy in 1e-6..1e-3f64) {
            let tr = t(lat, lon, dx, dy);
            let p = PixelPoint::new(x, y);
            if let Ok(geo) = tr.geo_from_pixel(p) {
                let back = tr.pixel_from_geo(geo);
                prop_assert!(back.distance(&p) < 1e-6);
            }
        }

        #[test]
        fn haversine_symmetric(a in geo_strategy(), b in geo_strategy()) {
            prop_assert_eq!(haversine_m(a, b), haversine_m(b, a));
            prop_assert!((haversine_m(a, b) - haversine_oracle((a.lat, a.lon), (b.lat, b.lon))).abs() < 1e-3);
        }

        #[test]
        fn haversine_triangle(a in geo_strategy(), b in geo_strategy(), c in geo_strategy()) {
            prop_assert!(haversine_m(a, c) <= haversine_m(a, b) + haversine_m(b, c) + 1e-6);
        }

        #[test]
        fn polyline_reversal_and_concat(pts in proptest::collection::vec(geo_strategy(), 1..12), p in geo_strategy()) {
            let fwd = polyline_length_m(&pts).unwrap();
            let mut rev = pts.clone();
            rev.reverse();
            prop_assert!((fwd - polyline_length_m(&rev).unwrap()).abs() <= 1e-6 * fwd.max(1.0));
            let mut ext = pts.clone();
            ext.push(p);
            let expected = fwd + haversine_m(*pts.last().unwrap(), p);
            prop_assert!((polyline_length_m(&ext).unwrap() - expected).abs() <= 1e-6);
        }
    }
}
