use std::fmt;

use serde::{Deserialize, Serialize};

use crate::ingest::{Coord, CoordinateMode};

/// Mean Earth radius (IUGG) in kilometers.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// How place-to-place distances are measured. Always reported in kilometers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMetric {
    /// Great-circle distance on a sphere, for lon/lat degrees.
    Haversine,
    /// Straight-line distance on planar meters.
    Euclidean,
}

impl DistanceMetric {
    pub fn for_mode(mode: CoordinateMode) -> Self {
        match mode {
            CoordinateMode::Geographic => DistanceMetric::Haversine,
            CoordinateMode::Planar => DistanceMetric::Euclidean,
        }
    }

    pub fn is_consistent_with(self, mode: CoordinateMode) -> bool {
        self == Self::for_mode(mode)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DistanceMetric::Haversine => "haversine",
            DistanceMetric::Euclidean => "euclidean",
        }
    }

    /// Distance between two points in kilometers.
    ///
    /// Symmetric bit-for-bit in its arguments. Every index backend and the
    /// reference scans call this same function, which is what makes their
    /// results comparable without tolerance.
    #[inline]
    pub fn distance_km(self, a: Coord, b: Coord) -> f64 {
        match self {
            DistanceMetric::Haversine => haversine_km(a, b),
            DistanceMetric::Euclidean => {
                let dx = a.x - b.x;
                let dy = a.y - b.y;
                (dx * dx + dy * dy).sqrt() / 1000.0
            }
        }
    }

    /// Maps a point into the 3-D space the tree backends prune in. For
    /// haversine this is the unit sphere, where chord length is monotone in
    /// great-circle distance.
    #[inline]
    pub fn embed(self, c: Coord) -> [f64; 3] {
        match self {
            DistanceMetric::Haversine => {
                let (lat, lon) = (c.y.to_radians(), c.x.to_radians());
                let (slat, clat) = lat.sin_cos();
                let (slon, clon) = lon.sin_cos();
                [clat * clon, clat * slon, slat]
            }
            DistanceMetric::Euclidean => [c.x, c.y, 0.0],
        }
    }

    /// Upper bound on the embedded distance between two points that lie `km`
    /// apart. For haversine this is the chord of the arc.
    ///
    /// The bound is widened slightly so that rounding differences between the
    /// embedded geometry and [`Self::distance_km`] can never prune the true
    /// nearest point.
    #[inline]
    pub fn embedded_reach(self, km: f64) -> f64 {
        let e = match self {
            DistanceMetric::Haversine => {
                let half_angle = km / (2.0 * EARTH_RADIUS_KM);
                if half_angle >= std::f64::consts::FRAC_PI_2 {
                    return f64::INFINITY;
                }
                2.0 * half_angle.sin()
            }
            DistanceMetric::Euclidean => km * 1000.0,
        };
        e * (1.0 + 1e-9) + 1e-9
    }
}

impl fmt::Display for DistanceMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn haversine_km(a: Coord, b: Coord) -> f64 {
    let lat1 = a.y.to_radians();
    let lat2 = b.y.to_radians();
    let half_dlat = 0.5 * (lat2 - lat1);
    let half_dlon = 0.5 * (b.x - a.x).to_radians();
    let s_lat = half_dlat.sin();
    let s_lon = half_dlon.sin();
    let h = s_lat * s_lat + lat1.cos() * lat2.cos() * (s_lon * s_lon);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Length of the diagonal of the bounding box around `coords`, in km.
pub fn bbox_diagonal_km(metric: DistanceMetric, coords: impl IntoIterator<Item = Coord>) -> f64 {
    let mut it = coords.into_iter();
    let Some(first) = it.next() else {
        return 0.0;
    };
    let (mut lo, mut hi) = (first, first);
    for c in it {
        lo.x = lo.x.min(c.x);
        lo.y = lo.y.min(c.y);
        hi.x = hi.x.max(c.x);
        hi.y = hi.y.max(c.y);
    }
    metric.distance_km(lo, hi)
}
