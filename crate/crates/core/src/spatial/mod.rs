//! Population categories and per-category nearest-place distances.

mod backend;
mod brute;
mod category;
mod kdtree;
mod metric;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{PlaceRecord, PlaceSet};

pub use backend::{
    IndexRegistry, IndexStrategy, Member, Neighbor, NeighborIndex, DEFAULT_STRATEGY,
};
pub use brute::{BruteForceIndex, BruteForceStrategy};
pub use category::{
    category_of, validate_categories, PopulationCategory, DEFAULT_CATEGORIES, NUM_CATEGORIES,
};
pub use kdtree::{KdTree, KdTreeStrategy};
pub use metric::{bbox_diagonal_km, DistanceMetric, EARTH_RADIUS_KM};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpatialError {
    /// No member other than the query itself.
    #[error("category {category} {band} has no member other than the queried place")]
    EmptyCategory {
        category: usize,
        band: PopulationCategory,
    },
    #[error("year {year}: category {category} {band} has no usable member (use the diagonal fallback for small regions)")]
    MissingCategory {
        year: i32,
        category: usize,
        band: PopulationCategory,
    },
    #[error("unknown index strategy `{name}` (known: {known})")]
    UnknownStrategy { name: String, known: String },
    #[error("index strategy `{0}` is already registered")]
    DuplicateStrategy(String),
    #[error("metric {metric} does not fit {mode} coordinates")]
    MetricMismatch {
        metric: DistanceMetric,
        mode: crate::ingest::CoordinateMode,
    },
}

/// How a category with no usable member is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FallbackPolicy {
    /// Abort the run.
    #[default]
    Error,
    /// Substitute the bounding-box diagonal of the year's places.
    Diagonal,
}

impl FallbackPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            FallbackPolicy::Error => "error",
            FallbackPolicy::Diagonal => "diagonal",
        }
    }
}

/// Where a distance entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Measured,
    Clamped,
    Fallback,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Measured => "measured",
            Provenance::Clamped => "clamped",
            Provenance::Fallback => "fallback",
        })
    }
}

/// Members of one population category behind a nearest-neighbor backend.
#[derive(Debug)]
pub struct CategoryIndex {
    /// 1-based category number.
    pub number: usize,
    pub category: PopulationCategory,
    index: Box<dyn NeighborIndex>,
}

impl CategoryIndex {
    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn metric(&self) -> DistanceMetric {
        self.index.metric()
    }

    pub fn member_ids(&self) -> impl Iterator<Item = &str> {
        self.index.members().iter().map(|m| &*m.place_id)
    }
}

/// Builds one index per category. Empty categories yield empty indexes.
pub fn build_category_indexes(
    ps: &PlaceSet,
    categories: &[PopulationCategory],
    metric: DistanceMetric,
    strategy: &dyn IndexStrategy,
) -> Vec<CategoryIndex> {
    let mut buckets: Vec<Vec<Member>> = vec![Vec::new(); categories.len()];
    for r in ps.iter() {
        if let Some(c) = category_of(categories, r.population) {
            buckets[c].push(Member {
                place_id: Arc::from(r.place_id.as_str()),
                coord: r.coord,
            });
        }
    }
    buckets
        .into_iter()
        .zip(categories)
        .enumerate()
        .map(|(i, (members, &category))| CategoryIndex {
            number: i + 1,
            category,
            index: strategy.build(members, metric),
        })
        .collect()
}

/// One nearest-place distance after the floor has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestDistance {
    /// Distance before the floor.
    pub raw_km: f64,
    pub distance_km: f64,
    pub provenance: Provenance,
    pub nearest_id: Option<Arc<str>>,
}

/// Distance from `query` to the closest other member of `idx`, floored at
/// `floor_km`.
pub fn nearest_distance(
    query: &PlaceRecord,
    idx: &CategoryIndex,
    floor_km: f64,
) -> Result<NearestDistance, SpatialError> {
    nearest_distance_embedded(query, &idx.metric().embed(query.coord), idx, floor_km)
}

fn nearest_distance_embedded(
    query: &PlaceRecord,
    embedded: &[f64; 3],
    idx: &CategoryIndex,
    floor_km: f64,
) -> Result<NearestDistance, SpatialError> {
    let hit = idx
        .index
        .nearest_embedded(query.coord, embedded, &query.place_id)
        .ok_or(SpatialError::EmptyCategory {
            category: idx.number,
            band: idx.category,
        })?;
    let raw = hit.distance_km;
    let (distance_km, provenance) = if raw < floor_km {
        (floor_km, Provenance::Clamped)
    } else {
        (raw, Provenance::Measured)
    };
    Ok(NearestDistance {
        raw_km: raw,
        distance_km,
        provenance,
        nearest_id: Some(idx.index.members()[hit.member].place_id.clone()),
    })
}

/// The per-category distances of one place.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceVector {
    pub place_id: String,
    pub d: [f64; NUM_CATEGORIES],
    pub provenance: [Provenance; NUM_CATEGORIES],
    pub nearest_id: [Option<Arc<str>>; NUM_CATEGORIES],
}

impl DistanceVector {
    pub fn any(&self, p: Provenance) -> bool {
        self.provenance.contains(&p)
    }
}

/// Distance vectors for every place of `ps`, in set order.
pub fn distance_vectors(
    ps: &PlaceSet,
    indexes: &[CategoryIndex],
    fallback: FallbackPolicy,
    floor_km: f64,
) -> Result<Vec<DistanceVector>, SpatialError> {
    assert_eq!(indexes.len(), NUM_CATEGORIES, "one index per category");
    let metric = indexes[0].metric();
    if !metric.is_consistent_with(ps.mode()) {
        return Err(SpatialError::MetricMismatch {
            metric,
            mode: ps.mode(),
        });
    }
    let diagonal = match fallback {
        FallbackPolicy::Diagonal => {
            bbox_diagonal_km(metric, ps.iter().map(|r| r.coord)).max(floor_km)
        }
        FallbackPolicy::Error => f64::NAN,
    };

    let mut out = Vec::with_capacity(ps.len());
    for r in ps.iter() {
        let mut d = [0.0; NUM_CATEGORIES];
        let mut provenance = [Provenance::Measured; NUM_CATEGORIES];
        let mut nearest_id: [Option<Arc<str>>; NUM_CATEGORIES] = Default::default();
        let embedded = metric.embed(r.coord);
        for (k, idx) in indexes.iter().enumerate() {
            match nearest_distance_embedded(r, &embedded, idx, floor_km) {
                Ok(nd) => {
                    d[k] = nd.distance_km;
                    provenance[k] = nd.provenance;
                    nearest_id[k] = nd.nearest_id;
                }
                Err(SpatialError::EmptyCategory { category, band }) => match fallback {
                    FallbackPolicy::Error => {
                        return Err(SpatialError::MissingCategory {
                            year: ps.year(),
                            category,
                            band,
                        })
                    }
                    FallbackPolicy::Diagonal => {
                        d[k] = diagonal;
                        provenance[k] = Provenance::Fallback;
                    }
                },
                Err(e) => return Err(e),
            }
        }
        out.push(DistanceVector {
            place_id: r.place_id.clone(),
            d,
            provenance,
            nearest_id,
        });
    }
    Ok(out)
}
