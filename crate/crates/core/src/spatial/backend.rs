//! Nearest-neighbor backends and the registry they are selected from.
//!
//! Every backend answers the same exact query: the closest member whose
//! place id differs from the query's, with ties on distance broken by the
//! lexicographically smallest place id. Backends differ only in how much
//! of the member set they touch to find it.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ingest::Coord;

use super::metric::DistanceMetric;
use super::SpatialError;

/// A point in a category's member set.
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    /// Shared so that reporting a nearest member does not copy its id.
    pub place_id: Arc<str>,
    pub coord: Coord,
}

/// Result of a nearest-neighbor query: a member slot and its distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub member: usize,
    pub distance_km: f64,
}

impl Neighbor {
    /// Whether `candidate` at `distance_km` should replace the current best.
    #[inline]
    pub(crate) fn improves(
        best: &Option<Neighbor>,
        distance_km: f64,
        candidate_id: &str,
        members: &[Member],
    ) -> bool {
        match best {
            None => true,
            Some(b) => {
                distance_km < b.distance_km
                    || (distance_km == b.distance_km
                        && candidate_id < &*members[b.member].place_id)
            }
        }
    }
}

/// An immutable exact nearest-neighbor structure over one member set.
pub trait NeighborIndex: Send + Sync + fmt::Debug {
    fn metric(&self) -> DistanceMetric;

    fn members(&self) -> &[Member];

    /// Nearest member other than `exclude_id`, or `None` if there is none.
    fn nearest(&self, query: Coord, exclude_id: &str) -> Option<Neighbor>;

    /// Same as [`Self::nearest`] for a query already passed through
    /// [`DistanceMetric::embed`], so callers asking several indexes about one
    /// point embed it once.
    fn nearest_embedded(&self, query: Coord, _embedded: &[f64; 3], exclude_id: &str) -> Option<Neighbor> {
        self.nearest(query, exclude_id)
    }

    fn len(&self) -> usize {
        self.members().len()
    }

    fn is_empty(&self) -> bool {
        self.members().is_empty()
    }
}

/// A named way of building a [`NeighborIndex`].
pub trait IndexStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn build(&self, members: Vec<Member>, metric: DistanceMetric) -> Box<dyn NeighborIndex>;
}

/// Index strategies by name.
#[derive(Clone)]
pub struct IndexRegistry {
    strategies: BTreeMap<&'static str, Arc<dyn IndexStrategy>>,
}

pub const DEFAULT_STRATEGY: &str = "kdtree";

impl IndexRegistry {
    pub fn empty() -> Self {
        Self {
            strategies: BTreeMap::new(),
        }
    }

    /// Registry holding the built-in `kdtree` and `brute-force` backends.
    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(super::kdtree::KdTreeStrategy::default()))
            .expect("fresh registry");
        r.register(Arc::new(super::brute::BruteForceStrategy))
            .expect("fresh registry");
        r
    }

    pub fn register(&mut self, strategy: Arc<dyn IndexStrategy>) -> Result<(), SpatialError> {
        let name = strategy.name();
        if self.strategies.contains_key(name) {
            return Err(SpatialError::DuplicateStrategy(name.to_string()));
        }
        self.strategies.insert(name, strategy);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn IndexStrategy>, SpatialError> {
        self.strategies
            .get(name)
            .cloned()
            .ok_or_else(|| SpatialError::UnknownStrategy {
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }
}

impl Default for IndexRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl fmt::Debug for IndexRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexRegistry")
            .field("strategies", &self.names())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Named(&'static str);

    impl IndexStrategy for Named {
        fn name(&self) -> &'static str {
            self.0
        }

        fn build(&self, members: Vec<Member>, metric: DistanceMetric) -> Box<dyn NeighborIndex> {
            super::super::brute::BruteForceStrategy.build(members, metric)
        }
    }

    #[test]
    fn builtin_names() {
        let r = IndexRegistry::with_builtin();
        assert_eq!(r.names(), vec!["brute-force", "kdtree"]);
        assert_eq!(r.get("kdtree").unwrap().name(), "kdtree");
    }

    #[test]
    fn unknown_and_duplicate() {
        let mut r = IndexRegistry::with_builtin();
        assert!(matches!(r.get("rtree"), Err(SpatialError::UnknownStrategy { .. })));
        assert!(matches!(
            r.register(Arc::new(Named("kdtree"))),
            Err(SpatialError::DuplicateStrategy(_))
        ));
        r.register(Arc::new(Named("custom"))).unwrap();
        assert_eq!(r.get("custom").unwrap().name(), "custom");
    }
}
