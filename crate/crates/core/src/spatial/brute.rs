use crate::ingest::Coord;

use super::backend::{IndexStrategy, Member, Neighbor, NeighborIndex};
use super::metric::DistanceMetric;

/// Linear scan over all members. O(n) per query; used as the reference
/// backend and for small member sets.
#[derive(Debug, Clone, Copy, Default)]
pub struct BruteForceStrategy;

impl IndexStrategy for BruteForceStrategy {
    fn name(&self) -> &'static str {
        "brute-force"
    }

    fn build(&self, members: Vec<Member>, metric: DistanceMetric) -> Box<dyn NeighborIndex> {
        Box::new(BruteForceIndex { members, metric })
    }
}

#[derive(Debug)]
pub struct BruteForceIndex {
    members: Vec<Member>,
    metric: DistanceMetric,
}

impl NeighborIndex for BruteForceIndex {
    fn metric(&self) -> DistanceMetric {
        self.metric
    }

    fn members(&self) -> &[Member] {
        &self.members
    }

    fn nearest(&self, query: Coord, exclude_id: &str) -> Option<Neighbor> {
        let mut best = None;
        for (i, m) in self.members.iter().enumerate() {
            if *m.place_id == *exclude_id {
                continue;
            }
            let d = self.metric.distance_km(query, m.coord);
            if Neighbor::improves(&best, d, &m.place_id, &self.members) {
                best = Some(Neighbor {
                    member: i,
                    distance_km: d,
                });
            }
        }
        best
    }
}
