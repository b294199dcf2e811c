//! Bounding-box k-d tree in the metric's 3-D embedding.
//!
//! Pruning compares embedded box distances against a conservative embedded
//! reach of the best distance so far; candidates that survive are scored with
//! the metric's own distance function. The tree therefore returns the same distance, bit for
//! bit, as a linear scan.

use crate::ingest::Coord;

use super::backend::{IndexStrategy, Member, Neighbor, NeighborIndex};
use super::metric::DistanceMetric;

#[derive(Debug, Clone, Copy)]
pub struct KdTreeStrategy {
    pub leaf_size: usize,
}

impl Default for KdTreeStrategy {
    fn default() -> Self {
        Self { leaf_size: 8 }
    }
}

impl IndexStrategy for KdTreeStrategy {
    fn name(&self) -> &'static str {
        "kdtree"
    }

    fn build(&self, members: Vec<Member>, metric: DistanceMetric) -> Box<dyn NeighborIndex> {
        Box::new(KdTree::build(members, metric, self.leaf_size.max(1)))
    }
}

#[derive(Debug, Clone, Copy)]
struct Bbox {
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Bbox {
    fn around(points: &[[f64; 3]], idx: &[u32]) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in idx {
            let p = points[i as usize];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Self { lo, hi }
    }

    fn widest_axis(&self) -> usize {
        let ext = [
            self.hi[0] - self.lo[0],
            self.hi[1] - self.lo[1],
            self.hi[2] - self.lo[2],
        ];
        let mut axis = 0;
        for k in 1..3 {
            if ext[k] > ext[axis] {
                axis = k;
            }
        }
        axis
    }

    /// Squared distance from `q` to the box.
    #[inline]
    fn distance2(&self, q: &[f64; 3]) -> f64 {
        let mut s = 0.0;
        for k in 0..3 {
            let d = if q[k] < self.lo[k] {
                self.lo[k] - q[k]
            } else if q[k] > self.hi[k] {
                q[k] - self.hi[k]
            } else {
                0.0
            };
            s += d * d;
        }
        s
    }
}

#[derive(Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { left: usize, right: usize },
}

#[derive(Debug)]
pub struct KdTree {
    members: Vec<Member>,
    metric: DistanceMetric,
    /// Embedded points; by member slot while building, then in `order` so
    /// that a leaf scans contiguous memory.
    points: Vec<[f64; 3]>,
    /// Member slots, permuted so that each leaf covers a contiguous range.
    order: Vec<u32>,
    nodes: Vec<Node>,
    boxes: Vec<Bbox>,
}

impl KdTree {
    pub fn build(members: Vec<Member>, metric: DistanceMetric, leaf_size: usize) -> Self {
        let points: Vec<[f64; 3]> = members.iter().map(|m| metric.embed(m.coord)).collect();
        let mut order: Vec<u32> = (0..members.len() as u32).collect();
        let mut tree = Self {
            members,
            metric,
            points,
            order: Vec::new(),
            nodes: Vec::new(),
            boxes: Vec::new(),
        };
        if !order.is_empty() {
            tree.build_node(&mut order, 0, leaf_size);
        }
        tree.points = order.iter().map(|&i| tree.points[i as usize]).collect();
        tree.order = order;
        tree
    }

    fn build_node(&mut self, order: &mut [u32], offset: usize, leaf_size: usize) -> usize {
        let bbox = Bbox::around(&self.points, order);
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf {
            start: offset,
            end: offset + order.len(),
        });
        self.boxes.push(bbox);
        if order.len() <= leaf_size {
            return id;
        }
        let axis = bbox.widest_axis();
        if bbox.hi[axis] == bbox.lo[axis] {
            // All points coincide.
            return id;
        }
        let mid = order.len() / 2;
        let points = &self.points;
        order.select_nth_unstable_by(mid, |&a, &b| {
            points[a as usize][axis].total_cmp(&points[b as usize][axis])
        });
        let (l, r) = order.split_at_mut(mid);
        let left = self.build_node(l, offset, leaf_size);
        let right = self.build_node(r, offset + mid, leaf_size);
        self.nodes[id] = Node::Split { left, right };
        id
    }

    /// Scores the member at leaf position `i` against the best so far.
    #[inline]
    fn score(&self, i: usize, query: Coord, best: &mut Best) {
        let slot = self.order[i] as usize;
        let m = &self.members[slot];
        let d = self.metric.distance_km(query, m.coord);
        if Neighbor::improves(&best.neighbor, d, &m.place_id, &self.members) {
            best.neighbor = Some(Neighbor {
                member: slot,
                distance_km: d,
            });
            let reach = self.metric.embedded_reach(d);
            best.reach2 = reach * reach;
        }
    }

    fn search(&self, node: usize, q: &[f64; 3], query: Coord, exclude_id: &str, best: &mut Best) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                // Score the embedded-closest candidate first so that the
                // reach is already tight when the rest are filtered.
                let mut first = None;
                let mut first_e2 = f64::INFINITY;
                for i in start..end {
                    let e2 = dist2(&self.points[i], q);
                    if e2 < first_e2 && *self.members[self.order[i] as usize].place_id != *exclude_id {
                        first = Some(i);
                        first_e2 = e2;
                    }
                }
                let Some(first) = first else { return };
                if first_e2 > best.reach2 {
                    return;
                }
                self.score(first, query, best);
                for i in start..end {
                    if i != first
                        && dist2(&self.points[i], q) <= best.reach2
                        && *self.members[self.order[i] as usize].place_id != *exclude_id
                    {
                        self.score(i, query, best);
                    }
                }
            }
            Node::Split { left, right } => {
                let d_l = self.boxes[left].distance2(q);
                let d_r = self.boxes[right].distance2(q);
                let (first, d_first, second, d_second) = if d_l <= d_r {
                    (left, d_l, right, d_r)
                } else {
                    (right, d_r, left, d_l)
                };
                // Boxes exactly at the reach are still visited so that
                // distance ties reach the id tie-break.
                if d_first <= best.reach2 {
                    self.search(first, q, query, exclude_id, best);
                }
                if d_second <= best.reach2 {
                    self.search(second, q, query, exclude_id, best);
                }
            }
        }
    }
}

#[inline]
fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let (x, y, z) = (a[0] - b[0], a[1] - b[1], a[2] - b[2]);
    x * x + y * y + z * z
}

struct Best {
    neighbor: Option<Neighbor>,
    /// Squared embedded reach of the current best distance.
    reach2: f64,
}

impl NeighborIndex for KdTree {
    fn metric(&self) -> DistanceMetric {
        self.metric
    }

    fn members(&self) -> &[Member] {
        &self.members
    }

    fn nearest(&self, query: Coord, exclude_id: &str) -> Option<Neighbor> {
        self.nearest_embedded(query, &self.metric.embed(query), exclude_id)
    }

    fn nearest_embedded(&self, query: Coord, embedded: &[f64; 3], exclude_id: &str) -> Option<Neighbor> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best = Best {
            neighbor: None,
            reach2: f64::INFINITY,
        };
        self.search(0, embedded, query, exclude_id, &mut best);
        best.neighbor
    }
}
