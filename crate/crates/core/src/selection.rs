//! Priority-ordered greedy selection of serving IoT clusters and the
//! nearest-TBS association for route segments.
//!
//! Type-I clusters are picked first, each time taking the unselected center
//! closest to any segment spanned by the anchors chosen so far (previously
//! selected centers plus source and destination); type-II picks follow with
//! the full type-I set as additional anchors. Ties break on smaller x, then
//! smaller y, so the result is independent of input ordering.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{point_to_segment_distance, Point2D, Scene};

/// Priority class of a cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClusterKind {
    Type1,
    Type2,
}

/// One selected cluster: center, class, and its data demand in bit/Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServingCluster {
    pub center: Point2D,
    pub kind: ClusterKind,
    pub demand_bithz: f64,
}

/// Ordered serving set, highest priority first.
#[derive(Debug, Clone, Default)]
pub struct ServingSet {
    pub clusters: Vec<ServingCluster>,
    /// Requested counts that the scene could not satisfy, per class.
    pub shortfall_type1: usize,
    pub shortfall_type2: usize,
}

impl ServingSet {
    pub fn n1(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::Type1)
            .count()
    }

    pub fn n2(&self) -> usize {
        self.clusters
            .iter()
            .filter(|c| c.kind == ClusterKind::Type2)
            .count()
    }

    pub fn total_demand(&self) -> f64 {
        self.clusters.iter().map(|c| c.demand_bithz).sum()
    }

    /// Drop the lowest-priority (last selected) cluster, if any.
    pub fn drop_lowest_priority(&mut self) -> Option<ServingCluster> {
        self.clusters.pop()
    }
}

/// Minimum distance from `p` to any segment spanned by a pair of anchors.
fn distance_to_anchor_segments(p: Point2D, anchors: &[Point2D]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..anchors.len() {
        for j in (i + 1)..anchors.len() {
            best = best.min(point_to_segment_distance(p, anchors[i], anchors[j]));
        }
    }
    best
}

fn pick_greedy(candidates: &mut Vec<Point2D>, anchors: &[Point2D]) -> Option<Point2D> {
    let mut best_idx = None;
    let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for (i, &c) in candidates.iter().enumerate() {
        let key = (distance_to_anchor_segments(c, anchors), c.x, c.y);
        if key < best_key {
            best_key = key;
            best_idx = Some(i);
        }
    }
    best_idx.map(|i| candidates.swap_remove(i))
}

/// Select up to `n1` type-I and `n2` type-II serving clusters from the
/// scene. A scene poorer than requested yields all it has, with the
/// shortfall recorded.
pub fn select_serving_clusters(
    scene: &Scene,
    n1: usize,
    n2: usize,
    demands: (f64, f64),
) -> ServingSet {
    let (m1, m2) = demands;
    let mut anchors = vec![scene.source, scene.destination];
    let mut clusters = Vec::with_capacity(n1 + n2);

    let mut pool1 = scene.clusters1.clone();
    for _ in 0..n1 {
        match pick_greedy(&mut pool1, &anchors) {
            Some(c) => {
                anchors.push(c);
                clusters.push(ServingCluster {
                    center: c,
                    kind: ClusterKind::Type1,
                    demand_bithz: m1,
                });
            }
            None => break,
        }
    }
    let picked1 = clusters.len();

    let mut pool2 = scene.clusters2.clone();
    for _ in 0..n2 {
        match pick_greedy(&mut pool2, &anchors) {
            Some(c) => {
                anchors.push(c);
                clusters.push(ServingCluster {
                    center: c,
                    kind: ClusterKind::Type2,
                    demand_bithz: m2,
                });
            }
            None => break,
        }
    }
    let picked2 = clusters.len() - picked1;

    ServingSet {
        clusters,
        shortfall_type1: n1 - picked1,
        shortfall_type2: n2 - picked2,
    }
}

/// Role of a route waypoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WaypointRole {
    Source,
    Destination,
    Cluster1,
    Cluster2,
}

/// One waypoint of a candidate route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Waypoint {
    pub position: Point2D,
    pub role: WaypointRole,
    /// Index into the serving set for cluster waypoints.
    pub cluster_index: Option<usize>,
}

/// An ordered route: a permutation of serving clusters and the destination,
/// closed by the return to the source. The source itself is implicit as the
/// start, explicit as the terminal waypoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteCandidate {
    /// Visit order `r_1 .. r_K` followed by the terminal source.
    pub waypoints: Vec<Waypoint>,
}

impl RouteCandidate {
    /// Stages of the route: stage `k` is the leg from waypoint `k` to
    /// waypoint `k+1` (the terminal being the source). The leg from the
    /// source to the first waypoint precedes stage 1 and carries no state.
    pub fn stage_count(&self) -> usize {
        self.waypoints.len().saturating_sub(1)
    }
}

/// Nearest TBS to each directed route segment `r_k -> r_{k+1}`.
///
/// The opening leg from the source to the first waypoint carries no data and
/// gets no association; repeated TBSs across segments are expected.
pub fn nearest_tbs_per_segment(
    route: &RouteCandidate,
    tbs: &[Point2D],
) -> Result<Vec<Point2D>> {
    if route.waypoints.len() < 2 {
        return Err(Error::InvalidParameter(
            "route needs at least two waypoints".into(),
        ));
    }
    if tbs.is_empty() {
        return Err(Error::NoTbs);
    }
    let mut out = Vec::with_capacity(route.waypoints.len() - 1);
    for pair in route.waypoints.windows(2) {
        let (a, b) = (pair[0].position, pair[1].position);
        let mut best = tbs[0];
        let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        for &t in tbs {
            let key = (point_to_segment_distance(t, a, b), t.x, t.y);
            if key < best_key {
                best_key = key;
                best = t;
            }
        }
        out.push(best);
    }
    Ok(out)
}
