//! Route planning: permutation enumeration, stage-wise TBS-visit decisions
//! by backward induction, time/energy/data ledgers, battery-shortfall
//! truncation, and the top-level minimal-time / maximal-data planner.

use serde::{Deserialize, Serialize};

use crate::channel::{LinkKind, UnitTimeTable};
use crate::energy::PowerProfile;
use crate::error::{Error, Result};
use crate::geometry::{Point2D, Scene};
use crate::hover::{
    maximize_residual_data, optimize_hover_points, DescentReport, HoverObjective, HoverRoute,
    MotionParams, RouteNode,
};
use crate::selection::{
    nearest_tbs_per_segment, select_serving_clusters, ClusterKind, RouteCandidate, ServingSet,
    Waypoint, WaypointRole,
};

/// Largest cluster count solved by exact permutation enumeration.
pub const ROUTE_ENUMERATION_CAP: usize = 6;

/// Planning objective: fastest feasible round trip, or most data delivered
/// with the whole battery spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    MinTime,
    MaxData,
}

impl Objective {
    pub fn label(&self) -> &'static str {
        match self {
            Objective::MinTime => "min-time",
            Objective::MaxData => "max-data",
        }
    }
}

/// All permutations of the serving clusters plus the destination, each
/// closed by the terminal return to the source.
pub fn enumerate_routes(
    serving: &ServingSet,
    source: Point2D,
    destination: Point2D,
) -> Result<Vec<RouteCandidate>> {
    let n = serving.clusters.len();
    if n > ROUTE_ENUMERATION_CAP {
        return Err(Error::RouteCapExceeded {
            count: n,
            cap: ROUTE_ENUMERATION_CAP,
        });
    }
    // items 0..n are clusters, item n is the destination
    let mut order: Vec<usize> = (0..=n).collect();
    let mut routes = Vec::new();
    permute(&mut order, 0, &mut |perm| {
        let mut waypoints: Vec<Waypoint> = perm
            .iter()
            .map(|&item| {
                if item == n {
                    Waypoint {
                        position: destination,
                        role: WaypointRole::Destination,
                        cluster_index: None,
                    }
                } else {
                    let c = &serving.clusters[item];
                    Waypoint {
                        position: c.center,
                        role: match c.kind {
                            ClusterKind::Type1 => WaypointRole::Cluster1,
                            ClusterKind::Type2 => WaypointRole::Cluster2,
                        },
                        cluster_index: Some(item),
                    }
                }
            })
            .collect();
        waypoints.push(Waypoint {
            position: source,
            role: WaypointRole::Source,
            cluster_index: None,
        });
        routes.push(RouteCandidate { waypoints });
    });
    Ok(routes)
}

fn permute(items: &mut Vec<usize>, k: usize, emit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        emit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, emit);
        items.swap(k, i);
    }
}

/// Static description of one stage (leg `r_k -> r_{k+1}`) of a route.
#[derive(Debug, Clone)]
pub struct StagePlan {
    /// Data collected at the waypoint opening this stage, bit/Hz.
    pub demand_bithz: f64,
    /// Serving cluster index behind that demand, if any.
    pub cluster_index: Option<usize>,
    /// Whether the package is still aboard during this stage.
    pub loaded: bool,
    pub serve_power_w: f64,
    pub motion: MotionParams,
    pub leg_len_m: f64,
    /// Nearest TBS to the leg; `None` only in the no-data, no-TBS case.
    pub tbs: Option<Point2D>,
    /// Extra traveling energy of detouring via the TBS, joules.
    pub detour_energy_j: f64,
    /// Extra traveling time of the detour, seconds.
    pub detour_time_s: f64,
}

/// Per-route stage table plus the costs of the opening leg from the source.
#[derive(Debug, Clone)]
pub struct RouteStages {
    pub stages: Vec<StagePlan>,
    pub opening_len_m: f64,
    pub opening_motion: MotionParams,
}

/// Build the stage table of a route under a power profile.
///
/// `tbs_assoc` must come from [`nearest_tbs_per_segment`] on the same route;
/// pass `None` only when the route carries no data at all.
pub fn build_stages(
    route: &RouteCandidate,
    tbs_assoc: Option<&[Point2D]>,
    serving: &ServingSet,
    profile: &PowerProfile,
) -> RouteStages {
    let k_total = route.stage_count();
    let d_pos = route
        .waypoints
        .iter()
        .position(|w| w.role == WaypointRole::Destination)
        .unwrap_or(usize::MAX);
    let mut stages = Vec::with_capacity(k_total);
    for k in 0..k_total {
        let from = &route.waypoints[k];
        let to = &route.waypoints[k + 1];
        // the package leaves at the destination; legs from it onward fly empty
        let loaded = k < d_pos;
        let motion = MotionParams {
            power_w: profile.motion_power(loaded),
            velocity_mps: profile.velocity(loaded),
        };
        let leg_len_m = from.position.distance(to.position);
        let (tbs, detour_len) = match tbs_assoc {
            Some(assoc) => {
                let t = assoc[k];
                let d = t.distance(from.position) + t.distance(to.position) - leg_len_m;
                (Some(t), d.max(0.0))
            }
            None => (None, 0.0),
        };
        let demand = from
            .cluster_index
            .map(|i| serving.clusters[i].demand_bithz)
            .unwrap_or(0.0);
        stages.push(StagePlan {
            demand_bithz: demand,
            cluster_index: from.cluster_index,
            loaded,
            serve_power_w: profile.serve_power(loaded),
            motion,
            leg_len_m,
            tbs,
            detour_energy_j: detour_len * motion.power_w / motion.velocity_mps,
            detour_time_s: detour_len / motion.velocity_mps,
        });
    }
    RouteStages {
        stages,
        opening_len_m: route.waypoints[0]
            .position
            .distance(Point2D::new(0.0, 0.0)),
        opening_motion: MotionParams {
            power_w: profile.motion_power(true),
            velocity_mps: profile.velocity(true),
        },
    }
}

/// Outcome of the stage decision program.
#[derive(Debug, Clone)]
pub struct DpSolution {
    /// `true` at stage k means the UAV detours to the stage's TBS and
    /// flushes its whole buffer there (the paper's `s_k = 0`).
    pub visit: Vec<bool>,
    /// Total decision cost `c*`, joules.
    pub cost_j: f64,
    /// Time added by the decisions, seconds.
    pub time_s: f64,
}

impl DpSolution {
    /// Decision vector in the `s_k` convention (1 = direct, 0 = via TBS).
    pub fn s_vector(&self) -> Vec<u8> {
        self.visit.iter().map(|&v| if v { 0 } else { 1 }).collect()
    }
}

/// Replay a decision vector over the stages, returning `(cost, time)` or
/// `None` when the terminal all-forwarded constraint fails.
pub fn replay_decisions(
    stages: &[StagePlan],
    visit: &[bool],
    t_u2b0: f64,
) -> Option<(f64, f64)> {
    let mut carried = 0.0f64;
    let mut cost = 0.0f64;
    let mut time = 0.0f64;
    for (k, stage) in stages.iter().enumerate() {
        let pool = carried + stage.demand_bithz;
        if visit[k] {
            cost += pool * t_u2b0 * stage.serve_power_w + stage.detour_energy_j;
            time += pool * t_u2b0 + stage.detour_time_s;
            carried = 0.0;
        } else {
            carried = pool;
        }
    }
    (carried == 0.0).then_some((cost, time))
}

/// Solve the TBS-visit decision program by backward induction.
///
/// State is the first stage whose demand is still aboard; the terminal
/// constraint forces an empty buffer after the last stage. The returned cost
/// is an exact replay of the reconstructed decisions, so it matches an
/// exhaustive enumeration bit for bit.
pub fn tbs_decision_dp(stages: &[StagePlan], t_u2b0: f64) -> Result<DpSolution> {
    let k_total = stages.len();
    if stages.iter().all(|s| s.demand_bithz == 0.0) {
        // nothing to forward: never detour
        let visit = vec![false; k_total];
        return Ok(DpSolution {
            visit,
            cost_j: 0.0,
            time_s: 0.0,
        });
    }
    if stages
        .iter()
        .any(|s| s.tbs.is_none() && s.demand_bithz > 0.0)
        || stages.iter().all(|s| s.tbs.is_none())
    {
        return Err(Error::NoTbs);
    }
    let mut prefix = vec![0.0f64; k_total + 1];
    for k in 0..k_total {
        prefix[k + 1] = prefix[k] + stages[k].demand_bithz;
    }
    let carried = |f: usize, k: usize| prefix[k] - prefix[f];

    // value[k][f]: best future cost at stage k with stages f..k still aboard
    let mut value = vec![vec![f64::INFINITY; k_total + 1]; k_total + 1];
    let mut choose_visit = vec![vec![false; k_total + 1]; k_total + 1];
    for f in 0..=k_total {
        value[k_total][f] = if carried(f, k_total) == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    for k in (0..k_total).rev() {
        for f in 0..=k {
            let pool = carried(f, k) + stages[k].demand_bithz;
            let visit_cost = pool * t_u2b0 * stages[k].serve_power_w
                + stages[k].detour_energy_j
                + value[k + 1][k + 1];
            let skip_cost = value[k + 1][f];
            if visit_cost < skip_cost {
                value[k][f] = visit_cost;
                choose_visit[k][f] = true;
            } else {
                value[k][f] = skip_cost;
                choose_visit[k][f] = false;
            }
        }
    }
    if !value[0][0].is_finite() {
        return Err(Error::NoTbs);
    }
    let mut visit = vec![false; k_total];
    let mut f = 0usize;
    for k in 0..k_total {
        visit[k] = choose_visit[k][f];
        if visit[k] {
            f = k + 1;
        }
    }
    let (cost_j, time_s) =
        replay_decisions(stages, &visit, t_u2b0).expect("DP violated terminal constraint");
    Ok(DpSolution {
        visit,
        cost_j,
        time_s,
    })
}

/// Time and energy of a route with hover points pinned above targets.
#[derive(Debug, Clone)]
pub struct RouteEvaluation {
    pub dp: DpSolution,
    pub tbs_assoc: Option<Vec<Point2D>>,
    /// Full-demand energy `c* + E_noTBS`, joules.
    pub energy_full_j: f64,
    /// Full-demand round-trip time, seconds.
    pub time_full_s: f64,
}

/// Evaluate one route: baseline ledger without TBS visits plus the decision
/// program on top.
pub fn evaluate_route(
    route: &RouteCandidate,
    scene_tbs: &[Point2D],
    serving: &ServingSet,
    profile: &PowerProfile,
    table: &UnitTimeTable,
) -> Result<RouteEvaluation> {
    let total_demand = serving.total_demand();
    let tbs_assoc = if scene_tbs.is_empty() {
        if total_demand > 0.0 {
            return Err(Error::NoTbs);
        }
        None
    } else {
        Some(nearest_tbs_per_segment(route, scene_tbs)?)
    };
    let staged = build_stages(route, tbs_assoc.as_deref(), serving, profile);
    let t_u2b0 = table.unit_time(LinkKind::UavToTbs, 0.0)?;
    let t_c2u0 = table.unit_time(LinkKind::ClusterToUav, 0.0)?;
    let dp = tbs_decision_dp(&staged.stages, t_u2b0)?;

    let mut time = staged.opening_len_m / staged.opening_motion.velocity_mps;
    let mut energy = time * staged.opening_motion.power_w;
    for s in &staged.stages {
        let leg_t = s.leg_len_m / s.motion.velocity_mps;
        time += leg_t + s.demand_bithz * t_c2u0;
        energy += leg_t * s.motion.power_w + s.demand_bithz * t_c2u0 * s.serve_power_w;
    }
    Ok(RouteEvaluation {
        energy_full_j: energy + dp.cost_j,
        time_full_s: time + dp.time_s,
        dp,
        tbs_assoc,
    })
}

/// Battery-shortfall resolution for the selected route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShortfallOutcome {
    /// The plan fits the battery; demands untouched.
    Unchanged,
    /// Serve the lowest-priority cluster with this reduced amount (bit/Hz).
    Truncate { d_prime: f64 },
    /// Even zero data from the last cluster cannot fit; drop it and re-plan.
    DropLowest,
}

/// Resolve an over-budget plan by shrinking the lowest-priority cluster's
/// data. `unit_saving_j` is the energy released per bit/Hz removed: the
/// overhead collection time times the collecting power plus the overhead
/// forwarding time times the delivering power.
pub fn apply_energy_shortfall(
    energy_full_j: f64,
    battery_j: f64,
    demand_end_bithz: f64,
    unit_saving_j: f64,
) -> ShortfallOutcome {
    if energy_full_j <= battery_j {
        return ShortfallOutcome::Unchanged;
    }
    if unit_saving_j <= 0.0 || demand_end_bithz <= 0.0 {
        return ShortfallOutcome::DropLowest;
    }
    let d_prime = demand_end_bithz - (energy_full_j - battery_j) / unit_saving_j;
    if d_prime < 0.0 {
        ShortfallOutcome::DropLowest
    } else {
        ShortfallOutcome::Truncate { d_prime }
    }
}

/// Time/energy/data bookkeeping of one finished trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct TripLedger {
    pub t_col_s: f64,
    pub t_del_s: f64,
    pub t_tra_s: f64,
    pub e_col_j: f64,
    pub e_del_j: f64,
    pub e_tra_j: f64,
    pub t_total_s: f64,
    pub e_total_j: f64,
    pub m_total_bithz: f64,
    /// Forwarded amount per stage (`M_k''`; zero where no TBS is visited).
    pub per_stage_forwarded: Vec<f64>,
}

/// One cluster's final allocation inside a plan.
#[derive(Debug, Clone, Serialize)]
pub struct ServedCluster {
    pub center: Point2D,
    pub kind: ClusterKind,
    pub demand_bithz: f64,
    pub allocated_bithz: f64,
}

/// A finished trajectory: visit order, decisions, hover geometry, ledger.
#[derive(Debug, Clone)]
pub struct TrajectoryPlan {
    pub objective: Objective,
    pub route: RouteCandidate,
    /// `visit[k]` is true when stage k detours via its TBS.
    pub decisions: Vec<bool>,
    pub tbs_points: Vec<Option<Point2D>>,
    pub hover_route: HoverRoute,
    pub served: Vec<ServedCluster>,
    pub ledger: TripLedger,
    /// Extra data bought with residual battery (max-data only), bit/Hz.
    pub extra_data_bithz: f64,
    /// Clusters dropped entirely before the plan became feasible.
    pub dropped_clusters: usize,
    pub descent: DescentReport,
}

impl TrajectoryPlan {
    /// Whether the destination precedes every served cluster on the route.
    pub fn delivered_first(&self) -> bool {
        for w in &self.route.waypoints {
            match w.role {
                WaypointRole::Destination => return true,
                WaypointRole::Cluster1 | WaypointRole::Cluster2 => return false,
                WaypointRole::Source => {}
            }
        }
        true
    }

    /// Number of distinct TBS locations actually visited.
    pub fn tbs_visits(&self) -> usize {
        let mut seen: Vec<Point2D> = Vec::new();
        for (k, visited) in self.decisions.iter().enumerate() {
            if *visited {
                if let Some(Some(t)) = self.tbs_points.get(k) {
                    if !seen.iter().any(|s| s == t) {
                        seen.push(*t);
                    }
                }
            }
        }
        seen.len()
    }

    pub fn served_count(&self, kind: ClusterKind) -> usize {
        self.served
            .iter()
            .filter(|c| c.kind == kind && c.allocated_bithz > 0.0)
            .count()
    }
}

/// Everything the planner needs besides the scene.
pub struct PlannerContext<'a> {
    pub profile: &'a PowerProfile,
    pub table: &'a UnitTimeTable,
    /// Demands (type-I, type-II) in bit/Hz.
    pub demands: (f64, f64),
}

struct NodeMeta {
    stage: Option<usize>,
    cluster_index: Option<usize>,
    is_tbs: bool,
}

/// Assembled hover route plus bookkeeping to map nodes back onto stages.
struct AssembledRoute {
    hover: HoverRoute,
    meta: Vec<NodeMeta>,
    stage_count: usize,
}

fn assemble_hover_route(
    route: &RouteCandidate,
    staged: &RouteStages,
    visit: &[bool],
    allocations: &[f64],
    source: Point2D,
) -> AssembledRoute {
    let stages = &staged.stages;
    let mut nodes = vec![RouteNode::Fixed { position: source }];
    let mut meta = vec![NodeMeta {
        stage: None,
        cluster_index: None,
        is_tbs: false,
    }];
    let mut legs: Vec<MotionParams> = Vec::new();

    // forwarded amount per stage under the flush-everything rule
    let mut carried = 0.0f64;
    let mut forwarded = vec![0.0f64; stages.len()];
    for (k, stage) in stages.iter().enumerate() {
        let pool = carried
            + stage
                .cluster_index
                .map(|i| allocations[i])
                .unwrap_or(0.0);
        if visit[k] {
            forwarded[k] = pool;
            carried = 0.0;
        } else {
            carried = pool;
        }
    }

    legs.push(staged.opening_motion);
    for (k, stage) in stages.iter().enumerate() {
        let w = &route.waypoints[k];
        match w.role {
            WaypointRole::Destination => {
                nodes.push(RouteNode::Fixed {
                    position: w.position,
                });
                meta.push(NodeMeta {
                    stage: Some(k),
                    cluster_index: None,
                    is_tbs: false,
                });
            }
            _ => {
                nodes.push(RouteNode::hover_at_target(
                    w.position,
                    LinkKind::ClusterToUav,
                    w.cluster_index.map(|i| allocations[i]).unwrap_or(0.0),
                    stage.serve_power_w,
                ));
                meta.push(NodeMeta {
                    stage: Some(k),
                    cluster_index: w.cluster_index,
                    is_tbs: false,
                });
            }
        }
        if visit[k] {
            let tbs = stage.tbs.expect("visited stage without TBS");
            nodes.push(RouteNode::hover_at_target(
                tbs,
                LinkKind::UavToTbs,
                forwarded[k],
                stage.serve_power_w,
            ));
            meta.push(NodeMeta {
                stage: Some(k),
                cluster_index: None,
                is_tbs: true,
            });
            legs.push(stage.motion);
        }
        legs.push(stage.motion);
    }
    nodes.push(RouteNode::Fixed { position: source });
    meta.push(NodeMeta {
        stage: None,
        cluster_index: None,
        is_tbs: false,
    });
    AssembledRoute {
        hover: HoverRoute { nodes, legs },
        meta,
        stage_count: stages.len(),
    }
}

/// Compute the full ledger of an assembled route.
fn trip_ledger(assembled: &AssembledRoute, table: &UnitTimeTable) -> Result<TripLedger> {
    let hover = &assembled.hover;
    let mut t_tra = 0.0;
    let mut e_tra = 0.0;
    for (i, leg) in hover.legs.iter().enumerate() {
        let len = hover.nodes[i]
            .position()
            .distance(hover.nodes[i + 1].position());
        t_tra += len / leg.velocity_mps;
        e_tra += len * leg.power_w / leg.velocity_mps;
    }
    let mut t_col = 0.0;
    let mut e_col = 0.0;
    let mut t_del = 0.0;
    let mut e_del = 0.0;
    let mut per_stage_forwarded = vec![0.0f64; assembled.stage_count];
    let mut m_total = 0.0;
    for (node, meta) in hover.nodes.iter().zip(&assembled.meta) {
        if let RouteNode::Hover {
            kind,
            data_bithz,
            serve_power_w,
            dist_m,
            ..
        } = node
        {
            let t = table.unit_time(*kind, *dist_m)? * data_bithz;
            match kind {
                LinkKind::ClusterToUav => {
                    t_col += t;
                    e_col += t * serve_power_w;
                }
                LinkKind::UavToTbs => {
                    t_del += t;
                    e_del += t * serve_power_w;
                    if let Some(k) = meta.stage {
                        per_stage_forwarded[k] = *data_bithz;
                    }
                    m_total += data_bithz;
                }
            }
        }
    }
    Ok(TripLedger {
        t_col_s: t_col,
        t_del_s: t_del,
        t_tra_s: t_tra,
        e_col_j: e_col,
        e_del_j: e_del,
        e_tra_j: e_tra,
        t_total_s: t_col + t_del + t_tra,
        e_total_j: e_col + e_del + e_tra,
        m_total_bithz: m_total,
        per_stage_forwarded,
    })
}

struct SelectedRoute {
    route: RouteCandidate,
    eval: RouteEvaluation,
    staged: RouteStages,
    shortfall: ShortfallOutcome,
}

/// Energy released per bit/Hz removed from the end cluster of a route.
fn unit_saving(
    route: &RouteCandidate,
    staged: &RouteStages,
    visit: &[bool],
    end_cluster: usize,
    t_c2u0: f64,
    t_u2b0: f64,
) -> Option<f64> {
    let stage_of_end = route
        .waypoints
        .iter()
        .position(|w| w.cluster_index == Some(end_cluster))?;
    let flush_stage = (stage_of_end..visit.len()).find(|&k| visit[k])?;
    Some(
        t_c2u0 * staged.stages[stage_of_end].serve_power_w
            + t_u2b0 * staged.stages[flush_stage].serve_power_w,
    )
}

fn select_route(
    routes: Vec<RouteCandidate>,
    scene: &Scene,
    serving: &ServingSet,
    objective: Objective,
    ctx: &PlannerContext,
) -> Result<Option<SelectedRoute>> {
    let battery = ctx.profile.battery_j;
    let t_u2b0 = ctx.table.unit_time(LinkKind::UavToTbs, 0.0)?;
    let t_c2u0 = ctx.table.unit_time(LinkKind::ClusterToUav, 0.0)?;
    let end_cluster = serving.clusters.len().checked_sub(1);

    let mut evals = Vec::with_capacity(routes.len());
    for route in routes {
        let eval = evaluate_route(&route, &scene.tbs, serving, ctx.profile, ctx.table)?;
        evals.push((route, eval));
    }

    let pick_full = |pred: &dyn Fn(&RouteEvaluation) -> f64| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, (_, eval)) in evals.iter().enumerate() {
            let v = pred(eval);
            if best.map_or(true, |(_, bv)| v < bv) {
                best = Some((i, v));
            }
        }
        best.map(|(i, _)| i)
    };

    let chosen = match objective {
        Objective::MaxData => pick_full(&|e| e.energy_full_j),
        Objective::MinTime => {
            // fastest among battery-feasible routes; else fall through to
            // truncation of the fastest truncatable route
            let mut best: Option<(usize, f64)> = None;
            for (i, (_, eval)) in evals.iter().enumerate() {
                if eval.energy_full_j <= battery {
                    let v = eval.time_full_s;
                    if best.map_or(true, |(_, bv)| v < bv) {
                        best = Some((i, v));
                    }
                }
            }
            match best {
                Some((i, _)) => Some(i),
                None => {
                    // every route needs truncation; compare post-truncation times
                    let mut best: Option<(usize, f64)> = None;
                    for (i, (route, eval)) in evals.iter().enumerate() {
                        let Some(end) = end_cluster else { continue };
                        let staged =
                            build_stages(route, eval.tbs_assoc.as_deref(), serving, ctx.profile);
                        let Some(unit) =
                            unit_saving(route, &staged, &eval.dp.visit, end, t_c2u0, t_u2b0)
                        else {
                            continue;
                        };
                        let demand_end = serving.clusters[end].demand_bithz;
                        match apply_energy_shortfall(eval.energy_full_j, battery, demand_end, unit)
                        {
                            ShortfallOutcome::Truncate { d_prime } => {
                                let t = eval.time_full_s
                                    - (demand_end - d_prime) * (t_c2u0 + t_u2b0);
                                if best.map_or(true, |(_, bv)| t < bv) {
                                    best = Some((i, t));
                                }
                            }
                            ShortfallOutcome::Unchanged => unreachable!("filtered above"),
                            ShortfallOutcome::DropLowest => {}
                        }
                    }
                    best.map(|(i, _)| i)
                }
            }
        }
    };

    let Some(idx) = chosen else {
        return Ok(None);
    };
    let (route, eval) = evals.swap_remove(idx);
    let staged = build_stages(&route, eval.tbs_assoc.as_deref(), serving, ctx.profile);
    let shortfall = if eval.energy_full_j > battery {
        // over budget: shrink the lowest-priority cluster's data, or give
        // up on this serving set when there is nothing left to shrink
        match end_cluster
            .and_then(|end| unit_saving(&route, &staged, &eval.dp.visit, end, t_c2u0, t_u2b0))
        {
            Some(unit) => apply_energy_shortfall(
                eval.energy_full_j,
                battery,
                serving.clusters[end_cluster.expect("end exists with unit")].demand_bithz,
                unit,
            ),
            None => ShortfallOutcome::DropLowest,
        }
    } else {
        ShortfallOutcome::Unchanged
    };
    if shortfall == ShortfallOutcome::DropLowest {
        return Ok(None);
    }
    Ok(Some(SelectedRoute {
        route,
        eval,
        staged,
        shortfall,
    }))
}

/// Plan the trajectory for one scene.
///
/// Selection, per-route decision programs and route choice run first; the
/// battery shortfall then truncates or drops the lowest-priority cluster
/// until feasible; hover points are optimized for the winning route only;
/// and the max-data objective finally converts any battery slack into extra
/// data from the terminal cluster.
pub fn plan_trajectory(
    scene: &Scene,
    n1: usize,
    n2: usize,
    objective: Objective,
    ctx: &PlannerContext,
) -> Result<TrajectoryPlan> {
    let serving = select_serving_clusters(scene, n1, n2, ctx.demands);
    plan_with_serving(scene, serving, objective, ctx)
}

/// Plan over an externally chosen serving set (the single-purpose baseline
/// reuses the multi-purpose selection on a different trip geometry).
pub fn plan_with_serving(
    scene: &Scene,
    mut serving: ServingSet,
    objective: Objective,
    ctx: &PlannerContext,
) -> Result<TrajectoryPlan> {
    let mut dropped = 0usize;
    loop {
        let routes = enumerate_routes(&serving, scene.source, scene.destination)?;
        match select_route(routes, scene, &serving, objective, ctx)? {
            Some(selected) => {
                return finalize_plan(scene, &serving, selected, objective, ctx, dropped);
            }
            None => {
                if serving.drop_lowest_priority().is_none() {
                    // not even the bare trip fits
                    let bare = bare_trip_energy(scene, ctx.profile);
                    return Err(Error::InfeasibleTrip {
                        needed_j: bare,
                        battery_j: ctx.profile.battery_j,
                    });
                }
                dropped += 1;
            }
        }
    }
}

fn bare_trip_energy(scene: &Scene, profile: &PowerProfile) -> f64 {
    let l = scene.source.distance(scene.destination);
    l * profile.p_motion_loaded / profile.v_loaded + l * profile.p_motion_empty / profile.v_empty
}

fn finalize_plan(
    scene: &Scene,
    serving: &ServingSet,
    selected: SelectedRoute,
    objective: Objective,
    ctx: &PlannerContext,
    dropped: usize,
) -> Result<TrajectoryPlan> {
    let battery = ctx.profile.battery_j;
    let SelectedRoute {
        route,
        eval,
        staged,
        shortfall,
    } = selected;

    let mut allocations: Vec<f64> = serving.clusters.iter().map(|c| c.demand_bithz).collect();
    if let ShortfallOutcome::Truncate { d_prime } = shortfall {
        let end = allocations.len() - 1;
        allocations[end] = d_prime;
    }

    let mut assembled =
        assemble_hover_route(&route, &staged, &eval.dp.visit, &allocations, scene.source);

    // hover optimization for the winning route only
    let descent_objective = match objective {
        Objective::MinTime => HoverObjective::Time,
        Objective::MaxData => HoverObjective::Energy,
    };
    let mut descent = optimize_hover_points(&mut assembled.hover, descent_objective, ctx.table);
    if objective == Objective::MinTime && assembled.hover.energy(ctx.table)? > battery {
        // time-optimal hovers can overdraw the battery; energy descent from
        // the pinned geometry cannot
        assembled =
            assemble_hover_route(&route, &staged, &eval.dp.visit, &allocations, scene.source);
        descent = optimize_hover_points(&mut assembled.hover, HoverObjective::Energy, ctx.table);
    }

    // residual-battery data maximization for the max-data path
    let mut extra = 0.0;
    if objective == Objective::MaxData {
        if let Some((cluster_node, tbs_node)) = residual_pair(&route, &assembled, &eval.dp.visit) {
            extra = maximize_residual_data(
                &mut assembled.hover,
                cluster_node,
                tbs_node,
                battery,
                ctx.table,
            )?;
            if let Some(end) = allocations.len().checked_sub(1) {
                allocations[end] += extra;
            }
        }
    }

    let ledger = trip_ledger(&assembled, ctx.table)?;
    let served = serving
        .clusters
        .iter()
        .zip(&allocations)
        .map(|(c, &alloc)| ServedCluster {
            center: c.center,
            kind: c.kind,
            demand_bithz: c.demand_bithz,
            allocated_bithz: alloc,
        })
        .collect();
    let tbs_points = staged.stages.iter().map(|s| s.tbs).collect();
    Ok(TrajectoryPlan {
        objective,
        route,
        decisions: eval.dp.visit,
        tbs_points,
        hover_route: assembled.hover,
        served,
        ledger,
        extra_data_bithz: extra,
        dropped_clusters: dropped,
        descent,
    })
}

/// Locate the hover nodes of the lowest-priority cluster and of the TBS that
/// receives its data.
fn residual_pair(
    route: &RouteCandidate,
    assembled: &AssembledRoute,
    visit: &[bool],
) -> Option<(usize, usize)> {
    let end_cluster = assembled
        .meta
        .iter()
        .enumerate()
        .filter(|(_, m)| m.cluster_index.is_some())
        .max_by_key(|(_, m)| m.cluster_index)?;
    let end_index = end_cluster.1.cluster_index?;
    let stage_of_end = route
        .waypoints
        .iter()
        .position(|w| w.cluster_index == Some(end_index))?;
    let flush_stage = (stage_of_end..visit.len()).find(|&k| visit[k])?;
    let tbs_node = assembled
        .meta
        .iter()
        .position(|m| m.is_tbs && m.stage == Some(flush_stage))?;
    Some((end_cluster.0, tbs_node))
}
