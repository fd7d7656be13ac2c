//! Monte Carlo experiment harness: independent seeded trials over random
//! scenes, paired objectives, the single-purpose baseline, delivery
//! efficiency, and machine-readable CSV/summary output.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, LinkKind, UnitTimeTable};
use crate::energy::PowerProfile;
use crate::error::{Error, Result};
use crate::geometry::{devices_for_cluster, sample_scene, Scene, SceneParams};
use crate::numeric::{mean, quantile, std_dev};
use crate::planner::{
    plan_trajectory, plan_with_serving, Objective, PlannerContext, TrajectoryPlan,
    ROUTE_ENUMERATION_CAP,
};
use crate::rng::trial_seed;
use crate::selection::{select_serving_clusters, ClusterKind};

/// How cluster collection times enter the reported ledgers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CollectionMode {
    /// Expectation over device positions and fading (the default).
    Analytic,
    /// Sum of per-device times over sampled device locations.
    PerDevice,
}

/// Full experiment description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub scene: SceneParams,
    pub channel: ChannelParams,
    pub power: PowerProfile,
    pub trials: u64,
    pub objectives: Vec<Objective>,
    pub n1: usize,
    pub n2: usize,
    pub m1_bithz: f64,
    pub m2_bithz: f64,
    pub seed: u64,
    pub collection_mode: CollectionMode,
    pub include_baseline: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scene: SceneParams::default(),
            channel: ChannelParams::default(),
            power: PowerProfile::default(),
            trials: 1000,
            objectives: vec![Objective::MinTime, Objective::MaxData],
            n1: 2,
            n2: 2,
            m1_bithz: 2200.0,
            m2_bithz: 600.0,
            seed: 1,
            collection_mode: CollectionMode::Analytic,
            include_baseline: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scene.validate()?;
        self.channel.validate()?;
        self.power.validate()?;
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be >= 1".into()));
        }
        if self.objectives.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one objective required".into(),
            ));
        }
        if self.n1 + self.n2 > ROUTE_ENUMERATION_CAP {
            return Err(Error::InvalidParameter(format!(
                "n1 + n2 = {} exceeds the exact enumeration cap of {ROUTE_ENUMERATION_CAP}",
                self.n1 + self.n2
            )));
        }
        if self.m1_bithz < 0.0 || self.m2_bithz < 0.0 {
            return Err(Error::InvalidParameter("demands must be >= 0".into()));
        }
        if (self.scene.cluster_radius_m - self.channel.r_c_m).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "cluster radius disagrees between scene ({} m) and channel ({} m)",
                self.scene.cluster_radius_m, self.channel.r_c_m
            )));
        }
        Ok(())
    }
}

/// One row of the experiment output.
///
/// The skipped fields carry plan-level invariant diagnostics for the
/// acceptance suite; they never appear in CSV or JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub objective: String,
    pub n1_served: usize,
    pub n2_served: usize,
    pub round_trip_s: f64,
    pub data_bithz: f64,
    pub energy_j: f64,
    pub efficiency: f64,
    pub tbs_visits: usize,
    pub delivered_first: bool,
    pub feasible: bool,
    /// Bitwise gap between the per-stage forwarded sum and the data total.
    #[serde(skip)]
    pub conservation_gap: f64,
    /// Gap between the per-cluster allocation sum and the data total.
    #[serde(skip)]
    pub allocation_gap: f64,
    /// Extra data bought from battery slack (max-data plans).
    #[serde(skip)]
    pub extra_data_bithz: f64,
}

impl TrialRecord {
    fn infeasible(trial: u64, objective: &str) -> Self {
        Self {
            trial,
            objective: objective.to_string(),
            n1_served: 0,
            n2_served: 0,
            round_trip_s: 0.0,
            data_bithz: 0.0,
            energy_j: 0.0,
            efficiency: 0.0,
            tbs_visits: 0,
            delivered_first: false,
            feasible: false,
            conservation_gap: 0.0,
            allocation_gap: 0.0,
            extra_data_bithz: 0.0,
        }
    }

    fn from_plan(trial: u64, plan: &TrajectoryPlan, time_s: f64, energy_j: f64) -> Self {
        let data = plan.ledger.m_total_bithz;
        let forwarded: f64 = plan.ledger.per_stage_forwarded.iter().sum();
        let allocated: f64 = plan.served.iter().map(|c| c.allocated_bithz).sum();
        Self {
            trial,
            objective: plan.objective.label().to_string(),
            n1_served: plan.served_count(ClusterKind::Type1),
            n2_served: plan.served_count(ClusterKind::Type2),
            round_trip_s: time_s,
            data_bithz: data,
            energy_j,
            efficiency: if time_s > 0.0 { data / time_s } else { 0.0 },
            tbs_visits: plan.tbs_visits(),
            delivered_first: plan.delivered_first(),
            feasible: true,
            conservation_gap: (forwarded - data).abs(),
            allocation_gap: (allocated - data).abs(),
            extra_data_bithz: plan.extra_data_bithz,
        }
    }
}

/// Collection ledger corrections for the per-device reporting mode: total
/// cluster collection time re-derived by summing each sampled device's own
/// transmission time, devices splitting the cluster demand equally.
fn per_device_adjustment(
    scene: &Scene,
    plan: &TrajectoryPlan,
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
) -> Result<(f64, f64)> {
    use crate::hover::RouteNode;
    let n = cfg.scene.devices_per_cluster.max(1);
    let mut t_col = 0.0;
    let mut e_col = 0.0;
    for node in &plan.hover_route.nodes {
        let RouteNode::Hover {
            target,
            kind: LinkKind::ClusterToUav,
            data_bithz,
            serve_power_w,
            hover,
            ..
        } = node
        else {
            continue;
        };
        if *data_bithz == 0.0 {
            continue;
        }
        // recover which cluster this node serves
        let (cluster_type, index) = match scene.clusters1.iter().position(|c| c == target) {
            Some(i) => (1u8, i as u32),
            None => match scene.clusters2.iter().position(|c| c == target) {
                Some(i) => (2u8, i as u32),
                None => continue,
            },
        };
        let devices = devices_for_cluster(
            scene.seed,
            cluster_type,
            index,
            *target,
            cfg.scene.cluster_radius_m,
            n,
        );
        let share = data_bithz / n as f64;
        for d in devices {
            let t = table.device_time(d.distance(*hover))?;
            t_col += share * t;
            e_col += share * t * serve_power_w;
        }
    }
    Ok((t_col, e_col))
}

fn record_plan(
    trial: u64,
    scene: &Scene,
    plan: &TrajectoryPlan,
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
) -> Result<TrialRecord> {
    let (time, energy) = match cfg.collection_mode {
        CollectionMode::Analytic => (plan.ledger.t_total_s, plan.ledger.e_total_j),
        CollectionMode::PerDevice => {
            let (t_col, e_col) = per_device_adjustment(scene, plan, cfg, table)?;
            (
                t_col + plan.ledger.t_del_s + plan.ledger.t_tra_s,
                e_col + plan.ledger.e_del_j + plan.ledger.e_tra_j,
            )
        }
    };
    Ok(TrialRecord::from_plan(trial, plan, time, energy))
}

fn run_one_trial(
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
    trial: u64,
) -> Result<Vec<TrialRecord>> {
    let seed = trial_seed(cfg.seed, trial);
    let scene = sample_scene(&cfg.scene, seed)?;
    let ctx = PlannerContext {
        profile: &cfg.power,
        table,
        demands: (cfg.m1_bithz, cfg.m2_bithz),
    };
    let mut records = Vec::with_capacity(cfg.objectives.len());
    for &objective in &cfg.objectives {
        match plan_trajectory(&scene, cfg.n1, cfg.n2, objective, &ctx) {
            Ok(plan) => records.push(record_plan(trial, &scene, &plan, cfg, table)?),
            Err(Error::InfeasibleTrip { .. }) | Err(Error::NoTbs) => {
                records.push(TrialRecord::infeasible(trial, objective.label()));
            }
            Err(e) => return Err(e),
        }
    }
    if cfg.include_baseline {
        records.extend(baseline_for_scene(cfg, table, trial, &scene)?);
    }
    Ok(records)
}

/// Sequential trial loop; always available regardless of features.
pub fn run_trials_sequential_with_table(
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(cfg.trials as usize * cfg.objectives.len());
    for trial in 0..cfg.trials {
        out.extend(run_one_trial(cfg, table, trial)?);
    }
    Ok(out)
}

#[cfg(feature = "parallel")]
fn parallel_pool() -> Result<Option<rayon::ThreadPool>> {
    match std::env::var("SKYPLANNER_THREADS") {
        Ok(v) => {
            let n: usize = v.parse().map_err(|_| {
                Error::InvalidParameter(format!("SKYPLANNER_THREADS must be an integer, got {v}"))
            })?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
            Ok(Some(pool))
        }
        Err(_) => Ok(None),
    }
}

/// Parallel trial loop; trials are independent and collected in trial order,
/// so the output is identical to the sequential path.
#[cfg(feature = "parallel")]
pub fn run_trials_parallel_with_table(
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
) -> Result<Vec<TrialRecord>> {
    use rayon::prelude::*;
    cfg.validate()?;
    let body = || -> Result<Vec<TrialRecord>> {
        let nested: Vec<Vec<TrialRecord>> = (0..cfg.trials)
            .into_par_iter()
            .map(|trial| run_one_trial(cfg, table, trial))
            .collect::<Result<_>>()?;
        Ok(nested.into_iter().flatten().collect())
    };
    match parallel_pool()? {
        Some(pool) => pool.install(body),
        None => body(),
    }
}

/// Run every trial of the experiment, parallel when the `parallel` feature
/// is enabled (`SKYPLANNER_THREADS` caps the worker count).
pub fn run_trials_with_table(
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
) -> Result<Vec<TrialRecord>> {
    #[cfg(feature = "parallel")]
    {
        run_trials_parallel_with_table(cfg, table)
    }
    #[cfg(not(feature = "parallel"))]
    {
        run_trials_sequential_with_table(cfg, table)
    }
}

/// Convenience entry point owning its memo table.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    let table = UnitTimeTable::new(cfg.channel.clone());
    run_trials_with_table(cfg, &table)
}

/// Single-purpose baseline for one scene: a package-only round trip followed
/// by a data-only tour, each on a fresh battery, sharing the multi-purpose
/// cluster selection.
fn baseline_for_scene(
    cfg: &ExperimentConfig,
    table: &UnitTimeTable,
    trial: u64,
    scene: &Scene,
) -> Result<Vec<TrialRecord>> {
    let profile = &cfg.power;
    let l = scene.source.distance(scene.destination);
    let pkg_time = l / profile.v_loaded + l / profile.v_empty;
    let pkg_energy =
        l * profile.p_motion_loaded / profile.v_loaded + l * profile.p_motion_empty / profile.v_empty;
    let pkg_feasible = pkg_energy <= profile.battery_j;

    // the data tour flies without the package: loaded constants collapse to
    // the empty ones, and the destination plays no role (OK to pin at S)
    let tour_profile = PowerProfile {
        p_motion_loaded: profile.p_motion_empty,
        p_serve_loaded: profile.p_serve_empty,
        v_loaded: profile.v_empty,
        ..profile.clone()
    };
    let tour_scene = Scene {
        destination: scene.source,
        ..scene.clone()
    };
    let serving = select_serving_clusters(scene, cfg.n1, cfg.n2, (cfg.m1_bithz, cfg.m2_bithz));
    let ctx = PlannerContext {
        profile: &tour_profile,
        table,
        demands: (cfg.m1_bithz, cfg.m2_bithz),
    };
    let mut out = Vec::new();
    for &objective in &cfg.objectives {
        let label = match objective {
            Objective::MinTime => "single-min-time",
            Objective::MaxData => "single-max-data",
        };
        match plan_with_serving(&tour_scene, serving.clone(), objective, &ctx) {
            Ok(plan) if pkg_feasible => {
                let tour = record_plan(trial, scene, &plan, cfg, table)?;
                let time = pkg_time + tour.round_trip_s;
                let data = tour.data_bithz;
                out.push(TrialRecord {
                    trial,
                    objective: label.to_string(),
                    round_trip_s: time,
                    energy_j: pkg_energy + tour.energy_j,
                    efficiency: if time > 0.0 { data / time } else { 0.0 },
                    delivered_first: true,
                    ..tour
                });
            }
            Ok(_) | Err(Error::InfeasibleTrip { .. }) | Err(Error::NoTbs) => {
                out.push(TrialRecord::infeasible(trial, label));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Data delivery efficiency: the mean over feasible trials of delivered data
/// divided by round-trip time.
pub fn delivery_efficiency(records: &[TrialRecord]) -> Result<f64> {
    let ratios: Vec<f64> = records
        .iter()
        .filter(|r| r.feasible && r.round_trip_s > 0.0)
        .map(|r| r.data_bithz / r.round_trip_s)
        .collect();
    if ratios.is_empty() {
        return Err(Error::NoFeasibleRecords);
    }
    Ok(mean(&ratios))
}

/// The model-side ceiling on efficiency: one bit must be both collected and
/// delivered, each at best at zero horizontal distance.
pub fn efficiency_upper_bound(table: &UnitTimeTable) -> Result<f64> {
    let t = table.unit_time(LinkKind::ClusterToUav, 0.0)?
        + table.unit_time(LinkKind::UavToTbs, 0.0)?;
    Ok(1.0 / t)
}

/// Descriptive statistics of one output column.
#[derive(Debug, Clone, Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub p25: f64,
    pub p50: f64,
    pub p75: f64,
    pub max: f64,
}

fn column_stats(xs: &[f64]) -> ColumnStats {
    ColumnStats {
        mean: mean(xs),
        std: std_dev(xs),
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        p25: quantile(xs, 0.25),
        p50: quantile(xs, 0.50),
        p75: quantile(xs, 0.75),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Per-objective aggregate of an experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ObjectiveSummary {
    pub total_trials: usize,
    pub feasible_trials: usize,
    /// Data delivery efficiency over feasible trials.
    pub xi: f64,
    pub columns: BTreeMap<String, ColumnStats>,
}

/// Aggregates of every objective present in the records.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub objectives: BTreeMap<String, ObjectiveSummary>,
}

pub fn summarize(records: &[TrialRecord]) -> Summary {
    let mut labels: Vec<String> = records.iter().map(|r| r.objective.clone()).collect();
    labels.sort();
    labels.dedup();
    let mut objectives = BTreeMap::new();
    for label in labels {
        let group: Vec<&TrialRecord> = records
            .iter()
            .filter(|r| r.objective == label)
            .collect();
        let feasible: Vec<&&TrialRecord> = group.iter().filter(|r| r.feasible).collect();
        let col = |f: &dyn Fn(&TrialRecord) -> f64| -> Vec<f64> {
            feasible.iter().map(|r| f(r)).collect()
        };
        let mut columns = BTreeMap::new();
        columns.insert(
            "round_trip_s".into(),
            column_stats(&col(&|r| r.round_trip_s)),
        );
        columns.insert("data_bithz".into(), column_stats(&col(&|r| r.data_bithz)));
        columns.insert("energy_j".into(), column_stats(&col(&|r| r.energy_j)));
        columns.insert("efficiency".into(), column_stats(&col(&|r| r.efficiency)));
        columns.insert(
            "tbs_visits".into(),
            column_stats(&col(&|r| r.tbs_visits as f64)),
        );
        columns.insert(
            "n1_served".into(),
            column_stats(&col(&|r| r.n1_served as f64)),
        );
        columns.insert(
            "n2_served".into(),
            column_stats(&col(&|r| r.n2_served as f64)),
        );
        let xi = mean(
            &feasible
                .iter()
                .filter(|r| r.round_trip_s > 0.0)
                .map(|r| r.data_bithz / r.round_trip_s)
                .collect::<Vec<f64>>(),
        );
        objectives.insert(
            label,
            ObjectiveSummary {
                total_trials: group.len(),
                feasible_trials: feasible.len(),
                xi,
                columns,
            },
        );
    }
    Summary { objectives }
}

/// Exact CSV column order of the experiment output.
pub const CSV_HEADER: &str =
    "trial,objective,n1_served,n2_served,round_trip_s,data_bithz,energy_j,efficiency,tbs_visits,delivered_first,feasible";

/// Render records as CSV. `metadata` lines (e.g. a timestamp) are prefixed
/// with `#` so determinism comparisons can skip them.
pub fn records_to_csv(records: &[TrialRecord], metadata: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(m) = metadata {
        out.push_str("# ");
        out.push_str(m);
        out.push('\n');
    }
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{},{},{}\n",
            r.trial,
            r.objective,
            r.n1_served,
            r.n2_served,
            r.round_trip_s,
            r.data_bithz,
            r.energy_j,
            r.efficiency,
            r.tbs_visits,
            r.delivered_first,
            r.feasible
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            trials: 4,
            scene: SceneParams {
                sd_distance_m: 3000.0,
                ..SceneParams::default()
            },
            n1: 1,
            n2: 1,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn fixed_seed_reruns_identically() {
        let cfg = ExperimentConfig {
            trials: 1,
            ..small_config()
        };
        let a = run_trials(&cfg).unwrap();
        let b = run_trials(&cfg).unwrap();
        assert_eq!(records_to_csv(&a, None), records_to_csv(&b, None));
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_equals_sequential() {
        let cfg = small_config();
        let table = UnitTimeTable::new(cfg.channel.clone());
        let seq = run_trials_sequential_with_table(&cfg, &table).unwrap();
        let par = run_trials_parallel_with_table(&cfg, &table).unwrap();
        assert_eq!(records_to_csv(&seq, None), records_to_csv(&par, None));
    }

    #[test]
    fn paired_objectives_share_scene_and_dominate() {
        let cfg = small_config();
        let records = run_trials(&cfg).unwrap();
        for trial in 0..cfg.trials {
            let fast = records
                .iter()
                .find(|r| r.trial == trial && r.objective == "min-time")
                .unwrap();
            let full = records
                .iter()
                .find(|r| r.trial == trial && r.objective == "max-data")
                .unwrap();
            if fast.feasible && full.feasible {
                assert!(fast.round_trip_s <= full.round_trip_s * (1.0 + 1e-9));
                assert!(full.data_bithz >= fast.data_bithz * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn efficiency_of_identical_records_is_their_ratio() {
        let r = TrialRecord {
            trial: 0,
            objective: "max-data".into(),
            n1_served: 1,
            n2_served: 0,
            round_trip_s: 100.0,
            data_bithz: 250.0,
            energy_j: 1.0,
            efficiency: 2.5,
            tbs_visits: 1,
            delivered_first: true,
            feasible: true,
            conservation_gap: 0.0,
            allocation_gap: 0.0,
            extra_data_bithz: 0.0,
        };
        let xi = delivery_efficiency(&[r.clone(), r]).unwrap();
        assert!((xi - 2.5).abs() < 1e-12);
    }

    #[test]
    fn efficiency_requires_a_feasible_record() {
        let r = TrialRecord::infeasible(0, "min-time");
        assert!(matches!(
            delivery_efficiency(&[r]),
            Err(Error::NoFeasibleRecords)
        ));
    }

    #[test]
    fn efficiency_below_upper_bound() {
        let cfg = small_config();
        let table = UnitTimeTable::new(cfg.channel.clone());
        let records = run_trials_with_table(&cfg, &table).unwrap();
        let bound = efficiency_upper_bound(&table).unwrap();
        for label in ["min-time", "max-data"] {
            let group: Vec<TrialRecord> = records
                .iter()
                .filter(|r| r.objective == label)
                .cloned()
                .collect();
            if group.iter().any(|r| r.feasible) {
                let xi = delivery_efficiency(&group).unwrap();
                assert!(xi <= bound, "{label}: xi {xi} above bound {bound}");
            }
        }
    }

    #[test]
    fn csv_layout_is_stable() {
        let r = TrialRecord::infeasible(3, "min-time");
        let csv = records_to_csv(&[r], Some("generated_at=now"));
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# generated_at=now");
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        assert_eq!(
            lines.next().unwrap(),
            "3,min-time,0,0,0.000000,0.000000,0.000000,0.000000,0,false,false"
        );
    }

    #[test]
    fn baseline_costs_exceed_multi_purpose() {
        let cfg = ExperimentConfig {
            include_baseline: true,
            trials: 3,
            ..small_config()
        };
        let records = run_trials(&cfg).unwrap();
        for trial in 0..cfg.trials {
            let multi = records
                .iter()
                .find(|r| r.trial == trial && r.objective == "max-data")
                .unwrap();
            let single = records
                .iter()
                .find(|r| r.trial == trial && r.objective == "single-max-data")
                .unwrap();
            if multi.feasible && single.feasible {
                assert!(
                    single.energy_j > multi.energy_j,
                    "trial {trial}: single {} <= multi {}",
                    single.energy_j,
                    multi.energy_j
                );
                assert!(single.round_trip_s > multi.round_trip_s * 0.99);
            }
        }
    }

    #[test]
    fn per_device_mode_tracks_analytic_mode() {
        let analytic = run_trials(&small_config()).unwrap();
        let per_device = run_trials(&ExperimentConfig {
            collection_mode: CollectionMode::PerDevice,
            ..small_config()
        })
        .unwrap();
        let mut compared = 0;
        for (a, d) in analytic.iter().zip(&per_device) {
            assert_eq!(a.trial, d.trial);
            assert_eq!(a.objective, d.objective);
            if a.feasible && d.feasible && a.data_bithz > 0.0 {
                let rel = (a.round_trip_s - d.round_trip_s).abs() / a.round_trip_s;
                assert!(rel < 0.25, "trial {}: rel dev {rel}", a.trial);
                compared += 1;
            }
        }
        assert!(compared > 0);
    }

    #[test]
    fn summary_groups_by_objective() {
        let cfg = small_config();
        let records = run_trials(&cfg).unwrap();
        let summary = summarize(&records);
        assert!(summary.objectives.contains_key("min-time"));
        assert!(summary.objectives.contains_key("max-data"));
        let s = &summary.objectives["max-data"];
        assert_eq!(s.total_trials, cfg.trials as usize);
        assert!(s.columns.contains_key("round_trip_s"));
    }

    #[test]
    fn mismatched_cluster_radius_rejected() {
        let mut cfg = small_config();
        cfg.channel.r_c_m = 60.0;
        assert!(cfg.validate().is_err());
    }
}
