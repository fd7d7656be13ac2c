//! Command-line front end: load a JSON config, plan a single trajectory or
//! run Monte Carlo experiments and sweeps, and write CSV/JSON results plus
//! plot-ready data files.
//!
//! Exit codes: 0 success, 1 invalid arguments or config, 2 infeasible
//! experiment (nothing feasible to report).

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use skyplanner_core::channel::UnitTimeTable;
use skyplanner_core::config::load_config;
use skyplanner_core::energy::JOULES_PER_WH;
use skyplanner_core::geometry::sample_scene;
use skyplanner_core::harness::{
    delivery_efficiency, records_to_csv, run_trials_with_table, summarize, ExperimentConfig,
    TrialRecord,
};
use skyplanner_core::hover::RouteNode;
use skyplanner_core::planner::{plan_trajectory, Objective, PlannerContext, TrajectoryPlan};
use skyplanner_core::Error;

#[derive(Parser)]
#[command(
    name = "skyplanner",
    version,
    about = "Trajectory planning and Monte Carlo simulation for a data-relaying delivery UAV"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan one trajectory on a single sampled scene
    Plan(CommonArgs),
    /// Run a Monte Carlo experiment and write records, summary and histograms
    Simulate(SimulateArgs),
    /// Run one experiment per value of a swept axis
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliObjective {
    MinTime,
    MaxData,
}

impl From<CliObjective> for Objective {
    fn from(o: CliObjective) -> Self {
        match o {
            CliObjective::MinTime => Objective::MinTime,
            CliObjective::MaxData => Objective::MaxData,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; built-in defaults when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed override
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count override
    #[arg(long)]
    trials: Option<u64>,
    /// Restrict the run to one objective
    #[arg(long, value_enum)]
    objective: Option<CliObjective>,
    /// Source-destination distance override, meters
    #[arg(long)]
    sd_distance: Option<f64>,
    /// Requested type-I cluster count override
    #[arg(long)]
    n1: Option<usize>,
    /// Requested type-II cluster count override
    #[arg(long)]
    n2: Option<usize>,
    /// Battery capacity override, watt-hours
    #[arg(long)]
    battery_wh: Option<f64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Records file format
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
    /// Write the full per-plan trace
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Also run the single-purpose two-trip baseline
    #[arg(long)]
    baseline: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepAxis {
    SdDistance,
    BatteryWh,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Swept parameter
    #[arg(long, value_enum)]
    axis: SweepAxis,
    /// Comma-separated values of the axis
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                std::process::exit(0);
            }
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InfeasibleTrip { .. } | Error::NoFeasibleRecords => 2,
                _ => 1,
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Plan(args) => cmd_plan(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Sweep(args) => cmd_sweep(args),
    }
}

fn effective_config(args: &CommonArgs) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &args.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = args.trials {
        cfg.trials = trials;
    }
    if let Some(objective) = args.objective {
        cfg.objectives = vec![objective.into()];
    }
    if let Some(l) = args.sd_distance {
        cfg.scene.sd_distance_m = l;
    }
    if let Some(n1) = args.n1 {
        cfg.n1 = n1;
    }
    if let Some(n2) = args.n2 {
        cfg.n2 = n2;
    }
    if let Some(wh) = args.battery_wh {
        cfg.power.battery_j = wh * JOULES_PER_WH;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn timestamp_meta() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("generated_at={secs}")
}

/// Write a file atomically: temp file in the same directory, then rename.
fn write_atomic(path: &Path, content: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn cmd_plan(args: CommonArgs) -> Result<i32, Error> {
    let cfg = effective_config(&args)?;
    let scene = sample_scene(&cfg.scene, cfg.seed)?;
    let table = UnitTimeTable::new(cfg.channel.clone());
    let ctx = PlannerContext {
        profile: &cfg.power,
        table: &table,
        demands: (cfg.m1_bithz, cfg.m2_bithz),
    };
    let objective = cfg.objectives[0];
    let plan = plan_trajectory(&scene, cfg.n1, cfg.n2, objective, &ctx)?;
    let doc = plan_to_json(&plan, args.trace, &scene.to_json());
    write_atomic(
        &args.out_dir.join("plan.json"),
        &serde_json::to_string_pretty(&doc)?,
    )?;
    println!(
        "plan: objective={} time={:.1}s data={:.1}bit/Hz energy={:.0}J route_len={}",
        plan.objective.label(),
        plan.ledger.t_total_s,
        plan.ledger.m_total_bithz,
        plan.ledger.e_total_j,
        plan.route.waypoints.len()
    );
    Ok(0)
}

fn plan_to_json(plan: &TrajectoryPlan, trace: bool, scene_json: &str) -> serde_json::Value {
    let ledger = serde_json::to_value(&plan.ledger).expect("ledger serializes");
    let served = serde_json::to_value(&plan.served).expect("served serializes");
    let mut doc = serde_json::json!({
        "objective": plan.objective.label(),
        "ledger": ledger,
        "served": served,
        "extra_data_bithz": plan.extra_data_bithz,
        "dropped_clusters": plan.dropped_clusters,
        "delivered_first": plan.delivered_first(),
        "tbs_visits": plan.tbs_visits(),
    });
    if trace {
        let waypoints: Vec<serde_json::Value> = plan
            .route
            .waypoints
            .iter()
            .map(|w| {
                serde_json::json!({
                    "role": format!("{:?}", w.role),
                    "position": [w.position.x, w.position.y],
                    "cluster_index": w.cluster_index,
                })
            })
            .collect();
        let hover_points: Vec<serde_json::Value> = plan
            .hover_route
            .nodes
            .iter()
            .map(|n| match n {
                RouteNode::Fixed { position } => serde_json::json!({
                    "kind": "fixed",
                    "position": [position.x, position.y],
                }),
                RouteNode::Hover {
                    target,
                    kind,
                    data_bithz,
                    hover,
                    dist_m,
                    ..
                } => serde_json::json!({
                    "kind": format!("{kind:?}"),
                    "target": [target.x, target.y],
                    "hover": [hover.x, hover.y],
                    "dist_m": dist_m,
                    "data_bithz": data_bithz,
                }),
            })
            .collect();
        let tbs_points: Vec<serde_json::Value> = plan
            .tbs_points
            .iter()
            .map(|t| match t {
                Some(p) => serde_json::json!([p.x, p.y]),
                None => serde_json::Value::Null,
            })
            .collect();
        doc["trace"] = serde_json::json!({
            "scene": serde_json::from_str::<serde_json::Value>(scene_json).expect("scene json"),
            "waypoints": waypoints,
            "s_vector": plan.decisions.iter().map(|&v| if v { 0 } else { 1 }).collect::<Vec<u8>>(),
            "tbs_points": tbs_points,
            "hover_points": hover_points,
            "per_stage_forwarded": plan.ledger.per_stage_forwarded,
            "descent_sweeps": plan.descent.sweeps,
            "descent_objective_trace": plan.descent.objective_trace,
        });
    }
    doc
}

fn write_records(
    records: &[TrialRecord],
    args: &CommonArgs,
    name_stem: &str,
) -> Result<(), Error> {
    match args.format {
        OutputFormat::Csv => {
            let csv = records_to_csv(records, Some(&timestamp_meta()));
            write_atomic(&args.out_dir.join(format!("{name_stem}.csv")), &csv)?;
        }
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(records)?;
            write_atomic(&args.out_dir.join(format!("{name_stem}.json")), &json)?;
        }
    }
    Ok(())
}

/// Fixed 50-bin histogram over all feasible records, one labeled series per
/// objective, shared bin edges.
fn histogram_csv(records: &[TrialRecord], value: impl Fn(&TrialRecord) -> f64) -> Option<String> {
    const BINS: usize = 50;
    let feasible: Vec<&TrialRecord> = records.iter().filter(|r| r.feasible).collect();
    if feasible.is_empty() {
        return None;
    }
    let values: Vec<f64> = feasible.iter().map(|r| value(r)).collect();
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / BINS as f64 } else { 1.0 };
    let mut labels: Vec<String> = feasible.iter().map(|r| r.objective.clone()).collect();
    labels.sort();
    labels.dedup();
    let mut out = String::from("series,bin_index,bin_lo,bin_hi,count\n");
    for label in labels {
        let mut counts = vec![0usize; BINS];
        for (r, v) in feasible.iter().zip(&values) {
            if r.objective == label {
                let idx = (((v - lo) / width) as usize).min(BINS - 1);
                counts[idx] += 1;
            }
        }
        for (i, c) in counts.iter().enumerate() {
            out.push_str(&format!(
                "{label},{i},{:.6},{:.6},{c}\n",
                lo + width * i as f64,
                lo + width * (i + 1) as f64
            ));
        }
    }
    Some(out)
}

/// Histogram and efficiency files for a finished run.
fn emit_plot_data(records: &[TrialRecord], args: &CommonArgs) -> Result<i32, Error> {
    let Some(hist_time) = histogram_csv(records, |r| r.round_trip_s) else {
        eprintln!("no feasible records; nothing to plot");
        return Ok(2);
    };
    let hist_data =
        histogram_csv(records, |r| r.data_bithz).expect("same feasibility as round_trip");
    write_atomic(&args.out_dir.join("hist_round_trip.csv"), &hist_time)?;
    write_atomic(&args.out_dir.join("hist_data.csv"), &hist_data)?;

    let mut labels: Vec<String> = records.iter().map(|r| r.objective.clone()).collect();
    labels.sort();
    labels.dedup();
    let mut eff = String::from("objective,feasible,total,xi\n");
    for label in labels {
        let group: Vec<TrialRecord> = records
            .iter()
            .filter(|r| r.objective == label)
            .cloned()
            .collect();
        let feasible = group.iter().filter(|r| r.feasible).count();
        let xi = delivery_efficiency(&group).unwrap_or(0.0);
        eff.push_str(&format!("{label},{feasible},{},{xi:.6}\n", group.len()));
    }
    write_atomic(&args.out_dir.join("efficiency.csv"), &eff)?;
    Ok(0)
}

fn cmd_simulate(args: SimulateArgs) -> Result<i32, Error> {
    let mut cfg = effective_config(&args.common)?;
    if args.baseline {
        cfg.include_baseline = true;
    }
    let table = UnitTimeTable::new(cfg.channel.clone());
    let records = run_trials_with_table(&cfg, &table)?;
    write_records(&records, &args.common, "records")?;
    let summary = summarize(&records);
    write_atomic(
        &args.common.out_dir.join("summary.json"),
        &serde_json::to_string_pretty(&summary)?,
    )?;
    let feasible = records.iter().filter(|r| r.feasible).count();
    println!(
        "simulate: {} trials, {} records, {} feasible",
        cfg.trials,
        records.len(),
        feasible
    );
    for (label, s) in &summary.objectives {
        println!(
            "  {label}: xi={:.4} mean_time={:.1}s mean_data={:.1}bit/Hz",
            s.xi,
            s.columns["round_trip_s"].mean,
            s.columns["data_bithz"].mean
        );
    }
    if feasible == 0 {
        return Err(Error::NoFeasibleRecords);
    }
    emit_plot_data(&records, &args.common)
}

fn cmd_sweep(args: SweepArgs) -> Result<i32, Error> {
    let base = effective_config(&args.common)?;
    if args.values.is_empty() {
        return Err(Error::InvalidParameter(
            "sweep needs at least one value".into(),
        ));
    }
    // neither axis touches channel parameters, so one memo table serves all
    let table = UnitTimeTable::new(base.channel.clone());
    let mut trend = String::from(
        "axis,value,objective,total,feasible,xi,mean_round_trip_s,mean_data_bithz,mean_energy_j\n",
    );
    let axis_name = match args.axis {
        SweepAxis::SdDistance => "sd_distance",
        SweepAxis::BatteryWh => "battery_wh",
    };
    let mut any_feasible = false;
    for &value in &args.values {
        let mut cfg = base.clone();
        match args.axis {
            SweepAxis::SdDistance => cfg.scene.sd_distance_m = value,
            SweepAxis::BatteryWh => cfg.power.battery_j = value * JOULES_PER_WH,
        }
        cfg.validate()?;
        let records = run_trials_with_table(&cfg, &table)?;
        let summary = summarize(&records);
        write_atomic(
            &args
                .common
                .out_dir
                .join(format!("summary_{axis_name}_{value}.json")),
            &serde_json::to_string_pretty(&summary)?,
        )?;
        for (label, s) in &summary.objectives {
            if s.feasible_trials > 0 {
                any_feasible = true;
            }
            trend.push_str(&format!(
                "{axis_name},{value},{label},{},{},{:.6},{:.6},{:.6},{:.6}\n",
                s.total_trials,
                s.feasible_trials,
                s.xi,
                s.columns["round_trip_s"].mean,
                s.columns["data_bithz"].mean,
                s.columns["energy_j"].mean
            ));
        }
        println!("sweep {axis_name}={value}: done");
    }
    write_atomic(&args.common.out_dir.join("trend.csv"), &trend)?;
    if !any_feasible {
        return Err(Error::NoFeasibleRecords);
    }
    Ok(0)
}
