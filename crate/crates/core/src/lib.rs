//! Simulator and trajectory-optimization library for a multi-purpose
//! delivery UAV that collects data from prioritized IoT clusters and
//! forwards it to terrestrial base stations while delivering a package.
//!
//! The pipeline: sample a random scene (Poisson point processes for TBSs and
//! two priority classes of cluster centers), pick the serving clusters by
//! priority and distance, enumerate visit orders exactly, decide per-stage
//! TBS detours by backward induction, optimize hover points by coordinate
//! descent, and close the battery budget by truncating or topping up the
//! lowest-priority cluster's data. A Monte Carlo harness aggregates
//! delivery-efficiency statistics over many independent seeded scenes.

pub mod channel;
pub mod config;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod hover;
pub mod numeric;
pub mod planner;
pub mod rng;
pub mod selection;

pub use channel::{ChannelParams, LinkKind, LinkSpec, UnitTimeTable};
pub use energy::{PowerProfile, RotorParams};
pub use error::{Error, Result};
pub use geometry::{Point2D, Scene, SceneParams};
pub use harness::{ExperimentConfig, TrialRecord};
pub use planner::{Objective, PlannerContext, TrajectoryPlan};
pub use selection::ServingSet;
