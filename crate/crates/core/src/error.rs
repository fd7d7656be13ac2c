//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter violates a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A numeric integration did not converge; the message carries the
    /// integrand description and interval for diagnosis.
    #[error("numeric integration failed: {0}")]
    Integration(String),

    /// A route asked for TBS association but the scene has no TBS.
    #[error("no TBS available to relay collected data")]
    NoTbs,

    /// The requested cluster count exceeds the exact-enumeration cap.
    #[error("route enumeration refused: {count} clusters exceeds cap of {cap}")]
    RouteCapExceeded { count: usize, cap: usize },

    /// Even the bare source-destination round trip exceeds the battery.
    #[error("trip infeasible: bare round trip needs {needed_j:.1} J but battery holds {battery_j:.1} J")]
    InfeasibleTrip { needed_j: f64, battery_j: f64 },

    /// An aggregate was requested over zero feasible trial records.
    #[error("no feasible trial records to aggregate")]
    NoFeasibleRecords,

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}
