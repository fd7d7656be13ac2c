//! Planar geometry primitives and random scene sampling.
//!
//! A scene is one realization of three independent Poisson point processes
//! (TBSs plus two priority classes of IoT cluster centers) on a rectangular
//! window around the source-destination corridor, with the source fixed at
//! the origin and the destination at `(L, 0)`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// A point in the horizontal plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Parameters of the random scene generator.
///
/// Densities are in points per square kilometer; distances in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SceneParams {
    pub lambda_tbs_per_km2: f64,
    pub lambda_type1_per_km2: f64,
    pub lambda_type2_per_km2: f64,
    /// Source-destination separation L.
    pub sd_distance_m: f64,
    /// Window extends this far beyond the corridor on every side.
    pub window_margin_m: f64,
    pub cluster_radius_m: f64,
    pub devices_per_cluster: usize,
}

impl Default for SceneParams {
    fn default() -> Self {
        Self {
            lambda_tbs_per_km2: 1.0,
            lambda_type1_per_km2: 1.0,
            lambda_type2_per_km2: 5.0,
            sd_distance_m: 5000.0,
            window_margin_m: 2000.0,
            cluster_radius_m: 50.0,
            devices_per_cluster: 20,
        }
    }
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_tbs_per_km2 > 0.0
            && self.lambda_type1_per_km2 > 0.0
            && self.lambda_type2_per_km2 > 0.0)
        {
            return Err(Error::InvalidParameter(
                "point process densities must be > 0".into(),
            ));
        }
        if !(self.sd_distance_m > 0.0) {
            return Err(Error::InvalidParameter("sd_distance_m must be > 0".into()));
        }
        if self.window_margin_m < 0.0 {
            return Err(Error::InvalidParameter(
                "window_margin_m must be >= 0".into(),
            ));
        }
        if !(self.cluster_radius_m > 0.0) {
            return Err(Error::InvalidParameter(
                "cluster_radius_m must be > 0".into(),
            ));
        }
        let (w, h) = self.window_extent();
        if !(w * h > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "window area must be > 0, got {w} x {h} m"
            )));
        }
        Ok(())
    }

    /// Window width and height in meters.
    pub fn window_extent(&self) -> (f64, f64) {
        (
            self.sd_distance_m + 2.0 * self.window_margin_m,
            2.0 * self.window_margin_m,
        )
    }

    /// Window area in square kilometers.
    pub fn window_area_km2(&self) -> f64 {
        let (w, h) = self.window_extent();
        w * h * 1e-6
    }
}

/// One realization of the TBS and cluster point processes.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub seed: u64,
    pub source: Point2D,
    pub destination: Point2D,
    pub tbs: Vec<Point2D>,
    pub clusters1: Vec<Point2D>,
    pub clusters2: Vec<Point2D>,
}

fn sample_ppp(rng: &mut impl Rng, lambda_per_km2: f64, params: &SceneParams) -> Vec<Point2D> {
    let area = params.window_area_km2();
    let expected = lambda_per_km2 * area;
    let count = if expected <= 0.0 {
        0
    } else {
        Poisson::new(expected).map(|p| p.sample(rng) as usize).unwrap_or(0)
    };
    let x_lo = -params.window_margin_m;
    let x_hi = params.sd_distance_m + params.window_margin_m;
    let y_hi = params.window_margin_m;
    (0..count)
        .map(|_| {
            Point2D::new(
                rng.random_range(x_lo..x_hi),
                rng.random_range(-y_hi..y_hi),
            )
        })
        .collect()
}

/// Sample one scene. Identical `(params, seed)` always yields an identical
/// scene, independent of how many draws any single process consumes.
pub fn sample_scene(params: &SceneParams, seed: u64) -> Result<Scene> {
    params.validate()?;
    let tbs = sample_ppp(
        &mut stream_rng(seed, Stream::Tbs),
        params.lambda_tbs_per_km2,
        params,
    );
    let clusters1 = sample_ppp(
        &mut stream_rng(seed, Stream::Clusters1),
        params.lambda_type1_per_km2,
        params,
    );
    let clusters2 = sample_ppp(
        &mut stream_rng(seed, Stream::Clusters2),
        params.lambda_type2_per_km2,
        params,
    );
    Ok(Scene {
        seed,
        source: Point2D::new(0.0, 0.0),
        destination: Point2D::new(params.sd_distance_m, 0.0),
        tbs,
        clusters1,
        clusters2,
    })
}

/// Euclidean distance from `p` to the closed segment `ab`.
///
/// Degenerate segments (`a == b`) reduce to point distance.
pub fn point_to_segment_distance(p: Point2D, a: Point2D, b: Point2D) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let len2 = abx * abx + aby * aby;
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = (((p.x - a.x) * abx + (p.y - a.y) * aby) / len2).clamp(0.0, 1.0);
    p.distance(Point2D::new(a.x + t * abx, a.y + t * aby))
}

/// `n` points uniform on the disk of radius `r_c` around `center`.
///
/// Radius is drawn as `r_c * sqrt(u)` so area elements are equally likely.
pub fn sample_devices(
    center: Point2D,
    r_c: f64,
    n: usize,
    rng: &mut impl Rng,
) -> Vec<Point2D> {
    (0..n)
        .map(|_| {
            let r = r_c * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            Point2D::new(center.x + r * theta.cos(), center.y + r * theta.sin())
        })
        .collect()
}

/// Devices of one cluster, drawn from its own named stream so per-cluster
/// draws never interfere.
pub fn devices_for_cluster(
    scene_seed: u64,
    cluster_type: u8,
    index: u32,
    center: Point2D,
    r_c: f64,
    n: usize,
) -> Vec<Point2D> {
    let mut rng = stream_rng(
        scene_seed,
        Stream::Devices {
            cluster_type,
            index,
        },
    );
    sample_devices(center, r_c, n, &mut rng)
}

fn write_points(out: &mut String, pts: &[Point2D]) {
    out.push('[');
    for (i, p) in pts.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&format!("[{:.6},{:.6}]", p.x, p.y));
    }
    out.push(']');
}

impl Scene {
    /// JSON document with coordinates in meters at six decimal places.
    pub fn to_json(&self) -> String {
        let mut s = String::with_capacity(64 * (self.tbs.len() + self.clusters1.len() + 2));
        s.push_str(&format!(
            "{{\"seed\":{},\"S\":[{:.6},{:.6}],\"D\":[{:.6},{:.6}],\"tbs\":",
            self.seed, self.source.x, self.source.y, self.destination.x, self.destination.y
        ));
        write_points(&mut s, &self.tbs);
        s.push_str(",\"clusters1\":");
        write_points(&mut s, &self.clusters1);
        s.push_str(",\"clusters2\":");
        write_points(&mut s, &self.clusters2);
        s.push('}');
        s
    }
}
