//! Air-to-ground channel model.
//!
//! Links are Nakagami-m faded with a probabilistic LoS/NLoS split driven by
//! the elevation angle. The module exposes the LoS probability, the
//! conditional device-distance density inside a cluster, the SNR coverage
//! probability (CCDF) and density, and the expected transmission time of a
//! unit of data (sec*Hz/bit) as a function of horizontal distance.

use std::collections::HashMap;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, bisect_decreasing};

/// All radio constants of the model.
///
/// Additional losses `eta_*` are linear ratios (converted from dB at config
/// load); `m_*` are integer Nakagami shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    /// Environment variable `a` of the LoS probability curve.
    pub a: f64,
    /// Environment variable `b` of the LoS probability curve.
    pub b: f64,
    pub eta_los: f64,
    pub eta_nlos: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    pub m_los: u32,
    pub m_nlos: u32,
    /// IoT device transmit power, watts.
    pub rho_iot_w: f64,
    /// UAV transmit power, watts.
    pub rho_uav_w: f64,
    /// Noise power, watts.
    pub sigma2_w: f64,
    /// UAV altitude, meters.
    pub h_u_m: f64,
    /// IoT cluster radius, meters.
    pub r_c_m: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            a: 4.9,
            b: 0.43,
            eta_los: 1.0,          // 0 dB
            eta_nlos: 0.01,        // -20 dB
            alpha_los: 2.1,
            alpha_nlos: 4.0,
            m_los: 3,
            m_nlos: 1,
            rho_iot_w: 1e-4,
            rho_uav_w: 0.1,
            sigma2_w: 1e-9,
            h_u_m: 100.0,
            r_c_m: 50.0,
        }
    }
}

impl ChannelParams {
    pub fn validate(&self) -> Result<()> {
        if self.m_los < 1 || self.m_nlos < 1 {
            return Err(Error::InvalidParameter(
                "Nakagami shapes must be integers >= 1".into(),
            ));
        }
        if self.alpha_los < 2.0 || self.alpha_nlos < 2.0 {
            return Err(Error::InvalidParameter(
                "path-loss exponents must be >= 2".into(),
            ));
        }
        let powers = [self.rho_iot_w, self.rho_uav_w, self.sigma2_w];
        if powers.iter().any(|p| !(*p > 0.0)) {
            return Err(Error::InvalidParameter(
                "transmit and noise powers must be > 0".into(),
            ));
        }
        if !(self.h_u_m > 0.0) {
            return Err(Error::InvalidParameter("UAV altitude must be > 0".into()));
        }
        if !(self.eta_los > 0.0 && self.eta_nlos > 0.0) {
            return Err(Error::InvalidParameter(
                "additional losses must be > 0 (linear)".into(),
            ));
        }
        if !(self.r_c_m > 0.0) {
            return Err(Error::InvalidParameter("cluster radius must be > 0".into()));
        }
        Ok(())
    }
}

/// Convert a dB figure to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Which endpoint pair a link connects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LinkKind {
    /// IoT devices of a cluster transmitting up to the hovering UAV.
    ClusterToUav,
    /// The UAV forwarding down to a terrestrial base station.
    UavToTbs,
}

/// A link at a given horizontal distance in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub kind: LinkKind,
    pub distance_m: f64,
}

impl LinkSpec {
    pub fn new(kind: LinkKind, distance_m: f64) -> Self {
        Self { kind, distance_m }
    }

    fn tx_power(&self, p: &ChannelParams) -> f64 {
        match self.kind {
            LinkKind::ClusterToUav => p.rho_iot_w,
            LinkKind::UavToTbs => p.rho_uav_w,
        }
    }
}

/// LoS probability at horizontal distance `r` from the point under the UAV.
///
/// `r = 0` corresponds to a 90-degree elevation angle and a probability
/// indistinguishable from 1.
pub fn los_probability(r: f64, p: &ChannelParams) -> f64 {
    let elevation_deg = if r <= 0.0 {
        90.0
    } else {
        (p.h_u_m / r).atan().to_degrees()
    };
    1.0 / (1.0 + p.a * (-p.b * (elevation_deg - p.a)).exp())
}

/// Density of the horizontal device-to-UAV distance `r`, conditioned on the
/// cluster center sitting `r_c2u` away from the UAV's ground point.
///
/// Devices are uniform on the disk of radius `r_c`; the support is
/// `(|r_c2u - r_c|, r_c2u + r_c)` plus a uniform-disk part when the UAV is
/// inside the cluster footprint.
pub fn device_distance_pdf(r: f64, r_c2u: f64, r_c: f64) -> f64 {
    if r <= 0.0 || r_c <= 0.0 {
        return 0.0;
    }
    if r_c2u < 1e-12 {
        // directly above the center: plain radial law of the uniform disk
        return if r < r_c { 2.0 * r / (r_c * r_c) } else { 0.0 };
    }
    if r >= r_c2u + r_c {
        return 0.0;
    }
    if r_c2u <= r_c && r <= r_c - r_c2u {
        return 2.0 * r / (r_c * r_c);
    }
    if r <= r_c2u - r_c {
        return 0.0;
    }
    let arg = ((r_c2u * r_c2u + r * r - r_c * r_c) / (2.0 * r_c2u * r)).clamp(-1.0, 1.0);
    2.0 * r / (std::f64::consts::PI * r_c * r_c) * arg.acos()
}

/// Support of [`device_distance_pdf`].
fn device_distance_support(r_c2u: f64, r_c: f64) -> (f64, f64) {
    ((r_c2u - r_c).max(0.0), r_c2u + r_c)
}

/// Regularized upper incomplete gamma at integer shape:
/// `Q(m, x) = exp(-x) * sum_{k<m} x^k / k!`.
fn q_gamma(m: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let e = (-x).exp();
    if e == 0.0 {
        return 0.0;
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..m {
        term *= x / k as f64;
        sum += term;
    }
    e * sum
}

/// Gamma(m, 1/c) density at `x` (the SNR of one fading branch whose mean is
/// `m / c`).
fn gamma_pdf(m: u32, c: f64, x: f64) -> f64 {
    if x <= 0.0 || c <= 0.0 {
        return 0.0;
    }
    let mut fact = 1.0f64;
    for k in 2..m {
        fact *= k as f64;
    }
    let log_val = (m as f64) * c.ln() + (m as f64 - 1.0) * x.ln() - c * x - fact.ln();
    log_val.exp()
}

/// LoS/NLoS mixture weights and Gamma rate constants for a transmitter at
/// horizontal distance `r`.
struct Branches {
    p_los: f64,
    c_los: f64,
    c_nlos: f64,
}

fn branches(r: f64, tx_power: f64, p: &ChannelParams) -> Branches {
    let d3 = r.hypot(p.h_u_m);
    let mean_los = tx_power * p.eta_los * d3.powf(-p.alpha_los) / p.sigma2_w;
    let mean_nlos = tx_power * p.eta_nlos * d3.powf(-p.alpha_nlos) / p.sigma2_w;
    Branches {
        p_los: los_probability(r, p),
        c_los: p.m_los as f64 / mean_los,
        c_nlos: p.m_nlos as f64 / mean_nlos,
    }
}

/// CCDF of the SNR for a transmitter at a fixed horizontal distance.
fn point_ccdf(gamma: f64, r: f64, tx_power: f64, p: &ChannelParams) -> f64 {
    let b = branches(r, tx_power, p);
    b.p_los * q_gamma(p.m_los, b.c_los * gamma)
        + (1.0 - b.p_los) * q_gamma(p.m_nlos, b.c_nlos * gamma)
}

/// SNR density for a transmitter at a fixed horizontal distance; the exact
/// derivative of [`point_ccdf`].
fn point_pdf(gamma: f64, r: f64, tx_power: f64, p: &ChannelParams) -> f64 {
    let b = branches(r, tx_power, p);
    b.p_los * gamma_pdf(p.m_los, b.c_los, gamma)
        + (1.0 - b.p_los) * gamma_pdf(p.m_nlos, b.c_nlos, gamma)
}

const DIST_ABS_TOL: f64 = 1e-10;
const DIST_REL_TOL: f64 = 1e-8;

fn mixture_over_devices<F: Fn(f64) -> f64>(
    f: &F,
    r_c2u: f64,
    r_c: f64,
    label: &str,
) -> Result<f64> {
    let (lo, hi) = device_distance_support(r_c2u, r_c);
    adaptive_simpson(
        &|r| f(r) * device_distance_pdf(r, r_c2u, r_c),
        lo,
        hi,
        DIST_ABS_TOL,
        DIST_REL_TOL,
        label,
    )
}

/// Fast mixture integral over the device distance for the unit-time inner
/// loop. The uniform-disk piece is polynomial; the arccos piece has
/// square-root edges, absorbed by the substitution `r = lo + w sin^2(u)` so
/// a fixed Gauss-Legendre rule converges spectrally.
fn mixture_over_devices_fast<F: Fn(f64) -> f64>(f: &F, r_c2u: f64, r_c: f64) -> f64 {
    let mut total = 0.0;
    if r_c2u < r_c {
        let hi_uniform = r_c - r_c2u;
        total += crate::numeric::gauss_legendre(
            &|r| f(r) * 2.0 * r / (r_c * r_c),
            0.0,
            hi_uniform,
        );
    }
    let lo = (r_c2u - r_c).abs();
    let hi = r_c2u + r_c;
    if hi - lo > 1e-12 {
        let width = hi - lo;
        total += crate::numeric::gauss_legendre(
            &|u: f64| {
                let s = u.sin();
                let r = lo + width * s * s;
                f(r) * device_distance_pdf(r, r_c2u, r_c) * width * (2.0 * u).sin()
            },
            0.0,
            std::f64::consts::FRAC_PI_2,
        );
    }
    total
}

/// Coverage probability: `P(SNR > gamma)` for the link.
///
/// For a UAV-to-TBS link the distance is deterministic; for a cluster link
/// the fading mixture is integrated against the device-distance density.
pub fn coverage_probability(gamma: f64, link: &LinkSpec, p: &ChannelParams) -> Result<f64> {
    if gamma <= 0.0 {
        return Ok(1.0);
    }
    let tx = link.tx_power(p);
    match link.kind {
        LinkKind::UavToTbs => Ok(point_ccdf(gamma, link.distance_m, tx, p)),
        LinkKind::ClusterToUav => mixture_over_devices(
            &|r| point_ccdf(gamma, r, tx, p),
            link.distance_m,
            p.r_c_m,
            "coverage_probability/c2u",
        ),
    }
}

/// SNR density of the link at `gamma`; the derivative of the coverage CCDF.
pub fn snr_pdf(gamma: f64, link: &LinkSpec, p: &ChannelParams) -> Result<f64> {
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    let tx = link.tx_power(p);
    match link.kind {
        LinkKind::UavToTbs => Ok(point_pdf(gamma, link.distance_m, tx, p)),
        LinkKind::ClusterToUav => mixture_over_devices(
            &|r| point_pdf(gamma, r, tx, p),
            link.distance_m,
            p.r_c_m,
            "snr_pdf/c2u",
        ),
    }
}

/// SNR floor of the unit-time expectation. Mass below this threshold is
/// charged at the floor rate, acting as a minimum-rate cutoff; without it
/// the expectation diverges whenever fading mass accumulates near zero SNR.
pub const GAMMA_FLOOR: f64 = 1e-6;

/// CCDF level below which the upper integration limit is truncated.
const CCDF_TAIL: f64 = 1e-6;

fn gamma_upper_limit<F: Fn(f64) -> f64>(ccdf: &F) -> f64 {
    let mut hi = 1.0;
    while ccdf(hi) > CCDF_TAIL && hi < 1e60 {
        hi *= 16.0;
    }
    bisect_decreasing(ccdf, GAMMA_FLOOR, hi, CCDF_TAIL)
}

const TIME_ABS_TOL: f64 = 1e-8;
const TIME_REL_TOL: f64 = 1e-6;

/// Expected transmission time of one unit of data (sec*Hz/bit) on the link:
/// the expectation of `1 / log2(1 + SNR)` over the link's SNR distribution.
///
/// The integral runs on a log-SNR axis over `[GAMMA_FLOOR, gamma_max]` with
/// `gamma_max` placed where the CCDF drops under 1e-6; SNR mass below the
/// floor pays the floor rate so the result stays monotone in distance.
pub fn unit_data_time(link: &LinkSpec, p: &ChannelParams) -> Result<f64> {
    let tx = link.tx_power(p);
    let is_cluster = link.kind == LinkKind::ClusterToUav;
    let pdf_at = |g: f64| {
        if is_cluster {
            mixture_over_devices_fast(&|r| point_pdf(g, r, tx, p), link.distance_m, p.r_c_m)
        } else {
            point_pdf(g, link.distance_m, tx, p)
        }
    };
    let ccdf_at = |g: f64| {
        if is_cluster {
            mixture_over_devices_fast(&|r| point_ccdf(g, r, tx, p), link.distance_m, p.r_c_m)
        } else {
            point_ccdf(g, link.distance_m, tx, p)
        }
    };
    let gamma_max = gamma_upper_limit(&ccdf_at);
    let floor_rate_time = 1.0 / (1.0 + GAMMA_FLOOR).log2();
    let below_floor = 1.0 - ccdf_at(GAMMA_FLOOR);
    if gamma_max <= GAMMA_FLOOR * (1.0 + 1e-12) {
        // everything sits under the floor; the link runs at the cutoff rate
        return Ok(below_floor.max(0.0) * floor_rate_time);
    }
    // substitute u = ln(gamma) so the wide dynamic range integrates cleanly
    let integrand = |u: f64| {
        let g = u.exp();
        pdf_at(g) * g / (1.0 + g).log2()
    };
    let main = adaptive_simpson(
        &integrand,
        GAMMA_FLOOR.ln(),
        gamma_max.ln(),
        TIME_ABS_TOL,
        TIME_REL_TOL,
        "unit_data_time",
    )?;
    Ok(main + below_floor.max(0.0) * floor_rate_time)
}

/// Unit-data time for a single device at a fixed horizontal distance
/// (fading expectation only); the per-device simulation mode sums these.
pub fn unit_data_time_device(r: f64, p: &ChannelParams) -> Result<f64> {
    let ccdf_at = |g: f64| point_ccdf(g, r, p.rho_iot_w, p);
    let gamma_max = gamma_upper_limit(&ccdf_at);
    let floor_rate_time = 1.0 / (1.0 + GAMMA_FLOOR).log2();
    let below_floor = 1.0 - ccdf_at(GAMMA_FLOOR);
    if gamma_max <= GAMMA_FLOOR * (1.0 + 1e-12) {
        return Ok(below_floor.max(0.0) * floor_rate_time);
    }
    let integrand = |u: f64| {
        let g = u.exp();
        point_pdf(g, r, p.rho_iot_w, p) * g / (1.0 + g).log2()
    };
    let main = adaptive_simpson(
        &integrand,
        GAMMA_FLOOR.ln(),
        gamma_max.ln(),
        TIME_ABS_TOL,
        TIME_REL_TOL,
        "unit_data_time_device",
    )?;
    Ok(main + below_floor.max(0.0) * floor_rate_time)
}

/// Distance quantum of the memo table, meters.
const QUANT_M: f64 = 0.25;

/// Memoized unit-data times keyed by (link kind, quantized distance).
///
/// Values are pure functions of the key, so concurrent duplicate inserts are
/// benign; reads vastly outnumber writes once the cache warms up.
pub struct UnitTimeTable {
    params: ChannelParams,
    c2u: RwLock<HashMap<u64, f64>>,
    u2b: RwLock<HashMap<u64, f64>>,
    device: RwLock<HashMap<u64, f64>>,
}

impl UnitTimeTable {
    pub fn new(params: ChannelParams) -> Self {
        Self {
            params,
            c2u: RwLock::new(HashMap::new()),
            u2b: RwLock::new(HashMap::new()),
            device: RwLock::new(HashMap::new()),
        }
    }

    pub fn params(&self) -> &ChannelParams {
        &self.params
    }

    fn quantize(r: f64) -> (u64, f64) {
        let key = (r.max(0.0) / QUANT_M).round() as u64;
        (key, key as f64 * QUANT_M)
    }

    fn lookup<F: Fn(f64) -> Result<f64>>(
        map: &RwLock<HashMap<u64, f64>>,
        r: f64,
        compute: F,
    ) -> Result<f64> {
        let (key, rq) = Self::quantize(r);
        if let Some(v) = map.read().expect("memo lock poisoned").get(&key) {
            return Ok(*v);
        }
        let v = compute(rq)?;
        map.write().expect("memo lock poisoned").insert(key, v);
        Ok(v)
    }

    /// Memoized [`unit_data_time`] at horizontal distance `r`.
    pub fn unit_time(&self, kind: LinkKind, r: f64) -> Result<f64> {
        let map = match kind {
            LinkKind::ClusterToUav => &self.c2u,
            LinkKind::UavToTbs => &self.u2b,
        };
        Self::lookup(map, r, |rq| {
            unit_data_time(&LinkSpec::new(kind, rq), &self.params)
        })
    }

    /// Memoized per-device time at horizontal distance `r`.
    pub fn device_time(&self, r: f64) -> Result<f64> {
        Self::lookup(&self.device, r, |rq| unit_data_time_device(rq, &self.params))
    }

    /// Infallible lookup for optimizer inner loops; failures surface as an
    /// infinite cost and are re-checked through the fallible path afterwards.
    pub fn unit_time_or_inf(&self, kind: LinkKind, r: f64) -> f64 {
        self.unit_time(kind, r).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Gamma};

    fn table2() -> ChannelParams {
        ChannelParams::default()
    }

    #[test]
    fn los_overhead_is_certain() {
        let p = table2();
        assert!((los_probability(0.0, &p) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn los_at_45_degrees() {
        let p = table2();
        let got = los_probability(100.0, &p);
        let want = 1.0 / (1.0 + 4.9 * (-0.43f64 * (45.0 - 4.9)).exp());
        assert!((got - want).abs() < 1e-12);
        assert!(got > 0.999_999);
    }

    #[test]
    fn los_far_out() {
        let p = table2();
        let got = los_probability(1e4, &p);
        assert!((got - 0.0308).abs() < 3e-4, "got {got}");
    }

    #[test]
    fn device_pdf_above_center_is_disk_law() {
        let f = device_distance_pdf(25.0, 0.0, 50.0);
        assert!((f - 0.02).abs() < 1e-12);
    }

    #[test]
    fn device_pdf_vanishes_at_outer_boundary() {
        let f_near = device_distance_pdf(149.999, 100.0, 50.0);
        let f_boundary = device_distance_pdf(150.0, 100.0, 50.0);
        assert!(f_near < 1e-3);
        assert_eq!(f_boundary, 0.0);
    }

    #[test]
    fn device_pdf_continuous_at_branch_switch() {
        // r_c2u <= r_c: the uniform part meets the arccos part at r_c - r_c2u
        let (r_c2u, r_c) = (20.0, 50.0);
        let r = r_c - r_c2u;
        let left = device_distance_pdf(r - 1e-9, r_c2u, r_c);
        let right = device_distance_pdf(r + 1e-9, r_c2u, r_c);
        assert!((left - right).abs() < 1e-6, "{left} vs {right}");
    }

    #[test]
    fn device_pdf_normalizes_on_grid() {
        for &r_c in &[25.0, 50.0] {
            for i in 0..5 {
                let r_c2u = i as f64 * 0.75 * r_c;
                let (lo, hi) = device_distance_support(r_c2u, r_c);
                let total = adaptive_simpson(
                    &|r| device_distance_pdf(r, r_c2u, r_c),
                    lo,
                    hi,
                    1e-10,
                    1e-9,
                    "norm",
                )
                .unwrap();
                assert!(
                    (total - 1.0).abs() < 1e-6,
                    "r_c2u={r_c2u} r_c={r_c}: {total}"
                );
            }
        }
    }

    #[test]
    fn coverage_limits() {
        let p = table2();
        for kind in [LinkKind::UavToTbs, LinkKind::ClusterToUav] {
            let link = LinkSpec::new(kind, 120.0);
            assert_eq!(coverage_probability(0.0, &link, &p).unwrap(), 1.0);
            let hi = coverage_probability(1e12, &link, &p).unwrap();
            assert!(hi < 1e-9, "{kind:?}: {hi}");
        }
    }

    #[test]
    fn coverage_monotone_in_gamma() {
        let p = table2();
        for kind in [LinkKind::UavToTbs, LinkKind::ClusterToUav] {
            let link = LinkSpec::new(kind, 200.0);
            let mut prev = 1.0;
            for i in 0..30 {
                let gamma = 10f64.powf(-6.0 + i as f64 * 0.4);
                let c = coverage_probability(gamma, &link, &p).unwrap();
                assert!(c <= prev + 1e-12);
                assert!((0.0..=1.0).contains(&c));
                prev = c;
            }
        }
    }

    /// Empirical CCDF from Nakagami fading draws at a deterministic distance.
    fn empirical_ccdf_u2b(gamma: f64, r: f64, p: &ChannelParams, draws: usize) -> f64 {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1234);
        let d3 = r.hypot(p.h_u_m);
        let mean_los = p.rho_uav_w * p.eta_los * d3.powf(-p.alpha_los) / p.sigma2_w;
        let mean_nlos = p.rho_uav_w * p.eta_nlos * d3.powf(-p.alpha_nlos) / p.sigma2_w;
        let g_los = Gamma::new(p.m_los as f64, 1.0 / p.m_los as f64).unwrap();
        let g_nlos = Gamma::new(p.m_nlos as f64, 1.0 / p.m_nlos as f64).unwrap();
        let p_los = los_probability(r, p);
        let mut hits = 0usize;
        for _ in 0..draws {
            let snr = if rng.random::<f64>() < p_los {
                mean_los * g_los.sample(&mut rng)
            } else {
                mean_nlos * g_nlos.sample(&mut rng)
            };
            if snr > gamma {
                hits += 1;
            }
        }
        hits as f64 / draws as f64
    }

    #[test]
    fn coverage_matches_fading_monte_carlo_at_mean_snr() {
        let p = table2();
        let mean_snr = p.rho_uav_w * p.eta_los * p.h_u_m.powf(-p.alpha_los) / p.sigma2_w;
        assert!((mean_snr - 6.31e3).abs() / 6.31e3 < 0.01, "{mean_snr}");
        let link = LinkSpec::new(LinkKind::UavToTbs, 0.0);
        let analytic = coverage_probability(mean_snr, &link, &p).unwrap();
        let empirical = empirical_ccdf_u2b(mean_snr, 0.0, &p, 200_000);
        assert!(
            (analytic - empirical).abs() < 3e-3,
            "analytic {analytic}, empirical {empirical}"
        );
    }

    #[test]
    fn snr_pdf_matches_exponential_case_when_m_is_one() {
        let p = ChannelParams {
            m_los: 1,
            m_nlos: 1,
            ..table2()
        };
        let link = LinkSpec::new(LinkKind::UavToTbs, 300.0);
        let d3 = 300f64.hypot(p.h_u_m);
        let mean_los = p.rho_uav_w * p.eta_los * d3.powf(-p.alpha_los) / p.sigma2_w;
        let mean_nlos = p.rho_uav_w * p.eta_nlos * d3.powf(-p.alpha_nlos) / p.sigma2_w;
        let p_los = los_probability(300.0, &p);
        for i in 1..20 {
            let gamma = i as f64 * mean_los / 10.0;
            // hand-written derivative of the exponential-mixture CCDF
            let want = p_los / mean_los * (-gamma / mean_los).exp()
                + (1.0 - p_los) / mean_nlos * (-gamma / mean_nlos).exp();
            let got = snr_pdf(gamma, &link, &p).unwrap();
            assert!(
                (got - want).abs() <= 1e-6 * want.max(1.0),
                "gamma {gamma}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn snr_pdf_nonnegative_and_consistent_with_ccdf_slope() {
        let p = table2();
        let link = LinkSpec::new(LinkKind::UavToTbs, 150.0);
        for i in 0..20 {
            let gamma = 10f64.powf(-2.0 + i as f64 * 0.25);
            let f = snr_pdf(gamma, &link, &p).unwrap();
            assert!(f >= 0.0);
            let h = gamma * 1e-5;
            let slope = (coverage_probability(gamma - h, &link, &p).unwrap()
                - coverage_probability(gamma + h, &link, &p).unwrap())
                / (2.0 * h);
            assert!(
                (f - slope).abs() <= 1e-6 + 1e-4 * slope.abs(),
                "gamma {gamma}: pdf {f} vs -dCCDF {slope}"
            );
        }
    }

    #[test]
    fn unit_time_u2b_overhead_near_jensen_value() {
        let p = table2();
        let t = unit_data_time(&LinkSpec::new(LinkKind::UavToTbs, 0.0), &p).unwrap();
        let jensen = 1.0 / (1.0 + 6.31e3f64).log2();
        assert!((t - jensen).abs() / jensen < 0.05, "t {t}, jensen {jensen}");
    }

    #[test]
    fn unit_time_matches_fading_monte_carlo() {
        let p = table2();
        let r = 200.0;
        let t = unit_data_time(&LinkSpec::new(LinkKind::UavToTbs, r), &p).unwrap();
        // oracle: fading expectation with the same floor policy, stratified
        // by LoS state so the rare heavy-tailed NLoS branch is well sampled
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        let d3 = r.hypot(p.h_u_m);
        let p_los = los_probability(r, &p);
        let n = 300_000;
        let mut strata = [0.0f64; 2];
        for (i, (mean, m)) in [
            (
                p.rho_uav_w * p.eta_los * d3.powf(-p.alpha_los) / p.sigma2_w,
                p.m_los,
            ),
            (
                p.rho_uav_w * p.eta_nlos * d3.powf(-p.alpha_nlos) / p.sigma2_w,
                p.m_nlos,
            ),
        ]
        .into_iter()
        .enumerate()
        {
            let gamma = Gamma::new(m as f64, 1.0 / m as f64).unwrap();
            let mut acc = 0.0;
            for _ in 0..n {
                let snr = mean * gamma.sample(&mut rng);
                acc += 1.0 / (1.0 + snr.max(GAMMA_FLOOR)).log2();
            }
            strata[i] = acc / n as f64;
        }
        let mc = p_los * strata[0] + (1.0 - p_los) * strata[1];
        assert!((t - mc).abs() / mc < 0.05, "t {t}, mc {mc}");
    }

    #[test]
    fn unit_time_monotone_in_distance() {
        let p = table2();
        for kind in [LinkKind::UavToTbs, LinkKind::ClusterToUav] {
            let mut prev = 0.0;
            for i in 0..20 {
                let r = i as f64 * 60.0;
                let t = unit_data_time(&LinkSpec::new(kind, r), &p).unwrap();
                assert!(t > 0.0);
                assert!(
                    t + 1e-9 >= prev,
                    "{kind:?}: T({r}) = {t} < T({}) = {prev}",
                    r - 60.0
                );
                prev = t;
            }
        }
    }

    #[test]
    fn cluster_uplink_slower_than_tbs_downlink() {
        let p = table2();
        let t_c2u = unit_data_time(&LinkSpec::new(LinkKind::ClusterToUav, 0.0), &p).unwrap();
        let t_u2b = unit_data_time(&LinkSpec::new(LinkKind::UavToTbs, 0.0), &p).unwrap();
        assert!(t_c2u > t_u2b, "c2u {t_c2u} <= u2b {t_u2b}");
    }

    #[test]
    fn vanishing_noise_drives_time_to_zero() {
        let p = ChannelParams {
            sigma2_w: 1e-21,
            ..table2()
        };
        let t = unit_data_time(&LinkSpec::new(LinkKind::UavToTbs, 0.0), &p).unwrap();
        assert!(t > 0.0 && t < 0.02, "t = {t}");
    }

    #[test]
    fn per_device_expectation_matches_cluster_mixture() {
        // E over device positions of the fading-only time equals the
        // full-mixture unit time
        let p = table2();
        let r_c2u = 80.0;
        let mixture = unit_data_time(&LinkSpec::new(LinkKind::ClusterToUav, r_c2u), &p).unwrap();
        let (lo, hi) = device_distance_support(r_c2u, p.r_c_m);
        let averaged = adaptive_simpson(
            &|r| unit_data_time_device(r, &p).unwrap() * device_distance_pdf(r, r_c2u, p.r_c_m),
            lo,
            hi,
            1e-9,
            1e-7,
            "device-average",
        )
        .unwrap();
        assert!(
            (mixture - averaged).abs() / mixture < 2e-3,
            "mixture {mixture}, device-averaged {averaged}"
        );
    }

    #[test]
    fn memo_table_consistent_with_direct_evaluation() {
        let p = table2();
        let table = UnitTimeTable::new(p.clone());
        let direct = unit_data_time(&LinkSpec::new(LinkKind::UavToTbs, 100.0), &p).unwrap();
        let cached_first = table.unit_time(LinkKind::UavToTbs, 100.0).unwrap();
        let cached_again = table.unit_time(LinkKind::UavToTbs, 100.1).unwrap();
        assert_eq!(cached_first, direct);
        // 100.1 quantizes to the same 0.25 m cell as 100.0
        assert_eq!(cached_first, cached_again);
    }

    #[test]
    fn non_integer_shape_rejected_at_validation() {
        let p = ChannelParams {
            m_los: 0,
            ..table2()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(-20.0) - 0.01).abs() < 1e-15);
    }
}
