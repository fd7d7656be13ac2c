//! JSON configuration document.
//!
//! One file with `scene`, `channel`, `power` and `experiment` blocks; every
//! field is optional and falls back to the published defaults. dB quantities
//! are converted to linear ratios once at load; the battery is converted
//! from watt-hours to joules.

use std::path::Path;

use serde::Deserialize;

use crate::channel::{db_to_linear, ChannelParams};
use crate::energy::{PowerProfile, RotorParams, JOULES_PER_WH};
use crate::error::{Error, Result};
use crate::geometry::SceneParams;
use crate::harness::{CollectionMode, ExperimentConfig};
use crate::planner::Objective;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneBlock {
    lambda_tbs_per_km2: Option<f64>,
    lambda_type1_per_km2: Option<f64>,
    lambda_type2_per_km2: Option<f64>,
    sd_distance_m: Option<f64>,
    window_margin_m: Option<f64>,
    cluster_radius_m: Option<f64>,
    devices_per_cluster: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChannelBlock {
    a: Option<f64>,
    b: Option<f64>,
    eta_los_db: Option<f64>,
    eta_nlos_db: Option<f64>,
    alpha_los: Option<f64>,
    alpha_nlos: Option<f64>,
    m_los: Option<u32>,
    m_nlos: Option<u32>,
    rho_iot_w: Option<f64>,
    rho_uav_w: Option<f64>,
    sigma2_w: Option<f64>,
    h_u_m: Option<f64>,
    r_c_m: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerBlock {
    p_m_loaded_w: Option<f64>,
    p_m_empty_w: Option<f64>,
    p_s_loaded_w: Option<f64>,
    p_s_empty_w: Option<f64>,
    v_loaded_mps: Option<f64>,
    v_empty_mps: Option<f64>,
    battery_wh: Option<f64>,
    payload_kg: Option<f64>,
    rotor: Option<RotorParams>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentBlock {
    trials: Option<u64>,
    objectives: Option<Vec<String>>,
    n1: Option<usize>,
    n2: Option<usize>,
    m1_bithz: Option<f64>,
    m2_bithz: Option<f64>,
    seed: Option<u64>,
    collection_mode: Option<String>,
    include_baseline: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    scene: SceneBlock,
    #[serde(default)]
    channel: ChannelBlock,
    #[serde(default)]
    power: PowerBlock,
    #[serde(default)]
    experiment: ExperimentBlock,
}

fn parse_objective(s: &str) -> Result<Objective> {
    match s {
        "min-time" => Ok(Objective::MinTime),
        "max-data" => Ok(Objective::MaxData),
        other => Err(Error::InvalidParameter(format!(
            "unknown objective '{other}' (expected min-time or max-data)"
        ))),
    }
}

fn parse_mode(s: &str) -> Result<CollectionMode> {
    match s {
        "analytic" => Ok(CollectionMode::Analytic),
        "per-device" => Ok(CollectionMode::PerDevice),
        other => Err(Error::InvalidParameter(format!(
            "unknown collection_mode '{other}' (expected analytic or per-device)"
        ))),
    }
}

impl ConfigDoc {
    fn resolve(self) -> Result<ExperimentConfig> {
        let ds = SceneParams::default();
        let scene = SceneParams {
            lambda_tbs_per_km2: self.scene.lambda_tbs_per_km2.unwrap_or(ds.lambda_tbs_per_km2),
            lambda_type1_per_km2: self
                .scene
                .lambda_type1_per_km2
                .unwrap_or(ds.lambda_type1_per_km2),
            lambda_type2_per_km2: self
                .scene
                .lambda_type2_per_km2
                .unwrap_or(ds.lambda_type2_per_km2),
            sd_distance_m: self.scene.sd_distance_m.unwrap_or(ds.sd_distance_m),
            window_margin_m: self.scene.window_margin_m.unwrap_or(ds.window_margin_m),
            cluster_radius_m: self.scene.cluster_radius_m.unwrap_or(ds.cluster_radius_m),
            devices_per_cluster: self
                .scene
                .devices_per_cluster
                .unwrap_or(ds.devices_per_cluster),
        };

        let dc = ChannelParams::default();
        let mut channel = ChannelParams {
            a: self.channel.a.unwrap_or(dc.a),
            b: self.channel.b.unwrap_or(dc.b),
            eta_los: self.channel.eta_los_db.map(db_to_linear).unwrap_or(dc.eta_los),
            eta_nlos: self
                .channel
                .eta_nlos_db
                .map(db_to_linear)
                .unwrap_or(dc.eta_nlos),
            alpha_los: self.channel.alpha_los.unwrap_or(dc.alpha_los),
            alpha_nlos: self.channel.alpha_nlos.unwrap_or(dc.alpha_nlos),
            m_los: self.channel.m_los.unwrap_or(dc.m_los),
            m_nlos: self.channel.m_nlos.unwrap_or(dc.m_nlos),
            rho_iot_w: self.channel.rho_iot_w.unwrap_or(dc.rho_iot_w),
            rho_uav_w: self.channel.rho_uav_w.unwrap_or(dc.rho_uav_w),
            sigma2_w: self.channel.sigma2_w.unwrap_or(dc.sigma2_w),
            h_u_m: self.channel.h_u_m.unwrap_or(dc.h_u_m),
            r_c_m: self.channel.r_c_m.unwrap_or(dc.r_c_m),
        };
        // a radius stated on either side covers both
        match (self.scene.cluster_radius_m, self.channel.r_c_m) {
            (Some(_), None) => channel.r_c_m = scene.cluster_radius_m,
            (None, Some(r)) => {
                return resolve_radius(self, scene, channel, r);
            }
            _ => {}
        }

        finish_resolve(self, scene, channel)
    }
}

fn resolve_radius(
    doc: ConfigDoc,
    mut scene: SceneParams,
    channel: ChannelParams,
    r: f64,
) -> Result<ExperimentConfig> {
    scene.cluster_radius_m = r;
    finish_resolve(doc, scene, channel)
}

fn finish_resolve(
    doc: ConfigDoc,
    scene: SceneParams,
    channel: ChannelParams,
) -> Result<ExperimentConfig> {
    let dp = PowerProfile::default();
    let payload_kg = doc.power.payload_kg.unwrap_or(dp.payload_kg);
    // an optional rotor model fills in velocities and motion powers for
    // custom payloads; explicit fields always win
    let rotor_motion = match &doc.power.rotor {
        Some(rotor) => {
            rotor.validate()?;
            let empty_mass = rotor.implied_mass_kg();
            let v_empty = crate::energy::optimal_velocity(rotor, empty_mass);
            let v_loaded = crate::energy::optimal_velocity(rotor, empty_mass + payload_kg);
            Some((
                rotor.power_at(v_loaded, empty_mass + payload_kg),
                rotor.power_at(v_empty, empty_mass),
                v_loaded,
                v_empty,
            ))
        }
        None => None,
    };
    let (rm_loaded, rm_empty, rv_loaded, rv_empty) = rotor_motion
        .map(|(a, b, c, d)| (Some(a), Some(b), Some(c), Some(d)))
        .unwrap_or((None, None, None, None));
    let power = PowerProfile {
        p_motion_loaded: doc
            .power
            .p_m_loaded_w
            .or(rm_loaded)
            .unwrap_or(dp.p_motion_loaded),
        p_motion_empty: doc
            .power
            .p_m_empty_w
            .or(rm_empty)
            .unwrap_or(dp.p_motion_empty),
        p_serve_loaded: doc.power.p_s_loaded_w.unwrap_or(dp.p_serve_loaded),
        p_serve_empty: doc.power.p_s_empty_w.unwrap_or(dp.p_serve_empty),
        v_loaded: doc.power.v_loaded_mps.or(rv_loaded).unwrap_or(dp.v_loaded),
        v_empty: doc.power.v_empty_mps.or(rv_empty).unwrap_or(dp.v_empty),
        battery_j: doc
            .power
            .battery_wh
            .map(|wh| wh * JOULES_PER_WH)
            .unwrap_or(dp.battery_j),
        payload_kg,
    };

    let de = ExperimentConfig::default();
    let objectives = match doc.experiment.objectives {
        Some(labels) => labels
            .iter()
            .map(|s| parse_objective(s))
            .collect::<Result<Vec<_>>>()?,
        None => de.objectives,
    };
    let collection_mode = match doc.experiment.collection_mode {
        Some(s) => parse_mode(&s)?,
        None => de.collection_mode,
    };
    let cfg = ExperimentConfig {
        scene,
        channel,
        power,
        trials: doc.experiment.trials.unwrap_or(de.trials),
        objectives,
        n1: doc.experiment.n1.unwrap_or(de.n1),
        n2: doc.experiment.n2.unwrap_or(de.n2),
        m1_bithz: doc.experiment.m1_bithz.unwrap_or(de.m1_bithz),
        m2_bithz: doc.experiment.m2_bithz.unwrap_or(de.m2_bithz),
        seed: doc.experiment.seed.unwrap_or(de.seed),
        collection_mode,
        include_baseline: doc.experiment.include_baseline.unwrap_or(de.include_baseline),
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Parse a configuration document from a JSON string.
pub fn parse_config(json: &str) -> Result<ExperimentConfig> {
    let doc: ConfigDoc = serde_json::from_str(json)?;
    doc.resolve()
}

/// Load a configuration document from disk.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = parse_config("{}").unwrap();
        assert_eq!(cfg.trials, 1000);
        assert_eq!(cfg.n1, 2);
        assert!((cfg.power.battery_j - 639_360.0).abs() < 1e-9);
        assert!((cfg.channel.eta_nlos - 0.01).abs() < 1e-15);
        assert_eq!(cfg.objectives.len(), 2);
    }

    #[test]
    fn db_fields_convert_once_at_load() {
        let cfg = parse_config(r#"{"channel":{"eta_nlos_db":-10.0,"eta_los_db":3.0}}"#).unwrap();
        assert!((cfg.channel.eta_nlos - 0.1).abs() < 1e-12);
        assert!((cfg.channel.eta_los - 10f64.powf(0.3)).abs() < 1e-12);
    }

    #[test]
    fn battery_converts_from_wh() {
        let cfg = parse_config(r#"{"power":{"battery_wh":100.0}}"#).unwrap();
        assert!((cfg.power.battery_j - 360_000.0).abs() < 1e-9);
    }

    #[test]
    fn radius_on_one_side_covers_both() {
        let cfg = parse_config(r#"{"scene":{"cluster_radius_m":80.0}}"#).unwrap();
        assert_eq!(cfg.channel.r_c_m, 80.0);
        let cfg = parse_config(r#"{"channel":{"r_c_m":70.0}}"#).unwrap();
        assert_eq!(cfg.scene.cluster_radius_m, 70.0);
    }

    #[test]
    fn contradictory_radius_is_rejected() {
        let err = parse_config(
            r#"{"scene":{"cluster_radius_m":80.0},"channel":{"r_c_m":70.0}}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("radius"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(parse_config(r#"{"channel":{"bogus":1.0}}"#).is_err());
        assert!(parse_config(r#"{"bogus":{}}"#).is_err());
    }

    #[test]
    fn non_integer_nakagami_shape_is_rejected() {
        assert!(parse_config(r#"{"channel":{"m_los":2.5}}"#).is_err());
        assert!(parse_config(r#"{"channel":{"m_los":0}}"#).is_err());
    }

    #[test]
    fn rotor_block_derives_motion_constants() {
        let cfg = parse_config(
            r#"{"power":{"payload_kg":2.0,"rotor":{
                "p0":79.86,"pi":88.63,"u_tip":120.0,"v0":4.03,"d0":0.6,
                "rho_air":1.225,"s_solidity":0.05,"a_disc":0.503,
                "delta":0.012,"omega":300.0,"r_rotor":0.4,"k_corr":0.1}}}"#,
        )
        .unwrap();
        // loaded flight is heavier, so it draws more power
        assert!(cfg.power.p_motion_loaded > cfg.power.p_motion_empty);
        assert!(cfg.power.v_loaded > 0.0 && cfg.power.v_empty > 0.0);
        // explicit velocity wins over the derived one
        let explicit = parse_config(
            r#"{"power":{"v_loaded_mps":25.0,"rotor":{
                "p0":79.86,"pi":88.63,"u_tip":120.0,"v0":4.03,"d0":0.6,
                "rho_air":1.225,"s_solidity":0.05,"a_disc":0.503,
                "delta":0.012,"omega":300.0,"r_rotor":0.4,"k_corr":0.1}}}"#,
        )
        .unwrap();
        assert_eq!(explicit.power.v_loaded, 25.0);
    }

    #[test]
    fn objective_labels_parse() {
        let cfg =
            parse_config(r#"{"experiment":{"objectives":["max-data"]}}"#).unwrap();
        assert_eq!(cfg.objectives, vec![Objective::MaxData]);
        assert!(parse_config(r#"{"experiment":{"objectives":["sideways"]}}"#).is_err());
    }
}
