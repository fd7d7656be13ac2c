//! Rotary-wing power model and the power/velocity constants every ledger
//! draws from.
//!
//! The default profile uses the published end values directly (powers in
//! watts, optimal velocities in m/s, battery in joules). The raw rotor model
//! exists for custom payload studies only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::scan_then_golden;

/// Joules per watt-hour.
pub const JOULES_PER_WH: f64 = 3600.0;

/// Motion/service powers and cruise velocities, with and without package.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerProfile {
    /// Traveling power while carrying the package, watts.
    pub p_motion_loaded: f64,
    /// Traveling power after package drop, watts.
    pub p_motion_empty: f64,
    /// Hover-and-serve power while carrying the package, watts.
    pub p_serve_loaded: f64,
    /// Hover-and-serve power after package drop, watts.
    pub p_serve_empty: f64,
    /// Optimal cruise velocity with package, m/s.
    pub v_loaded: f64,
    /// Optimal cruise velocity without package, m/s.
    pub v_empty: f64,
    /// Battery capacity, joules.
    pub battery_j: f64,
    /// Average package weight, kg.
    pub payload_kg: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        Self {
            p_motion_loaded: 193.0,
            p_motion_empty: 159.0,
            p_serve_loaded: 252.0,
            p_serve_empty: 178.0,
            v_loaded: 20.0,
            v_empty: 18.0,
            battery_j: 177.6 * JOULES_PER_WH, // 639,360 J
            payload_kg: 1.0,
        }
    }
}

impl PowerProfile {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p_motion_loaded,
            self.p_motion_empty,
            self.p_serve_loaded,
            self.p_serve_empty,
            self.v_loaded,
            self.v_empty,
            self.battery_j,
        ];
        if all.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "powers, velocities and battery capacity must be > 0".into(),
            ));
        }
        Ok(())
    }

    /// Motion power for a leg, by carrying state.
    pub fn motion_power(&self, loaded: bool) -> f64 {
        if loaded {
            self.p_motion_loaded
        } else {
            self.p_motion_empty
        }
    }

    /// Serving power for a hover, by carrying state.
    pub fn serve_power(&self, loaded: bool) -> f64 {
        if loaded {
            self.p_serve_loaded
        } else {
            self.p_serve_empty
        }
    }

    /// Cruise velocity, by carrying state.
    pub fn velocity(&self, loaded: bool) -> f64 {
        if loaded {
            self.v_loaded
        } else {
            self.v_empty
        }
    }
}

/// Raw rotary-wing model constants.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RotorParams {
    /// Blade profile power at hover, watts.
    pub p0: f64,
    /// Induced power at hover, watts (for the reference weight).
    pub pi: f64,
    /// Rotor tip speed, m/s.
    pub u_tip: f64,
    /// Mean rotor induced velocity at hover, m/s.
    pub v0: f64,
    /// Fuselage drag ratio.
    pub d0: f64,
    /// Air density, kg/m^3.
    pub rho_air: f64,
    /// Rotor solidity.
    pub s_solidity: f64,
    /// Rotor disc area, m^2.
    pub a_disc: f64,
    /// Profile drag coefficient.
    pub delta: f64,
    /// Blade angular velocity, rad/s.
    pub omega: f64,
    /// Rotor radius, m.
    pub r_rotor: f64,
    /// Incremental correction factor for induced power.
    pub k_corr: f64,
}

impl Default for RotorParams {
    fn default() -> Self {
        // representative small quad-rotor constants
        Self {
            p0: 79.86,
            pi: 88.63,
            u_tip: 120.0,
            v0: 4.03,
            d0: 0.6,
            rho_air: 1.225,
            s_solidity: 0.05,
            a_disc: 0.503,
            delta: 0.012,
            omega: 300.0,
            r_rotor: 0.4,
            k_corr: 0.1,
        }
    }
}

impl RotorParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.p0,
            self.pi,
            self.u_tip,
            self.v0,
            self.d0,
            self.rho_air,
            self.s_solidity,
            self.a_disc,
            self.delta,
            self.omega,
            self.r_rotor,
        ];
        if all.iter().any(|v| !(*v > 0.0)) || self.k_corr < 0.0 {
            return Err(Error::InvalidParameter(
                "rotor constants must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Empty-airframe mass implied by the stored induced hover power
    /// (inverts the weight dependence of the induced term).
    pub fn implied_mass_kg(&self) -> f64 {
        let w = (self.pi * (2.0 * self.rho_air * self.a_disc).sqrt() / (1.0 + self.k_corr))
            .powf(2.0 / 3.0);
        w / 9.8
    }

    /// Power at velocity `v` for a total mass in kg.
    pub fn power_at(&self, v: f64, total_mass_kg: f64) -> f64 {
        rotor_power_with(
            v,
            self,
            self.profile_power(),
            self.induced_power(total_mass_kg),
        )
    }

    /// Blade profile power derived from the primitive constants.
    pub fn profile_power(&self) -> f64 {
        self.delta / 8.0
            * self.rho_air
            * self.s_solidity
            * self.a_disc
            * self.omega.powi(3)
            * self.r_rotor.powi(3)
    }

    /// Induced hover power for a total mass in kg.
    pub fn induced_power(&self, total_mass_kg: f64) -> f64 {
        let weight_n = total_mass_kg * 9.8;
        (1.0 + self.k_corr) * weight_n.powf(1.5) / (2.0 * self.rho_air * self.a_disc).sqrt()
    }
}

/// Power drawn at forward velocity `v`:
/// profile + induced + parasite terms of the rotary-wing model.
pub fn rotor_power(v: f64, rotor: &RotorParams) -> f64 {
    rotor_power_with(v, rotor, rotor.p0, rotor.pi)
}

fn rotor_power_with(v: f64, rotor: &RotorParams, p0: f64, pi: f64) -> f64 {
    let blade = p0 * (1.0 + 3.0 * v * v / (rotor.u_tip * rotor.u_tip));
    let x = v * v / (2.0 * rotor.v0 * rotor.v0);
    let induced = pi * ((1.0 + x * x).sqrt() - x).sqrt();
    let parasite = 0.5 * rotor.d0 * rotor.rho_air * rotor.s_solidity * rotor.a_disc * v.powi(3);
    blade + induced + parasite
}

/// Velocity minimizing energy per meter `p(V)/V` for a given total mass.
///
/// The induced-power term is rescaled to the requested weight before the
/// search; the result has 1e-3 m/s resolution.
pub fn optimal_velocity(rotor: &RotorParams, total_mass_kg: f64) -> f64 {
    let pi = rotor.induced_power(total_mass_kg);
    let p0 = rotor.profile_power();
    let cost = |v: f64| {
        if v <= 0.0 {
            f64::INFINITY
        } else {
            rotor_power_with(v, rotor, p0, pi) / v
        }
    };
    let v_cap = rotor.u_tip;
    let (v_star, _) = scan_then_golden(&cost, 1e-3, v_cap, 400, 1e-3);
    v_star
}
