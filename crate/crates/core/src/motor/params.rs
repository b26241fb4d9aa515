use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const RPM_TO_RAD_S: f64 = 2.0 * PI / 60.0;

/// Electrical and mechanical constants of a surface-mount PMSM and its drive.
///
/// Currents are in amperes as listed on the nameplate (the current ratings
/// are rms values); the dq model itself is amplitude invariant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorParams {
    pub pole_pairs: u32,
    pub magnet_flux_wb: f64,
    pub stator_resistance_ohm: f64,
    pub inductance_d_h: f64,
    pub inductance_q_h: f64,
    pub inertia_kgm2: f64,
    #[serde(default)]
    pub viscous_friction_nms: f64,
    pub dc_bus_v: f64,
    pub rated_current_a: f64,
    pub max_current_a: f64,
    pub rated_torque_nm: f64,
    pub max_torque_nm: f64,
    pub rated_speed_rad_s: f64,
    pub max_speed_rad_s: f64,
    pub sampling_time_s: f64,
}

impl MotorParams {
    /// The 200 W surface-mount machine used throughout the benchmarks.
    pub fn nominal() -> Self {
        Self {
            pole_pairs: 5,
            magnet_flux_wb: 0.015,
            stator_resistance_ohm: 1.2,
            inductance_d_h: 0.003,
            inductance_q_h: 0.003,
            inertia_kgm2: 30e-6,
            viscous_friction_nms: 0.0,
            dc_bus_v: 100.0,
            rated_current_a: 2.5,
            max_current_a: 7.0,
            rated_torque_nm: 0.64,
            max_torque_nm: 1.91,
            rated_speed_rad_s: 3000.0 * RPM_TO_RAD_S,
            max_speed_rad_s: 6000.0 * RPM_TO_RAD_S,
            sampling_time_s: 40e-6,
        }
    }

    /// Nominal machine with the perturbed flux, resistance, inductance and
    /// inertia used for the simulated robustness runs.
    pub fn perturbed_sim() -> Self {
        Self {
            magnet_flux_wb: 0.012,
            stator_resistance_ohm: 5.7,
            inductance_d_h: 0.001,
            inductance_q_h: 0.001,
            inertia_kgm2: 40e-6,
            ..Self::nominal()
        }
    }

    /// Misidentified parameter set used to design controllers for the
    /// experimental-style robustness runs.
    pub fn perturbed_exp() -> Self {
        Self {
            magnet_flux_wb: 0.005,
            stator_resistance_ohm: 3.6,
            inductance_d_h: 0.001,
            inductance_q_h: 0.001,
            ..Self::nominal()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "nominal" => Ok(Self::nominal()),
            "perturbed_sim" => Ok(Self::perturbed_sim()),
            "perturbed_exp" => Ok(Self::perturbed_exp()),
            other => Err(Error::invalid(
                "motor preset",
                format!("unknown preset `{other}` (expected nominal, perturbed_sim or perturbed_exp)"),
            )),
        }
    }

    /// Torque constant 1.5·P·λm of the magnet torque term.
    pub fn torque_constant(&self) -> f64 {
        1.5 * f64::from(self.pole_pairs) * self.magnet_flux_wb
    }

    /// Peak value of the maximum phase current.
    pub fn max_current_amplitude(&self) -> f64 {
        self.max_current_a * std::f64::consts::SQRT_2
    }

    /// Torque reachable at `i_d = 0` within the current limit, capped by the
    /// rated maximum torque.
    pub fn current_limited_torque(&self) -> f64 {
        (self.torque_constant() * self.max_current_amplitude()).min(self.max_torque_nm)
    }

    /// Radius of the linear-modulation disk of the inverter.
    pub fn max_phase_voltage(&self) -> f64 {
        self.dc_bus_v / 3f64.sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("stator_resistance_ohm", self.stator_resistance_ohm),
            ("inductance_d_h", self.inductance_d_h),
            ("inductance_q_h", self.inductance_q_h),
            ("inertia_kgm2", self.inertia_kgm2),
            ("sampling_time_s", self.sampling_time_s),
            ("dc_bus_v", self.dc_bus_v),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("motor params", format!("{name} must be > 0, got {v}")));
            }
        }
        for (name, v) in [
            ("magnet_flux_wb", self.magnet_flux_wb),
            ("viscous_friction_nms", self.viscous_friction_nms),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid("motor params", format!("{name} must be >= 0, got {v}")));
            }
        }
        if self.pole_pairs < 1 {
            return Err(Error::invalid("motor params", "pole_pairs must be >= 1"));
        }
        let ratings = [
            ("current", self.rated_current_a, self.max_current_a),
            ("torque", self.rated_torque_nm, self.max_torque_nm),
            ("speed", self.rated_speed_rad_s, self.max_speed_rad_s),
        ];
        for (name, rated, max) in ratings {
            if !(rated.is_finite() && max.is_finite() && max >= rated) {
                return Err(Error::invalid(
                    "motor params",
                    format!("max {name} ({max}) must be >= rated {name} ({rated})"),
                ));
            }
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(s)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let p = Self::from_toml_str(&text).map_err(|e| Error::Parse {
            path: path.to_owned(),
            reason: e.to_string(),
        })?;
        p.validate()?;
        Ok(p)
    }
}

/// Either the name of a bundled preset or an inline parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamsSource {
    Preset(String),
    Inline(MotorParams),
}

impl ParamsSource {
    pub fn resolve(&self) -> Result<MotorParams> {
        let p = match self {
            ParamsSource::Preset(name) => MotorParams::preset(name)?,
            ParamsSource::Inline(p) => *p,
        };
        p.validate()?;
        Ok(p)
    }
}

impl From<MotorParams> for ParamsSource {
    fn from(p: MotorParams) -> Self {
        ParamsSource::Inline(p)
    }
}
