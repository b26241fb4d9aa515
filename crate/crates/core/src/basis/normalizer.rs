use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor::MotorParams;

/// Scales that map physical network inputs to the dimensionless vector
/// `η = [i_d/I, i_q/I, τ*/T, ω/W]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub i_scale: f64,
    pub tau_scale: f64,
    pub omega_scale: f64,
}

impl Normalizer {
    pub fn new(i_scale: f64, tau_scale: f64, omega_scale: f64) -> Result<Self> {
        let n = Self { i_scale, tau_scale, omega_scale };
        n.validate()?;
        Ok(n)
    }

    /// Uses the machine maxima (current, torque, speed) as scales.
    pub fn from_params(p: &MotorParams) -> Self {
        Self {
            i_scale: p.max_current_a,
            tau_scale: p.max_torque_nm,
            omega_scale: p.max_speed_rad_s,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("i_scale", self.i_scale),
            ("tau_scale", self.tau_scale),
            ("omega_scale", self.omega_scale),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("normalizer", format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    pub fn normalize(&self, i_d: f64, i_q: f64, tau_ref: f64, omega_m: f64) -> [f64; 4] {
        [
            i_d / self.i_scale,
            i_q / self.i_scale,
            tau_ref / self.tau_scale,
            omega_m / self.omega_scale,
        ]
    }

    /// Physical value of each normalized coordinate's unit, in η order.
    pub fn scales(&self) -> [f64; 4] {
        [self.i_scale, self.i_scale, self.tau_scale, self.omega_scale]
    }
}
