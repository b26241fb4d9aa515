use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::motor::{electromagnetic_torque, MotorParams};

/// Quadratic stage cost `K1·(τ_em − τ*)² + K2·i_d² + K3·|u|²` with discount γ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostSpec {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub gamma: f64,
}

impl CostSpec {
    /// Weights of the published training run.
    pub fn published() -> Self {
        Self {
            k1: 30.0,
            k2: 0.5,
            k3: 100.0,
            gamma: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ks = [self.k1, self.k2, self.k3];
        if ks.iter().any(|k| !(k.is_finite() && *k >= 0.0)) {
            return Err(Error::invalid("cost", "K1, K2, K3 must be finite and >= 0"));
        }
        if ks.iter().all(|&k| k == 0.0) {
            return Err(Error::invalid("cost", "K1, K2, K3 must not all be zero"));
        }
        // γ = 0 is accepted as the myopic limit
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::invalid("cost", format!("gamma must lie in [0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    /// State part `Q(x, τ*)` given the produced torque.
    pub fn state_cost(&self, tau_em: f64, tau_ref: f64, i_d: f64) -> f64 {
        let e = tau_em - tau_ref;
        self.k1 * e * e + self.k2 * i_d * i_d
    }

    pub fn control_cost(&self, v_d: f64, v_q: f64) -> f64 {
        self.k3 * (v_d * v_d + v_q * v_q)
    }
}

pub fn stage_cost(i_d: f64, i_q: f64, tau_ref: f64, v_d: f64, v_q: f64, c: &CostSpec, p: &MotorParams) -> f64 {
    c.state_cost(electromagnetic_torque(i_d, i_q, p), tau_ref, i_d) + c.control_cost(v_d, v_q)
}
