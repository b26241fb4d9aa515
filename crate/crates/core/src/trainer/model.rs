//! One-step discrete model seen by the trainer.

use super::{CostSpec, TrainingMode};
use crate::basis::Normalizer;
use crate::motor::{current_derivatives, electromagnetic_torque, MotorParams};

/// Forward-Euler prediction of the dq currents one sampling period ahead,
/// with the speed held as an exogenous constant.
pub fn predict_next_state(i_d: f64, i_q: f64, omega_m: f64, v_d: f64, v_q: f64, p: &MotorParams) -> (f64, f64) {
    let (did, diq) = current_derivatives(i_d, i_q, omega_m, v_d, v_q, p);
    let ts = p.sampling_time_s;
    (i_d + ts * did, i_q + ts * diq)
}

/// Everything needed to evaluate a Bellman backup at a normalized sample.
#[derive(Debug, Clone, Copy)]
pub struct Problem {
    pub mode: TrainingMode,
    pub normalizer: Normalizer,
    pub cost: CostSpec,
    pub params: MotorParams,
}

#[derive(Debug, Clone, Copy)]
pub struct Transition {
    pub stage_cost: f64,
    /// Successor input vector; only the first `input_dim` entries are used.
    pub next: [f64; 4],
}

impl Problem {
    pub fn new(mode: TrainingMode, normalizer: Normalizer, cost: CostSpec, params: MotorParams) -> Self {
        Self { mode, normalizer, cost, params }
    }

    pub fn dim(&self) -> usize {
        self.mode.input_dim()
    }

    /// Discrete input gain `Ts·diag(1/L_d, 1/L_q)` as its diagonal.
    pub fn input_gain(&self) -> (f64, f64) {
        let ts = self.params.sampling_time_s;
        (ts / self.params.inductance_d_h, ts / self.params.inductance_q_h)
    }

    /// Stage cost and successor for input `u` at the normalized sample `eta`.
    /// The reference torque and speed carry over unchanged.
    pub fn transition(&self, eta: &[f64], u: (f64, f64)) -> Transition {
        let (i_d, i_q, tau_ref, omega) = self.mode.denormalize(&self.normalizer, eta);
        let tau = electromagnetic_torque(i_d, i_q, &self.params);
        let stage_cost = self.cost.state_cost(tau, tau_ref, i_d) + self.cost.control_cost(u.0, u.1);
        let (nd, nq) = predict_next_state(i_d, i_q, omega, u.0, u.1, &self.params);
        let mut next = [0.0; 4];
        self.mode.normalize_into(&self.normalizer, nd, nq, tau_ref, omega, &mut next);
        Transition { stage_cost, next }
    }
}
