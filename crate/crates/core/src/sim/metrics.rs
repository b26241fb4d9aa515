use serde::{Deserialize, Serialize};

use super::scenario::Profile;
use super::trace::SimTrace;
use crate::motor::MotorParams;
use crate::trainer::{stage_cost, CostSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    /// `ω_m` against a speed profile.
    Speed,
    /// `τ_em` against a torque profile (the load, for load-step tests).
    Torque,
    /// `τ_em` against the recorded torque reference `τ*`; the profile is ignored.
    TorqueTracking,
}

/// `Σ t_k·|e_k|·Ts` over the whole trace.
pub fn itae(trace: &SimTrace, reference: &Profile, signal: Signal) -> f64 {
    trace
        .records
        .iter()
        .map(|r| {
            let e = match signal {
                Signal::Speed => r.omega_m - reference.at(r.t),
                Signal::Torque => r.tau_em - reference.at(r.t),
                Signal::TorqueTracking => r.tau_em - r.tau_ref,
            };
            r.t * e.abs() * trace.ts
        })
        .sum()
}

/// Discounted cost `Σ γ^k·(Q(x_k, τ*_k) + u_kᵀRu_k)` with the applied voltages.
pub fn realized_cost(trace: &SimTrace, c: &CostSpec, p: &MotorParams) -> f64 {
    let mut discount = 1.0;
    let mut total = 0.0;
    for r in &trace.records {
        total += discount * stage_cost(r.i_d, r.i_q, r.tau_ref, r.v_d, r.v_q, c, p);
        discount *= c.gamma;
        if discount == 0.0 {
            break;
        }
    }
    total
}

/// Speed statistics over a window, in rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedStats {
    pub mean_error: f64,
    pub max_abs_error: f64,
    pub std_dev: f64,
}

pub fn speed_stats(trace: &SimTrace, reference: &Profile, from: f64, to: f64) -> Option<SpeedStats> {
    let w = trace.window(from, to);
    if w.is_empty() {
        return None;
    }
    let n = w.len() as f64;
    let mean_speed = w.iter().map(|r| r.omega_m).sum::<f64>() / n;
    let var = w.iter().map(|r| (r.omega_m - mean_speed).powi(2)).sum::<f64>() / n;
    Some(SpeedStats {
        mean_error: w.iter().map(|r| r.omega_m - reference.at(r.t)).sum::<f64>() / n,
        max_abs_error: w.iter().map(|r| (r.omega_m - reference.at(r.t)).abs()).fold(0.0, f64::max),
        std_dev: var.sqrt(),
    })
}

/// Time after `from` at which the speed enters, and thereafter stays in,
/// a band of `rel_band·|ω_ref|` around the reference. `None` if it never
/// settles before the trace ends.
pub fn recovery_time(trace: &SimTrace, reference: &Profile, from: f64, rel_band: f64) -> Option<f64> {
    let w = trace.window(from, f64::INFINITY);
    let outside = |r: &super::TraceRecord| {
        let wr = reference.at(r.t);
        (r.omega_m - wr).abs() > rel_band * wr.abs()
    };
    match w.iter().rposition(outside) {
        None => Some(0.0),
        Some(k) if k + 1 < w.len() => Some(w[k + 1].t - from),
        Some(_) => None,
    }
}
