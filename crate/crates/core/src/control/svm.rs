//! Averaged space-vector modulator.

use std::f64::consts::FRAC_PI_3;

use crate::motor::dq_to_alpha_beta;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControlCommand {
    /// Requested voltages before the voltage limit.
    pub v_d: f64,
    pub v_q: f64,
    /// Voltages after radial clamping to the modulation disk.
    pub v_d_sat: f64,
    pub v_q_sat: f64,
    pub saturated: bool,
}

impl ControlCommand {
    pub fn new(v_d: f64, v_q: f64, v_max: f64) -> Self {
        let (v_d_sat, v_q_sat, saturated) = clamp_to_disk(v_d, v_q, v_max);
        Self { v_d, v_q, v_d_sat, v_q_sat, saturated }
    }
}

/// Scales `(x, y)` radially onto the disk of radius `r` when outside it.
pub fn clamp_to_disk(x: f64, y: f64, r: f64) -> (f64, f64, bool) {
    let m = x.hypot(y);
    if m <= r {
        (x, y, false)
    } else {
        let k = r / m;
        (x * k, y * k, true)
    }
}

/// Duty ratios of one modulation period.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SvmDuties {
    /// Sector 0..=5; sector `k` spans `[k·60°, (k+1)·60°)`.
    pub sector: u8,
    /// Leading active vector (at `sector·60°`).
    pub first: f64,
    /// Trailing active vector (at `(sector+1)·60°`).
    pub second: f64,
    pub zero: f64,
}

/// Duty ratios realizing the stationary-frame vector `(v_α, v_β)` with
/// active vectors of length `2/3·Vdc`. Vectors beyond the hexagon give
/// a negative zero-vector duty.
pub fn svm_duties(v_alpha: f64, v_beta: f64, vdc: f64) -> SvmDuties {
    let m = v_alpha.hypot(v_beta);
    if m == 0.0 {
        return SvmDuties { sector: 0, first: 0.0, second: 0.0, zero: 1.0 };
    }
    let angle = v_beta.atan2(v_alpha).rem_euclid(std::f64::consts::TAU);
    let sector = ((angle / FRAC_PI_3).floor() as u8).min(5);
    let phi = angle - f64::from(sector) * FRAC_PI_3;
    let active = 2.0 / 3.0 * vdc;
    let k = m / (active * FRAC_PI_3.sin());
    let first = k * (FRAC_PI_3 - phi).sin();
    let second = k * phi.sin();
    SvmDuties { sector, first, second, zero: 1.0 - first - second }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SvmOutput {
    /// Averaged dq voltage delivered to the machine.
    pub v_d: f64,
    pub v_q: f64,
    pub duties: SvmDuties,
}

/// Realizes a command through the averaged inverter: radial clamp to the
/// linear-modulation disk `Vdc/√3`, then duty computation.
pub fn svm_apply(cmd: &ControlCommand, theta_e: f64, vdc: f64) -> SvmOutput {
    let (v_d, v_q, _) = clamp_to_disk(cmd.v_d_sat, cmd.v_q_sat, vdc / 3f64.sqrt());
    let (a, b) = dq_to_alpha_beta(v_d, v_q, theta_e);
    SvmOutput { v_d, v_q, duties: svm_duties(a, b, vdc) }
}
