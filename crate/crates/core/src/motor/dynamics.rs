//! Continuous-time dq model of the machine and its fixed-step integration.

use super::params::MotorParams;
use super::transforms::wrap_angle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DriveState {
    pub i_d: f64,
    pub i_q: f64,
    /// Mechanical rotor speed, rad/s.
    pub omega_m: f64,
    /// Mechanical rotor angle, wrapped to `[0, 2π)`.
    pub theta_m: f64,
    pub t: f64,
}

impl DriveState {
    pub fn is_finite(&self) -> bool {
        self.i_d.is_finite()
            && self.i_q.is_finite()
            && self.omega_m.is_finite()
            && self.theta_m.is_finite()
            && self.t.is_finite()
    }
}

pub fn electromagnetic_torque(i_d: f64, i_q: f64, p: &MotorParams) -> f64 {
    let pp = f64::from(p.pole_pairs);
    1.5 * pp * ((p.inductance_d_h - p.inductance_q_h) * i_d * i_q + p.magnet_flux_wb * i_q)
}

/// `(di_d/dt, di_q/dt)` of the dq voltage equations.
pub fn current_derivatives(
    i_d: f64,
    i_q: f64,
    omega_m: f64,
    v_d: f64,
    v_q: f64,
    p: &MotorParams,
) -> (f64, f64) {
    let pw = f64::from(p.pole_pairs) * omega_m;
    let did = (-p.stator_resistance_ohm * i_d + p.inductance_q_h * pw * i_q + v_d) / p.inductance_d_h;
    let diq = (-p.stator_resistance_ohm * i_q - p.inductance_d_h * pw * i_d - p.magnet_flux_wb * pw + v_q)
        / p.inductance_q_h;
    (did, diq)
}

fn speed_derivative(omega_m: f64, tau_em: f64, tau_load: f64, p: &MotorParams) -> f64 {
    (tau_em - p.viscous_friction_nms * omega_m - tau_load) / p.inertia_kgm2
}

/// One explicit-Euler step of the torque balance alone.
pub fn mechanical_step(s: &DriveState, tau_em: f64, tau_load: f64, p: &MotorParams, dt: f64) -> DriveState {
    let domega = speed_derivative(s.omega_m, tau_em, tau_load, p);
    DriveState {
        omega_m: s.omega_m + dt * domega,
        theta_m: wrap_angle(s.theta_m + dt * s.omega_m),
        t: s.t + dt,
        ..*s
    }
}

fn full_derivative(x: &[f64; 4], v_d: f64, v_q: f64, tau_load: f64, p: &MotorParams) -> [f64; 4] {
    let [i_d, i_q, omega, _theta] = *x;
    let (did, diq) = current_derivatives(i_d, i_q, omega, v_d, v_q, p);
    let tau = electromagnetic_torque(i_d, i_q, p);
    [did, diq, speed_derivative(omega, tau, tau_load, p), omega]
}

/// Advances the coupled electrical and mechanical dynamics by `dt` with one
/// classical fourth-order Runge-Kutta step, voltages and load held constant.
pub fn plant_step(
    s: &DriveState,
    v_d: f64,
    v_q: f64,
    tau_load: f64,
    p: &MotorParams,
    dt: f64,
) -> Result<DriveState> {
    debug_assert!(dt > 0.0);
    let x = [s.i_d, s.i_q, s.omega_m, s.theta_m];
    let add = |a: &[f64; 4], k: &[f64; 4], h: f64| -> [f64; 4] {
        [a[0] + h * k[0], a[1] + h * k[1], a[2] + h * k[2], a[3] + h * k[3]]
    };
    let k1 = full_derivative(&x, v_d, v_q, tau_load, p);
    let k2 = full_derivative(&add(&x, &k1, 0.5 * dt), v_d, v_q, tau_load, p);
    let k3 = full_derivative(&add(&x, &k2, 0.5 * dt), v_d, v_q, tau_load, p);
    let k4 = full_derivative(&add(&x, &k3, dt), v_d, v_q, tau_load, p);
    let mut next = [0.0; 4];
    for i in 0..4 {
        next[i] = x[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    let out = DriveState {
        i_d: next[0],
        i_q: next[1],
        omega_m: next[2],
        theta_m: if next[3].is_finite() { wrap_angle(next[3]) } else { next[3] },
        t: s.t + dt,
    };
    if !out.is_finite() {
        return Err(Error::NonFiniteState { t: out.t });
    }
    Ok(out)
}
