use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::pi::Pi;
use super::svm::ControlCommand;
use crate::basis::WeightSet;
use crate::error::{Error, Result};
use crate::motor::MotorParams;
use crate::trainer::TrainingMode;

/// What every controller sees each period: measured dq currents, rotor
/// speed and angle.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Measurement {
    pub i_d: f64,
    pub i_q: f64,
    pub omega_m: f64,
    pub theta_m: f64,
}

/// Inner (torque-producing) loop of a drive.
pub trait TorqueController {
    /// Voltage command for torque reference `tau_ref` over a period of `dt`.
    fn command(&mut self, m: &Measurement, tau_ref: f64, dt: f64) -> ControlCommand;

    /// True when the last command was evaluated outside the controller's
    /// validity region.
    fn out_of_region(&self) -> bool {
        false
    }

    fn reset(&mut self) {}
}

/// Actor-network controller: `u = W_aᵀσ(η)`.
#[derive(Debug, Clone)]
pub struct AdpController {
    weights: WeightSet,
    v_max: f64,
    half_width: f64,
    last_out_of_region: bool,
}

impl AdpController {
    pub fn new(weights: WeightSet, model: &MotorParams) -> Result<Self> {
        weights.validate()?;
        if weights.mode != TrainingMode::Full {
            return Err(Error::invalid("ADP controller", "weights must be trained in full mode"));
        }
        let half_width = weights.provenance.as_ref().map_or(1.5, |p| p.config.half_width);
        Ok(Self {
            weights,
            v_max: model.max_phase_voltage(),
            half_width,
            last_out_of_region: false,
        })
    }

    pub fn weights(&self) -> &WeightSet {
        &self.weights
    }

    /// Multiply-adds per evaluation: normalization, feature products and
    /// the two output dot products. Independent of the state.
    pub fn multiply_adds(&self) -> usize {
        4 + self.weights.actor_basis.eval_multiplies() + 2 * self.weights.actor_basis.len()
    }
}

impl TorqueController for AdpController {
    fn command(&mut self, m: &Measurement, tau_ref: f64, _dt: f64) -> ControlCommand {
        let eta = self.weights.normalizer.normalize(m.i_d, m.i_q, tau_ref, m.omega_m);
        self.last_out_of_region = eta.iter().any(|v| v.abs() > self.half_width);
        // the actor basis is 4-dimensional, checked in new()
        let (v_d, v_q) = self.weights.action(&eta).unwrap_or((0.0, 0.0));
        ControlCommand::new(v_d, v_q, self.v_max)
    }

    fn out_of_region(&self) -> bool {
        self.last_out_of_region
    }
}

/// Current-loop PI gains of the FOC baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FocGains {
    pub kp_d: f64,
    pub ki_d: f64,
    pub kp_q: f64,
    pub ki_q: f64,
}

pub const DEFAULT_CURRENT_BANDWIDTH_HZ: f64 = 2500.0;

impl FocGains {
    /// Pole-zero cancellation on the RL plant: `kp = L·ωc`, `ki = Rs·ωc`.
    pub fn from_bandwidth(p: &MotorParams, hz: f64) -> Self {
        let wc = TAU * hz;
        Self {
            kp_d: p.inductance_d_h * wc,
            ki_d: p.stator_resistance_ohm * wc,
            kp_q: p.inductance_q_h * wc,
            ki_q: p.stator_resistance_ohm * wc,
        }
    }
}

/// Field-oriented control: `i_d* = 0`, `i_q* = τ*/(1.5·P·λm)`, PI current
/// loops with cross-coupling and back-EMF compensation.
#[derive(Debug, Clone)]
pub struct FocController {
    model: MotorParams,
    pi_d: Pi,
    pi_q: Pi,
}

impl FocController {
    pub fn new(model: &MotorParams, gains: FocGains) -> Self {
        let v_max = model.max_phase_voltage();
        Self {
            model: *model,
            pi_d: Pi::new(gains.kp_d, gains.ki_d, v_max),
            pi_q: Pi::new(gains.kp_q, gains.ki_q, v_max),
        }
    }

    pub fn current_reference(&self, tau_ref: f64) -> (f64, f64) {
        let i_max = self.model.max_current_amplitude();
        (0.0, (tau_ref / self.model.torque_constant()).clamp(-i_max, i_max))
    }

    pub fn integrals(&self) -> (f64, f64) {
        (self.pi_d.integral(), self.pi_q.integral())
    }

    pub fn set_integrals(&mut self, d: f64, q: f64) {
        self.pi_d.set_integral(d);
        self.pi_q.set_integral(q);
    }
}

impl TorqueController for FocController {
    fn command(&mut self, m: &Measurement, tau_ref: f64, dt: f64) -> ControlCommand {
        let p = &self.model;
        let (id_ref, iq_ref) = self.current_reference(tau_ref);
        let pw = f64::from(p.pole_pairs) * m.omega_m;
        let ff_d = -p.inductance_q_h * pw * m.i_q;
        let ff_q = p.inductance_d_h * pw * m.i_d + p.magnet_flux_wb * pw;
        let (u_d, _) = self.pi_d.step(id_ref - m.i_d, dt);
        let (u_q, _) = self.pi_q.step(iq_ref - m.i_q, dt);
        let cmd = ControlCommand::new(u_d + ff_d, u_q + ff_q, p.max_phase_voltage());
        if cmd.saturated {
            // hold the integrators where they were before this step
            self.pi_d.set_integral(self.pi_d.integral() - (id_ref - m.i_d) * dt);
            self.pi_q.set_integral(self.pi_q.integral() - (iq_ref - m.i_q) * dt);
        }
        cmd
    }

    fn reset(&mut self) {
        self.pi_d.reset();
        self.pi_q.reset();
    }
}

/// Torque and flux PI gains of the DTC-SVM baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtcGains {
    pub kp_torque: f64,
    pub ki_torque: f64,
    pub kp_flux: f64,
    pub ki_flux: f64,
    /// Stator flux magnitude reference at zero torque, Wb.
    pub flux_ref: f64,
    /// Raise the flux reference with torque to `|(λ₀, L_q·i_q*)|`, the flux of
    /// the `i_d = 0` operating point. With a constant `λm` reference the
    /// pull-out torque is only `1.5·P·λm²/L_q`.
    #[serde(default = "yes")]
    pub torque_dependent_flux: bool,
    /// Add the rotational EMF `ω_e·|λ|` to the torque-axis voltage. Off by
    /// default: the torque PI then supplies the back-EMF itself.
    #[serde(default)]
    pub emf_feedforward: bool,
}

fn yes() -> bool {
    true
}

impl DtcGains {
    /// Same closed-loop bandwidth as the FOC current loops, mapped through
    /// the torque sensitivity `1.5·P·λ/L` of the stator-flux frame.
    pub fn from_bandwidth(p: &MotorParams, hz: f64) -> Self {
        let wc = TAU * hz;
        let l = p.inductance_q_h;
        let sens = 1.5 * f64::from(p.pole_pairs) * p.magnet_flux_wb;
        Self {
            kp_torque: l * wc / sens,
            ki_torque: p.stator_resistance_ohm * wc / sens,
            kp_flux: wc,
            ki_flux: wc * p.stator_resistance_ohm / l,
            flux_ref: p.magnet_flux_wb,
            torque_dependent_flux: true,
            emf_feedforward: false,
        }
    }
}

/// Stator-flux estimate `(λ_d, λ_q) = (L_d·i_d + λm, L_q·i_q)` from model params.
pub fn estimate_flux(i_d: f64, i_q: f64, model: &MotorParams) -> (f64, f64) {
    (model.inductance_d_h * i_d + model.magnet_flux_wb, model.inductance_q_h * i_q)
}

/// PI-based DTC with space-vector modulation: torque and flux errors are
/// regulated in stator-flux coordinates on top of a resistive feed-forward,
/// then rotated back to dq.
#[derive(Debug, Clone)]
pub struct DtcSvmController {
    model: MotorParams,
    flux_ref: f64,
    torque_dependent_flux: bool,
    emf_feedforward: bool,
    pi_torque: Pi,
    pi_flux: Pi,
}

impl DtcSvmController {
    pub fn new(model: &MotorParams, gains: DtcGains) -> Self {
        let v_max = model.max_phase_voltage();
        Self {
            model: *model,
            flux_ref: gains.flux_ref,
            torque_dependent_flux: gains.torque_dependent_flux,
            emf_feedforward: gains.emf_feedforward,
            pi_torque: Pi::new(gains.kp_torque, gains.ki_torque, v_max),
            pi_flux: Pi::new(gains.kp_flux, gains.ki_flux, v_max),
        }
    }

    /// Torque estimate from the model flux, `1.5·P·(λ_d·i_q − λ_q·i_d)`.
    pub fn estimate_torque(&self, i_d: f64, i_q: f64) -> f64 {
        let (ld, lq) = estimate_flux(i_d, i_q, &self.model);
        1.5 * f64::from(self.model.pole_pairs) * (ld * i_q - lq * i_d)
    }

    pub fn flux_reference(&self, tau_ref: f64) -> f64 {
        if self.torque_dependent_flux {
            let iq = tau_ref / (1.5 * f64::from(self.model.pole_pairs) * self.flux_ref);
            self.flux_ref.hypot(self.model.inductance_q_h * iq)
        } else {
            self.flux_ref
        }
    }
}

impl TorqueController for DtcSvmController {
    fn command(&mut self, m: &Measurement, tau_ref: f64, dt: f64) -> ControlCommand {
        let p = &self.model;
        // same current limit as the FOC reference clamp
        let limit = p.current_limited_torque();
        let tau_ref = tau_ref.clamp(-limit, limit);
        let (fd, fq) = estimate_flux(m.i_d, m.i_q, p);
        let flux = fd.hypot(fq);
        let (s, c) = if flux > 0.0 { (fq / flux, fd / flux) } else { (0.0, 1.0) };
        let i_x = c * m.i_d + s * m.i_q;
        let i_y = -s * m.i_d + c * m.i_q;
        let w_e = f64::from(p.pole_pairs) * m.omega_m;
        let e_torque = tau_ref - self.estimate_torque(m.i_d, m.i_q);
        let e_flux = self.flux_reference(tau_ref) - flux;
        let (dv_x, _) = self.pi_flux.step(e_flux, dt);
        let (dv_y, _) = self.pi_torque.step(e_torque, dt);
        let v_x = p.stator_resistance_ohm * i_x + dv_x;
        let emf = if self.emf_feedforward { w_e * flux } else { 0.0 };
        let v_y = p.stator_resistance_ohm * i_y + emf + dv_y;
        let cmd = ControlCommand::new(c * v_x - s * v_y, s * v_x + c * v_y, p.max_phase_voltage());
        if cmd.saturated {
            self.pi_flux.set_integral(self.pi_flux.integral() - e_flux * dt);
            self.pi_torque.set_integral(self.pi_torque.integral() - e_torque * dt);
        }
        cmd
    }

    fn reset(&mut self) {
        self.pi_torque.reset();
        self.pi_flux.reset();
    }
}
