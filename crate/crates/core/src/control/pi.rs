use serde::{Deserialize, Serialize};

/// Discrete PI with output clamping and conditional integration: the
/// integrator only moves when doing so does not push a clamped output
/// further into saturation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pi {
    pub kp: f64,
    pub ki: f64,
    pub limit: f64,
    #[serde(skip)]
    integral: f64,
}

impl Pi {
    pub fn new(kp: f64, ki: f64, limit: f64) -> Self {
        Self { kp, ki, limit, integral: 0.0 }
    }

    /// Accumulated `∫e dt`.
    pub fn integral(&self) -> f64 {
        self.integral
    }

    pub fn set_integral(&mut self, v: f64) {
        self.integral = v;
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
    }

    /// Returns `(clamped output, clamped?)`.
    pub fn step(&mut self, error: f64, dt: f64) -> (f64, bool) {
        let candidate = self.integral + error * dt;
        let raw = self.kp * error + self.ki * candidate;
        let clamped = raw.clamp(-self.limit, self.limit);
        let saturated = clamped != raw;
        if !saturated || raw.signum() != error.signum() {
            self.integral = candidate;
        }
        (clamped, saturated)
    }
}

/// Speed regulator producing the torque reference shared by every
/// controller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedLoopPI {
    pub pi: Pi,
}

/// Speed-loop gains and limit as stored in scenario files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpeedLoopGains {
    pub kp: f64,
    pub ki: f64,
    /// Torque limit; the motor's maximum torque when absent.
    #[serde(default)]
    pub torque_limit: Option<f64>,
}

impl SpeedLoopGains {
    /// Pole placement for the rigid-body loop `J·s² + kp·s + ki` with
    /// natural frequency `omega_n` and damping `zeta`.
    pub fn from_poles(inertia: f64, omega_n: f64, zeta: f64) -> Self {
        Self {
            kp: 2.0 * zeta * omega_n * inertia,
            ki: omega_n * omega_n * inertia,
            torque_limit: None,
        }
    }

    /// Default tuning: about 5 % overshoot on the nominal machine with an
    /// ideal torque loop and no load.
    pub fn default_for(p: &crate::motor::MotorParams) -> Self {
        Self::from_poles(p.inertia_kgm2, DEFAULT_SPEED_OMEGA_N, DEFAULT_SPEED_ZETA)
    }
}

pub const DEFAULT_SPEED_OMEGA_N: f64 = 200.0;
// the PI zero adds overshoot: ζ = 1.945 gives 5 % for (2ζωs + ω²)/(s² + 2ζωs + ω²)
pub const DEFAULT_SPEED_ZETA: f64 = 1.945;

impl SpeedLoopPI {
    pub fn new(gains: SpeedLoopGains, max_torque: f64) -> Self {
        Self {
            pi: Pi::new(gains.kp, gains.ki, gains.torque_limit.unwrap_or(max_torque)),
        }
    }

    pub fn step(&mut self, omega_ref: f64, omega_m: f64, dt: f64) -> f64 {
        self.pi.step(omega_ref - omega_m, dt).0
    }

    pub fn reset(&mut self) {
        self.pi.reset();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::motor::MotorParams;

    #[test]
    fn zero_error_outputs_integral_term() {
        let mut s = SpeedLoopPI::new(SpeedLoopGains { kp: 0.01, ki: 2.0, torque_limit: None }, 1.91);
        assert_eq!(s.step(100.0, 100.0, 1e-3), 0.0);
        s.pi.set_integral(0.1);
        assert!((s.step(100.0, 100.0, 1e-3) - 0.2).abs() < 1e-15);
    }

    #[test]
    fn clamps_at_max_torque() {
        let mut s = SpeedLoopPI::new(SpeedLoopGains::default_for(&MotorParams::nominal()), 1.91);
        assert_eq!(s.step(314.0, 0.0, 40e-6), 1.91);
        assert_eq!(s.step(-314.0, 0.0, 40e-6), -1.91);
    }

    #[test]
    fn integrator_frozen_while_clamped() {
        let mut s = SpeedLoopPI::new(SpeedLoopGains { kp: 1.0, ki: 1.0, torque_limit: Some(1.0) }, 1.91);
        for _ in 0..1000 {
            assert_eq!(s.step(10.0, 0.0, 1e-3), 1.0);
        }
        assert_eq!(s.pi.integral(), 0.0);
        // unwinding is still allowed when the error reverses
        s.pi.set_integral(5.0);
        s.step(-0.5, 0.0, 1e-3);
        assert!(s.pi.integral() < 5.0);
    }

    // Simulated step response of the rigid-body loop with an ideal torque
    // source: the default tuning overshoots by about 5 %.
    #[test]
    fn default_tuning_overshoot() {
        let p = MotorParams::nominal();
        let g = SpeedLoopGains::default_for(&p);
        let mut s = SpeedLoopPI::new(SpeedLoopGains { torque_limit: Some(1e9), ..g }, 1e9);
        let dt = 1e-6;
        let mut w = 0.0;
        let mut peak: f64 = 0.0;
        for _ in 0..200_000 {
            let tau = s.step(1.0, w, dt);
            w += dt * tau / p.inertia_kgm2;
            peak = peak.max(w);
        }
        assert!((peak - 1.05).abs() < 0.01, "peak {peak}");
    }
}
