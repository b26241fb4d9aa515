use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::scenario::{ControllerSpec, Scenario};
use super::trace::{SimTrace, TraceRecord};
use crate::basis::WeightSet;
use crate::control::{
    svm_apply, AdpController, DtcGains, DtcSvmController, FocController, FocGains, Measurement, SpeedLoopGains,
    SpeedLoopPI, TorqueController,
};
use crate::error::{Error, Result};
use crate::motor::{
    abc_to_dq0, dq_to_abc, electrical_angle, electromagnetic_torque, plant_step, AbcTriple, DriveState, MotorParams,
};

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Debug, thiserror::Error)]
#[error("scenario aborted at t = {:.6} s: {error}", partial.duration())]
pub struct RunAbort {
    pub partial: SimTrace,
    #[source]
    pub error: Error,
}

impl From<RunAbort> for Error {
    fn from(a: RunAbort) -> Self {
        a.error
    }
}

/// Builds the torque controller a scenario asks for. ADP needs `weights`,
/// either passed in or loaded from the path in the scenario.
pub fn build_controller(
    spec: &ControllerSpec,
    model: &MotorParams,
    weights: Option<&WeightSet>,
) -> Result<Box<dyn TorqueController + Send>> {
    Ok(match spec {
        ControllerSpec::Adp { weights: path } => {
            let w = match (weights, path) {
                (Some(w), _) => w.clone(),
                (None, Some(p)) => WeightSet::load(p)?,
                (None, None) => return Err(Error::invalid("controller", "ADP scenario needs a weight file")),
            };
            Box::new(AdpController::new(w, model)?)
        }
        ControllerSpec::Foc { gains, bandwidth_hz } => {
            Box::new(FocController::new(model, gains.unwrap_or_else(|| FocGains::from_bandwidth(model, *bandwidth_hz))))
        }
        ControllerSpec::DtcSvm { gains, bandwidth_hz } => Box::new(DtcSvmController::new(
            model,
            gains.unwrap_or_else(|| DtcGains::from_bandwidth(model, *bandwidth_hz)),
        )),
    })
}

/// Runs a scenario, loading ADP weights from the scenario's path.
pub fn run_scenario(sc: &Scenario, seed: u64) -> std::result::Result<SimTrace, RunAbort> {
    run_scenario_with(sc, None, seed)
}

/// Runs a scenario. Each period: measure (phase currents → dq), speed PI →
/// τ*, controller → voltage command, modulation, then the plant advances
/// by one period under the load profile.
pub fn run_scenario_with(
    sc: &Scenario,
    weights: Option<&WeightSet>,
    seed: u64,
) -> std::result::Result<SimTrace, RunAbort> {
    let abort = |partial: SimTrace, error: Error| RunAbort { partial, error };
    let r = sc.resolve().map_err(|e| abort(SimTrace::default(), e))?;
    let ts = r.model.sampling_time_s;
    let mut trace = SimTrace { ts, records: Vec::with_capacity(r.steps + 1) };
    let mut ctrl = match build_controller(&sc.controller, &r.model, weights) {
        Ok(c) => c,
        Err(e) => return Err(abort(trace, e)),
    };
    let gains = sc.speed_loop.unwrap_or_else(|| SpeedLoopGains::default_for(&r.model));
    let mut speed_pi = SpeedLoopPI::new(gains, r.model.max_torque_nm);

    let noise_std = sc.sensors.current_noise_a;
    let noise = Normal::new(0.0, noise_std).map_err(|e| abort(SimTrace::default(), Error::invalid("noise", e.to_string())))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let init = sc.initial;
    let mut s = DriveState { i_d: init.i_d, i_q: init.i_q, omega_m: init.omega_m, theta_m: init.theta_m, t: 0.0 };
    let mut omega_filtered = s.omega_m;
    let dt_plant = ts / sc.substeps as f64;

    for k in 0..=r.steps {
        let t = k as f64 * ts;
        s.t = t;

        // phase-current measurement path; i_c is reconstructed
        let theta_e = electrical_angle(s.theta_m, r.plant.pole_pairs);
        let abc = dq_to_abc(s.i_d, s.i_q, theta_e);
        let (mut i_a, mut i_b) = (abc.a, abc.b);
        if noise_std > 0.0 {
            i_a += noise.sample(&mut rng);
            i_b += noise.sample(&mut rng);
        }
        let meas_dq = abc_to_dq0(AbcTriple::new(i_a, i_b, -i_a - i_b), theta_e);
        let omega_meas = match sc.sensors.speed_filter_s {
            Some(tau) => {
                omega_filtered += (s.omega_m - omega_filtered) * (ts / (tau + ts));
                omega_filtered
            }
            None => s.omega_m,
        };
        let m = Measurement { i_d: meas_dq.d, i_q: meas_dq.q, omega_m: omega_meas, theta_m: s.theta_m };

        let tau_ref = speed_pi.step(r.speed_ref.at(t), omega_meas, ts);
        let cmd = ctrl.command(&m, tau_ref, ts);
        let out = svm_apply(&cmd, theta_e, r.plant.dc_bus_v);

        trace.records.push(TraceRecord {
            t,
            i_d: s.i_d,
            i_q: s.i_q,
            omega_m: s.omega_m,
            tau_em: electromagnetic_torque(s.i_d, s.i_q, &r.plant),
            tau_ref,
            v_d: out.v_d,
            v_q: out.v_q,
            saturated: cmd.saturated,
            out_of_omega: ctrl.out_of_region(),
        });
        if k == r.steps {
            break;
        }

        let tau_load = r.load.at(t);
        for _ in 0..sc.substeps {
            s = match plant_step(&s, out.v_d, out.v_q, tau_load, &r.plant, dt_plant) {
                Ok(next) => next,
                Err(e) => return Err(abort(trace, e)),
            };
        }
    }
    Ok(trace)
}
