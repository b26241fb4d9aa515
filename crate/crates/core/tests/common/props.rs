//! Numerical property checks; each returns a one-line detail or the first violation.

use pmsm_adp::basis::PolyBasis;
use pmsm_adp::motor::{abc_to_dq0, dq_to_abc, plant_step, DriveState, MotorParams, ParamsSource};
use pmsm_adp::sim::{
    itae, run_scenario, ControllerSpec, InitialState, Profile, Scenario, SensorSpec, Signal, SimTrace, SpeedUnit,
    TraceRecord,
};
use pmsm_adp::trainer::sample_box;

pub type Check = Result<String, String>;

pub fn transform_round_trip() -> Check {
    let mut worst = 0.0f64;
    for (k, s) in sample_box(2000, 3, 1.0, 21).iter().enumerate() {
        let (d, q) = (50.0 * s[0], 50.0 * s[1]);
        let theta = std::f64::consts::PI * (s[2] + 1.0) + k as f64 * 1e-3;
        let back = abc_to_dq0(dq_to_abc(d, q, theta), theta);
        let err = (back.d - d).abs().max((back.q - q).abs()).max(back.zero.abs());
        worst = worst.max(err / d.abs().max(q.abs()).max(1.0));
    }
    if worst <= 1e-12 {
        Ok(format!("worst relative error {worst:.2e}"))
    } else {
        Err(format!("round-trip error {worst:.2e} > 1e-12"))
    }
}

pub fn basis_gradient_matches_finite_differences() -> Check {
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (dim, degree) in [(2, 3), (4, 2), (4, 3)] {
        let basis = PolyBasis::new(dim, degree).map_err(|e| e.to_string())?;
        for eta in sample_box(200, dim, 1.5, 31 + dim as u64) {
            let jac = basis.gradient(&eta).map_err(|e| e.to_string())?;
            for j in 0..dim {
                let (mut up, mut dn) = (eta.clone(), eta.clone());
                up[j] += h;
                dn[j] -= h;
                let fu = basis.eval(&up).map_err(|e| e.to_string())?;
                let fd = basis.eval(&dn).map_err(|e| e.to_string())?;
                for k in 0..basis.len() {
                    let numeric = (fu[k] - fd[k]) / (2.0 * h);
                    let exact = jac[k * dim + j];
                    worst = worst.max((numeric - exact).abs() / exact.abs().max(1.0));
                }
            }
        }
    }
    if worst <= 1e-6 {
        Ok(format!("worst relative error {worst:.2e}"))
    } else {
        Err(format!("gradient mismatch {worst:.2e} > 1e-6"))
    }
}

fn integrate(h: f64, steps: usize) -> DriveState {
    let p = MotorParams::nominal();
    let mut s = DriveState { i_d: 1.0, i_q: 2.0, omega_m: 150.0, theta_m: 0.3, t: 0.0 };
    for _ in 0..steps {
        s = plant_step(&s, -8.0, 30.0, 0.2, &p, h).unwrap();
    }
    s
}

fn state_error(a: &DriveState, b: &DriveState) -> f64 {
    (a.i_d - b.i_d).abs().max((a.i_q - b.i_q).abs()).max((a.omega_m - b.omega_m).abs())
}

/// Error ratio when halving the step; fourth order gives 16.
pub fn rk4_order() -> Check {
    let (h, n) = (2e-4, 20);
    let reference = integrate(h / 64.0, n * 64);
    let e1 = state_error(&integrate(h, n), &reference);
    let e2 = state_error(&integrate(h / 2.0, 2 * n), &reference);
    let ratio = e1 / e2;
    if (ratio - 16.0).abs() <= 0.3 * 16.0 {
        Ok(format!("error ratio {ratio:.2}"))
    } else {
        Err(format!("error ratio {ratio:.2} (errors {e1:.2e}, {e2:.2e}) not within 30% of 16"))
    }
}

/// Constant error `e` on `[0, T]`: sampled ITAE vs `e·T²/2`.
pub fn itae_closed_form() -> Check {
    let ts = 40e-6;
    let mut worst = 0.0f64;
    for (e, duration) in [(0.5f64, 0.2f64), (3.0, 1.0), (-2.0, 0.37)] {
        let n = (duration / ts).round() as usize;
        let records = (0..=n)
            .map(|k| TraceRecord { t: k as f64 * ts, omega_m: 100.0 + e, ..Default::default() })
            .collect();
        let trace = SimTrace { ts, records };
        let t_end = n as f64 * ts;
        let got = itae(&trace, &Profile::constant(100.0), Signal::Speed);
        let exact = e.abs() * t_end * t_end / 2.0;
        let bound = e.abs() * t_end * ts;
        if (got - exact).abs() > bound {
            return Err(format!("ITAE {got} vs {exact}, bound {bound}"));
        }
        worst = worst.max((got - exact).abs() / bound);
    }
    Ok(format!("worst error {worst:.2} of the one-sample bound"))
}

pub fn short_scenario(controller: ControllerSpec) -> Scenario {
    Scenario {
        name: "short".into(),
        plant: ParamsSource::Preset("nominal".into()),
        controller_model: None,
        controller,
        speed_loop: None,
        speed_unit: SpeedUnit::Rpm,
        speed_ref: Profile::step(0.0, 0.002, 1500.0),
        load: Profile::step(0.0, 0.05, 0.3),
        duration_s: 0.1,
        initial: InitialState::default(),
        substeps: 1,
        sensors: SensorSpec { current_noise_a: 0.02, speed_filter_s: None },
    }
}

pub fn rerun_byte_identical() -> Check {
    for c in [ControllerSpec::foc(), ControllerSpec::dtc_svm()] {
        let sc = short_scenario(c);
        let a = run_scenario(&sc, 7).map_err(|e| e.error.to_string())?.to_csv_string().map_err(|e| e.to_string())?;
        let b = run_scenario(&sc, 7).map_err(|e| e.error.to_string())?.to_csv_string().map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{} reruns differ", sc.controller.name()));
        }
    }
    Ok("FOC and DTC-SVM reruns byte-identical".into())
}

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("transform round trip", transform_round_trip()),
        ("basis gradient", basis_gradient_matches_finite_differences()),
        ("RK4 order", rk4_order()),
        ("ITAE closed form", itae_closed_form()),
        ("determinism", rerun_byte_identical()),
    ]
}
