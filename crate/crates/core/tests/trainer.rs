mod common;

use common::{discounted_dare, grid_min, rel, M2};
use pmsm_adp::basis::{Normalizer, PolyBasis};
use pmsm_adp::motor::MotorParams;
use pmsm_adp::trainer::{
    inner_control_iteration, inner_newton_iteration, sample_box, value_iteration, CostSpec, Problem, TrainingConfig,
    TrainingMode, TrainingOutcome,
};

fn regulation_oracle(p: &MotorParams, c: &CostSpec) -> (M2, M2) {
    let a = 1.0 - p.sampling_time_s * p.stator_resistance_ohm / p.inductance_d_h;
    let b = p.sampling_time_s / p.inductance_d_h;
    let kt = p.torque_constant();
    discounted_dare(
        &[[a, 0.0], [0.0, a]],
        &[[b, 0.0], [0.0, b]],
        &[[c.k2, 0.0], [0.0, c.k1 * kt * kt]],
        &[[c.k3, 0.0], [0.0, c.k3]],
        c.gamma,
    )
}

fn train_regulation(c: &CostSpec) -> TrainingOutcome {
    let cfg = TrainingConfig { mode: TrainingMode::Regulation, ..Default::default() };
    value_iteration(&cfg, c, &MotorParams::nominal()).unwrap()
}

/// Physical `P` and `K` recovered from a trained regulation critic/actor.
fn recovered(out: &TrainingOutcome) -> (M2, M2) {
    let w = &out.weights;
    let s = w.normalizer.i_scale;
    let cb = &w.critic_basis;
    let c = |e: [u32; 2]| w.critic[cb.term_index(&e).unwrap()];
    let p = [
        [c([2, 0]) / (s * s), c([1, 1]) / (2.0 * s * s)],
        [c([1, 1]) / (2.0 * s * s), c([0, 2]) / (s * s)],
    ];
    let ab = &w.actor_basis;
    let lin_d = w.actor[ab.term_index(&[1, 0]).unwrap()];
    let lin_q = w.actor[ab.term_index(&[0, 1]).unwrap()];
    let k = [[-lin_d[0] / s, -lin_q[0] / s], [-lin_d[1] / s, -lin_q[1] / s]];
    (p, k)
}

fn check_against_oracle(c: CostSpec) {
    let out = train_regulation(&c);
    let (p, k) = recovered(&out);
    let (p_ref, k_ref) = regulation_oracle(&MotorParams::nominal(), &c);
    for i in 0..2 {
        assert!(rel(p[i][i], p_ref[i][i]) < 0.01, "P[{i}][{i}] {} vs {}", p[i][i], p_ref[i][i]);
        assert!(rel(k[i][i], k_ref[i][i]) < 0.02, "K[{i}][{i}] {} vs {}", k[i][i], k_ref[i][i]);
    }
    // both matrices are diagonal in the oracle
    let pn = p_ref[0][0].max(p_ref[1][1]);
    let kn = k_ref[0][0].max(k_ref[1][1]);
    assert!(p[0][1].abs() < 0.01 * pn && k[0][1].abs() < 0.02 * kn && k[1][0].abs() < 0.02 * kn);
}

#[test]
fn regulation_critic_matches_riccati_published_weights() {
    check_against_oracle(CostSpec::published());
}

#[test]
fn regulation_critic_matches_riccati_cheap_control() {
    check_against_oracle(CostSpec { k3: 1e-4, ..CostSpec::published() });
}

#[test]
fn riccati_oracle_scalar_closed_form() {
    // scalar discounted Riccati: p = q + γa²p − γ²a²b²p²/(r + γb²p)
    let (a, b, q, r, g) = (0.9, 0.3, 2.0, 0.5, 0.7);
    let (p, k) = discounted_dare(&[[a, 0.0], [0.0, a]], &[[b, 0.0], [0.0, b]], &[[q, 0.0], [0.0, q]], &[[r, 0.0], [0.0, r]], g);
    let s = p[0][0];
    let rhs = q + g * a * a * s - g * g * a * a * b * b * s * s / (r + g * b * b * s);
    assert!((s - rhs).abs() < 1e-10 * s);
    assert!((k[0][0] - g * b * s * a / (r + g * b * b * s)).abs() < 1e-12);
}

fn quadratic_critic(basis: &PolyBasis, m: &[[f64; 4]; 4]) -> Vec<f64> {
    let dim = basis.input_dim();
    let mut w = vec![0.0; basis.len()];
    for i in 0..dim {
        for j in i..dim {
            let mut e = vec![0u32; dim];
            e[i] += 1;
            e[j] += 1;
            let coeff = if i == j { m[i][i] } else { m[i][j] + m[j][i] };
            w[basis.term_index(&e).unwrap()] = coeff;
        }
    }
    w
}

#[test]
fn inner_iteration_solves_quadratic_policy_equation() {
    let p = MotorParams::nominal();
    let n = Normalizer::from_params(&p);
    let c = CostSpec { k3: 0.05, ..CostSpec::published() };
    let problem = Problem::new(TrainingMode::Full, n, c, p);
    let basis = PolyBasis::new(4, 3).unwrap();
    let m = [
        [3.0, 0.4, -0.2, 0.1],
        [0.4, 5.0, 0.3, -0.5],
        [-0.2, 0.3, 1.0, 0.0],
        [0.1, -0.5, 0.0, 2.0],
    ];
    let critic = quadratic_critic(&basis, &m);
    let (gd, gq) = problem.input_gain();
    let (bd, bq) = (gd / n.i_scale, gq / n.i_scale);
    let f = c.gamma / c.k3;
    for eta in sample_box(20, 4, 1.5, 11) {
        let x0 = problem.transition(&eta, (0.0, 0.0)).next;
        let mx: Vec<f64> = (0..2).map(|i| (0..4).map(|j| m[i][j] * x0[j]).sum()).collect();
        // (I + f·BᵀM_cB)·u = −f·Bᵀ(M·x0)_c
        let a = [
            [1.0 + f * bd * m[0][0] * bd, f * bd * m[0][1] * bq],
            [f * bq * m[1][0] * bd, 1.0 + f * bq * m[1][1] * bq],
        ];
        let rhs = [-f * bd * mx[0], -f * bq * mx[1]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let u_ref = ((rhs[0] * a[1][1] - a[0][1] * rhs[1]) / det, (a[0][0] * rhs[1] - a[1][0] * rhs[0]) / det);
        let fp = inner_control_iteration(&eta, &critic, &basis, &problem, (0.3, -0.7), 1e-10, 500).unwrap();
        let nt = inner_newton_iteration(&eta, &critic, &basis, &problem, (0.3, -0.7), 1e-10, 50).unwrap();
        for u in [fp.u, nt.u] {
            let scale = u_ref.0.abs().max(u_ref.1.abs()).max(1.0);
            assert!((u.0 - u_ref.0).abs() < 1e-8 * scale && (u.1 - u_ref.1).abs() < 1e-8 * scale, "{u:?} vs {u_ref:?}");
        }
    }
}

#[test]
fn inner_iteration_independent_of_initial_guess() {
    let p = MotorParams::nominal();
    let cfg = TrainingConfig::default();
    let c = CostSpec { k3: 1e-3, ..CostSpec::published() };
    let critic_out = value_iteration(&TrainingConfig { sample_count: 400, ..cfg.clone() }, &c, &p).unwrap();
    let w = &critic_out.weights;
    let problem = Problem::new(TrainingMode::Full, w.normalizer, c, p);
    for eta in sample_box(50, 4, 1.5, 3) {
        let a = inner_control_iteration(&eta, &w.critic, &w.critic_basis, &problem, (40.0, -40.0), cfg.beta_u, 2000).unwrap();
        let b = inner_control_iteration(&eta, &w.critic, &w.critic_basis, &problem, (-25.0, 10.0), cfg.beta_u, 2000).unwrap();
        assert!((a.u.0 - b.u.0).abs() < 10.0 * cfg.beta_u && (a.u.1 - b.u.1).abs() < 10.0 * cfg.beta_u);
    }
}

#[test]
fn myopic_discount_gives_stage_cost() {
    let p = MotorParams::nominal();
    let c = CostSpec { gamma: 0.0, ..CostSpec::published() };
    let out = value_iteration(&TrainingConfig { sample_count: 500, ..Default::default() }, &c, &p).unwrap();
    let w = &out.weights;
    let problem = Problem::new(TrainingMode::Full, w.normalizer, c, p);
    for eta in sample_box(50, 4, 1.5, 5) {
        let q = problem.transition(&eta, (0.0, 0.0)).stage_cost;
        assert!((w.value(&eta).unwrap() - q).abs() < 1e-9 * q.max(1.0));
        let u = w.action(&eta).unwrap();
        assert!(u.0.abs() < 1e-9 && u.1.abs() < 1e-9);
    }
}

#[test]
fn zero_state_weights_give_zero_critic() {
    let c = CostSpec { k1: 0.0, k2: 0.0, ..CostSpec::published() };
    let out = value_iteration(&TrainingConfig { sample_count: 500, ..Default::default() }, &c, &MotorParams::nominal()).unwrap();
    assert!(out.weights.critic.iter().all(|w| w.abs() < 1e-12));
    assert!(out.weights.actor.iter().flatten().all(|w| w.abs() < 1e-12));
    assert_eq!(out.report.converged_after, 1);
}

#[test]
fn training_is_deterministic() {
    let cfg = TrainingConfig { sample_count: 1000, ..Default::default() };
    let c = CostSpec::published();
    let p = MotorParams::nominal();
    let a = value_iteration(&cfg, &c, &p).unwrap();
    let b = value_iteration(&cfg, &c, &p).unwrap();
    assert_eq!(a.weights.to_json().unwrap(), b.weights.to_json().unwrap());
}

#[test]
fn value_iterates_increase_from_zero() {
    let out = value_iteration(&TrainingConfig::default(), &CostSpec::published(), &MotorParams::nominal()).unwrap();
    // V⁰ = 0 ≤ V¹ ≤ ... up to the least-squares fit error of each iterate
    for w in out.report.iterations.windows(2) {
        let tol = 2.0 * w[0].critic_fit_max_error + 1e-9;
        assert!(w[1].min_value_increment >= -tol, "{:?}", w[1]);
    }
}

#[test]
fn actor_close_to_grid_optimum() {
    let p = MotorParams::nominal();
    let c = CostSpec::published();
    let out = value_iteration(&TrainingConfig::default(), &c, &p).unwrap();
    let w = &out.weights;
    let problem = Problem::new(TrainingMode::Full, w.normalizer, c, p);
    let q_value = |eta: &[f64], u: (f64, f64)| {
        let tr = problem.transition(eta, u);
        tr.stage_cost + c.gamma * w.value(&tr.next).unwrap()
    };
    for eta in sample_box(20, 4, 1.5, 99) {
        let u = w.action(&eta).unwrap();
        let j = q_value(&eta, u);
        let (best, _) = grid_min(p.max_phase_voltage(), 0.25, |x, y| q_value(&eta, (x, y)));
        assert!(j <= best + 1e-3 * best.max(1.0), "actor {j} vs grid {best}");
    }
}
