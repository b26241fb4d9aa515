use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Problem;
use crate::basis::PolyBasis;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolution {
    pub u: (f64, f64),
    pub iterations: usize,
}

/// Deterministic starting guess for sample `index` in outer iteration `outer`.
pub fn initial_guess(seed: u64, outer: usize, index: usize, range: f64) -> (f64, f64) {
    if range == 0.0 {
        return (0.0, 0.0);
    }
    let stream = ((outer as u64) << 40) ^ index as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    rng.set_stream(stream);
    (rng.random_range(-range..=range), rng.random_range(-range..=range))
}

/// How the per-sample policy equation is solved.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSolver {
    /// Plain successive substitution; converges only while the map is a
    /// contraction, roughly `γ·|g|²·‖∇²V‖/K3 < 1`.
    #[default]
    FixedPoint,
    /// Newton's method on the same equation. Converges for small `K3`
    /// where substitution diverges.
    Newton,
}

/// `∂V/∂η` for the two current inputs.
fn current_gradient(critic: &[f64], basis: &PolyBasis, eta: &[f64], f: &mut [f64], jac: &mut [f64]) -> Result<(f64, f64)> {
    let dim = eta.len();
    basis.eval_with_gradient(eta, f, jac)?;
    let (mut dv_d, mut dv_q) = (0.0, 0.0);
    for (k, w) in critic.iter().enumerate() {
        dv_d += w * jac[k * dim];
        dv_q += w * jac[k * dim + 1];
    }
    Ok((dv_d, dv_q))
}

fn check_inputs(eta: &[f64], problem: &Problem) -> Result<()> {
    let dim = problem.dim();
    if eta.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: eta.len() });
    }
    if problem.cost.k3 <= 0.0 {
        return Err(Error::invalid("cost", "K3 must be > 0 for the policy equation"));
    }
    Ok(())
}

/// Fixed-point iteration `u ← −(γ/2)·R⁻¹·gᵀ·∇V(f + g·u)` for the policy
/// equation at one sample, with `V = W_cᵀφ`.
pub fn inner_control_iteration(
    eta: &[f64],
    critic: &[f64],
    basis: &PolyBasis,
    problem: &Problem,
    init: (f64, f64),
    tolerance: f64,
    max_iterations: usize,
) -> Result<InnerSolution> {
    check_inputs(eta, problem)?;
    let dim = problem.dim();
    let c = &problem.cost;
    let (gd, gq) = problem.input_gain();
    let i_scale = problem.normalizer.i_scale;
    let factor = -0.5 * c.gamma / c.k3;

    let mut f = vec![0.0; basis.len()];
    let mut jac = vec![0.0; basis.len() * dim];
    let mut u = init;
    let mut step = f64::INFINITY;
    for it in 1..=max_iterations {
        let next = problem.transition(eta, u).next;
        let (dv_d, dv_q) = current_gradient(critic, basis, &next[..dim], &mut f, &mut jac)?;
        // chain rule through the current normalization
        let new_u = (factor * gd * dv_d / i_scale, factor * gq * dv_q / i_scale);
        step = (new_u.0 - u.0).abs().max((new_u.1 - u.1).abs());
        u = new_u;
        if !step.is_finite() {
            break;
        }
        if step < tolerance {
            return Ok(InnerSolution { u, iterations: it });
        }
    }
    Err(Error::InnerNoConvergence {
        iterations: max_iterations,
        last_step: step,
    })
}

/// Newton's method on `F(u) = u + (γ/2)·R⁻¹·gᵀ·∇V(f + g·u) = 0`. The
/// Hessian of the critic comes from central differences of its gradient,
/// which are exact for critics up to degree 3.
pub fn inner_newton_iteration(
    eta: &[f64],
    critic: &[f64],
    basis: &PolyBasis,
    problem: &Problem,
    init: (f64, f64),
    tolerance: f64,
    max_iterations: usize,
) -> Result<InnerSolution> {
    check_inputs(eta, problem)?;
    let dim = problem.dim();
    let c = &problem.cost;
    let (gd, gq) = problem.input_gain();
    let i_scale = problem.normalizer.i_scale;
    let factor = -0.5 * c.gamma / c.k3;
    // du → dη for the current inputs
    let b = [gd / i_scale, gq / i_scale];
    const H: f64 = 1e-3;

    let mut f = vec![0.0; basis.len()];
    let mut jac = vec![0.0; basis.len() * dim];
    let mut probe = vec![0.0; dim];
    let mut u = init;
    let mut step = f64::INFINITY;
    for it in 1..=max_iterations {
        let next = problem.transition(eta, u).next;
        let x = &next[..dim];
        let (dv_d, dv_q) = current_gradient(critic, basis, x, &mut f, &mut jac)?;
        let t = (factor * b[0] * dv_d, factor * b[1] * dv_q);
        // Hessian block of V in the two current inputs
        let mut hess = [[0.0; 2]; 2];
        for j in 0..2 {
            probe.copy_from_slice(x);
            probe[j] = x[j] + H;
            let plus = current_gradient(critic, basis, &probe, &mut f, &mut jac)?;
            probe[j] = x[j] - H;
            let minus = current_gradient(critic, basis, &probe, &mut f, &mut jac)?;
            hess[0][j] = (plus.0 - minus.0) / (2.0 * H);
            hess[1][j] = (plus.1 - minus.1) / (2.0 * H);
        }
        // Jacobian of F: I − ∂T/∂u with ∂T_a/∂u_k = factor·b_a·H_ak·b_k
        let mut m = [[0.0; 2]; 2];
        for a in 0..2 {
            for k in 0..2 {
                m[a][k] = f64::from(u8::from(a == k)) - factor * b[a] * hess[a][k] * b[k];
            }
        }
        let r = (u.0 - t.0, u.1 - t.1);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let du = ((m[1][1] * r.0 - m[0][1] * r.1) / det, (-m[1][0] * r.0 + m[0][0] * r.1) / det);
        u = (u.0 - du.0, u.1 - du.1);
        step = du.0.abs().max(du.1.abs());
        if !step.is_finite() {
            break;
        }
        if step < tolerance {
            return Ok(InnerSolution { u, iterations: it });
        }
    }
    Err(Error::InnerNoConvergence {
        iterations: max_iterations,
        last_step: step,
    })
}

/// Dispatches to the configured inner solver.
#[allow(clippy::too_many_arguments)]
pub fn solve_policy_equation(
    solver: InnerSolver,
    eta: &[f64],
    critic: &[f64],
    basis: &PolyBasis,
    problem: &Problem,
    init: (f64, f64),
    tolerance: f64,
    max_iterations: usize,
) -> Result<InnerSolution> {
    match solver {
        InnerSolver::FixedPoint => inner_control_iteration(eta, critic, basis, problem, init, tolerance, max_iterations),
        InnerSolver::Newton => inner_newton_iteration(eta, critic, basis, problem, init, tolerance, max_iterations),
    }
}
