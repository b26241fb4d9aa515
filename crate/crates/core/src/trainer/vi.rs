//! Offline value iteration for the critic followed by the actor fit.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::inner::{initial_guess, solve_policy_equation};
use super::{sample_region, CostSpec, Problem, TrainingConfig};
use crate::basis::{fit_least_squares, Normalizer, PolyBasis, TrainingProvenance, WeightSet};
use crate::error::{Error, Result};
use crate::motor::MotorParams;

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// `max_q |V^{i+1}(η_q) − V^i(η_q)|` over the training samples.
    pub value_change: f64,
    /// `‖W_c^{i+1} − W_c^i‖_∞`.
    pub weight_change: f64,
    /// `min_q (V^{i+1}(η_q) − V^i(η_q))`; negative values mean the sampled
    /// values went down.
    pub min_value_increment: f64,
    /// Largest absolute critic fit error over the samples.
    pub critic_fit_max_error: f64,
    pub mean_inner_iterations: f64,
    pub max_inner_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingReport {
    pub iterations: Vec<IterationRecord>,
    pub converged_after: usize,
    pub actor_fit_residual: f64,
    pub critic_fit_residual: f64,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub weights: WeightSet,
    pub report: TrainingReport,
    /// Training inputs and the converged per-sample controls `u^κ(η)`.
    pub samples: Vec<Vec<f64>>,
    pub controls: Vec<(f64, f64)>,
}

fn design_matrix(basis: &PolyBasis, samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = samples.par_iter().map(|s| basis.eval(s)).collect::<Result<_>>()?;
    Ok(DMatrix::from_fn(samples.len(), basis.len(), |i, j| rows[i][j]))
}

/// Runs value iteration from `V⁰ = 0` on freshly drawn samples.
pub fn value_iteration(cfg: &TrainingConfig, cost: &CostSpec, params: &MotorParams) -> Result<TrainingOutcome> {
    let samples = sample_region(cfg);
    value_iteration_on(cfg, cost, params, samples)
}

/// Value iteration on caller-supplied normalized samples.
pub fn value_iteration_on(
    cfg: &TrainingConfig,
    cost: &CostSpec,
    params: &MotorParams,
    samples: Vec<Vec<f64>>,
) -> Result<TrainingOutcome> {
    let started = std::time::Instant::now();
    params.validate()?;
    cost.validate()?;
    let dim = cfg.mode.input_dim();
    let critic_basis = PolyBasis::new(dim, cfg.critic_degree)?;
    let actor_basis = PolyBasis::new(dim, cfg.actor_degree)?;
    cfg.validate(critic_basis.len().max(actor_basis.len()))?;
    if let Some(bad) = samples.iter().find(|s| s.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: bad.len() });
    }
    if samples.len() < critic_basis.len() {
        return Err(Error::invalid("training samples", "fewer samples than critic terms"));
    }

    let normalizer = Normalizer::from_params(params);
    let problem = Problem::new(cfg.mode, normalizer, *cost, *params);
    let phi = design_matrix(&critic_basis, &samples)?;
    let n = samples.len();

    let mut critic = vec![0.0; critic_basis.len()];
    let mut history = vec![critic.clone()];
    let mut values = vec![0.0; n];
    let mut records = Vec::new();
    let mut controls = vec![(0.0, 0.0); n];
    let mut critic_fit_residual = 0.0;
    let mut converged = None;

    for i in 0..cfg.max_outer_iterations {
        let backups: Vec<(f64, f64, f64, usize)> = samples
            .par_iter()
            .enumerate()
            .map(|(q, eta)| {
                let init = initial_guess(cfg.seed, i, q, cfg.inner_init_range);
                let sol = solve_policy_equation(
                    cfg.inner_solver,
                    eta,
                    &critic,
                    &critic_basis,
                    &problem,
                    init,
                    cfg.beta_u,
                    cfg.max_inner_iterations,
                )?;
                let tr = problem.transition(eta, sol.u);
                let v_next: f64 = critic_basis
                    .eval(&tr.next[..dim])?
                    .iter()
                    .zip(&critic)
                    .map(|(a, b)| a * b)
                    .sum();
                Ok((sol.u.0, sol.u.1, tr.stage_cost + cost.gamma * v_next, sol.iterations))
            })
            .collect::<Result<_>>()?;

        let targets = DMatrix::from_fn(n, 1, |r, _| backups[r].2);
        let fit = fit_least_squares(&phi, &targets)?;
        let new_critic: Vec<f64> = fit.weights.column(0).iter().copied().collect();
        let fitted = &phi * &fit.weights;

        let mut value_change = 0.0f64;
        let mut min_inc = f64::INFINITY;
        let mut fit_err = 0.0f64;
        let mut inner_total = 0usize;
        let mut inner_max = 0usize;
        for (r, b) in backups.iter().enumerate() {
            let d = b.2 - values[r];
            value_change = value_change.max(d.abs());
            min_inc = min_inc.min(d);
            fit_err = fit_err.max((fitted[(r, 0)] - b.2).abs());
            inner_total += b.3;
            inner_max = inner_max.max(b.3);
        }
        let weight_change = new_critic
            .iter()
            .zip(&critic)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        records.push(IterationRecord {
            iteration: i + 1,
            value_change,
            weight_change,
            min_value_increment: min_inc,
            critic_fit_max_error: fit_err,
            mean_inner_iterations: inner_total as f64 / n as f64,
            max_inner_iterations: inner_max,
        });

        for (r, b) in backups.iter().enumerate() {
            values[r] = b.2;
            controls[r] = (b.0, b.1);
        }
        critic = new_critic;
        critic_fit_residual = fit.residual;
        history.push(critic.clone());
        if value_change < cfg.beta_v {
            converged = Some(i + 1);
            break;
        }
    }
    let converged_after = converged.ok_or_else(|| Error::OuterNoConvergence {
        iterations: cfg.max_outer_iterations,
        last_change: records.last().map_or(f64::NAN, |r| r.value_change),
    })?;

    let sigma = design_matrix(&actor_basis, &samples)?;
    let u_targets = DMatrix::from_fn(n, 2, |r, c| if c == 0 { controls[r].0 } else { controls[r].1 });
    let actor_fit = fit_least_squares(&sigma, &u_targets)?;
    let actor = (0..actor_basis.len())
        .map(|k| [actor_fit.weights[(k, 0)], actor_fit.weights[(k, 1)]])
        .collect();

    let weights = WeightSet {
        mode: cfg.mode,
        normalizer,
        critic_basis,
        actor_basis,
        critic,
        actor,
        history,
        provenance: Some(TrainingProvenance {
            config: cfg.clone(),
            cost: *cost,
            model_params: *params,
            outer_iterations: converged_after,
        }),
    };
    weights.validate()?;
    Ok(TrainingOutcome {
        weights,
        report: TrainingReport {
            iterations: records,
            converged_after,
            actor_fit_residual: actor_fit.residual,
            critic_fit_residual,
            elapsed_s: started.elapsed().as_secs_f64(),
        },
        samples,
        controls,
    })
}
