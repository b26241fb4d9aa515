use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CostSpec, Problem};
use crate::basis::WeightSet;
use crate::error::Result;
use crate::motor::MotorParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualStats {
    pub max: f64,
    pub mean: f64,
    /// Mean of `|V(η)|` over the same samples, for relative comparisons.
    pub mean_value: f64,
}

/// `|V(η) − (Q + uᵀRu + γ·V(η⁺))|` with `u` from the actor.
pub fn bellman_residual(w: &WeightSet, samples: &[Vec<f64>], c: &CostSpec, p: &MotorParams) -> Result<ResidualStats> {
    let problem = Problem::new(w.mode, w.normalizer, *c, *p);
    let dim = w.mode.input_dim();
    let pairs: Vec<(f64, f64)> = samples
        .par_iter()
        .map(|eta| {
            let v = w.value(eta)?;
            let u = w.action(eta)?;
            let tr = problem.transition(eta, u);
            let v_next = w.value(&tr.next[..dim])?;
            Ok(((v - (tr.stage_cost + c.gamma * v_next)).abs(), v.abs()))
        })
        .collect::<Result<_>>()?;
    let n = pairs.len().max(1) as f64;
    Ok(ResidualStats {
        max: pairs.iter().map(|p| p.0).fold(0.0, f64::max),
        mean: pairs.iter().map(|p| p.0).sum::<f64>() / n,
        mean_value: pairs.iter().map(|p| p.1).sum::<f64>() / n,
    })
}
