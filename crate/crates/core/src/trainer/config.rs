use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::InnerSolver;
use crate::basis::Normalizer;
use crate::error::{Error, Result};

/// Which network inputs the trainer uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingMode {
    /// `η = [ĩ_d, ĩ_q, τ̃*, ω̃]`.
    #[default]
    Full,
    /// Current regulation only: `η = [ĩ_d, ĩ_q]` with `τ* = 0`, `ω = 0`.
    Regulation,
}

impl TrainingMode {
    pub fn input_dim(self) -> usize {
        match self {
            TrainingMode::Full => 4,
            TrainingMode::Regulation => 2,
        }
    }

    /// Physical `(i_d, i_q, τ*, ω_m)` for a normalized input vector.
    pub fn denormalize(self, n: &Normalizer, eta: &[f64]) -> (f64, f64, f64, f64) {
        match self {
            TrainingMode::Full => (
                eta[0] * n.i_scale,
                eta[1] * n.i_scale,
                eta[2] * n.tau_scale,
                eta[3] * n.omega_scale,
            ),
            TrainingMode::Regulation => (eta[0] * n.i_scale, eta[1] * n.i_scale, 0.0, 0.0),
        }
    }

    /// Writes the normalized input vector into `out[..input_dim]`.
    pub fn normalize_into(self, n: &Normalizer, i_d: f64, i_q: f64, tau_ref: f64, omega_m: f64, out: &mut [f64]) {
        let full = n.normalize(i_d, i_q, tau_ref, omega_m);
        out[..self.input_dim()].copy_from_slice(&full[..self.input_dim()]);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingConfig {
    pub sample_count: usize,
    /// Half-width of the normalized training box.
    pub half_width: f64,
    pub beta_v: f64,
    pub beta_u: f64,
    pub max_outer_iterations: usize,
    pub max_inner_iterations: usize,
    pub seed: u64,
    pub critic_degree: usize,
    pub actor_degree: usize,
    pub mode: TrainingMode,
    /// Inner iterations start from `u ~ U[-r, r]` volts per component.
    pub inner_init_range: f64,
    pub inner_solver: InnerSolver,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            sample_count: 10_000,
            half_width: 1.5,
            beta_v: 1e-4,
            beta_u: 1e-6,
            max_outer_iterations: 200,
            max_inner_iterations: 500,
            seed: 2020,
            critic_degree: 3,
            actor_degree: 2,
            mode: TrainingMode::Full,
            inner_init_range: 1.0,
            inner_solver: InnerSolver::FixedPoint,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self, critic_terms: usize) -> Result<()> {
        if self.sample_count < critic_terms {
            return Err(Error::invalid(
                "training config",
                format!("sample_count {} is below the critic size {critic_terms}", self.sample_count),
            ));
        }
        for (name, v) in [
            ("half_width", self.half_width),
            ("beta_v", self.beta_v),
            ("beta_u", self.beta_u),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid("training config", format!("{name} must be > 0")));
            }
        }
        if !(self.inner_init_range.is_finite() && self.inner_init_range >= 0.0) {
            return Err(Error::invalid("training config", "inner_init_range must be >= 0"));
        }
        if self.max_outer_iterations == 0 || self.max_inner_iterations == 0 {
            return Err(Error::invalid("training config", "iteration budgets must be >= 1"));
        }
        Ok(())
    }
}

/// `sample_count` i.i.d. uniform points in `[-h, h]^dim`, reproducible per seed.
pub fn sample_region(cfg: &TrainingConfig) -> Vec<Vec<f64>> {
    sample_box(cfg.sample_count, cfg.mode.input_dim(), cfg.half_width, cfg.seed)
}

pub fn sample_box(count: usize, dim: usize, half_width: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| (0..dim).map(|_| rng.random_range(-half_width..=half_width)).collect())
        .collect()
}
