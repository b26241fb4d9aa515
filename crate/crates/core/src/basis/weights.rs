//! Trained critic/actor weights and their on-disk JSON representation.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Normalizer, PolyBasis};
use crate::error::{Error, Result};
use crate::motor::MotorParams;
use crate::trainer::{CostSpec, TrainingConfig, TrainingMode};

const FORMAT_VERSION: u32 = 1;

/// Settings and model a [`WeightSet`] was trained with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingProvenance {
    pub config: TrainingConfig,
    pub cost: CostSpec,
    pub model_params: MotorParams,
    pub outer_iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSet {
    pub mode: TrainingMode,
    pub normalizer: Normalizer,
    pub critic_basis: PolyBasis,
    pub actor_basis: PolyBasis,
    /// Critic weights, one per critic term.
    pub critic: Vec<f64>,
    /// Actor weights, one `[v_d, v_q]` row per actor term.
    pub actor: Vec<[f64; 2]>,
    /// Critic weights after each value iteration, starting with `W_c⁰`.
    pub history: Vec<Vec<f64>>,
    pub provenance: Option<TrainingProvenance>,
}

#[derive(Serialize, Deserialize)]
struct WeightFile {
    format_version: u32,
    mode: TrainingMode,
    input_dim: usize,
    critic_degree: usize,
    actor_degree: usize,
    critic_fingerprint: String,
    actor_fingerprint: String,
    normalizer: Normalizer,
    critic: Vec<f64>,
    actor: Vec<[f64; 2]>,
    history: Vec<Vec<f64>>,
    #[serde(default)]
    training: Option<TrainingProvenance>,
}

impl WeightSet {
    /// All-zero weights for the given bases.
    pub fn zeros(mode: TrainingMode, normalizer: Normalizer, critic_basis: PolyBasis, actor_basis: PolyBasis) -> Self {
        let critic = vec![0.0; critic_basis.len()];
        let actor = vec![[0.0; 2]; actor_basis.len()];
        Self {
            mode,
            normalizer,
            critic_basis,
            actor_basis,
            critic,
            actor,
            history: Vec::new(),
            provenance: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.normalizer.validate()?;
        let dim = self.mode.input_dim();
        for b in [&self.critic_basis, &self.actor_basis] {
            if b.input_dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.input_dim() });
            }
        }
        if self.critic.len() != self.critic_basis.len() {
            return Err(Error::DimensionMismatch { expected: self.critic_basis.len(), got: self.critic.len() });
        }
        if self.actor.len() != self.actor_basis.len() {
            return Err(Error::DimensionMismatch { expected: self.actor_basis.len(), got: self.actor.len() });
        }
        for h in &self.history {
            if h.len() != self.critic.len() {
                return Err(Error::DimensionMismatch { expected: self.critic.len(), got: h.len() });
            }
        }
        let finite = self.critic.iter().chain(self.actor.iter().flatten()).chain(self.history.iter().flatten());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("weight set", "non-finite weight"));
        }
        Ok(())
    }

    /// `W_cᵀ φ(η)`.
    pub fn value(&self, eta: &[f64]) -> Result<f64> {
        let phi = self.critic_basis.eval(eta)?;
        Ok(phi.iter().zip(&self.critic).map(|(a, b)| a * b).sum())
    }

    /// `W_aᵀ σ(η)` as `(v_d, v_q)`.
    pub fn action(&self, eta: &[f64]) -> Result<(f64, f64)> {
        let sigma = self.actor_basis.eval(eta)?;
        let mut u = (0.0, 0.0);
        for (s, w) in sigma.iter().zip(&self.actor) {
            u.0 += s * w[0];
            u.1 += s * w[1];
        }
        Ok(u)
    }

    pub fn to_json(&self) -> Result<String> {
        self.validate()?;
        let file = WeightFile {
            format_version: FORMAT_VERSION,
            mode: self.mode,
            input_dim: self.critic_basis.input_dim(),
            critic_degree: self.critic_basis.max_degree(),
            actor_degree: self.actor_basis.max_degree(),
            critic_fingerprint: self.critic_basis.fingerprint(),
            actor_fingerprint: self.actor_basis.fingerprint(),
            normalizer: self.normalizer,
            critic: self.critic.clone(),
            actor: self.actor.clone(),
            history: self.history.clone(),
            training: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::invalid("weight set", e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: WeightFile =
            serde_json::from_str(text).map_err(|e| Error::invalid("weight file", e.to_string()))?;
        if f.format_version != FORMAT_VERSION {
            return Err(Error::invalid("weight file", format!("unsupported format_version {}", f.format_version)));
        }
        let critic_basis = PolyBasis::new(f.input_dim, f.critic_degree)?;
        let actor_basis = PolyBasis::new(f.input_dim, f.actor_degree)?;
        if critic_basis.fingerprint() != f.critic_fingerprint || actor_basis.fingerprint() != f.actor_fingerprint {
            return Err(Error::invalid("weight file", "term ordering fingerprint mismatch"));
        }
        let w = WeightSet {
            mode: f.mode,
            normalizer: f.normalizer,
            critic_basis,
            actor_basis,
            critic: f.critic,
            actor: f.actor,
            history: f.history,
            provenance: f.training,
        };
        w.validate()?;
        Ok(w)
    }

    /// SHA-256 of the JSON encoding; identical weights give identical digests.
    pub fn digest(&self) -> Result<String> {
        use sha2::{Digest, Sha256};
        Ok(Sha256::digest(self.to_json()?.as_bytes()).iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Invalid { reason, .. } => Error::Parse { path: path.to_owned(), reason },
            other => other,
        })
    }
}
