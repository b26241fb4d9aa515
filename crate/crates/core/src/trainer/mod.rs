//! Offline critic/actor training by value iteration.

mod config;
mod cost;
mod inner;
mod model;
mod residual;
mod vi;

pub use config::{sample_box, sample_region, TrainingConfig, TrainingMode};
pub use cost::{stage_cost, CostSpec};
pub use inner::{
    initial_guess, inner_control_iteration, inner_newton_iteration, solve_policy_equation, InnerSolution, InnerSolver,
};
pub use model::{predict_next_state, Problem, Transition};
pub use residual::{bellman_residual, ResidualStats};
pub use vi::{value_iteration, value_iteration_on, IterationRecord, TrainingOutcome, TrainingReport};
