//! PMSM plant: parameters, transforms and dq dynamics.

mod dynamics;
mod params;
mod transforms;

pub use dynamics::{current_derivatives, electromagnetic_torque, mechanical_step, plant_step, DriveState};
pub use params::{MotorParams, ParamsSource, RPM_TO_RAD_S};
pub use transforms::{abc_to_dq0, dq_to_abc, dq_to_alpha_beta, electrical_angle, wrap_angle, AbcTriple, Dq0};
