//! Offline value-iteration ADP training and closed-loop simulation for
//! permanent-magnet synchronous motors.
//!
//! The crate is split along the pipeline:
//!
//! * [`motor`] - dq-frame plant model, reference-frame transforms and the
//!   RK4 integrator used as the simulated plant.
//! * [`basis`] - input normalization, polynomial features, least-squares
//!   fitting and the weight file format.
//! * [`trainer`] - sampling of the region of interest and the critic/actor
//!   value iteration.
//! * [`control`] - shared speed loop, the ADP actor controller, FOC and
//!   DTC-SVM baselines and the averaged SVM inverter.
//! * [`sim`] - scenarios, the closed-loop driver, metrics and the
//!   comparison suite.

pub mod basis;
pub mod control;
pub mod error;
pub mod motor;
pub mod sim;
pub mod trainer;

pub use error::{Error, Result};
