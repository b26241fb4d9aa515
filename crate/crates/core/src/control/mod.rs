//! Online controllers: shared speed loop, ADP actor, FOC and DTC-SVM
//! baselines, and the averaged inverter.

mod controllers;
mod pi;
mod svm;

pub use controllers::{
    estimate_flux, AdpController, DtcGains, DtcSvmController, FocController, FocGains, Measurement,
    TorqueController, DEFAULT_CURRENT_BANDWIDTH_HZ,
};
pub use pi::{Pi, SpeedLoopGains, SpeedLoopPI, DEFAULT_SPEED_OMEGA_N, DEFAULT_SPEED_ZETA};
pub use svm::{clamp_to_disk, svm_apply, svm_duties, ControlCommand, SvmDuties, SvmOutput};
