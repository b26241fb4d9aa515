use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::control::{DtcGains, FocGains, SpeedLoopGains, DEFAULT_CURRENT_BANDWIDTH_HZ};
use crate::error::{Error, Result};
use crate::motor::{MotorParams, ParamsSource, RPM_TO_RAD_S};

/// Piecewise-constant signal given as `[time, value]` breakpoints; the value
/// holds from its time until the next breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Profile {
    pub points: Vec<(f64, f64)>,
}

impl Profile {
    pub fn constant(v: f64) -> Self {
        Self { points: vec![(0.0, v)] }
    }

    pub fn step(before: f64, at: f64, after: f64) -> Self {
        Self { points: vec![(0.0, before), (at, after)] }
    }

    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let p = Self { points };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.points.first().ok_or_else(|| Error::invalid("profile", "empty"))?;
        if first.0 != 0.0 {
            return Err(Error::invalid("profile", "must start at t = 0"));
        }
        if self.points.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::invalid("profile", "non-finite breakpoint"));
        }
        if self.points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("profile", "breakpoint times must be strictly increasing"));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let k = self.points.partition_point(|(ti, _)| *ti <= t);
        self.points[k.saturating_sub(1)].1
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { points: self.points.iter().map(|&(t, v)| (t, v * factor)).collect() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeedUnit {
    #[default]
    RadPerS,
    Rpm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ControllerSpec {
    Adp {
        /// Weight file; relative paths resolve against the scenario file.
        #[serde(default)]
        weights: Option<PathBuf>,
    },
    Foc {
        #[serde(default)]
        gains: Option<FocGains>,
        #[serde(default = "default_bandwidth")]
        bandwidth_hz: f64,
    },
    DtcSvm {
        #[serde(default)]
        gains: Option<DtcGains>,
        #[serde(default = "default_bandwidth")]
        bandwidth_hz: f64,
    },
}

fn default_bandwidth() -> f64 {
    DEFAULT_CURRENT_BANDWIDTH_HZ
}

impl ControllerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ControllerSpec::Adp { .. } => "adp",
            ControllerSpec::Foc { .. } => "foc",
            ControllerSpec::DtcSvm { .. } => "dtc_svm",
        }
    }

    pub fn foc() -> Self {
        ControllerSpec::Foc { gains: None, bandwidth_hz: DEFAULT_CURRENT_BANDWIDTH_HZ }
    }

    pub fn dtc_svm() -> Self {
        ControllerSpec::DtcSvm { gains: None, bandwidth_hz: DEFAULT_CURRENT_BANDWIDTH_HZ }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialState {
    pub i_d: f64,
    pub i_q: f64,
    pub omega_m: f64,
    pub theta_m: f64,
}

/// Measurement imperfections. Everything defaults to ideal sensors.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensorSpec {
    /// Std-dev of Gaussian noise on the measured phase currents i_a, i_b (A).
    pub current_noise_a: f64,
    /// Time constant of a first-order filter on the speed fed to the speed loop (s).
    pub speed_filter_s: Option<f64>,
}

/// One closed-loop experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub plant: ParamsSource,
    /// Parameters the controller is designed on; the plant's when absent.
    #[serde(default)]
    pub controller_model: Option<ParamsSource>,
    pub controller: ControllerSpec,
    #[serde(default)]
    pub speed_loop: Option<SpeedLoopGains>,
    #[serde(default)]
    pub speed_unit: SpeedUnit,
    pub speed_ref: Profile,
    /// Load torque, N·m.
    pub load: Profile,
    pub duration_s: f64,
    #[serde(default)]
    pub initial: InitialState,
    /// RK4 plant steps per control period.
    #[serde(default = "one")]
    pub substeps: usize,
    #[serde(default)]
    pub sensors: SensorSpec,
}

fn one() -> usize {
    1
}

/// Scenario with parameters resolved and units converted to SI.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedScenario {
    pub plant: MotorParams,
    pub model: MotorParams,
    pub speed_ref: Profile,
    pub load: Profile,
    pub steps: usize,
}

impl Scenario {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Parse {
            path: PathBuf::from("<scenario>"),
            reason: e.to_string(),
        })?;
        sc.validate()?;
        Ok(sc)
    }

    /// Loads a scenario file; a relative ADP weight path is made relative to it.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut sc: Scenario = toml::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        if let ControllerSpec::Adp { weights: Some(w) } = &mut sc.controller {
            if w.is_relative() {
                if let Some(dir) = path.parent() {
                    *w = dir.join(&*w);
                }
            }
        }
        sc.validate()?;
        Ok(sc)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::invalid("scenario", e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.resolve().map(|_| ())
    }

    pub fn resolve(&self) -> Result<ResolvedScenario> {
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::invalid("duration_s", "must be finite and > 0"));
        }
        if self.substeps == 0 {
            return Err(Error::invalid("substeps", "must be >= 1"));
        }
        self.speed_ref.validate()?;
        self.load.validate()?;
        let s = &self.sensors;
        if !(s.current_noise_a.is_finite() && s.current_noise_a >= 0.0) {
            return Err(Error::invalid("sensors.current_noise_a", "must be finite and >= 0"));
        }
        if let Some(tau) = s.speed_filter_s {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::invalid("sensors.speed_filter_s", "must be finite and > 0"));
            }
        }
        let i = &self.initial;
        if ![i.i_d, i.i_q, i.omega_m, i.theta_m].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("initial", "non-finite state"));
        }
        let plant = self.plant.resolve()?;
        let model = match &self.controller_model {
            Some(m) => m.resolve()?,
            None => plant,
        };
        let ts = model.sampling_time_s;
        let steps = (self.duration_s / ts).round();
        if (steps * ts - self.duration_s).abs() > 1e-9 * self.duration_s.max(1.0) {
            return Err(Error::invalid("duration_s", "must be a whole number of sampling periods"));
        }
        let factor = match self.speed_unit {
            SpeedUnit::RadPerS => 1.0,
            SpeedUnit::Rpm => RPM_TO_RAD_S,
        };
        Ok(ResolvedScenario {
            plant,
            model,
            speed_ref: self.speed_ref.scaled(factor),
            load: self.load.clone(),
            steps: steps as usize,
        })
    }
}
