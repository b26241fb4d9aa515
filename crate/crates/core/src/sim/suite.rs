use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{itae, realized_cost, recovery_time, speed_stats, Signal};
use super::run::run_scenario_with;
use super::scenario::{ControllerSpec, InitialState, Profile, Scenario, SensorSpec, SpeedUnit};
use super::trace::SimTrace;
use crate::basis::WeightSet;
use crate::error::{Error, Result};
use crate::motor::{MotorParams, ParamsSource};
use crate::trainer::{value_iteration, CostSpec, TrainingConfig};

/// Knobs of the reproduction suite. The defaults are the shipped setup.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub seed: u64,
    pub training: TrainingConfig,
    /// Cost for ADP weights designed on the nominal machine.
    pub nominal_cost: CostSpec,
    /// Cost for ADP weights designed on the misidentified parameter set.
    pub misidentified_cost: CostSpec,
    pub nominal_load_step_s: f64,
    pub exp_load_step_s: f64,
    pub uncertain_load_step_s: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 2020,
            training: TrainingConfig::default(),
            nominal_cost: CostSpec { k3: 1e-4, ..CostSpec::published() },
            misidentified_cost: CostSpec { k3: 1e-3, ..CostSpec::published() },
            nominal_load_step_s: 1.0,
            exp_load_step_s: 2.3,
            uncertain_load_step_s: 3.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightChoice {
    Nominal,
    Misidentified,
}

/// One scenario of the suite, before a controller is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteScenario {
    pub id: &'static str,
    pub template: Scenario,
    pub weights: WeightChoice,
    /// Time of the load step, if the scenario has one.
    pub load_step_s: Option<f64>,
}

pub const CONTROLLERS: [&str; 3] = ["adp", "foc", "dtc_svm"];

fn controller_spec(name: &str, weights_file: &str) -> ControllerSpec {
    match name {
        "adp" => ControllerSpec::Adp { weights: Some(PathBuf::from(weights_file)) },
        "foc" => ControllerSpec::foc(),
        _ => ControllerSpec::dtc_svm(),
    }
}

fn staircase() -> Profile {
    Profile { points: vec![(0.0, 500.0), (0.5, 1000.0), (3.0, 2000.0)] }
}

/// The five experiment families: (a) nominal load step, (b) the same on the
/// perturbed plant, (c) 2000 rpm load step, (d) staircase under load,
/// (e) (c) and (d) with controllers designed on misidentified parameters.
pub fn suite_scenarios(cfg: &SuiteConfig) -> Vec<SuiteScenario> {
    let base = |plant: &str, model: Option<&str>, speed: Profile, load: Profile, duration_s: f64| Scenario {
        name: String::new(),
        plant: ParamsSource::Preset(plant.into()),
        controller_model: model.map(|m| ParamsSource::Preset(m.into())),
        controller: ControllerSpec::foc(),
        speed_loop: None,
        speed_unit: SpeedUnit::Rpm,
        speed_ref: speed,
        load,
        duration_s,
        initial: InitialState::default(),
        substeps: 1,
        sensors: SensorSpec::default(),
    };
    let mut out = vec![
        SuiteScenario {
            id: "a_nominal_load_step",
            template: base("nominal", None, Profile::constant(3000.0), Profile::step(0.0, cfg.nominal_load_step_s, 0.6), 2.0),
            weights: WeightChoice::Nominal,
            load_step_s: Some(cfg.nominal_load_step_s),
        },
        SuiteScenario {
            id: "b_perturbed_plant_load_step",
            template: base(
                "perturbed_sim",
                Some("nominal"),
                Profile::constant(3000.0),
                Profile::step(0.0, cfg.nominal_load_step_s, 0.6),
                2.0,
            ),
            weights: WeightChoice::Nominal,
            load_step_s: Some(cfg.nominal_load_step_s),
        },
        SuiteScenario {
            id: "c_2000rpm_load_step",
            template: base("nominal", None, Profile::constant(2000.0), Profile::step(0.0, cfg.exp_load_step_s, 0.7), 4.0),
            weights: WeightChoice::Nominal,
            load_step_s: Some(cfg.exp_load_step_s),
        },
        SuiteScenario {
            id: "d_staircase",
            template: base("nominal", None, staircase(), Profile::constant(0.7), 6.0),
            weights: WeightChoice::Nominal,
            load_step_s: None,
        },
        SuiteScenario {
            id: "e_misidentified_load_step",
            template: base(
                "nominal",
                Some("perturbed_exp"),
                Profile::constant(2000.0),
                Profile::step(0.0, cfg.uncertain_load_step_s, 0.7),
                5.0,
            ),
            weights: WeightChoice::Misidentified,
            load_step_s: Some(cfg.uncertain_load_step_s),
        },
        SuiteScenario {
            id: "e_misidentified_staircase",
            template: base("nominal", Some("perturbed_exp"), staircase(), Profile::constant(0.7), 6.0),
            weights: WeightChoice::Misidentified,
            load_step_s: None,
        },
    ];
    for s in &mut out {
        s.template.name = s.id.to_string();
    }
    out
}

/// Metrics of one (scenario, controller) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario: String,
    pub controller: String,
    pub samples: usize,
    pub itae_torque: f64,
    pub itae_torque_tracking: f64,
    pub itae_speed: f64,
    pub realized_cost: f64,
    /// Time to re-enter a ±1 % speed band after the load step, s.
    pub recovery_s: Option<f64>,
    /// Mean speed error over the final 0.3 s relative to the reference.
    pub final_speed_error_rel: f64,
    /// Speed standard deviation over the final 0.3 s relative to the reference.
    pub final_speed_std_rel: f64,
    pub saturated_fraction: f64,
    pub out_of_omega_fraction: f64,
    pub aborted: Option<String>,
}

/// Computes every metric from a trace and its scenario.
pub fn trace_metrics(sc: &Scenario, controller: &str, trace: &SimTrace, cost: &CostSpec, load_step_s: Option<f64>) -> Result<RunMetrics> {
    let r = sc.resolve()?;
    let n = trace.len().max(1) as f64;
    let end = trace.duration();
    let (err_rel, std_rel) = match speed_stats(trace, &r.speed_ref, end - 0.3, end) {
        Some(s) => {
            let w = r.speed_ref.at(end).abs().max(f64::MIN_POSITIVE);
            (s.mean_error / w, s.std_dev / w)
        }
        None => (f64::NAN, f64::NAN),
    };
    Ok(RunMetrics {
        scenario: sc.name.clone(),
        controller: controller.to_string(),
        samples: trace.len(),
        itae_torque: itae(trace, &r.load, Signal::Torque),
        itae_torque_tracking: itae(trace, &r.load, Signal::TorqueTracking),
        itae_speed: itae(trace, &r.speed_ref, Signal::Speed),
        realized_cost: realized_cost(trace, cost, &r.plant),
        recovery_s: load_step_s.and_then(|t| recovery_time(trace, &r.speed_ref, t, 0.01)),
        final_speed_error_rel: err_rel,
        final_speed_std_rel: std_rel,
        saturated_fraction: trace.records.iter().filter(|x| x.saturated).count() as f64 / n,
        out_of_omega_fraction: trace.records.iter().filter(|x| x.out_of_omega).count() as f64 / n,
        aborted: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    /// Weight file name → SHA-256 of its contents.
    pub weight_files: BTreeMap<String, String>,
    pub runs: Vec<RunMetrics>,
    pub criteria: Vec<CriterionResult>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.criteria.iter().all(|c| c.passed)
    }

    pub fn run(&self, scenario: &str, controller: &str) -> Option<&RunMetrics> {
        self.runs.iter().find(|r| r.scenario == scenario && r.controller == controller)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid("summary", e.to_string()))
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

/// Reported values of the published comparison: torque ITAE of the nominal
/// load step and realized cost of the 2000 rpm load step (ADP, FOC, DTC-SVM).
pub const PUBLISHED_TORQUE_ITAE: [f64; 3] = [0.0245, 0.0251, 0.0287];
pub const PUBLISHED_REALIZED_COST: [f64; 3] = [0.51, 0.54, 0.56];

/// Evaluates the closed-loop acceptance checks on suite metrics.
pub fn evaluate_criteria(runs: &[RunMetrics]) -> Vec<CriterionResult> {
    let get = |s: &str, c: &str| runs.iter().find(|r| r.scenario == s && r.controller == c && r.aborted.is_none());
    let triple = |s: &str| -> Option<[&RunMetrics; 3]> { Some([get(s, "adp")?, get(s, "foc")?, get(s, "dtc_svm")?]) };
    let missing = |id: u8, name: &str, s: &str| CriterionResult {
        id,
        name: name.into(),
        passed: false,
        detail: format!("scenario {s} incomplete"),
    };
    let mut out = Vec::new();

    let name5 = "nominal load step: recovery and torque ITAE ordering";
    out.push(match triple("a_nominal_load_step") {
        Some(t) => {
            let rec_ok = t.iter().all(|r| r.recovery_s.is_some_and(|x| x <= 0.3));
            let it = t.map(|r| r.itae_torque);
            let order_ok = it[0] <= it[1] && it[1] < it[2];
            let abs_ok = it.iter().zip(PUBLISHED_TORQUE_ITAE).all(|(v, p)| within(*v, p, 0.5));
            CriterionResult {
                id: 5,
                name: name5.into(),
                passed: rec_ok && order_ok && abs_ok,
                detail: format!(
                    "recovery_s adp/foc/dtc = {:?}/{:?}/{:?} (<= 0.3: {rec_ok}); torque ITAE {:.5}/{:.5}/{:.5} \
                     (ADP <= FOC < DTC: {order_ok}; within 50% of {:?}: {abs_ok})",
                    t[0].recovery_s, t[1].recovery_s, t[2].recovery_s, it[0], it[1], it[2], PUBLISHED_TORQUE_ITAE
                ),
            }
        }
        None => missing(5, name5, "a_nominal_load_step"),
    });

    let name6 = "perturbed plant: only ADP keeps tracking";
    out.push(match triple("b_perturbed_plant_load_step") {
        Some(t) => {
            let adp_ok = t[0].final_speed_error_rel.abs() <= 0.02;
            let fails = |r: &RunMetrics| r.final_speed_error_rel.abs() > 0.05 || r.final_speed_std_rel > 0.02;
            let baseline_fails = fails(t[1]) || fails(t[2]);
            CriterionResult {
                id: 6,
                name: name6.into(),
                passed: adp_ok && baseline_fails,
                detail: format!(
                    "final speed error adp/foc/dtc = {:.4}/{:.4}/{:.4}, std {:.4}/{:.4}/{:.4} \
                     (ADP <= 2%: {adp_ok}; a baseline > 5% or std > 2%: {baseline_fails})",
                    t[0].final_speed_error_rel,
                    t[1].final_speed_error_rel,
                    t[2].final_speed_error_rel,
                    t[0].final_speed_std_rel,
                    t[1].final_speed_std_rel,
                    t[2].final_speed_std_rel
                ),
            }
        }
        None => missing(6, name6, "b_perturbed_plant_load_step"),
    });

    let name7 = "staircase with misidentified model: ADP speed ITAE lowest";
    out.push(match triple("e_misidentified_staircase") {
        Some(t) => {
            let it = t.map(|r| r.itae_speed);
            CriterionResult {
                id: 7,
                name: name7.into(),
                passed: it[0] < it[1] && it[0] < it[2],
                detail: format!("speed ITAE adp/foc/dtc = {:.5}/{:.5}/{:.5}", it[0], it[1], it[2]),
            }
        }
        None => missing(7, name7, "e_misidentified_staircase"),
    });

    let name8 = "2000 rpm load step: realized cost ranking";
    out.push(match triple("c_2000rpm_load_step") {
        Some(t) => {
            let c = t.map(|r| r.realized_cost);
            let order_ok = c[0] <= c[1] && c[0] <= c[2];
            let abs_ok = c.iter().zip(PUBLISHED_REALIZED_COST).all(|(v, p)| within(*v, p, 0.5));
            CriterionResult {
                id: 8,
                name: name8.into(),
                passed: order_ok && abs_ok,
                detail: format!(
                    "realized cost adp/foc/dtc = {:.6}/{:.6}/{:.6} (ADP lowest: {order_ok}; within 50% of {:?}: {abs_ok})",
                    c[0], c[1], c[2], PUBLISHED_REALIZED_COST
                ),
            }
        }
        None => missing(8, name8, "c_2000rpm_load_step"),
    });
    out
}

/// Loads `path` if present, otherwise trains on `model` and writes it there.
fn load_or_train(path: Option<&Path>, cfg: &SuiteConfig, cost: &CostSpec, model: &MotorParams) -> Result<WeightSet> {
    if let Some(p) = path {
        if p.exists() {
            return WeightSet::load(p);
        }
    }
    let w = value_iteration(&cfg.training, cost, model)?.weights;
    if let Some(p) = path {
        w.save(p)?;
    }
    Ok(w)
}

pub const METRIC_COLUMNS: [&str; 13] = [
    "scenario",
    "controller",
    "samples",
    "itae_torque",
    "itae_torque_tracking",
    "itae_speed",
    "realized_cost",
    "recovery_s",
    "final_speed_error_rel",
    "final_speed_std_rel",
    "saturated_fraction",
    "out_of_omega_fraction",
    "aborted",
];

fn write_metrics_csv(path: &Path, runs: &[RunMetrics]) -> Result<()> {
    let err = |e: csv::Error| Error::invalid("metrics csv", e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(METRIC_COLUMNS).map_err(err)?;
    for r in runs {
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        w.write_record([
            r.scenario.clone(),
            r.controller.clone(),
            r.samples.to_string(),
            r.itae_torque.to_string(),
            r.itae_torque_tracking.to_string(),
            r.itae_speed.to_string(),
            r.realized_cost.to_string(),
            opt(r.recovery_s),
            r.final_speed_error_rel.to_string(),
            r.final_speed_std_rel.to_string(),
            r.saturated_fraction.to_string(),
            r.out_of_omega_fraction.to_string(),
            r.aborted.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs every suite scenario with all three controllers. With `out_dir`,
/// weights are reused from (or written to) it, and scenario files, traces,
/// a metrics table and `summary.json` are written there.
pub fn reproduce_paper_suite(out_dir: Option<&Path>, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let file_names = [(WeightChoice::Nominal, "weights_nominal.json"), (WeightChoice::Misidentified, "weights_misidentified.json")];
    if let Some(dir) = out_dir {
        for sub in ["", "traces", "scenarios"] {
            let d = dir.join(sub);
            std::fs::create_dir_all(&d).map_err(|e| Error::io(&d, e))?;
        }
    }
    let path_of = |name: &str| out_dir.map(|d| d.join(name));
    let nominal = load_or_train(path_of(file_names[0].1).as_deref(), cfg, &cfg.nominal_cost, &MotorParams::nominal())?;
    let misidentified = load_or_train(
        path_of(file_names[1].1).as_deref(),
        cfg,
        &cfg.misidentified_cost,
        &MotorParams::perturbed_exp(),
    )?;
    let weights_for = |c: WeightChoice| match c {
        WeightChoice::Nominal => &nominal,
        WeightChoice::Misidentified => &misidentified,
    };
    let file_for = |c: WeightChoice| file_names.iter().find(|(k, _)| *k == c).map_or("", |(_, f)| *f);

    let jobs: Vec<(SuiteScenario, &str)> = suite_scenarios(cfg)
        .into_iter()
        .flat_map(|s| CONTROLLERS.iter().map(move |c| (s.clone(), *c)))
        .collect();

    let results: Vec<(RunMetrics, Option<SimTrace>, Scenario)> = jobs
        .par_iter()
        .map(|(s, ctrl)| {
            let mut sc = s.template.clone();
            // weight paths are relative to the scenario directory
            sc.controller = controller_spec(ctrl, &format!("../{}", file_for(s.weights)));
            let cost = &cfg.nominal_cost;
            match run_scenario_with(&sc, Some(weights_for(s.weights)), cfg.seed) {
                Ok(tr) => {
                    let m = trace_metrics(&sc, ctrl, &tr, cost, s.load_step_s);
                    (m, Some(tr), sc)
                }
                Err(abort) => {
                    let m = trace_metrics(&sc, ctrl, &abort.partial, cost, s.load_step_s).map(|mut m| {
                        m.aborted = Some(abort.error.to_string());
                        m
                    });
                    (m, Some(abort.partial), sc)
                }
            }
        })
        .map(|(m, tr, sc)| {
            let m = m.unwrap_or_else(|e| RunMetrics {
                scenario: sc.name.clone(),
                controller: String::new(),
                samples: 0,
                itae_torque: f64::NAN,
                itae_torque_tracking: f64::NAN,
                itae_speed: f64::NAN,
                realized_cost: f64::NAN,
                recovery_s: None,
                final_speed_error_rel: f64::NAN,
                final_speed_std_rel: f64::NAN,
                saturated_fraction: f64::NAN,
                out_of_omega_fraction: f64::NAN,
                aborted: Some(e.to_string()),
            });
            (m, tr, sc)
        })
        .collect();

    let mut runs = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for ((_, ctrl), (mut m, trace, sc)) in jobs.iter().zip(results) {
        m.controller = ctrl.to_string();
        if let Some(e) = &m.aborted {
            failures.push(format!("{}/{}: {e}", m.scenario, m.controller));
        }
        if let Some(dir) = out_dir {
            let stem = format!("{}_{}", m.scenario, m.controller);
            if let Some(tr) = &trace {
                tr.save_csv(dir.join("traces").join(format!("{stem}.csv")))?;
            }
            let p = dir.join("scenarios").join(format!("{stem}.toml"));
            std::fs::write(&p, sc.to_toml_string()?).map_err(|e| Error::io(&p, e))?;
        }
        runs.push(m);
    }

    let criteria = evaluate_criteria(&runs);
    let weight_files = file_names
        .iter()
        .map(|(k, f)| Ok((f.to_string(), weights_for(*k).digest()?)))
        .collect::<Result<_>>()?;
    let report = SuiteReport { config: cfg.clone(), weight_files, runs, criteria, failures };
    if let Some(dir) = out_dir {
        write_metrics_csv(&dir.join("metrics.csv"), &report.runs)?;
        let p = dir.join("summary.json");
        std::fs::write(&p, report.to_json()?).map_err(|e| Error::io(&p, e))?;
    }
    Ok(report)
}
