use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use pmsm_adp::basis::WeightSet;
use pmsm_adp::motor::ParamsSource;
use pmsm_adp::sim::{itae, reproduce_paper_suite, run_scenario_with, trace_metrics, Profile, Scenario, SimTrace, Signal, SuiteConfig};
use pmsm_adp::trainer::{bellman_residual, sample_box, value_iteration, CostSpec, TrainingConfig};
use pmsm_adp::{Error, Result};

#[derive(Parser)]
#[command(name = "pmsm-adp", version, about = "ADP torque control of PMSMs: training, simulation and benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train critic and actor weights by value iteration.
    Train {
        /// TOML with `params`, `cost` and optional `training` tables.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output weight file (JSON).
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario and write its trace and metrics.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// ADP weight file; overrides the path in the scenario.
        #[arg(long)]
        weights: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the benchmark suite; exits nonzero if any acceptance check fails.
    Compare {
        #[arg(long, value_enum)]
        suite: SuiteName,
        #[arg(long)]
        out: PathBuf,
        /// Optional TOML overriding suite settings.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Recompute metrics from a trace CSV.
    Metrics {
        #[arg(long)]
        trace: PathBuf,
        /// Scenario the trace came from; enables speed/torque ITAE and cost.
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteName {
    Paper,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TrainFile {
    #[serde(default = "nominal")]
    params: ParamsSource,
    #[serde(default = "CostSpec::published")]
    cost: CostSpec,
    #[serde(default)]
    training: TrainingConfig,
}

fn nominal() -> ParamsSource {
    ParamsSource::Preset("nominal".into())
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Parse { path: path.to_path_buf(), reason: e.to_string() })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map_err(|e| Error::invalid("json", e.to_string()))
}

fn train(config: Option<&Path>, out: &Path) -> Result<()> {
    let file: TrainFile = match config {
        Some(p) => read_toml(p)?,
        None => toml::from_str("").expect("defaults"),
    };
    let params = file.params.resolve()?;
    let outcome = value_iteration(&file.training, &file.cost, &params)?;
    let fresh = sample_box(1000, file.training.mode.input_dim(), file.training.half_width, file.training.seed ^ 0xfeed);
    let res = bellman_residual(&outcome.weights, &fresh, &file.cost, &params)?;
    outcome.weights.save(out)?;
    let r = &outcome.report;
    eprintln!(
        "converged after {} outer iterations in {:.2} s; Bellman residual mean {:.3e}, max {:.3e} (mean V {:.3e})",
        r.iterations.len(),
        r.elapsed_s,
        res.mean,
        res.max,
        res.mean_value
    );
    let report_path = out.with_extension("report.json");
    write(&report_path, &to_json(&outcome.report)?)?;
    Ok(())
}

fn simulate(scenario: &Path, weights: Option<&Path>, out: &Path, seed: u64) -> Result<bool> {
    let sc = Scenario::load(scenario)?;
    let w = weights.map(WeightSet::load).transpose()?;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let cost = w
        .as_ref()
        .and_then(|w| w.provenance.as_ref().map(|p| p.cost))
        .unwrap_or(SuiteConfig::default().nominal_cost);
    let (trace, aborted) = match run_scenario_with(&sc, w.as_ref(), seed) {
        Ok(t) => (t, None),
        Err(a) => (a.partial, Some(a.error.to_string())),
    };
    trace.save_csv(out.join("trace.csv"))?;
    let mut m = trace_metrics(&sc, sc.controller.name(), &trace, &cost, None)?;
    m.aborted = aborted.clone();
    write(&out.join("metrics.json"), &to_json(&m)?)?;
    println!("{}", to_json(&m)?);
    if let Some(e) = aborted {
        eprintln!("simulation aborted: {e}");
        return Ok(false);
    }
    Ok(true)
}

fn compare(out: &Path, config: Option<&Path>) -> Result<bool> {
    let cfg: SuiteConfig = match config {
        Some(p) => read_toml(p)?,
        None => SuiteConfig::default(),
    };
    let report = reproduce_paper_suite(Some(out), &cfg)?;
    for r in &report.runs {
        println!(
            "{:32} {:8} itae_torque={:.6} itae_speed={:.6} cost={:.6}{}",
            r.scenario,
            r.controller,
            r.itae_torque,
            r.itae_speed,
            r.realized_cost,
            r.aborted.as_ref().map_or(String::new(), |e| format!(" ABORTED: {e}"))
        );
    }
    for c in &report.criteria {
        println!("[{}] criterion {}: {} -- {}", if c.passed { "PASS" } else { "FAIL" }, c.id, c.name, c.detail);
    }
    for f in &report.failures {
        println!("[FAIL] run: {f}");
    }
    Ok(report.passed())
}

fn metrics(trace: &Path, scenario: Option<&Path>) -> Result<()> {
    let tr = SimTrace::load_csv(trace)?;
    let value = match scenario {
        Some(p) => {
            let sc = Scenario::load(p)?;
            let m = trace_metrics(&sc, sc.controller.name(), &tr, &SuiteConfig::default().nominal_cost, None)?;
            serde_json::to_value(m)
        }
        None => serde_json::to_value(serde_json::json!({
            "samples": tr.len(),
            "ts": tr.ts,
            "itae_torque_tracking": itae(&tr, &Profile::constant(0.0), Signal::TorqueTracking),
        })),
    }
    .map_err(|e| Error::invalid("json", e.to_string()))?;
    println!("{}", to_json(&value)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Train { config, out } => train(config.as_deref(), out).map(|()| true),
        Command::Simulate { scenario, weights, out, seed } => simulate(scenario, weights.as_deref(), out, *seed),
        Command::Compare { suite: SuiteName::Paper, out, config } => compare(out, config.as_deref()),
        Command::Metrics { trace, scenario } => metrics(trace, scenario.as_deref()).map(|()| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
