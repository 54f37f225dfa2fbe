//! Batch runner: reads a TOML experiment description, executes it and
//! writes `result.json`, CSV tables and `manifest.json`.

pub mod config;
pub mod experiments;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};

pub use config::{parse_config, ConfigError, ExperimentConfig, ExperimentKind, Resolved};
pub use experiments::{run_experiment, Artifacts, ExperimentError};

/// Command-line overrides of configuration values.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(ConfigError),
    #[error("experiment failed: {0}")]
    ExperimentFailed(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::ConfigInvalid(_) => 2,
            RunError::ExperimentFailed(_) => 1,
        }
    }

    /// Machine-readable error record.
    pub fn record(&self) -> Value {
        match self {
            RunError::ConfigInvalid(e) => json!({
                "status": "error",
                "kind": "config-invalid",
                "key": e.key,
                "message": e.message,
            }),
            RunError::ExperimentFailed(m) => json!({
                "status": "error",
                "kind": "experiment-failed",
                "message": m,
            }),
        }
    }
}

impl From<ExperimentError> for RunError {
    fn from(e: ExperimentError) -> Self {
        RunError::ExperimentFailed(e.to_string())
    }
}

/// Outcome of a successful run.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub output_dir: PathBuf,
    pub result: Value,
    pub manifest: Value,
}

/// Rejects JSON documents holding `null`, which is how non-finite numbers serialize.
pub fn ensure_finite(value: &Value, path: &str) -> Result<(), String> {
    match value {
        Value::Null => Err(format!("non-finite number at `{path}`")),
        Value::Array(a) => a
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| ensure_finite(v, &format!("{path}[{i}]"))),
        Value::Object(o) => o.iter().try_for_each(|(k, v)| {
            let p = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            ensure_finite(v, &p)
        }),
        _ => Ok(()),
    }
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<(), RunError> {
    ensure_finite(value, "").map_err(|m| RunError::ExperimentFailed(format!("{name}: {m}")))?;
    let text = serde_json::to_string_pretty(value).expect("JSON values serialize");
    fs::write(dir.join(name), text + "\n")
        .map_err(|e| RunError::ExperimentFailed(format!("cannot write {name}: {e}")))
}

/// Loads and resolves a configuration file, applying overrides.
pub fn load(path: &Path, overrides: &Overrides) -> Result<Resolved, RunError> {
    let text = fs::read_to_string(path)
        .map_err(|e| RunError::ConfigInvalid(ConfigError::new("", format!("cannot read {}: {e}", path.display()))))?;
    let mut resolved = parse_config(&text)
        .and_then(|c| c.resolve())
        .map_err(RunError::ConfigInvalid)?;
    if let Some(d) = &overrides.output_dir {
        resolved.output_dir = d.clone();
    }
    if let Some(s) = overrides.seed {
        resolved.seed = s;
    }
    if let Some(t) = overrides.threads {
        if t == 0 {
            return Err(RunError::ConfigInvalid(ConfigError::new("threads", "must be at least 1")));
        }
        resolved.threads = Some(t);
    }
    Ok(resolved)
}

/// Executes a resolved configuration.
pub fn execute(resolved: &Resolved, config_path: Option<&Path>) -> Result<RunSummary, RunError> {
    let dir = &resolved.output_dir;
    fs::create_dir_all(dir)
        .map_err(|e| RunError::ExperimentFailed(format!("cannot create {}: {e}", dir.display())))?;
    let _ = fs::remove_file(dir.join("error.json"));
    let start = Instant::now();
    let mut artifacts = Artifacts::new(dir);
    let outcome = match resolved.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| RunError::ExperimentFailed(e.to_string()))?
            .install(|| run_experiment(resolved, &mut artifacts)),
        None => run_experiment(resolved, &mut artifacts),
    };
    let parameters = resolved.parameters_json();
    let mut result = outcome?;
    result["parameters"] = parameters.clone();
    write_json(dir, "result.json", &result)?;
    let mut files = artifacts.files().to_vec();
    files.push("result.json".into());
    let manifest = json!({
        "experiment": resolved.experiment,
        "version": env!("CARGO_PKG_VERSION"),
        "config_path": config_path.map(|p| p.display().to_string()),
        "seed": resolved.seed,
        "threads": resolved.threads.unwrap_or_else(rayon::current_num_threads),
        "wall_time_seconds": start.elapsed().as_secs_f64(),
        "parameters": parameters,
        "files": files,
    });
    let manifest = match manifest {
        Value::Object(mut o) => {
            o.retain(|_, v| !v.is_null());
            Value::Object(o)
        }
        v => v,
    };
    write_json(dir, "manifest.json", &manifest)?;
    Ok(RunSummary {
        output_dir: dir.clone(),
        result,
        manifest,
    })
}

/// Loads, executes and, on failure, writes `error.json` where possible.
pub fn run(path: &Path, overrides: &Overrides) -> Result<RunSummary, RunError> {
    let resolved = load(path, overrides);
    let dir = match &resolved {
        Ok(r) => Some(r.output_dir.clone()),
        Err(_) => overrides.output_dir.clone(),
    };
    let outcome = resolved.and_then(|r| execute(&r, Some(path)));
    if let (Err(e), Some(dir)) = (&outcome, dir) {
        if fs::create_dir_all(&dir).is_ok() {
            let text = serde_json::to_string_pretty(&e.record()).expect("error record serializes");
            let _ = fs::write(dir.join("error.json"), text + "\n");
        }
    }
    outcome
}

/// Human-readable table of experiments and defaults.
pub fn list_experiments() -> String {
    use config::*;
    let rows: [(ExperimentKind, &str, String); 6] = [
        (
            ExperimentKind::FloquetMap,
            "[floquet_map]",
            "rabi=1 MHz, interaction_over_rabi=20, alpha 0..4 x41, modulation_over_rabi 10..30 x41, horizon=10 us, closed system".into(),
        ),
        (
            ExperimentKind::DesignGate,
            "[gate]",
            format!("rabi={DEFAULT_RABI_MHZ} MHz, branch=0, theta=pi/2, ratio_rule=exact, pulses=[square]"),
        ),
        (
            ExperimentKind::SimulateGate,
            "[gate]",
            format!(
                "rabi={DEFAULT_RABI_MHZ} MHz, gaussian_peak={DEFAULT_GAUSSIAN_PEAK_MHZ} MHz, branch=0, theta=pi/2, pulses=[square], trajectory_samples={DEFAULT_TRAJECTORY_SAMPLES}"
            ),
        ),
        (
            ExperimentKind::Robustness,
            "[gate], [robustness] kind",
            format!(
                "half_widths={DEFAULT_HALF_WIDTHS:?}, samples={}, pulses=[square, gaussian]",
                rydfloq::robustness::DEFAULT_SAMPLES
            ),
        ),
        (
            ExperimentKind::Doppler,
            "[gate], [doppler]",
            format!(
                "temperatures={DEFAULT_TEMPERATURES_UK:?} uK, lambda1=780 nm, lambda2=480 nm, mass=87Rb, samples={}, pulses=[square, gaussian]",
                rydfloq::robustness::DEFAULT_SAMPLES
            ),
        ),
        (
            ExperimentKind::Grover,
            "[gate], [grover]",
            "variants=[one-item, two-item], mode=pulse-level, pulses=[square]".into(),
        ),
    ];
    let mut out = String::new();
    out.push_str(&format!("{:<14} {:<26} {}\n", "EXPERIMENT", "SECTIONS", "DEFAULTS"));
    for (k, sections, defaults) in rows {
        out.push_str(&format!("{:<14} {:<26} {}\n", k.name(), sections, defaults));
    }
    out.push_str(&format!(
        "\nall experiments: keys `experiment` and `angular` are required; \
         [system] interaction={DEFAULT_INTERACTION_MHZ} MHz, lifetime tau_r={DEFAULT_LIFETIME_US} us \
         with gamma0 = gamma1 = 1/(2 tau_r); seed={DEFAULT_SEED}; \
         [integrator] rel_tol=1e-8, abs_tol=1e-10, sample_count=1000\n\
         frequencies are MHz and multiplied by 2*pi unless angular = true\n"
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn listing_names_every_experiment_and_defaults() {
        let s = list_experiments();
        for k in ExperimentKind::ALL {
            assert!(s.contains(k.name()), "{}", k.name());
        }
        assert!(s.contains("tau_r=400"));
        assert!(s.contains("gamma0 = gamma1 = 1/(2 tau_r)"));
        assert!(s.contains("samples=1001"));
    }

    #[test]
    fn non_finite_values_are_located() {
        let v = json!({ "a": [1.0, f64::NAN], "b": 2.0 });
        assert_eq!(ensure_finite(&v, "").unwrap_err(), "non-finite number at `a[1]`");
        assert!(ensure_finite(&json!({ "x": [1, 2] }), "").is_ok());
    }

    #[test]
    fn config_errors_carry_exit_code_two() {
        let e = RunError::ConfigInvalid(ConfigError::new("doppler.temperatures[0]", "bad"));
        assert_eq!(e.exit_code(), 2);
        assert_eq!(e.record()["key"], json!("doppler.temperatures[0]"));
    }
}
