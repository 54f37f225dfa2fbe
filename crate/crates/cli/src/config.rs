//! Strict TOML experiment configuration and its resolution into physical
//! parameters.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;
use std::path::PathBuf;

use rydfloq::grover::SearchVariant;
use rydfloq::robustness::{DEFAULT_SAMPLES, RB87_MASS};
use rydfloq::{DisorderKind, IntegratorConfig, PulseKind, RatioRule, SystemParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const DEFAULT_INTERACTION_MHZ: f64 = 70.18;
pub const DEFAULT_RABI_MHZ: f64 = 3.5;
pub const DEFAULT_GAUSSIAN_PEAK_MHZ: f64 = 8.1;
pub const DEFAULT_LIFETIME_US: f64 = 400.0;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_OUTPUT_DIR: &str = "rydfloq-output";
pub const DEFAULT_TRAJECTORY_SAMPLES: usize = 201;
pub const DEFAULT_TEMPERATURES_UK: [f64; 4] = [5.0, 10.0, 20.0, 40.0];
pub const DEFAULT_HALF_WIDTHS: [f64; 3] = [0.0, 0.05, 0.1];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FloquetMap,
    DesignGate,
    SimulateGate,
    Robustness,
    Doppler,
    Grover,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::FloquetMap,
        ExperimentKind::DesignGate,
        ExperimentKind::SimulateGate,
        ExperimentKind::Robustness,
        ExperimentKind::Doppler,
        ExperimentKind::Grover,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::FloquetMap => "floquet-map",
            ExperimentKind::DesignGate => "design-gate",
            ExperimentKind::SimulateGate => "simulate-gate",
            ExperimentKind::Robustness => "robustness",
            ExperimentKind::Doppler => "doppler",
            ExperimentKind::Grover => "grover",
        }
    }

    /// Sections the experiment reads besides `system` and `integrator`.
    fn sections(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::FloquetMap => &["floquet_map"],
            ExperimentKind::DesignGate | ExperimentKind::SimulateGate => &["gate"],
            ExperimentKind::Robustness => &["gate", "robustness"],
            ExperimentKind::Doppler => &["gate", "doppler"],
            ExperimentKind::Grover => &["gate", "grover"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// V in MHz (or rad/μs when `angular = true`).
    pub interaction: Option<f64>,
    /// Rydberg lifetime τ_r in μs; split evenly into both decay channels.
    pub lifetime: Option<f64>,
    /// Explicit decay rates in 1/μs, replacing `lifetime`.
    pub gamma0: Option<f64>,
    pub gamma1: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    pub rabi: Option<f64>,
    pub gaussian_peak: Option<f64>,
    pub branch: Option<u32>,
    /// Phase jump in radians.
    pub theta: Option<f64>,
    pub ratio_rule: Option<RatioRule>,
    pub pulses: Option<Vec<PulseKind>>,
    pub trajectory_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSection {
    pub rabi: Option<f64>,
    pub interaction_over_rabi: Option<f64>,
    pub alpha_min: Option<f64>,
    pub alpha_max: Option<f64>,
    pub alpha_points: Option<usize>,
    pub modulation_over_rabi_min: Option<f64>,
    pub modulation_over_rabi_max: Option<f64>,
    pub modulation_points: Option<usize>,
    /// Averaging window in μs.
    pub horizon: Option<f64>,
    /// Include Rydberg decay.
    pub dissipative: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobustnessSection {
    pub kind: Option<DisorderKind>,
    /// Relative for Rabi and timing disorder; a frequency for detuning disorder.
    pub half_widths: Option<Vec<f64>>,
    pub samples: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DopplerSection {
    /// μK.
    pub temperatures: Option<Vec<f64>>,
    /// nm.
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    /// kg.
    pub atomic_mass: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroverMode {
    Ideal,
    PulseLevel,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroverSection {
    pub variants: Option<Vec<SearchVariant>>,
    pub mode: Option<GroverMode>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    pub rel_tol: Option<f64>,
    pub abs_tol: Option<f64>,
    pub max_step: Option<f64>,
    pub sample_count: Option<usize>,
}

/// Raw configuration document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    /// `false`: frequencies are MHz and multiplied by 2π; `true`: rad/μs.
    pub angular: bool,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub threads: Option<usize>,
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    pub gate: Option<GateSection>,
    pub floquet_map: Option<MapSection>,
    pub robustness: Option<RobustnessSection>,
    pub doppler: Option<DopplerSection>,
    pub grover: Option<GroverSection>,
}

/// Configuration failure with the offending key path.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

/// Parses a TOML document, rejecting unknown keys.
pub fn parse_config(text: &str) -> CResult<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| ConfigError::new("", e.to_string().trim()))?;
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let key = if key == "." { String::new() } else { key };
        ConfigError::new(key, e.into_inner().message().trim().to_string())
    })
}

/// A frequency in both representations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Frequency {
    pub rad_per_us: f64,
}

impl Frequency {
    pub fn mhz(&self) -> f64 {
        self.rad_per_us / TAU
    }

    pub fn json(&self) -> Value {
        json!({ "mhz": self.mhz(), "rad_per_us": self.rad_per_us })
    }
}

fn positive(key: &str, v: f64) -> CResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(key: &str, v: f64) -> CResult<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be non-negative and finite, got {v}")))
    }
}

fn at_least(key: &str, v: usize, min: usize) -> CResult<usize> {
    if v >= min {
        Ok(v)
    } else {
        Err(ConfigError::new(key, format!("must be at least {min}, got {v}")))
    }
}

fn non_empty<T>(key: &str, v: Vec<T>) -> CResult<Vec<T>> {
    if v.is_empty() {
        Err(ConfigError::new(key, "must not be empty"))
    } else {
        Ok(v)
    }
}

/// Gate parameters after defaults and unit conversion.
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    pub rabi: Frequency,
    pub gaussian_peak: Frequency,
    pub branch: u32,
    pub theta: f64,
    pub ratio_rule: RatioRule,
    pub pulses: Vec<PulseKind>,
    pub trajectory_samples: usize,
}

impl GateParams {
    pub fn omega_peak(&self, kind: PulseKind) -> f64 {
        match kind {
            PulseKind::Square => self.rabi.rad_per_us,
            PulseKind::Gaussian => self.gaussian_peak.rad_per_us,
        }
    }

    fn json(&self) -> Value {
        json!({
            "rabi": self.rabi.json(),
            "gaussian_peak": self.gaussian_peak.json(),
            "branch": self.branch,
            "theta": self.theta,
            "ratio_rule": self.ratio_rule,
            "pulses": self.pulses,
            "trajectory_samples": self.trajectory_samples,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapParams {
    pub rabi: Frequency,
    pub interaction_over_rabi: f64,
    pub alpha: Vec<f64>,
    pub modulation_over_rabi: Vec<f64>,
    pub horizon: f64,
    pub dissipative: bool,
}

impl MapParams {
    pub fn interaction(&self) -> f64 {
        self.interaction_over_rabi * self.rabi.rad_per_us
    }

    pub fn modulation_grid(&self) -> Vec<f64> {
        self.modulation_over_rabi.iter().map(|r| r * self.rabi.rad_per_us).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustnessParams {
    pub kind: DisorderKind,
    /// Converted to rad/μs for detuning disorder.
    pub half_widths: Vec<f64>,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DopplerParams {
    pub temperatures: Vec<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub atomic_mass: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroverParams {
    pub variants: Vec<SearchVariant>,
    pub mode: GroverMode,
}

/// Experiment-specific parameters.
#[derive(Clone, Debug, PartialEq)]
pub enum Plan {
    FloquetMap(MapParams),
    DesignGate(GateParams),
    SimulateGate(GateParams),
    Robustness(GateParams, RobustnessParams),
    Doppler(GateParams, DopplerParams),
    Grover(GateParams, GroverParams),
}

/// Fully resolved configuration: every default is explicit.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub experiment: ExperimentKind,
    pub angular: bool,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub threads: Option<usize>,
    pub system: SystemParams,
    pub lifetime: Option<f64>,
    pub integrator: IntegratorConfig,
    pub plan: Plan,
}

impl ExperimentConfig {
    fn freq(&self, key: &str, value: Option<f64>, default_mhz: f64) -> CResult<Frequency> {
        let rad = match value {
            Some(v) if self.angular => positive(key, v)?,
            Some(v) => positive(key, v)? * TAU,
            None => default_mhz * TAU,
        };
        Ok(Frequency { rad_per_us: rad })
    }

    fn check_sections(&self) -> CResult<()> {
        let present = [
            ("gate", self.gate.is_some()),
            ("floquet_map", self.floquet_map.is_some()),
            ("robustness", self.robustness.is_some()),
            ("doppler", self.doppler.is_some()),
            ("grover", self.grover.is_some()),
        ];
        for (name, is_present) in present {
            if is_present && !self.experiment.sections().contains(&name) {
                return Err(ConfigError::new(
                    name,
                    format!("section is not used by experiment `{}`", self.experiment),
                ));
            }
        }
        Ok(())
    }

    fn resolve_system(&self, interaction: Option<f64>) -> CResult<(SystemParams, Option<f64>)> {
        let s = &self.system;
        let v = match interaction {
            Some(v) => v,
            None => self.freq("system.interaction", s.interaction, DEFAULT_INTERACTION_MHZ)?.rad_per_us,
        };
        match (s.gamma0, s.gamma1) {
            (None, None) => {
                let lifetime = positive("system.lifetime", s.lifetime.unwrap_or(DEFAULT_LIFETIME_US))?;
                let sys = SystemParams::from_lifetime(v, lifetime)
                    .map_err(|e| ConfigError::new("system", e.to_string()))?;
                Ok((sys, Some(lifetime)))
            }
            (Some(g0), Some(g1)) => {
                if s.lifetime.is_some() {
                    return Err(ConfigError::new("system.lifetime", "conflicts with explicit gamma0/gamma1"));
                }
                let g0 = non_negative("system.gamma0", g0)?;
                let g1 = non_negative("system.gamma1", g1)?;
                let sys = SystemParams::new(v, g0, g1).map_err(|e| ConfigError::new("system", e.to_string()))?;
                Ok((sys, None))
            }
            (Some(_), None) => Err(ConfigError::new("system.gamma1", "required together with gamma0")),
            (None, Some(_)) => Err(ConfigError::new("system.gamma0", "required together with gamma1")),
        }
    }

    fn resolve_integrator(&self) -> CResult<IntegratorConfig> {
        let d = IntegratorConfig::default();
        let s = &self.integrator;
        Ok(IntegratorConfig {
            rel_tol: positive("integrator.rel_tol", s.rel_tol.unwrap_or(d.rel_tol))?,
            abs_tol: positive("integrator.abs_tol", s.abs_tol.unwrap_or(d.abs_tol))?,
            max_step: s.max_step.map(|h| positive("integrator.max_step", h)).transpose()?,
            sample_count: at_least("integrator.sample_count", s.sample_count.unwrap_or(d.sample_count), 2)?,
        })
    }

    fn resolve_gate(&self, default_pulses: &[PulseKind], theta_allowed: bool) -> CResult<GateParams> {
        let g = self.gate.clone().unwrap_or_default();
        if !theta_allowed && g.theta.is_some() {
            return Err(ConfigError::new(
                "gate.theta",
                format!("experiment `{}` fixes the phase jump", self.experiment),
            ));
        }
        let theta = g.theta.unwrap_or(FRAC_PI_2);
        if !theta.is_finite() {
            return Err(ConfigError::new("gate.theta", "must be finite"));
        }
        Ok(GateParams {
            rabi: self.freq("gate.rabi", g.rabi, DEFAULT_RABI_MHZ)?,
            gaussian_peak: self.freq("gate.gaussian_peak", g.gaussian_peak, DEFAULT_GAUSSIAN_PEAK_MHZ)?,
            branch: g.branch.unwrap_or(0),
            theta,
            ratio_rule: g.ratio_rule.unwrap_or_default(),
            pulses: non_empty("gate.pulses", g.pulses.unwrap_or_else(|| default_pulses.to_vec()))?,
            trajectory_samples: at_least(
                "gate.trajectory_samples",
                g.trajectory_samples.unwrap_or(DEFAULT_TRAJECTORY_SAMPLES),
                2,
            )?,
        })
    }

    fn resolve_map(&self) -> CResult<MapParams> {
        if self.system.interaction.is_some() {
            return Err(ConfigError::new(
                "system.interaction",
                "floquet-map sets V through floquet_map.interaction_over_rabi",
            ));
        }
        let m = self.floquet_map.clone().unwrap_or_default();
        let a0 = non_negative("floquet_map.alpha_min", m.alpha_min.unwrap_or(0.0))?;
        let a1 = non_negative("floquet_map.alpha_max", m.alpha_max.unwrap_or(4.0))?;
        if a1 < a0 {
            return Err(ConfigError::new("floquet_map.alpha_max", "must not be below alpha_min"));
        }
        let r0 = positive("floquet_map.modulation_over_rabi_min", m.modulation_over_rabi_min.unwrap_or(10.0))?;
        let r1 = positive("floquet_map.modulation_over_rabi_max", m.modulation_over_rabi_max.unwrap_or(30.0))?;
        if r1 < r0 {
            return Err(ConfigError::new(
                "floquet_map.modulation_over_rabi_max",
                "must not be below modulation_over_rabi_min",
            ));
        }
        let na = at_least("floquet_map.alpha_points", m.alpha_points.unwrap_or(41), 1)?;
        let nr = at_least("floquet_map.modulation_points", m.modulation_points.unwrap_or(41), 1)?;
        Ok(MapParams {
            rabi: self.freq("floquet_map.rabi", m.rabi, 1.0)?,
            interaction_over_rabi: positive(
                "floquet_map.interaction_over_rabi",
                m.interaction_over_rabi.unwrap_or(20.0),
            )?,
            alpha: linspace(a0, a1, na),
            modulation_over_rabi: linspace(r0, r1, nr),
            horizon: positive("floquet_map.horizon", m.horizon.unwrap_or(10.0))?,
            dissipative: m.dissipative.unwrap_or(false),
        })
    }

    fn resolve_robustness(&self) -> CResult<RobustnessParams> {
        let r = self.robustness.clone().unwrap_or_default();
        let kind = r
            .kind
            .ok_or_else(|| ConfigError::new("robustness.kind", "missing required key"))?;
        let widths = non_empty(
            "robustness.half_widths",
            r.half_widths.unwrap_or_else(|| DEFAULT_HALF_WIDTHS.to_vec()),
        )?;
        let mut half_widths = Vec::with_capacity(widths.len());
        for (i, w) in widths.into_iter().enumerate() {
            let key = format!("robustness.half_widths[{i}]");
            let w = non_negative(&key, w)?;
            let w = if kind == DisorderKind::DetuningAbsolute && !self.angular {
                w * TAU
            } else {
                w
            };
            if kind != DisorderKind::DetuningAbsolute && w >= 1.0 {
                return Err(ConfigError::new(key, "relative half-width must be below 1"));
            }
            half_widths.push(w);
        }
        Ok(RobustnessParams {
            kind,
            half_widths,
            samples: at_least("robustness.samples", r.samples.unwrap_or(DEFAULT_SAMPLES), 1)?,
        })
    }

    fn resolve_doppler(&self) -> CResult<DopplerParams> {
        let d = self.doppler.clone().unwrap_or_default();
        let temps = non_empty(
            "doppler.temperatures",
            d.temperatures.unwrap_or_else(|| DEFAULT_TEMPERATURES_UK.to_vec()),
        )?;
        let temperatures = temps
            .into_iter()
            .enumerate()
            .map(|(i, t)| non_negative(&format!("doppler.temperatures[{i}]"), t))
            .collect::<CResult<Vec<_>>>()?;
        Ok(DopplerParams {
            temperatures,
            lambda1: positive("doppler.lambda1", d.lambda1.unwrap_or(780.0))?,
            lambda2: positive("doppler.lambda2", d.lambda2.unwrap_or(480.0))?,
            atomic_mass: positive("doppler.atomic_mass", d.atomic_mass.unwrap_or(RB87_MASS))?,
            samples: at_least("doppler.samples", d.samples.unwrap_or(DEFAULT_SAMPLES), 1)?,
        })
    }

    fn resolve_grover(&self) -> CResult<GroverParams> {
        let g = self.grover.clone().unwrap_or_default();
        Ok(GroverParams {
            variants: non_empty(
                "grover.variants",
                g.variants
                    .unwrap_or_else(|| vec![SearchVariant::OneItem, SearchVariant::TwoItem]),
            )?,
            mode: g.mode.unwrap_or(GroverMode::PulseLevel),
        })
    }

    /// Applies defaults, converts units and validates every value.
    pub fn resolve(&self) -> CResult<Resolved> {
        self.check_sections()?;
        if let Some(t) = self.threads {
            at_least("threads", t, 1)?;
        }
        let both = [PulseKind::Square, PulseKind::Gaussian];
        let (plan, interaction) = match self.experiment {
            ExperimentKind::FloquetMap => {
                let m = self.resolve_map()?;
                let v = m.interaction();
                (Plan::FloquetMap(m), Some(v))
            }
            ExperimentKind::DesignGate => (Plan::DesignGate(self.resolve_gate(&[PulseKind::Square], true)?), None),
            ExperimentKind::SimulateGate => (Plan::SimulateGate(self.resolve_gate(&[PulseKind::Square], true)?), None),
            ExperimentKind::Robustness => (
                Plan::Robustness(self.resolve_gate(&both, false)?, self.resolve_robustness()?),
                None,
            ),
            ExperimentKind::Doppler => (
                Plan::Doppler(self.resolve_gate(&both, false)?, self.resolve_doppler()?),
                None,
            ),
            ExperimentKind::Grover => (
                Plan::Grover(self.resolve_gate(&[PulseKind::Square], false)?, self.resolve_grover()?),
                None,
            ),
        };
        let (system, lifetime) = self.resolve_system(interaction)?;
        Ok(Resolved {
            experiment: self.experiment,
            angular: self.angular,
            seed: self.seed.unwrap_or(DEFAULT_SEED),
            output_dir: self.output_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
            threads: self.threads,
            system,
            lifetime,
            integrator: self.resolve_integrator()?,
            plan,
        })
    }
}

/// `n` evenly spaced points on `[a, b]`; a single point sits at `a`.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

impl Resolved {
    /// Parameter record embedded in the manifest and every report.
    pub fn parameters_json(&self) -> Value {
        let v = Frequency {
            rad_per_us: self.system.v_int,
        };
        let mut system = json!({
            "interaction": v.json(),
            "gamma0": self.system.gamma0,
            "gamma1": self.system.gamma1,
        });
        if let Some(l) = self.lifetime {
            system["lifetime"] = json!(l);
        }
        let mut out = json!({
            "experiment": self.experiment,
            "angular": self.angular,
            "seed": self.seed,
            "system": system,
            "integrator": self.integrator,
        });
        let section = match &self.plan {
            Plan::FloquetMap(m) => json!({ "floquet_map": {
                "rabi": m.rabi.json(),
                "interaction_over_rabi": m.interaction_over_rabi,
                "alpha": m.alpha,
                "modulation_over_rabi": m.modulation_over_rabi,
                "horizon": m.horizon,
                "dissipative": m.dissipative,
            }}),
            Plan::DesignGate(g) | Plan::SimulateGate(g) => json!({ "gate": g.json() }),
            Plan::Robustness(g, r) => json!({
                "gate": g.json(),
                "robustness": {
                    "kind": r.kind,
                    "half_widths": r.half_widths,
                    "half_width_unit": match r.kind {
                        DisorderKind::DetuningAbsolute => "rad_per_us",
                        _ => "relative",
                    },
                    "samples": r.samples,
                },
            }),
            Plan::Doppler(g, d) => json!({
                "gate": g.json(),
                "doppler": {
                    "temperatures": d.temperatures,
                    "lambda1": d.lambda1,
                    "lambda2": d.lambda2,
                    "atomic_mass": d.atomic_mass,
                    "samples": d.samples,
                },
            }),
            Plan::Grover(g, s) => json!({
                "gate": g.json(),
                "grover": { "variants": s.variants, "mode": s.mode },
            }),
        };
        if let (Value::Object(o), Value::Object(extra)) = (&mut out, section) {
            o.extend(extra);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn resolve(text: &str) -> CResult<Resolved> {
        parse_config(text)?.resolve()
    }

    #[test]
    fn defaults_resolve_to_reference_parameters() {
        let r = resolve("experiment = \"simulate-gate\"\nangular = false\n").unwrap();
        assert_abs_diff_eq!(r.system.v_int, TAU * 70.18, epsilon = 1e-12);
        assert_abs_diff_eq!(r.system.gamma0, 1.0 / 800.0, epsilon = 1e-15);
        assert_eq!(r.system.gamma0, r.system.gamma1);
        let Plan::SimulateGate(g) = r.plan else { panic!() };
        assert_abs_diff_eq!(g.rabi.rad_per_us, TAU * 3.5, epsilon = 1e-12);
        assert_eq!(g.pulses, vec![PulseKind::Square]);
        assert_eq!(g.theta, FRAC_PI_2);
    }

    #[test]
    fn angular_flag_controls_conversion() {
        let r = resolve("experiment = \"design-gate\"\nangular = true\n[system]\ninteraction = 100.0\n").unwrap();
        assert_eq!(r.system.v_int, 100.0);
        let r = resolve("experiment = \"design-gate\"\nangular = false\n[system]\ninteraction = 100.0\n").unwrap();
        assert_abs_diff_eq!(r.system.v_int, TAU * 100.0, epsilon = 1e-12);
    }

    #[test]
    fn angular_key_is_required() {
        let e = parse_config("experiment = \"grover\"\n").unwrap_err();
        assert!(e.message.contains("angular"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_path() {
        let e = parse_config("experiment = \"grover\"\nangular = false\n[system]\nlifetme = 3.0\n").unwrap_err();
        assert_eq!(e.key, "system.lifetme");
        assert!(e.message.contains("unknown field"), "{e}");
        let e = parse_config("experiment = \"grover\"\nangular = false\nfoo = 1\n").unwrap_err();
        assert!(e.message.contains("foo"), "{e}");
    }

    #[test]
    fn negative_temperature_names_key() {
        let e = resolve("experiment = \"doppler\"\nangular = false\n[doppler]\ntemperatures = [10.0, -1.0]\n").unwrap_err();
        assert_eq!(e.key, "doppler.temperatures[1]");
    }

    #[test]
    fn unused_sections_are_rejected() {
        let e = resolve("experiment = \"design-gate\"\nangular = false\n[doppler]\nsamples = 3\n").unwrap_err();
        assert_eq!(e.key, "doppler");
    }

    #[test]
    fn conflicting_decay_specs_are_rejected() {
        let e = resolve(
            "experiment = \"design-gate\"\nangular = false\n[system]\nlifetime = 100.0\ngamma0 = 0.1\ngamma1 = 0.1\n",
        )
        .unwrap_err();
        assert_eq!(e.key, "system.lifetime");
        let e = resolve("experiment = \"design-gate\"\nangular = false\n[system]\ngamma0 = 0.1\n").unwrap_err();
        assert_eq!(e.key, "system.gamma1");
    }

    #[test]
    fn detuning_widths_follow_unit_convention() {
        let r = resolve(
            "experiment = \"robustness\"\nangular = false\n[robustness]\nkind = \"detuning-absolute\"\nhalf_widths = [0.5]\n",
        )
        .unwrap();
        let Plan::Robustness(_, p) = r.plan else { panic!() };
        assert_abs_diff_eq!(p.half_widths[0], TAU * 0.5, epsilon = 1e-12);
        assert_eq!(p.samples, 1001);
    }

    #[test]
    fn map_defaults_span_reference_grid() {
        let r = resolve("experiment = \"floquet-map\"\nangular = false\n").unwrap();
        let Plan::FloquetMap(m) = &r.plan else { panic!() };
        assert_eq!(m.alpha.len(), 41);
        assert_eq!(m.modulation_over_rabi.len(), 41);
        assert_abs_diff_eq!(m.alpha[40], 4.0);
        assert_abs_diff_eq!(r.system.v_int, 20.0 * TAU, epsilon = 1e-12);
    }

    #[test]
    fn parameters_echo_both_units() {
        let r = resolve("experiment = \"grover\"\nangular = false\n").unwrap();
        let p = r.parameters_json();
        assert_abs_diff_eq!(p["system"]["interaction"]["mhz"].as_f64().unwrap(), 70.18, epsilon = 1e-12);
        assert!(p["gate"]["rabi"]["rad_per_us"].as_f64().unwrap() > 21.0);
        assert_eq!(p["system"]["lifetime"], json!(400.0));
        assert_eq!(p["grover"]["mode"], json!("pulse-level"));
    }

    #[test]
    fn linspace_endpoints() {
        let g = linspace(10.0, 30.0, 41);
        assert_eq!(g[0], 10.0);
        assert_abs_diff_eq!(g[40], 30.0, epsilon = 1e-12);
        assert_eq!(linspace(2.0, 5.0, 1), vec![2.0]);
    }
}
