//! Parameter-disorder and Doppler-dephasing sweeps of the Bell fidelity.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{StandardNormal, Uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gate::{bell_fidelity, PulseSchedule};
use crate::lindblad::IntegratorConfig;
use crate::pulse::PulseKind;
use crate::system::SystemParams;

/// Boltzmann constant in J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Mass of ⁸⁷Rb in kg.
pub const RB87_MASS: f64 = 1.443e-25;

pub const DEFAULT_SAMPLES: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisorderKind {
    /// Ω -> Ω (1 + w).
    RabiRelative,
    /// Δ₀ -> Δ₀ + w, with w in rad/μs.
    DetuningAbsolute,
    /// T -> T (1 + w).
    TimeRelative,
}

impl DisorderKind {
    pub fn name(self) -> &'static str {
        match self {
            DisorderKind::RabiRelative => "rabi-relative",
            DisorderKind::DetuningAbsolute => "detuning-absolute",
            DisorderKind::TimeRelative => "time-relative",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DisorderSpec {
    pub kind: DisorderKind,
    pub half_width: f64,
    pub samples: usize,
    pub seed: u64,
}

impl DisorderSpec {
    pub fn new(kind: DisorderKind, half_width: f64, seed: u64) -> Self {
        Self {
            kind,
            half_width,
            samples: DEFAULT_SAMPLES,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_width >= 0.0 && self.half_width.is_finite()) {
            return Err(Error::invalid("half_width", "must be non-negative"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be at least 1"));
        }
        Ok(())
    }
}

/// Applies one disorder draw. Timing disorder stretches the window and the
/// jump time; a square pulse stretches with them, while a Gaussian keeps
/// its lobes and is truncated or padded with zero amplitude.
pub fn apply_deviation(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    kind: DisorderKind,
    draw: f64,
) -> Result<(PulseSchedule, SystemParams)> {
    let mut s = *schedule;
    match kind {
        DisorderKind::RabiRelative => s.drive.shape.omega_peak *= 1.0 + draw,
        DisorderKind::DetuningAbsolute => s.drive.delta0 += draw,
        DisorderKind::TimeRelative => {
            let k = 1.0 + draw;
            if !(k > 0.0) {
                return Err(Error::invalid("draw", "timing disorder must keep T positive"));
            }
            s.drive.duration *= k;
            s.drive.jump_time *= k;
            if s.drive.shape.kind == PulseKind::Square {
                s.drive.shape.duration *= k;
            }
        }
    }
    s.drive.validate()?;
    Ok((s, *sys))
}

/// Independent generator for sample `index`.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Statistics of one sweep plus its per-sample records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSummary {
    /// What was varied: a disorder kind or `doppler`.
    pub parameter: String,
    /// Half-width W or temperature in μK.
    pub value: f64,
    pub pulse: PulseKind,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub samples: usize,
    pub seed: u64,
    #[serde(skip)]
    pub draws: Vec<f64>,
    #[serde(skip)]
    pub fidelities: Vec<f64>,
}

impl SweepSummary {
    fn from_samples(parameter: String, value: f64, pulse: PulseKind, seed: u64, draws: Vec<f64>, fids: Vec<f64>) -> Self {
        let n = fids.len() as f64;
        let mean = fids.iter().sum::<f64>() / n;
        let var = fids.iter().map(|f| (f - mean) * (f - mean)).sum::<f64>() / n;
        let min = fids.iter().copied().fold(f64::INFINITY, f64::min);
        let max = fids.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            parameter,
            value,
            pulse,
            mean,
            std: var.sqrt(),
            min,
            max,
            samples: fids.len(),
            seed,
            draws,
            fidelities: fids,
        }
    }

    /// CSV `index, draw, fidelity`.
    pub fn write_samples_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "draw", "fidelity"])?;
        for (i, (d, f)) in self.draws.iter().zip(&self.fidelities).enumerate() {
            w.write_record([i.to_string(), d.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// One row per sweep: `parameter, value, pulse, mean, std, min, max, samples, seed`.
pub fn write_summary_csv<W: Write>(rows: &[SweepSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["parameter", "value", "pulse", "mean", "std", "min", "max", "samples", "seed"])?;
    for r in rows {
        w.write_record([
            r.parameter.clone(),
            r.value.to_string(),
            r.pulse.name().to_string(),
            r.mean.to_string(),
            r.std.to_string(),
            r.min.to_string(),
            r.max.to_string(),
            r.samples.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_samples(
    draws: &[f64],
    f: impl Fn(f64) -> Result<f64> + Sync,
) -> Result<Vec<f64>> {
    draws.par_iter().map(|&d| f(d)).collect()
}

/// Bell fidelity under `samples` uniform draws from `[-W, W]`.
pub fn disorder_sweep(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    spec: &DisorderSpec,
    cfg: &IntegratorConfig,
) -> Result<SweepSummary> {
    spec.validate()?;
    let w = spec.half_width;
    let draws: Vec<f64> = (0..spec.samples)
        .map(|i| {
            if w == 0.0 {
                0.0
            } else {
                let dist = Uniform::new_inclusive(-w, w).expect("finite interval");
                sample_rng(spec.seed, i).sample(dist)
            }
        })
        .collect();
    let fids = run_samples(&draws, |d| {
        let (s, p) = apply_deviation(schedule, sys, spec.kind, d)?;
        bell_fidelity(&s, &p, cfg)
    })?;
    Ok(SweepSummary::from_samples(
        spec.kind.name().into(),
        w,
        schedule.kind(),
        spec.seed,
        draws,
        fids,
    ))
}

/// Thermal Doppler model of a counter-propagating two-photon excitation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DopplerSpec {
    /// μK.
    pub temperature: f64,
    /// nm.
    pub lambda1: f64,
    /// nm.
    pub lambda2: f64,
    /// kg.
    pub atomic_mass: f64,
    pub samples: usize,
    pub seed: u64,
}

impl DopplerSpec {
    pub fn rb87(temperature: f64, seed: u64) -> Self {
        Self {
            temperature,
            lambda1: 780.0,
            lambda2: 480.0,
            atomic_mass: RB87_MASS,
            samples: DEFAULT_SAMPLES,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(Error::invalid("temperature", "must be non-negative"));
        }
        if !(self.lambda1 > 0.0 && self.lambda2 > 0.0) {
            return Err(Error::invalid("lambda", "wavelengths must be positive"));
        }
        if !(self.atomic_mass > 0.0) {
            return Err(Error::invalid("atomic_mass", "must be positive"));
        }
        if self.samples == 0 {
            return Err(Error::invalid("samples", "must be at least 1"));
        }
        Ok(())
    }

    /// `k_eff = 2π (1/λ₂ - 1/λ₁)` in 1/m.
    pub fn k_eff(&self) -> f64 {
        std::f64::consts::TAU * (1.0 / self.lambda2 - 1.0 / self.lambda1) * 1e9
    }

    /// `Δv = sqrt(k_B T / m)` in m/s.
    pub fn rms_velocity(&self) -> f64 {
        (BOLTZMANN * self.temperature * 1e-6 / self.atomic_mass).sqrt()
    }

    /// One-sigma shift `k_eff Δv` in rad/μs.
    pub fn sigma_shift(&self) -> f64 {
        self.k_eff() * self.rms_velocity() * 1e-6
    }
}

/// `δ_D = k_eff · draw · Δv` in rad/μs for a standard-normal `draw`.
pub fn doppler_shift_sample(spec: &DopplerSpec, draw: f64) -> f64 {
    draw * spec.sigma_shift()
}

/// Bell fidelity averaged over quasi-static thermal Doppler shifts, one
/// shared velocity draw per shot.
pub fn doppler_sweep(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    spec: &DopplerSpec,
    cfg: &IntegratorConfig,
) -> Result<SweepSummary> {
    spec.validate()?;
    let draws: Vec<f64> = (0..spec.samples)
        .map(|i| sample_rng(spec.seed, i).sample::<f64, _>(StandardNormal))
        .collect();
    let fids = run_samples(&draws, |d| {
        let mut s = *schedule;
        s.drive.doppler_shift = doppler_shift_sample(spec, d);
        bell_fidelity(&s, sys, cfg)
    })?;
    Ok(SweepSummary::from_samples(
        "doppler".into(),
        spec.temperature,
        schedule.kind(),
        spec.seed,
        draws,
        fids,
    ))
}

/// [`doppler_sweep`] at each temperature (μK).
pub fn doppler_temperature_scan(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    spec: &DopplerSpec,
    temperatures: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<SweepSummary>> {
    temperatures
        .iter()
        .map(|&t| {
            let s = DopplerSpec {
                temperature: t,
                ..*spec
            };
            doppler_sweep(schedule, sys, &s, cfg)
        })
        .collect()
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::floquet::design_gate;
    use crate::gate::build_schedule;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn setup(kind: PulseKind) -> (PulseSchedule, SystemParams) {
        let sys = SystemParams::from_lifetime(TAU * 70.18, 400.0).unwrap();
        let d = design_gate(&sys, TAU * 3.5, 0, FRAC_PI_2).unwrap();
        let omega = if kind == PulseKind::Square { 3.5 } else { 8.1 };
        (build_schedule(&d, kind, TAU * omega).unwrap(), sys)
    }

    #[test]
    fn zero_draw_is_identity() {
        let (s, sys) = setup(PulseKind::Gaussian);
        for k in [DisorderKind::RabiRelative, DisorderKind::DetuningAbsolute, DisorderKind::TimeRelative] {
            let (p, q) = apply_deviation(&s, &sys, k, 0.0).unwrap();
            assert_eq!(p, s);
            assert_eq!(q, sys);
        }
    }

    #[test]
    fn single_substitutions() {
        let (s, sys) = setup(PulseKind::Square);
        let (p, _) = apply_deviation(&s, &sys, DisorderKind::RabiRelative, 0.1).unwrap();
        assert_abs_diff_eq!(p.drive.shape.omega_peak, 1.1 * s.drive.shape.omega_peak, epsilon = 1e-12);
        assert_eq!(p.drive.delta0, s.drive.delta0);
        let (p, _) = apply_deviation(&s, &sys, DisorderKind::DetuningAbsolute, 0.25).unwrap();
        assert_eq!(p.drive.delta0, 0.25);
        assert_eq!(p.drive.shape, s.drive.shape);
        let (p, _) = apply_deviation(&s, &sys, DisorderKind::TimeRelative, -0.1).unwrap();
        assert_abs_diff_eq!(p.gate_time(), 0.9 * s.gate_time(), epsilon = 1e-12);
        assert_abs_diff_eq!(p.drive.jump_time, 0.9 * s.drive.jump_time, epsilon = 1e-12);
        assert_eq!(p.drive.shape.omega_peak, s.drive.shape.omega_peak);
    }

    #[test]
    fn gaussian_timing_keeps_lobes() {
        let (s, sys) = setup(PulseKind::Gaussian);
        let (p, _) = apply_deviation(&s, &sys, DisorderKind::TimeRelative, 0.1).unwrap();
        assert_eq!(p.drive.shape, s.drive.shape);
        assert_abs_diff_eq!(p.gate_time(), 1.1 * s.gate_time(), epsilon = 1e-12);
    }

    #[test]
    fn doppler_constants() {
        let spec = DopplerSpec::rb87(10.0, 0);
        assert_abs_diff_eq!(spec.rms_velocity(), 0.031, epsilon = 5e-4);
        assert_abs_diff_eq!(spec.k_eff(), 5.03e6, epsilon = 0.01e6);
        assert_abs_diff_eq!(spec.sigma_shift() / TAU, 0.025, epsilon = 1e-3);
        let cold = DopplerSpec::rb87(0.0, 0);
        assert_eq!(doppler_shift_sample(&cold, 1.3), 0.0);
        let hot = DopplerSpec::rb87(40.0, 0);
        assert_abs_diff_eq!(hot.rms_velocity(), 2.0 * spec.rms_velocity(), epsilon = 1e-15);
    }

    #[test]
    fn streams_are_independent_of_order() {
        let a: f64 = sample_rng(7, 3).sample(StandardNormal);
        let _: f64 = sample_rng(7, 2).sample(StandardNormal);
        let b: f64 = sample_rng(7, 3).sample(StandardNormal);
        assert_eq!(a, b);
        let c: f64 = sample_rng(7, 4).sample(StandardNormal);
        assert_ne!(a, c);
    }

    #[test]
    fn slope_of_line() {
        assert_abs_diff_eq!(fit_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_width_sweep_has_no_spread() {
        let (s, sys) = setup(PulseKind::Square);
        let cfg = IntegratorConfig::default().with_samples(2);
        let spec = DisorderSpec {
            samples: 3,
            ..DisorderSpec::new(DisorderKind::RabiRelative, 0.0, 1)
        };
        let r = disorder_sweep(&s, &sys, &spec, &cfg).unwrap();
        let base = bell_fidelity(&s, &sys, &cfg).unwrap();
        assert!(r.std < 1e-15);
        assert_abs_diff_eq!(r.mean, base, epsilon = 1e-15);
    }
}
