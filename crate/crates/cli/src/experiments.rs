//! Experiment dispatch: each runner writes its CSV tables and returns the
//! `result.json` summary.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rydfloq::floquet::{return_ratio_candidates, J0_FIRST_ZERO};
use rydfloq::gate::{bell_fidelity, channel_with_trajectory, write_fidelity_csv};
use rydfloq::grover::SearchReport;
use rydfloq::lindblad::floquet_map;
use rydfloq::robustness::{disorder_sweep, doppler_temperature_scan, fit_slope, write_summary_csv};
use rydfloq::{
    build_schedule, design_gate_with, run_search, CPhaseTarget, DisorderSpec, DopplerSpec, GateMode, GateReport,
    PulseKind, PulseSchedule, SearchSpec, SweepSummary, SystemParams,
};
use serde_json::{json, Value};

use crate::config::{DopplerParams, GateParams, GroverMode, GroverParams, MapParams, Plan, Resolved, RobustnessParams};

/// Failure while running an experiment or writing its artifacts.
#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Domain(#[from] rydfloq::Error),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type EResult<T> = std::result::Result<T, ExperimentError>;

/// Output directory that records every file written.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Self {
        Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        }
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    /// Creates `name` and hands a buffered writer to `write`.
    pub fn csv(
        &mut self,
        name: &str,
        write: impl FnOnce(BufWriter<File>) -> rydfloq::Result<()>,
    ) -> EResult<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|source| ExperimentError::Io { path, source })?;
        write(BufWriter::new(file))?;
        self.files.push(name.to_string());
        Ok(())
    }
}

fn schedule(sys: &SystemParams, gate: &GateParams, kind: PulseKind, theta: f64) -> rydfloq::Result<PulseSchedule> {
    let peak = gate.omega_peak(kind);
    let design = design_gate_with(sys, gate.rabi.rad_per_us, gate.branch, theta, gate.ratio_rule)?;
    build_schedule(&design, kind, peak)
}

fn schedule_json(s: &PulseSchedule) -> Value {
    json!({
        "pulse": s.kind(),
        "gate_time": s.gate_time(),
        "theta": s.theta(),
        "drive": s.drive,
    })
}

/// Runs the planned experiment, writing tables into `out`.
pub fn run_experiment(r: &Resolved, out: &mut Artifacts) -> EResult<Value> {
    match &r.plan {
        Plan::FloquetMap(m) => run_map(r, m, out),
        Plan::DesignGate(g) => run_design(r, g, out),
        Plan::SimulateGate(g) => run_simulate(r, g, out),
        Plan::Robustness(g, p) => run_robustness(r, g, p, out),
        Plan::Doppler(g, p) => run_doppler(r, g, p, out),
        Plan::Grover(g, p) => run_grover(r, g, p, out),
    }
}

fn run_map(r: &Resolved, m: &MapParams, out: &mut Artifacts) -> EResult<Value> {
    let sys = if m.dissipative { r.system } else { r.system.closed() };
    let map = floquet_map(
        &sys,
        m.rabi.rad_per_us,
        &m.alpha,
        &m.modulation_grid(),
        m.horizon,
        &r.integrator,
    )?;
    out.csv("map.csv", |w| map.write_csv(w))?;
    let means = map.column_means();
    out.csv("column_means.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["alpha", "mean_rr_average"])?;
        for (a, v) in m.alpha.iter().zip(&means) {
            w.write_record([a.to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    })?;
    let (j_max, max) = means
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (j, v)| if v > acc.1 { (j, v) } else { acc });
    let j_zero = nearest(&m.alpha, J0_FIRST_ZERO);
    Ok(json!({
        "grid": { "alpha_points": m.alpha.len(), "modulation_points": m.modulation_over_rabi.len() },
        "max_column_mean": { "alpha": m.alpha[j_max], "value": max },
        "j0_zero_column": { "alpha": m.alpha[j_zero], "value": means[j_zero] },
        "suppression_ratio": means[j_zero] / max,
        "grid_mean": map.mean(),
    }))
}

/// Index of the grid point closest to `x`.
pub fn nearest(grid: &[f64], x: f64) -> usize {
    grid.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (j, g)| {
            let d = (g - x).abs();
            if d < acc.1 { (j, d) } else { acc }
        })
        .0
}

fn run_design(r: &Resolved, g: &GateParams, out: &mut Artifacts) -> EResult<Value> {
    let design = design_gate_with(&r.system, g.rabi.rad_per_us, g.branch, g.theta, g.ratio_rule)?;
    let schedules = g
        .pulses
        .iter()
        .map(|&k| schedule(&r.system, g, k, g.theta).map(|s| schedule_json(&s)))
        .collect::<rydfloq::Result<Vec<_>>>()?;
    let candidates = return_ratio_candidates(g.branch.max(3));
    out.csv("return_ratios.csv", |w| {
        let mut w = csv::Writer::from_writer(w);
        for c in &candidates {
            w.serialize(c)?;
        }
        w.flush()?;
        Ok(())
    })?;
    Ok(json!({ "design": design, "schedules": schedules, "return_ratios": candidates }))
}

fn run_simulate(r: &Resolved, g: &GateParams, out: &mut Artifacts) -> EResult<Value> {
    let target = CPhaseTarget::new(g.theta);
    let mut reports = Vec::new();
    for &kind in &g.pulses {
        let s = schedule(&r.system, g, kind, g.theta)?;
        let (channel, traj) = channel_with_trajectory(&s, &r.system, &target, &r.integrator, g.trajectory_samples)?;
        let name = format!("fidelity_{}.csv", kind.name());
        out.csv(&name, |w| write_fidelity_csv(&traj, w))?;
        let mut report = GateReport::new(&s, &channel);
        report.trajectory_csv = Some(name);
        reports.push(report);
    }
    Ok(json!({ "gates": reports }))
}

fn nominal_bell(r: &Resolved, g: &GateParams, kind: PulseKind) -> EResult<(PulseSchedule, f64)> {
    let s = schedule(&r.system, g, kind, std::f64::consts::FRAC_PI_2)?;
    let f = bell_fidelity(&s, &r.system, &r.integrator)?;
    Ok((s, f))
}

fn summary_json(s: &SweepSummary, nominal: f64, samples_csv: &str) -> Value {
    json!({
        "parameter": s.parameter,
        "value": s.value,
        "pulse": s.pulse,
        "mean": s.mean,
        "std": s.std,
        "min": s.min,
        "max": s.max,
        "samples": s.samples,
        "seed": s.seed,
        "loss": nominal - s.mean,
        "samples_csv": samples_csv,
    })
}

fn run_robustness(r: &Resolved, g: &GateParams, p: &RobustnessParams, out: &mut Artifacts) -> EResult<Value> {
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    let mut nominal = serde_json::Map::new();
    for &kind in &g.pulses {
        let (s, f0) = nominal_bell(r, g, kind)?;
        nominal.insert(kind.name().into(), json!(f0));
        for (i, &w) in p.half_widths.iter().enumerate() {
            let spec = DisorderSpec {
                kind: p.kind,
                half_width: w,
                samples: p.samples,
                seed: r.seed,
            };
            let summary = disorder_sweep(&s, &r.system, &spec, &r.integrator)?;
            let name = format!("samples_{}_{i}.csv", kind.name());
            out.csv(&name, |wr| summary.write_samples_csv(wr))?;
            sweeps.push(summary_json(&summary, f0, &name));
            rows.push(summary);
        }
    }
    out.csv("summary.csv", |w| write_summary_csv(&rows, w))?;
    Ok(json!({ "kind": p.kind, "nominal_bell_fidelity": nominal, "sweeps": sweeps }))
}

fn run_doppler(r: &Resolved, g: &GateParams, p: &DopplerParams, out: &mut Artifacts) -> EResult<Value> {
    let base = DopplerSpec {
        temperature: 0.0,
        lambda1: p.lambda1,
        lambda2: p.lambda2,
        atomic_mass: p.atomic_mass,
        samples: p.samples,
        seed: r.seed,
    };
    let mut rows = Vec::new();
    let mut sweeps = Vec::new();
    let mut nominal = serde_json::Map::new();
    let mut slopes = serde_json::Map::new();
    for &kind in &g.pulses {
        let (s, f0) = nominal_bell(r, g, kind)?;
        nominal.insert(kind.name().into(), json!(f0));
        let scan = doppler_temperature_scan(&s, &r.system, &base, &p.temperatures, &r.integrator)?;
        if p.temperatures.len() >= 2 {
            let means: Vec<f64> = scan.iter().map(|x| x.mean).collect();
            slopes.insert(kind.name().into(), json!(fit_slope(&p.temperatures, &means)));
        }
        for (i, summary) in scan.into_iter().enumerate() {
            let name = format!("samples_{}_{i}.csv", kind.name());
            out.csv(&name, |wr| summary.write_samples_csv(wr))?;
            sweeps.push(summary_json(&summary, f0, &name));
            rows.push(summary);
        }
    }
    out.csv("summary.csv", |w| write_summary_csv(&rows, w))?;
    Ok(json!({
        "k_eff": base.k_eff(),
        "nominal_bell_fidelity": nominal,
        "slope_per_microkelvin": slopes,
        "sweeps": sweeps,
    }))
}

fn write_stages(report: &SearchReport, w: BufWriter<File>) -> rydfloq::Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["stage", "time", "P_00", "P_01", "P_10", "P_11", "leakage", "target_fidelity"])?;
    for s in &report.stages {
        let mut rec = vec![s.stage.clone(), s.time.to_string()];
        rec.extend(s.populations.iter().map(|p| p.to_string()));
        rec.push(s.leakage.to_string());
        rec.push(s.target_fidelity.to_string());
        w.write_record(rec)?;
    }
    w.flush()?;
    Ok(())
}

fn run_grover(r: &Resolved, g: &GateParams, p: &GroverParams, out: &mut Artifacts) -> EResult<Value> {
    let modes: Vec<(String, GateMode)> = match p.mode {
        GroverMode::Ideal => vec![("ideal".into(), GateMode::Ideal)],
        GroverMode::PulseLevel => g
            .pulses
            .iter()
            .map(|&k| {
                (
                    k.name().to_string(),
                    GateMode::PulseLevel {
                        omega_peak: g.omega_peak(k),
                        branch: g.branch,
                        pulse: k,
                    },
                )
            })
            .collect(),
    };
    let mut searches = Vec::new();
    for &variant in &p.variants {
        for (label, mode) in &modes {
            let spec = SearchSpec {
                variant,
                gate_mode: *mode,
            };
            let report = run_search(&spec, &r.system, &r.integrator)?;
            let stem = format!("{}_{label}", variant.name());
            let traj = format!("trajectory_{stem}.csv");
            let stages = format!("stages_{stem}.csv");
            out.csv(&traj, |w| report.write_trajectory_csv(w))?;
            out.csv(&stages, |w| write_stages(&report, w))?;
            let mut v = serde_json::to_value(&report).expect("report serializes");
            v["trajectory_csv"] = json!(traj);
            v["stages_csv"] = json!(stages);
            searches.push(v);
        }
    }
    Ok(json!({ "searches": searches }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_picks_closest_point() {
        let grid = [0.0, 1.0, 2.0, 2.5, 3.0];
        assert_eq!(nearest(&grid, 2.4048), 3);
        assert_eq!(nearest(&grid, -5.0), 0);
    }
}
