//! Lindblad master-equation integration for the driven two-atom system.

mod dop853;
mod tableau;

pub use dop853::IntegrationStats;

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{atom_ketbra, on_atom, pair_label, Level, PAIR_DIM, RYDBERG_COUNT, S11, SRR};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, PhysicalityTolerance, I, ZERO};
use crate::pulse::{PulseKind, PulseShape};
use crate::system::{diagonal_energies, hamiltonian_at, DriveParams, SystemParams, RAISING_ENTRIES};
use dop853::StepControl;

const BLOCK: usize = PAIR_DIM * PAIR_DIM;

/// Adaptive integrator settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on the step; always further capped at a twentieth of
    /// the modulation period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    /// Uniform output samples per window, endpoints included.
    pub sample_count: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            max_step: None,
            sample_count: 1000,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerance", "tolerances must be positive"));
        }
        if let Some(h) = self.max_step {
            if !(h > 0.0) {
                return Err(Error::invalid("max_step", "must be positive"));
            }
        }
        if self.sample_count < 2 {
            return Err(Error::invalid("sample_count", "at least two samples are required"));
        }
        Ok(())
    }

    pub fn with_samples(self, sample_count: usize) -> Self {
        Self {
            sample_count,
            ..self
        }
    }

    /// Step cap for a drive modulated at `omega_mod`.
    pub fn step_cap(&self, omega_mod: f64) -> f64 {
        let cap = std::f64::consts::TAU / omega_mod / 20.0;
        self.max_step.map_or(cap, |h| h.min(cap))
    }

    fn control(&self, drive: &DriveParams) -> StepControl {
        StepControl {
            rtol: self.rel_tol,
            atol: self.abs_tol,
            max_step: self.step_cap(drive.omega_mod),
        }
    }
}

/// Uniform grid of `count` points on `[t0, t1]`.
pub fn sample_grid(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![t1];
    }
    let span = t1 - t0;
    (0..count)
        .map(|k| {
            if k + 1 == count {
                t1
            } else {
                t0 + span * k as f64 / (count - 1) as f64
            }
        })
        .collect()
}

/// The four jump operators `√γ_j |j>_i<r|`.
pub fn jump_operators(sys: &SystemParams) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(4);
    for atom in 0..2 {
        for (level, gamma) in [(Level::Zero, sys.gamma0), (Level::One, sys.gamma1)] {
            let l = atom_ketbra(level, Level::Rydberg).scale(C64::new(gamma.sqrt(), 0.0));
            out.push(on_atom(&l, atom));
        }
    }
    out
}

/// `Σ L ρ L† - ½{L†L, ρ}` over the four jump operators.
pub fn dissipator(sys: &SystemParams, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
    if rho.rows() != PAIR_DIM || rho.cols() != PAIR_DIM {
        return Err(Error::DimMismatch {
            expected: PAIR_DIM,
            found: rho.rows(),
        });
    }
    let mut out = ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM);
    for l in jump_operators(sys) {
        let ld = l.dagger();
        let ldl = &ld * &l;
        let jump = &(&l * rho) * &ld;
        let anti = &(&ldl * rho) + &(rho * &ldl);
        out = &(&out + &jump) - &anti.scale(C64::new(0.5, 0.0));
    }
    Ok(out)
}

/// Dense `-i[H(t), ρ] + D[ρ]`; reference for the sparse generator.
pub fn lindblad_rhs(
    sys: &SystemParams,
    drive: &DriveParams,
    t: f64,
    rho: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let h = hamiltonian_at(sys, drive, t)?;
    let comm = &(&h * rho) - &(rho * &h);
    Ok(&comm.scale(-I) + &dissipator(sys, rho)?)
}

/// Sparse Liouvillian acting on row-major 9x9 blocks.
struct Generator {
    sys: SystemParams,
    drive: DriveParams,
    /// Diagonal of `Σ L†L`.
    decay: [f64; PAIR_DIM],
    /// `out[p] += rate * rho[q]` entries of `Σ L ρ L†`.
    feeds: Vec<(usize, usize, f64)>,
}

impl Generator {
    fn new(sys: &SystemParams, drive: &DriveParams) -> Self {
        let mut decay = [0.0; PAIR_DIM];
        for (i, d) in decay.iter_mut().enumerate() {
            *d = (sys.gamma0 + sys.gamma1) * RYDBERG_COUNT[i] as f64;
        }
        let mut feeds = Vec::new();
        let r = Level::Rydberg.index();
        for (j, gamma) in [(Level::Zero.index(), sys.gamma0), (Level::One.index(), sys.gamma1)] {
            if gamma == 0.0 {
                continue;
            }
            for b in 0..3 {
                for b2 in 0..3 {
                    // atom 1: [(j b),(j b2)] <- [(r b),(r b2)]
                    let p = (3 * j + b) * PAIR_DIM + (3 * j + b2);
                    let q = (3 * r + b) * PAIR_DIM + (3 * r + b2);
                    feeds.push((p, q, gamma));
                    // atom 2: [(b j),(b2 j)] <- [(b r),(b2 r)]
                    let p = (3 * b + j) * PAIR_DIM + (3 * b2 + j);
                    let q = (3 * b + r) * PAIR_DIM + (3 * b2 + r);
                    feeds.push((p, q, gamma));
                }
            }
        }
        Self {
            sys: *sys,
            drive: *drive,
            decay,
            feeds,
        }
    }

    /// Applies the generator at time `t` with laser phase `phase` to every
    /// block of `y`.
    fn apply(&self, t: f64, phase: f64, y: &[C64], out: &mut [C64]) {
        let e = diagonal_energies(&self.sys, self.drive.detuning_at(t));
        let c = C64::from_polar(
            0.5 * self.drive.amplitude_at(t),
            phase + self.drive.doppler_shift * t,
        );
        let mic = -I * c;
        let mic_conj = -I * c.conj();
        let mut diag = [ZERO; BLOCK];
        for r in 0..PAIR_DIM {
            for col in 0..PAIR_DIM {
                diag[r * PAIR_DIM + col] = C64::new(
                    -0.5 * (self.decay[r] + self.decay[col]),
                    -(e[r] - e[col]),
                );
            }
        }
        for (rho, o) in y.chunks_exact(BLOCK).zip(out.chunks_exact_mut(BLOCK)) {
            for k in 0..BLOCK {
                o[k] = diag[k] * rho[k];
            }
            if c != ZERO {
                for &(p, q) in &RAISING_ENTRIES {
                    // -i H rho with H[p,q] = c, H[q,p] = c*
                    for col in 0..PAIR_DIM {
                        o[p * PAIR_DIM + col] += mic * rho[q * PAIR_DIM + col];
                        o[q * PAIR_DIM + col] += mic_conj * rho[p * PAIR_DIM + col];
                    }
                    // +i rho H
                    for row in 0..PAIR_DIM {
                        o[row * PAIR_DIM + q] -= mic * rho[row * PAIR_DIM + p];
                        o[row * PAIR_DIM + p] -= mic_conj * rho[row * PAIR_DIM + q];
                    }
                }
            }
            for &(p, q, rate) in &self.feeds {
                o[p] += rho[q] * rate;
            }
        }
    }
}

/// Times inside `(t0, t1)` where the drive is non-smooth.
fn breakpoints(drive: &DriveParams, t0: f64, t1: f64) -> Vec<f64> {
    let mut b = vec![drive.jump_time, drive.shape.duration];
    if drive.shape.kind == PulseKind::Gaussian {
        b.push(4.0 * drive.shape.t_g);
    }
    b.retain(|&t| t > t0 && t < t1);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Integrates a stack of 9x9 operators (row-major blocks in `y`) through
/// the master equation over `window`, calling `on_sample` at each time in
/// `samples` (sorted, inside the window).
fn propagate_blocks<S>(
    sys: &SystemParams,
    drive: &DriveParams,
    y: &mut [C64],
    window: (f64, f64),
    cfg: &IntegratorConfig,
    samples: &[f64],
    mut on_sample: S,
) -> Result<IntegrationStats>
where
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let (t0, t1) = window;
    let gen = Generator::new(sys, drive);
    let ctl = cfg.control(drive);
    let mut stats = IntegrationStats::default();
    let mut next = 0;
    while next < samples.len() && samples[next] <= t0 {
        on_sample(next, samples[next], y)?;
        next += 1;
    }
    let mut edges = vec![t0];
    edges.extend(breakpoints(drive, t0, t1));
    edges.push(t1);
    for seg in edges.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let phase = drive.laser_phase_at(a);
        let first = next;
        while next < samples.len() && samples[next] <= b {
            next += 1;
        }
        let mut stops: Vec<f64> = samples[first..next].to_vec();
        if stops.last() != Some(&b) {
            stops.push(b);
        }
        let seg_stats = dop853::integrate(
            |t, y, out| gen.apply(t, phase, y, out),
            a,
            y,
            &stops,
            &ctl,
            |k, t, y| {
                if first + k < next {
                    on_sample(first + k, t, y)
                } else {
                    Ok(())
                }
            },
        )?;
        stats.absorb(seg_stats);
    }
    Ok(stats)
}

fn check_window(drive: &DriveParams, window: (f64, f64)) -> Result<()> {
    let (t0, t1) = window;
    drive.check_window(t0)?;
    drive.check_window(t1)?;
    if !(t1 > t0) {
        return Err(Error::invalid("window", "end must exceed start"));
    }
    Ok(())
}

/// Sampled output of [`evolve`].
#[derive(Clone, Debug, Serialize)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    /// Population trajectories keyed `P_00` ... `P_rr`, plus `purity`.
    pub observables: BTreeMap<String, Vec<f64>>,
    #[serde(skip)]
    pub stats: IntegrationStats,
}

impl EvolutionResult {
    pub fn observable(&self, name: &str) -> Option<&[f64]> {
        self.observables.get(name).map(Vec::as_slice)
    }

    pub fn final_state(&self) -> &DensityMatrix {
        self.states.last().expect("at least two samples")
    }

    /// CSV with a `time` column followed by every observable.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        header.extend(self.observables.keys().cloned());
        w.write_record(&header)?;
        for (k, t) in self.times.iter().enumerate() {
            let mut row = vec![t.to_string()];
            row.extend(self.observables.values().map(|v| v[k].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Density matrices as JSON, row-major `[re, im]` pairs.
    pub fn states_json(&self) -> serde_json::Value {
        let states: Vec<serde_json::Value> = self
            .times
            .iter()
            .zip(&self.states)
            .map(|(t, s)| {
                serde_json::json!({ "time": t, "rho": matrix_json(s.matrix()) })
            })
            .collect();
        serde_json::Value::Array(states)
    }
}

/// `[[re, im], ...]` in row-major order.
pub fn matrix_json(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::Value::Array(
        m.as_slice()
            .iter()
            .map(|z| serde_json::json!([z.re, z.im]))
            .collect(),
    )
}

/// Validates a sampled state and returns its Hermitian part.
pub(crate) fn checked_sample(block: &[C64], t: f64) -> Result<DensityMatrix> {
    let m = ComplexMatrix::from_row_major(PAIR_DIM, PAIR_DIM, block.to_vec())?;
    let d = DensityMatrix::with_tolerance(m, &PhysicalityTolerance::TRAJECTORY, t)?;
    Ok(DensityMatrix::new_unchecked(d.matrix().hermitian_part()))
}

/// Solves `dρ/dt = -i[H(t), ρ] + D[ρ]` over `window`, sampling
/// `cfg.sample_count` uniform points and validating every sample.
pub fn evolve(
    sys: &SystemParams,
    drive: &DriveParams,
    rho0: &DensityMatrix,
    window: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<EvolutionResult> {
    sys.validate()?;
    drive.validate()?;
    cfg.validate()?;
    check_window(drive, window)?;
    if rho0.dim() != PAIR_DIM {
        return Err(Error::DimMismatch {
            expected: PAIR_DIM,
            found: rho0.dim(),
        });
    }
    let times = sample_grid(window.0, window.1, cfg.sample_count);
    let mut y = rho0.matrix().as_slice().to_vec();
    let mut states = Vec::with_capacity(times.len());
    let stats = propagate_blocks(sys, drive, &mut y, window, cfg, &times, |_, t, block| {
        states.push(checked_sample(block, t)?);
        Ok(())
    })?;

    let mut observables = BTreeMap::new();
    for i in 0..PAIR_DIM {
        let name = format!("P_{}", pair_label(i));
        observables.insert(name, states.iter().map(|s| s.population(i)).collect());
    }
    observables.insert("purity".into(), states.iter().map(|s| s.purity()).collect());
    Ok(EvolutionResult {
        times,
        states,
        observables,
        stats,
    })
}

/// Propagates arbitrary (not necessarily Hermitian) operators through the
/// linear master equation. `on_sample` receives the propagated operators at
/// each of the `samples` times.
pub fn propagate_operators<S>(
    sys: &SystemParams,
    drive: &DriveParams,
    ops: &[ComplexMatrix],
    window: (f64, f64),
    cfg: &IntegratorConfig,
    samples: &[f64],
    mut on_sample: S,
) -> Result<IntegrationStats>
where
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    sys.validate()?;
    drive.validate()?;
    cfg.validate()?;
    check_window(drive, window)?;
    let mut y = Vec::with_capacity(ops.len() * BLOCK);
    for op in ops {
        if op.rows() != PAIR_DIM || op.cols() != PAIR_DIM {
            return Err(Error::DimMismatch {
                expected: PAIR_DIM,
                found: op.rows(),
            });
        }
        y.extend_from_slice(op.as_slice());
    }
    propagate_blocks(sys, drive, &mut y, window, cfg, samples, |k, t, y| {
        on_sample(k, t, y)
    })
}

/// Trapezoidal mean of `values` over `times`.
pub fn time_average(times: &[f64], values: &[f64]) -> f64 {
    let span = times[times.len() - 1] - times[0];
    let area: f64 = times
        .windows(2)
        .zip(values.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1]))
        .sum();
    area / span
}

/// `(1/horizon) ∫ <rr|ρ(t)|rr> dt` starting from `|11>`.
pub fn time_averaged_rr(
    sys: &SystemParams,
    drive: &DriveParams,
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon", "must be positive"));
    }
    let rho0 = DensityMatrix::basis(PAIR_DIM, S11);
    let res = evolve(sys, drive, &rho0, (0.0, horizon), cfg)?;
    let p = res.observable(&format!("P_{}", pair_label(SRR))).expect("population recorded");
    Ok(time_average(&res.times, p))
}

/// Time-averaged `|rr>` population on an (α, ω₀) grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FloquetMap {
    pub alpha: Vec<f64>,
    pub omega_mod: Vec<f64>,
    /// Row-major in `(omega_mod, alpha)`.
    pub values: Vec<f64>,
}

impl FloquetMap {
    pub fn value(&self, i_omega: usize, j_alpha: usize) -> f64 {
        self.values[i_omega * self.alpha.len() + j_alpha]
    }

    /// Mean over ω₀ for each α.
    pub fn column_means(&self) -> Vec<f64> {
        let rows = self.omega_mod.len() as f64;
        (0..self.alpha.len())
            .map(|j| (0..self.omega_mod.len()).map(|i| self.value(i, j)).sum::<f64>() / rows)
            .collect()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// CSV rows `alpha, omega_mod, rr_average`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["alpha", "omega_mod", "rr_average"])?;
        for (i, om) in self.omega_mod.iter().enumerate() {
            for (j, a) in self.alpha.iter().enumerate() {
                w.write_record([a.to_string(), om.to_string(), self.value(i, j).to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Square drive of peak `omega_peak` modulated with index `alpha` at `omega_mod`.
pub fn map_drive(omega_peak: f64, alpha: f64, omega_mod: f64, horizon: f64) -> Result<DriveParams> {
    let shape = PulseShape::square(omega_peak, horizon)?;
    DriveParams::new(shape, alpha * omega_mod, omega_mod, 0.0, horizon)
}

/// Evaluates [`time_averaged_rr`] on every grid point in parallel.
pub fn floquet_map(
    sys: &SystemParams,
    omega_peak: f64,
    alpha_grid: &[f64],
    omega_grid: &[f64],
    horizon: f64,
    cfg: &IntegratorConfig,
) -> Result<FloquetMap> {
    let na = alpha_grid.len();
    let values = (0..na * omega_grid.len())
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / na, k % na);
            let drive = map_drive(omega_peak, alpha_grid[j], omega_grid[i], horizon)?;
            time_averaged_rr(sys, &drive, horizon, cfg)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(FloquetMap {
        alpha: alpha_grid.to_vec(),
        omega_mod: omega_grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{pair_index, S00, S10, SR0};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn sys(gamma: f64) -> SystemParams {
        SystemParams::new(TAU * 20.0, gamma, 0.5 * gamma).unwrap()
    }

    fn drive(omega: f64) -> DriveParams {
        let shape = PulseShape::square(omega, 1.0).unwrap();
        let mut d = DriveParams::new(shape, 2.0 * TAU * 20.0, TAU * 20.0, FRAC_PI_2, 0.5).unwrap();
        d.delta0 = 0.3;
        d.doppler_shift = 0.7;
        d
    }

    fn random_operator(seed: u64) -> ComplexMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        ComplexMatrix::from_fn(PAIR_DIM, PAIR_DIM, |_, _| C64::new(next(), next()))
    }

    #[test]
    fn dissipator_zero_without_rydberg_population() {
        let rho = ComplexMatrix::unit(PAIR_DIM, S00, S00);
        let d = dissipator(&sys(0.3), &rho).unwrap();
        assert_eq!(d.max_abs_diff(&ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM)), 0.0);
    }

    #[test]
    fn dissipator_single_excitation_flows() {
        let s = SystemParams::new(1.0, 0.3, 0.2).unwrap();
        let rho = ComplexMatrix::unit(PAIR_DIM, SR0, SR0);
        let d = dissipator(&s, &rho).unwrap();
        assert_abs_diff_eq!(d[(SR0, SR0)].re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(S00, S00)].re, 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(d[(S10, S10)].re, 0.2, epsilon = 1e-15);
        assert!(dissipator(&s, &ComplexMatrix::identity(4)).is_err());
    }

    #[test]
    fn dissipator_is_traceless() {
        for seed in 0..20 {
            let m = random_operator(seed);
            let d = dissipator(&sys(0.4), &m).unwrap();
            assert!(d.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn sparse_generator_matches_dense() {
        let s = sys(0.37);
        let d = drive(TAU * 2.0);
        for (seed, &t) in [0.1, 0.49, 0.5, 0.77].iter().enumerate() {
            let rho = random_operator(seed as u64 + 7);
            let dense = lindblad_rhs(&s, &d, t, &rho).unwrap();
            let gen = Generator::new(&s, &d);
            let mut out = vec![ZERO; BLOCK];
            gen.apply(t, d.laser_phase_at(t), rho.as_slice(), &mut out);
            let sparse = ComplexMatrix::from_row_major(PAIR_DIM, PAIR_DIM, out).unwrap();
            assert!(sparse.max_abs_diff(&dense) < 1e-9, "t = {t}");
        }
    }

    #[test]
    fn idle_doubly_excited_state_decays_only() {
        let s = sys(0.0);
        let shape = PulseShape::square(0.0, 1.0).unwrap();
        let d = DriveParams::new(shape, 3.0, 5.0, 0.0, 1.0).unwrap();
        let rho0 = DensityMatrix::basis(PAIR_DIM, SRR);
        let res = evolve(&s, &d, &rho0, (0.0, 1.0), &IntegratorConfig::default().with_samples(20)).unwrap();
        for st in &res.states {
            assert!(st.matrix().max_abs_diff(rho0.matrix()) < 1e-12);
        }
    }

    fn tight() -> IntegratorConfig {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            ..IntegratorConfig::default()
        }
    }

    #[test]
    fn purity_conserved_without_decay() {
        let rho0 = DensityMatrix::basis(PAIR_DIM, S11);
        let res = evolve(&sys(0.0), &drive(TAU * 2.0), &rho0, (0.0, 1.0), &tight().with_samples(50)).unwrap();
        for p in res.observable("purity").unwrap() {
            assert!((p - 1.0).abs() < 1e-8, "purity {p}");
        }
    }

    #[test]
    fn rydberg_population_monotone_without_drive() {
        let s = sys(0.8);
        let shape = PulseShape::square(0.0, 2.0).unwrap();
        let d = DriveParams::new(shape, 1.0, 3.0, 0.0, 2.0).unwrap();
        let mut m = ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM);
        m[(SRR, SRR)] = C64::new(0.5, 0.0);
        m[(pair_index(Level::One, Level::Rydberg), pair_index(Level::One, Level::Rydberg))] = C64::new(0.5, 0.0);
        let res = evolve(&s, &d, &DensityMatrix::new(m).unwrap(), (0.0, 2.0), &IntegratorConfig::default().with_samples(40)).unwrap();
        let prr = res.observable("P_rr").unwrap();
        assert!(prr.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        assert_abs_diff_eq!(prr[39], 0.5 * (-2.0 * 2.0 * 1.2f64).exp(), epsilon = 1e-8);
    }

    #[test]
    fn breakpoints_are_interior_and_sorted() {
        let g = PulseShape::gaussian(1.0, 0.1).unwrap();
        let mut d = DriveParams::new(g, 0.0, 1.0, 0.0, 0.4).unwrap();
        d.duration = 1.0;
        assert_eq!(breakpoints(&d, 0.0, 1.0), vec![0.4, 0.8]);
        assert!(breakpoints(&d, 0.5, 0.7).is_empty());
    }

    #[test]
    fn zero_drive_average_is_zero() {
        let d = map_drive(0.0, 1.0, TAU * 20.0, 1.0).unwrap();
        let v = time_averaged_rr(&sys(0.0), &d, 1.0, &IntegratorConfig::default().with_samples(10)).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn csv_export_has_header() {
        let rho0 = DensityMatrix::basis(PAIR_DIM, S11);
        let res = evolve(&sys(0.0), &drive(TAU), &rho0, (0.0, 0.2), &IntegratorConfig::default().with_samples(3)).unwrap();
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("time,P_00,P_01"));
        assert_eq!(text.lines().count(), 4);
        assert_eq!(res.states_json().as_array().unwrap().len(), 3);
    }
}
