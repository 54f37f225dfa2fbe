//! Two-pulse controlled-phase protocol, channel tomography and fidelities.

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{embed_qubits, w_state, COMPUTATIONAL, PAIR_DIM, QUBIT_DIM, S01, S0R, S10, S11, SR0, SRR};
use crate::error::{Error, Result};
use crate::floquet::{bessel_j, reduced_three_level_propagate, reduced_two_level_propagate, GateDesign};
use crate::linalg::{tensor_product, ComplexMatrix, DensityMatrix, StateVector, I, ONE, ZERO};
use crate::lindblad::{checked_sample, evolve, propagate_operators, sample_grid, IntegratorConfig};
use crate::pulse::{gaussian_width_for_area, PulseKind, PulseShape};
use crate::system::{DriveParams, SystemParams};

/// `diag(1, -e^{iϑ}, -e^{iϑ}, 1)` on `(|00>, |01>, |10>, |11>)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CPhaseTarget {
    pub theta: f64,
}

impl CPhaseTarget {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn matrix(&self) -> ComplexMatrix {
        let p = -C64::from_polar(1.0, self.theta);
        ComplexMatrix::diagonal(&[ONE, p, p, ONE])
    }
}

/// The 16 two-qubit Pauli products, `σ_i ⊗ σ_j` with `σ = (I, X, Y, Z)`.
pub fn pauli_basis() -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(2);
    let x = ComplexMatrix::from_row_major(2, 2, vec![ZERO, ONE, ONE, ZERO]).expect("2x2");
    let y = ComplexMatrix::from_row_major(2, 2, vec![ZERO, -I, I, ZERO]).expect("2x2");
    let z = ComplexMatrix::real_diagonal(&[1.0, -1.0]);
    let singles = [id, x, y, z];
    let mut out = Vec::with_capacity(16);
    for a in &singles {
        for b in &singles {
            out.push(tensor_product(a, b));
        }
    }
    out
}

/// Drive program of one gate execution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub design: GateDesign,
    pub drive: DriveParams,
}

impl PulseSchedule {
    pub fn gate_time(&self) -> f64 {
        self.drive.duration
    }

    pub fn theta(&self) -> f64 {
        self.drive.phase_jump
    }

    pub fn kind(&self) -> PulseKind {
        self.drive.shape.kind
    }
}

/// Two identical pulses with the laser phase stepping from 0 to ϑ between
/// them. Square pulses run at `omega_peak` for `τ` each; Gaussian pulses
/// use `omega_peak` as `Ω_g` with the width that restores the pulse area.
pub fn build_schedule(design: &GateDesign, kind: PulseKind, omega_peak: f64) -> Result<PulseSchedule> {
    design.validate()?;
    let (shape, jump_time) = match kind {
        PulseKind::Square => (PulseShape::square(omega_peak, design.gate_time)?, design.tau),
        PulseKind::Gaussian => {
            let j0 = bessel_j(0, design.alpha)?;
            let t_g = gaussian_width_for_area(omega_peak, j0)?;
            (PulseShape::gaussian(omega_peak, t_g)?, 4.0 * t_g)
        }
    };
    let drive = DriveParams::new(shape, design.delta_mod, design.omega_mod, design.theta, jump_time)?;
    Ok(PulseSchedule {
        design: *design,
        drive,
    })
}

/// Gate action restricted to the computational subspace.
#[derive(Clone, Debug, PartialEq)]
pub struct GateChannel {
    pub basis_dim: usize,
    /// `vec(ξ(ρ)) = S vec(ρ)` with row-major `vec`.
    pub superop: ComplexMatrix,
    /// Images of the 16 matrix units `|a><b|` in the full pair space.
    pub images: Vec<ComplexMatrix>,
    /// Mean population left outside the subspace over the four basis inputs.
    pub leakage: f64,
}

impl GateChannel {
    fn from_images(images: Vec<ComplexMatrix>) -> Self {
        let d = QUBIT_DIM;
        let mut superop = ComplexMatrix::zeros(d * d, d * d);
        for a in 0..d {
            for b in 0..d {
                let img = &images[a * d + b];
                for (c, &ic) in COMPUTATIONAL.iter().enumerate() {
                    for (e, &ie) in COMPUTATIONAL.iter().enumerate() {
                        superop[(c * d + e, a * d + b)] = img[(ic, ie)];
                    }
                }
            }
        }
        let leakage = (0..d)
            .map(|k| {
                let img = &images[k * d + k];
                let inside: f64 = COMPUTATIONAL.iter().map(|&i| img[(i, i)].re).sum();
                img.trace().re - inside
            })
            .sum::<f64>()
            / d as f64;
        Self {
            basis_dim: d,
            superop,
            images,
            leakage,
        }
    }

    /// Exact conjugation `ρ -> V ρ V†` on the subspace.
    pub fn unitary(v: &ComplexMatrix) -> Self {
        let full = crate::basis::embed_qubit_unitary(v);
        let images = (0..QUBIT_DIM * QUBIT_DIM)
            .map(|k| {
                let (a, b) = (COMPUTATIONAL[k / QUBIT_DIM], COMPUTATIONAL[k % QUBIT_DIM]);
                let e = ComplexMatrix::unit(PAIR_DIM, a, b);
                &(&full * &e) * &full.dagger()
            })
            .collect();
        Self::from_images(images)
    }

    /// Applies the channel to a 4x4 operator on the subspace.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        let d = self.basis_dim;
        if rho.rows() != d || rho.cols() != d {
            return Err(Error::DimMismatch {
                expected: d,
                found: rho.rows(),
            });
        }
        let v = self.superop.apply(rho.as_slice())?;
        ComplexMatrix::from_row_major(d, d, v)
    }

    /// Applies the channel to a full pair-space operator, by linearity over
    /// its computational block.
    pub fn apply_full(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.basis_dim;
        let mut out = ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM);
        for a in 0..d {
            for b in 0..d {
                let w = rho[(COMPUTATIONAL[a], COMPUTATIONAL[b])];
                if w != ZERO {
                    out = &out + &self.images[a * d + b].scale(w);
                }
            }
        }
        out
    }

    /// `arg <k|ξ(|k><l|)|l>`, the phase of basis state `k` relative to `l`.
    pub fn relative_phase(&self, k: usize, l: usize) -> f64 {
        let img = &self.images[k * self.basis_dim + l];
        img[(COMPUTATIONAL[k], COMPUTATIONAL[l])].arg()
    }
}

/// `F̄ = [Σ_k tr(U P_k† U† ξ(P_k)) + d²] / [d²(d+1)]` over the Pauli basis.
pub fn average_gate_fidelity(channel: &GateChannel, target: &CPhaseTarget) -> f64 {
    average_fidelity_to(channel, &target.matrix())
}

/// Average fidelity of `channel` to an arbitrary 4x4 unitary.
pub fn average_fidelity_to(channel: &GateChannel, u: &ComplexMatrix) -> f64 {
    let d = channel.basis_dim as f64;
    let ud = u.dagger();
    let mut sum = ZERO;
    for p in pauli_basis() {
        let img = channel.apply(&p).expect("4x4 Pauli");
        let lhs = &(&(u * &p.dagger()) * &ud) * &img;
        sum += lhs.trace();
    }
    debug_assert!(sum.im.abs() < 1e-6, "imaginary residue {}", sum.im);
    (sum.re + d * d) / (d * d * (d + 1.0))
}

/// `(|tr U†V|² + d)/(d² + d)`, the average fidelity between unitaries.
pub fn unitary_gate_fidelity(u: &ComplexMatrix, v: &ComplexMatrix) -> f64 {
    let d = u.rows() as f64;
    let t = (&u.dagger() * v).trace();
    (t.norm_sqr() + d) / (d * d + d)
}

fn unit_inputs() -> Vec<ComplexMatrix> {
    (0..QUBIT_DIM * QUBIT_DIM)
        .map(|k| {
            let (a, b) = (COMPUTATIONAL[k / QUBIT_DIM], COMPUTATIONAL[k % QUBIT_DIM]);
            ComplexMatrix::unit(PAIR_DIM, a, b)
        })
        .collect()
}

/// Channels at each sample time, with the four diagonal inputs (which are
/// density matrices) validated at every sample.
fn channel_samples(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    cfg: &IntegratorConfig,
    times: &[f64],
) -> Result<Vec<GateChannel>> {
    let inputs = unit_inputs();
    let mut out = Vec::with_capacity(times.len());
    let blk = PAIR_DIM * PAIR_DIM;
    let window = (0.0, schedule.gate_time());
    propagate_operators(sys, &schedule.drive, &inputs, window, cfg, times, |_, t, y| {
        let mut images = Vec::with_capacity(inputs.len());
        for (k, chunk) in y.chunks_exact(blk).enumerate() {
            if k / QUBIT_DIM == k % QUBIT_DIM {
                images.push(checked_sample(chunk, t)?.into_matrix());
            } else {
                images.push(ComplexMatrix::from_row_major(PAIR_DIM, PAIR_DIM, chunk.to_vec())?);
            }
        }
        out.push(GateChannel::from_images(images));
        Ok(())
    })?;
    Ok(out)
}

/// Evolves every matrix unit of the subspace over the whole gate.
pub fn realize_channel(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    cfg: &IntegratorConfig,
) -> Result<GateChannel> {
    let mut v = channel_samples(schedule, sys, cfg, &[schedule.gate_time()])?;
    Ok(v.pop().expect("one sample"))
}

/// `F̄(t)` of the partially evolved channel on `samples` uniform times.
pub fn fidelity_trajectory(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    target: &CPhaseTarget,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<Vec<(f64, f64)>> {
    Ok(channel_with_trajectory(schedule, sys, target, cfg, samples)?.1)
}

/// Final channel together with its [`fidelity_trajectory`], from one integration.
pub fn channel_with_trajectory(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    target: &CPhaseTarget,
    cfg: &IntegratorConfig,
    samples: usize,
) -> Result<(GateChannel, Vec<(f64, f64)>)> {
    if samples < 2 {
        return Err(Error::invalid("samples", "at least two samples are required"));
    }
    let times = sample_grid(0.0, schedule.gate_time(), samples);
    let mut channels = channel_samples(schedule, sys, cfg, &times)?;
    let traj = times
        .into_iter()
        .zip(channels.iter().map(|c| average_gate_fidelity(c, target)))
        .collect();
    Ok((channels.pop().expect("at least two samples"), traj))
}

/// `(|0> + |1>)⊗(|0> + |1>)/2`.
pub fn product_input() -> StateVector {
    let h = C64::new(0.5, 0.0);
    embed_qubits(&[h, h, h, h])
}

/// `(|00> - i|01> - i|10> + |11>)/2`, the ideal gate output at ϑ = π/2.
pub fn bell_target() -> StateVector {
    let h = C64::new(0.5, 0.0);
    let mi = C64::new(0.0, -0.5);
    embed_qubits(&[h, mi, mi, h])
}

/// Overlap of the evolved product input with the Bell target.
pub fn bell_fidelity(schedule: &PulseSchedule, sys: &SystemParams, cfg: &IntegratorConfig) -> Result<f64> {
    if (schedule.theta() - std::f64::consts::FRAC_PI_2).abs() > 1e-12 {
        return Err(Error::invalid("theta", "Bell fidelity requires a phase jump of π/2"));
    }
    let rho0 = DensityMatrix::pure(&product_input())?;
    let res = evolve(sys, &schedule.drive, &rho0, (0.0, schedule.gate_time()), cfg)?;
    Ok(res.final_state().fidelity_with(&bell_target()))
}

/// Populations predicted by the resonant effective model at time `t` of the
/// gate, for computational input `k`, over the states listed by
/// [`effective_model_deviation`].
fn effective_populations(design: &GateDesign, k: usize, t: f64) -> Vec<f64> {
    let (t1, t2) = if t <= design.tau { (t, 0.0) } else { (design.tau, t - design.tau) };
    let amps = match k {
        0 => vec![ONE],
        1 | 2 => {
            let u1 = reduced_two_level_propagate(design.omega_eff_a, t1, 0.0);
            let u2 = reduced_two_level_propagate(design.omega_eff_a, t2, design.theta);
            (&u2 * &u1).apply(&[ONE, ZERO]).expect("2x2")
        }
        _ => {
            let u1 = reduced_three_level_propagate(design.omega_eff_a, design.omega_eff_b, t1);
            let u2 = reduced_three_level_propagate(design.omega_eff_a, design.omega_eff_b, t2);
            // a laser phase ϑ is the gauge diag(1, e^{-iϑ}, e^{-2iϑ}), which leaves populations unchanged
            (&u2 * &u1).apply(&[ONE, ZERO, ZERO]).expect("3x3")
        }
    };
    amps.iter().map(|a| a.norm_sqr()).collect()
}

/// Largest population difference, over the sampled times, between the
/// closed lab-frame evolution and the resonant effective model, for each
/// computational input. Compared states: `|00>`; `|01>, |0r>`;
/// `|10>, |r0>`; `|11>, |W>, |rr>`.
pub fn effective_model_deviation(
    schedule: &PulseSchedule,
    sys: &SystemParams,
    cfg: &IntegratorConfig,
) -> Result<[f64; QUBIT_DIM]> {
    if schedule.kind() != PulseKind::Square {
        return Err(Error::invalid("pulse", "the effective model describes square pulses"));
    }
    let closed = sys.closed();
    let w = w_state();
    let mut out = [0.0; QUBIT_DIM];
    for (k, &input) in COMPUTATIONAL.iter().enumerate() {
        let rho0 = DensityMatrix::basis(PAIR_DIM, input);
        let res = evolve(&closed, &schedule.drive, &rho0, (0.0, schedule.gate_time()), cfg)?;
        for (t, rho) in res.times.iter().zip(&res.states) {
            let lab = match k {
                0 => vec![rho.population(input)],
                1 => vec![rho.population(S01), rho.population(S0R)],
                2 => vec![rho.population(S10), rho.population(SR0)],
                _ => vec![rho.population(S11), rho.fidelity_with(&w), rho.population(SRR)],
            };
            let model = effective_populations(&schedule.design, k, *t);
            for (a, b) in lab.iter().zip(&model) {
                out[k] = f64::max(out[k], (a - b).abs());
            }
        }
    }
    Ok(out)
}

/// Summary of one simulated gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GateReport {
    pub design: GateDesign,
    pub pulse: PulseKind,
    pub omega_peak: f64,
    pub gate_time: f64,
    pub theta: f64,
    pub average_fidelity: f64,
    pub leakage: f64,
    /// Phase of `|01>` relative to `|00>` in the realized channel.
    pub phase_01: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_csv: Option<String>,
}

impl GateReport {
    pub fn new(schedule: &PulseSchedule, channel: &GateChannel) -> Self {
        let target = CPhaseTarget::new(schedule.theta());
        Self {
            design: schedule.design,
            pulse: schedule.kind(),
            omega_peak: schedule.drive.shape.omega_peak,
            gate_time: schedule.gate_time(),
            theta: schedule.theta(),
            average_fidelity: average_gate_fidelity(channel, &target),
            leakage: channel.leakage,
            phase_01: channel.relative_phase(1, 0),
            trajectory_csv: None,
        }
    }
}

/// CSV `time, average_fidelity`.
pub fn write_fidelity_csv<W: Write>(traj: &[(f64, f64)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "average_fidelity"])?;
    for (t, f) in traj {
        w.write_record([t.to_string(), f.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
