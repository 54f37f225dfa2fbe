//! Two-qubit Grover-Long search with ideal single-qubit steps and either
//! ideal or pulse-level controlled-phase gates.

use std::io::Write;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{embed_qubit_unitary, embed_qubits, COMPUTATIONAL, PAIR_DIM};
use crate::error::Result;
use crate::floquet::design_gate;
use crate::gate::{build_schedule, CPhaseTarget, PulseSchedule};
use crate::linalg::{tensor_product, ComplexMatrix, DensityMatrix, StateVector, I, ONE, ZERO};
use crate::lindblad::{evolve, matrix_json, IntegratorConfig};
use crate::pulse::PulseKind;
use crate::system::SystemParams;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchVariant {
    /// Target `|11>`.
    OneItem,
    /// Target `(|01> + |10>)/√2`.
    TwoItem,
}

/// How the controlled-phase gates are executed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum GateMode {
    Ideal,
    PulseLevel {
        omega_peak: f64,
        branch: u32,
        pulse: PulseKind,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub variant: SearchVariant,
    pub gate_mode: GateMode,
}

/// Ideal single-qubit operations of the circuit.
#[derive(Clone, Debug, PartialEq)]
pub struct SingleQubitOps {
    /// Real Hadamard-type rotation `[[1, -1], [1, 1]]/√2`, sending `|0>`
    /// to `(|0> + |1>)/√2`.
    pub h: ComplexMatrix,
    pub h_dagger: ComplexMatrix,
    /// `diag(1, i)`.
    pub u_half: ComplexMatrix,
    /// `diag(1, e^{iπ/4})`.
    pub u_quarter: ComplexMatrix,
}

/// `diag(1, e^{iχ})`.
pub fn phase_gate(chi: f64) -> ComplexMatrix {
    ComplexMatrix::diagonal(&[ONE, C64::from_polar(1.0, chi)])
}

pub fn single_qubit_ops() -> SingleQubitOps {
    let s = C64::new(FRAC_1_SQRT_2, 0.0);
    let h = ComplexMatrix::from_row_major(2, 2, vec![s, -s, s, s]).expect("2x2");
    SingleQubitOps {
        h_dagger: h.dagger(),
        h,
        u_half: phase_gate(std::f64::consts::FRAC_PI_2),
        u_quarter: phase_gate(std::f64::consts::FRAC_PI_4),
    }
}

/// One step of the circuit.
#[derive(Clone, Debug, PartialEq)]
enum Step {
    Local(&'static str, ComplexMatrix),
    CPhase(&'static str, f64),
}

impl SearchVariant {
    pub fn name(self) -> &'static str {
        match self {
            SearchVariant::OneItem => "one-item",
            SearchVariant::TwoItem => "two-item",
        }
    }

    /// Nominal phase jumps of the oracle and diffusion gates.
    pub fn nominal_thetas(self) -> (f64, f64) {
        use std::f64::consts::{FRAC_PI_2, PI};
        match self {
            SearchVariant::OneItem => (FRAC_PI_2, FRAC_PI_2),
            SearchVariant::TwoItem => (-FRAC_PI_2, -1.25 * PI),
        }
    }

    /// Phase jumps under this crate's controlled-phase convention. If the
    /// assembled oracle equals the conjugate of the expected diagonal, the
    /// signs are flipped.
    pub fn thetas(self) -> (f64, f64) {
        let (a, b) = self.nominal_thetas();
        let assembled = ideal_product(&self.oracle_steps_with(a));
        let expected = self.expected_oracle();
        if assembled.max_abs_diff(&expected) > 1e-12
            && assembled.max_abs_diff(&conj(&expected)) <= 1e-12
        {
            log::info!("controlled-phase convention is conjugate; flipping phase jumps");
            return (-a, -b);
        }
        (a, b)
    }

    /// Expected oracle diagonal.
    pub fn expected_oracle(self) -> ComplexMatrix {
        match self {
            SearchVariant::OneItem => ComplexMatrix::real_diagonal(&[1.0, 1.0, 1.0, -1.0]),
            SearchVariant::TwoItem => ComplexMatrix::diagonal(&[ONE, I, I, ONE]),
        }
    }

    pub fn target(self) -> StateVector {
        let s = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            SearchVariant::OneItem => embed_qubits(&[ZERO, ZERO, ZERO, ONE]),
            SearchVariant::TwoItem => embed_qubits(&[ZERO, s, s, ZERO]),
        }
    }

    fn oracle_steps(self) -> Vec<Step> {
        self.oracle_steps_with(self.thetas().0)
    }

    fn oracle_steps_with(self, theta: f64) -> Vec<Step> {
        let ops = single_qubit_ops();
        match self {
            SearchVariant::OneItem => vec![
                Step::CPhase("oracle-cphase", theta),
                Step::Local("oracle-phase", tensor_product(&ops.u_half, &ops.u_half)),
            ],
            SearchVariant::TwoItem => vec![Step::CPhase("oracle-cphase", theta)],
        }
    }

    fn inner_diffusion_steps(self) -> Vec<Step> {
        let ops = single_qubit_ops();
        let (_, theta) = self.thetas();
        let u = match self {
            SearchVariant::OneItem => &ops.u_half,
            SearchVariant::TwoItem => &ops.u_quarter,
        };
        vec![
            Step::CPhase("diffusion-cphase", theta),
            Step::Local("diffusion-phase", tensor_product(u, u)),
        ]
    }

    fn circuit(self) -> Vec<Step> {
        let ops = single_qubit_ops();
        let hh = tensor_product(&ops.h, &ops.h);
        let hhd = tensor_product(&ops.h_dagger, &ops.h_dagger);
        let mut steps = vec![Step::Local("prepare", hh.clone())];
        steps.extend(self.oracle_steps());
        steps.push(Step::Local("diffusion-in", hh));
        steps.extend(self.inner_diffusion_steps());
        steps.push(Step::Local("diffusion-out", hhd));
        steps
    }
}

fn conj(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)].conj())
}

fn ideal_product(steps: &[Step]) -> ComplexMatrix {
    steps.iter().fold(ComplexMatrix::identity(4), |acc, s| {
        let m = match s {
            Step::Local(_, m) => m.clone(),
            Step::CPhase(_, theta) => CPhaseTarget::new(*theta).matrix(),
        };
        &m * &acc
    })
}

/// Oracle `U₁`, assembled from the controlled-phase gate and local phases.
pub fn oracle_operator(variant: SearchVariant) -> ComplexMatrix {
    ideal_product(&variant.oracle_steps())
}

/// Inner diffusion `U₂` (between the Hadamard layers).
pub fn inner_diffusion(variant: SearchVariant) -> ComplexMatrix {
    ideal_product(&variant.inner_diffusion_steps())
}

/// `(H†⊗H†) U₂ (H⊗H)`.
pub fn diffusion_operator(variant: SearchVariant) -> ComplexMatrix {
    let ops = single_qubit_ops();
    let hh = tensor_product(&ops.h, &ops.h);
    let hhd = tensor_product(&ops.h_dagger, &ops.h_dagger);
    &(&hhd * &inner_diffusion(variant)) * &hh
}

/// Populations after one circuit stage.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: String,
    /// Cumulative controlled-phase time at the end of the stage (μs).
    pub time: f64,
    /// `P_00, P_01, P_10, P_11`.
    pub populations: [f64; 4],
    pub leakage: f64,
    pub target_fidelity: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub variant: SearchVariant,
    pub gate_mode: GateMode,
    /// Phase jumps used, oracle first.
    pub thetas: Vec<f64>,
    pub fidelity: f64,
    pub stages: Vec<StageRecord>,
    /// `(cumulative pulse time, target fidelity)`; ideal gates are instantaneous.
    #[serde(skip)]
    pub trajectory: Vec<(f64, f64)>,
    #[serde(skip)]
    pub final_state: DensityMatrix,
}

impl SearchReport {
    pub fn final_state_json(&self) -> serde_json::Value {
        matrix_json(self.final_state.matrix())
    }

    /// CSV `time, target_fidelity`.
    pub fn write_trajectory_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["time", "target_fidelity"])?;
        for (t, f) in &self.trajectory {
            w.write_record([t.to_string(), f.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn stage(name: &str, time: f64, rho: &DensityMatrix, target: &StateVector) -> StageRecord {
    let mut populations = [0.0; 4];
    for (k, &i) in COMPUTATIONAL.iter().enumerate() {
        populations[k] = rho.population(i);
    }
    StageRecord {
        stage: name.into(),
        time,
        populations,
        leakage: 1.0 - populations.iter().sum::<f64>(),
        target_fidelity: rho.fidelity_with(target),
    }
}

fn conjugate(rho: &DensityMatrix, u: &ComplexMatrix) -> DensityMatrix {
    let full = embed_qubit_unitary(u);
    let m = &(&full * rho.matrix()) * &full.dagger();
    DensityMatrix::new_unchecked(m.hermitian_part())
}

/// Pulse schedule realizing phase jump `theta`.
fn pulse_schedule(
    sys: &SystemParams,
    omega_peak: f64,
    branch: u32,
    kind: PulseKind,
    theta: f64,
) -> Result<PulseSchedule> {
    let design = design_gate(sys, omega_peak, branch, theta)?;
    build_schedule(&design, kind, omega_peak)
}

/// Runs the search from `|00>`.
pub fn run_search(spec: &SearchSpec, sys: &SystemParams, cfg: &IntegratorConfig) -> Result<SearchReport> {
    let target = spec.variant.target();
    let (t1, t2) = spec.variant.thetas();
    let mut rho = DensityMatrix::basis(PAIR_DIM, COMPUTATIONAL[0]);
    let mut time = 0.0;
    let mut stages = Vec::new();
    let mut trajectory = vec![(0.0, rho.fidelity_with(&target))];

    for step in spec.variant.circuit() {
        let name = match step {
            Step::Local(name, u) => {
                rho = conjugate(&rho, &u);
                name
            }
            Step::CPhase(name, theta) => {
                match spec.gate_mode {
                    GateMode::Ideal => {
                        rho = conjugate(&rho, &CPhaseTarget::new(theta).matrix());
                    }
                    GateMode::PulseLevel {
                        omega_peak,
                        branch,
                        pulse,
                    } => {
                        let s = pulse_schedule(sys, omega_peak, branch, pulse, theta)?;
                        let res = evolve(sys, &s.drive, &rho, (0.0, s.gate_time()), cfg)?;
                        for (t, st) in res.times.iter().zip(&res.states).skip(1) {
                            trajectory.push((time + t, st.fidelity_with(&target)));
                        }
                        time += s.gate_time();
                        rho = res.final_state().clone();
                    }
                }
                name
            }
        };
        trajectory.push((time, rho.fidelity_with(&target)));
        stages.push(stage(name, time, &rho, &target));
    }
    Ok(SearchReport {
        variant: spec.variant,
        gate_mode: spec.gate_mode,
        thetas: vec![t1, t2],
        fidelity: rho.fidelity_with(&target),
        stages,
        trajectory,
        final_state: rho,
    })
}
