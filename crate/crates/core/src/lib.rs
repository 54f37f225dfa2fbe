//! Floquet frequency-modulated Rydberg controlled-phase gates: design,
//! open-system simulation, robustness studies and Grover-Long search.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod basis;
pub mod error;
pub mod floquet;
pub mod gate;
pub mod grover;
pub mod linalg;
pub mod lindblad;
pub mod pulse;
pub mod robustness;
pub mod system;

pub use error::{Error, Result};
pub use floquet::{design_gate, design_gate_with, GateDesign, RatioRule};
pub use gate::{build_schedule, realize_channel, CPhaseTarget, GateChannel, GateReport, PulseSchedule};
pub use grover::{run_search, GateMode, SearchReport, SearchSpec, SearchVariant};
pub use linalg::{ComplexMatrix, DensityMatrix, StateVector};
pub use lindblad::{evolve, EvolutionResult, FloquetMap, IntegratorConfig};
pub use pulse::{PulseKind, PulseShape};
pub use robustness::{DisorderKind, DisorderSpec, DopplerSpec, SweepSummary};
pub use system::{DriveParams, SystemParams};
