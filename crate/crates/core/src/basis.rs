//! Two-atom basis bookkeeping.
//!
//! Each atom has levels `|0>`, `|1>` and the Rydberg level `|r>`, indexed
//! 0, 1, 2. The pair state `|ab>` sits at index `3*idx(a) + idx(b)`.

use num_complex::Complex64 as C64;

use crate::linalg::{tensor_product, ComplexMatrix, StateVector, ONE, ZERO};

pub const ATOM_DIM: usize = 3;
pub const PAIR_DIM: usize = ATOM_DIM * ATOM_DIM;
pub const QUBIT_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Level {
    Zero,
    One,
    Rydberg,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Zero, Level::One, Level::Rydberg];

    pub const fn index(self) -> usize {
        match self {
            Level::Zero => 0,
            Level::One => 1,
            Level::Rydberg => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Level::Zero => "0",
            Level::One => "1",
            Level::Rydberg => "r",
        }
    }
}

pub const fn pair_index(a: Level, b: Level) -> usize {
    ATOM_DIM * a.index() + b.index()
}

pub const S00: usize = pair_index(Level::Zero, Level::Zero);
pub const S01: usize = pair_index(Level::Zero, Level::One);
pub const S0R: usize = pair_index(Level::Zero, Level::Rydberg);
pub const S10: usize = pair_index(Level::One, Level::Zero);
pub const S11: usize = pair_index(Level::One, Level::One);
pub const S1R: usize = pair_index(Level::One, Level::Rydberg);
pub const SR0: usize = pair_index(Level::Rydberg, Level::Zero);
pub const SR1: usize = pair_index(Level::Rydberg, Level::One);
pub const SRR: usize = pair_index(Level::Rydberg, Level::Rydberg);

/// Indices of `|00>, |01>, |10>, |11>` inside the pair space.
pub const COMPUTATIONAL: [usize; 4] = [S00, S01, S10, S11];

/// Number of atoms in `|r>` for each pair index.
pub const RYDBERG_COUNT: [u8; PAIR_DIM] = [0, 0, 1, 0, 0, 1, 1, 1, 2];

pub fn pair_label(index: usize) -> String {
    let a = Level::ALL[index / ATOM_DIM];
    let b = Level::ALL[index % ATOM_DIM];
    format!("{}{}", a.label(), b.label())
}

/// `|a><b|` on a single atom.
pub fn atom_ketbra(a: Level, b: Level) -> ComplexMatrix {
    ComplexMatrix::unit(ATOM_DIM, a.index(), b.index())
}

/// Lifts a single-atom operator onto atom `which` (0 or 1).
pub fn on_atom(op: &ComplexMatrix, which: usize) -> ComplexMatrix {
    let id = ComplexMatrix::identity(ATOM_DIM);
    match which {
        0 => tensor_product(op, &id),
        1 => tensor_product(&id, op),
        _ => panic!("atom index must be 0 or 1"),
    }
}

pub fn pair_ket(a: Level, b: Level) -> StateVector {
    StateVector::basis(PAIR_DIM, pair_index(a, b))
}

/// `|W> = (|1r> + |r1>)/sqrt(2)`.
pub fn w_state() -> StateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![ZERO; PAIR_DIM];
    amps[S1R] = C64::new(s, 0.0);
    amps[SR1] = C64::new(s, 0.0);
    StateVector::new(amps)
}

/// Operator exchanging the two atoms.
pub fn swap_operator() -> ComplexMatrix {
    ComplexMatrix::from_fn(PAIR_DIM, PAIR_DIM, |r, c| {
        let (ra, rb) = (r / ATOM_DIM, r % ATOM_DIM);
        if c == rb * ATOM_DIM + ra {
            ONE
        } else {
            ZERO
        }
    })
}

/// Embeds a two-qubit ket into the pair space.
pub fn embed_qubits(amps: &[C64; QUBIT_DIM]) -> StateVector {
    let mut out = vec![ZERO; PAIR_DIM];
    for (k, &idx) in COMPUTATIONAL.iter().enumerate() {
        out[idx] = amps[k];
    }
    StateVector::new(out)
}

/// Embeds a two-qubit operator, acting as identity on every non-qubit level.
pub fn embed_qubit_unitary(u: &ComplexMatrix) -> ComplexMatrix {
    assert_eq!((u.rows(), u.cols()), (QUBIT_DIM, QUBIT_DIM));
    let mut out = ComplexMatrix::identity(PAIR_DIM);
    for (r, &ir) in COMPUTATIONAL.iter().enumerate() {
        for (c, &ic) in COMPUTATIONAL.iter().enumerate() {
            out[(ir, ic)] = u[(r, c)];
        }
    }
    out
}
