//! Dense complex linear algebra on the small Hilbert spaces used here.
//!
//! Everything is stored row-major. Dimensions never exceed 81, so no
//! attempt is made at blocking or sparsity.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Asymmetry tolerated by [`hermitian_eigenvalues`] before it refuses the input.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-6;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid("dims", "matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(Error::DimMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("entries", "matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m[(r, c)] = f(r, c);
            }
        }
        m
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    pub fn real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diagonal(&d)
    }

    /// `|row><col|` in a space of dimension `dim`.
    pub fn unit(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(row, col)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::DimMismatch {
                expected: self.cols,
                found: rhs.rows,
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.data[r * self.cols..(r + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    /// `A X A†`.
    pub fn conjugate_by(&self, a: &Self) -> Result<Self> {
        a.matmul(self)?.matmul(&a.dagger())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch in max_abs_diff"
        );
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |A - A†|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `(A + A†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * 0.5
        })
    }

    /// Copies the `indices x indices` sub-block.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        Self::from_fn(indices.len(), indices.len(), |r, c| {
            self[(indices[r], indices[c])]
        })
    }

    /// Embeds `self` into a zero matrix of dimension `dim` at `indices`.
    pub fn embed(&self, dim: usize, indices: &[usize]) -> Self {
        assert_eq!(self.rows, indices.len());
        let mut out = Self::zeros(dim, dim);
        for (r, &ir) in indices.iter().enumerate() {
            for (c, &ic) in indices.iter().enumerate() {
                out[(ir, ic)] = self[(r, c)];
            }
        }
        out
    }

    fn to_nalgebra(&self) -> DMatrix<C64> {
        DMatrix::from_fn(self.rows, self.cols, |r, c| self[(r, c)])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    ComplexMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    })
}

pub fn dagger(a: &ComplexMatrix) -> ComplexMatrix {
    a.dagger()
}

/// Real spectrum of a Hermitian matrix in ascending order.
///
/// The input is symmetrized before decomposition, so asymmetry up to
/// [`HERMITIAN_REJECT_TOL`] is absorbed silently.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(Error::NonSquare {
            rows: a.rows,
            cols: a.cols,
        });
    }
    let defect = a.hermitian_defect();
    if !(defect <= HERMITIAN_REJECT_TOL) {
        return Err(Error::NotHermitian { asymmetry: defect });
    }
    let sym = a.hermitian_part().to_nalgebra();
    let mut eig: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `tr(rho · obs)`.
pub fn expectation(rho: &DensityMatrix, obs: &ComplexMatrix) -> Result<C64> {
    let m = rho.matrix();
    if obs.rows != m.rows || obs.cols != m.cols {
        return Err(Error::DimMismatch {
            expected: m.rows,
            found: obs.rows,
        });
    }
    let n = m.rows;
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += m[(i, k)] * obs[(k, i)];
        }
    }
    Ok(acc)
}

/// A ket; normalization is the caller's business unless built through
/// [`StateVector::normalized`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<C64>) -> Self {
        assert!(!amplitudes.is_empty(), "state vector must be non-empty");
        Self { amplitudes }
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Self { amplitudes }
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let s = Self::new(amplitudes);
        let n = s.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("amplitudes", "cannot normalize a zero vector"));
        }
        Ok(Self {
            amplitudes: s.amplitudes.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.dim(), other.dim());
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, n, |r, c| self.amplitudes[r] * self.amplitudes[c].conj())
    }

    pub fn evolve(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(Self::new(u.apply(&self.amplitudes)?))
    }
}

/// Tolerances for [`DensityMatrix`] validation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalityTolerance {
    pub hermiticity: f64,
    pub trace: f64,
    pub min_eigenvalue: f64,
}

impl PhysicalityTolerance {
    /// Construction-time invariants.
    pub const STRICT: Self = Self {
        hermiticity: 1e-9,
        trace: 1e-9,
        min_eigenvalue: -1e-8,
    };

    /// Bounds used on integrator output samples.
    pub const TRAJECTORY: Self = Self {
        hermiticity: 1e-8,
        trace: 1e-8,
        min_eigenvalue: -1e-6,
    };
}

/// Measured distance from a valid state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Physicality {
    pub hermiticity: f64,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
}

impl Physicality {
    pub fn of(m: &ComplexMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NonSquare {
                rows: m.rows,
                cols: m.cols,
            });
        }
        let hermiticity = m.hermitian_defect();
        let trace_error = (m.trace() - ONE).norm();
        let min_eigenvalue = if hermiticity <= HERMITIAN_REJECT_TOL {
            hermitian_eigenvalues(m)?[0]
        } else {
            f64::NEG_INFINITY
        };
        Ok(Self {
            hermiticity,
            trace_error,
            min_eigenvalue,
        })
    }

    pub fn violation(&self, tol: &PhysicalityTolerance) -> Option<String> {
        if !(self.hermiticity <= tol.hermiticity) {
            return Some(format!("hermiticity defect {:e}", self.hermiticity));
        }
        if !(self.trace_error <= tol.trace) {
            return Some(format!("trace error {:e}", self.trace_error));
        }
        if !(self.min_eigenvalue >= tol.min_eigenvalue) {
            return Some(format!("min eigenvalue {:e}", self.min_eigenvalue));
        }
        None
    }
}

/// A validated density operator.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates against [`PhysicalityTolerance::STRICT`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(matrix, &PhysicalityTolerance::STRICT, 0.0)
    }

    pub(crate) fn with_tolerance(
        matrix: ComplexMatrix,
        tol: &PhysicalityTolerance,
        t: f64,
    ) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::InvariantViolated {
                t,
                detail: "non-finite entries".into(),
            });
        }
        let p = Physicality::of(&matrix)?;
        if let Some(detail) = p.violation(tol) {
            return Err(Error::InvariantViolated { t, detail });
        }
        Ok(Self { matrix })
    }

    /// Skips validation; for states that are valid by construction.
    pub(crate) fn new_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn pure(psi: &StateVector) -> Result<Self> {
        let n = psi.norm();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("psi", format!("state norm {n} is not 1")));
        }
        Ok(Self {
            matrix: psi.projector(),
        })
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        Self {
            matrix: ComplexMatrix::unit(dim, index, index),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim).scale(C64::new(1.0 / dim as f64, 0.0)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn population(&self, index: usize) -> f64 {
        self.matrix[(index, index)].re
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn fidelity_with(&self, psi: &StateVector) -> f64 {
        let v = self.matrix.apply(psi.amplitudes()).expect("dimension mismatch");
        psi.amplitudes()
            .iter()
            .zip(&v)
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .re
    }

    pub fn physicality(&self) -> Physicality {
        Physicality::of(&self.matrix).expect("density matrix is square")
    }
}
