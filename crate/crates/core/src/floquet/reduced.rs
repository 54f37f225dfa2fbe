//! Closed-form propagators of the resonant effective models.
//!
//! `|01>` (and `|10>`) see a two-level Rabi problem with `|0r>`; `|11>`
//! sees a three-level ladder `|11> <-> |W> <-> |rr>`.

use num_complex::Complex64 as C64;

use crate::linalg::{ComplexMatrix, I, ONE, ZERO};

/// Propagator of `(Ω_a/2)(e^{iφ}|g><e| + h.c.)` on the basis `(|g>, |e>)`.
pub fn reduced_two_level_propagate(omega_a: f64, duration: f64, phase: f64) -> ComplexMatrix {
    let half = 0.5 * omega_a * duration;
    let (s, c) = half.sin_cos();
    let e = C64::from_polar(1.0, phase);
    let mut u = ComplexMatrix::zeros(2, 2);
    u[(0, 0)] = C64::new(c, 0.0);
    u[(1, 1)] = C64::new(c, 0.0);
    u[(0, 1)] = -I * s * e;
    u[(1, 0)] = -I * s * e.conj();
    u
}

/// Propagator of the ladder with couplings `√2 Ω_a/2` (`|11>-|W>`) and
/// `√2 Ω_b/2` (`|W>-|rr>`), basis `(|11>, |W>, |rr>)`.
///
/// The ladder Hamiltonian obeys `H³ = λ² H`, so
/// `exp(-iHt) = 1 - i sin(λt)/λ H + (cos(λt) - 1)/λ² H²`.
pub fn reduced_three_level_propagate(omega_a: f64, omega_b: f64, duration: f64) -> ComplexMatrix {
    let g1 = std::f64::consts::FRAC_1_SQRT_2 * omega_a;
    let g2 = std::f64::consts::FRAC_1_SQRT_2 * omega_b;
    let lambda_sq = g1 * g1 + g2 * g2;
    if lambda_sq == 0.0 {
        return ComplexMatrix::identity(3);
    }
    let lambda = lambda_sq.sqrt();
    let (s, c) = (lambda * duration).sin_cos();
    let a = s / lambda;
    let b = (c - 1.0) / lambda_sq;

    let h = [[0.0, g1, 0.0], [g1, 0.0, g2], [0.0, g2, 0.0]];
    let h2 = [
        [g1 * g1, 0.0, g1 * g2],
        [0.0, lambda_sq, 0.0],
        [g1 * g2, 0.0, g2 * g2],
    ];
    ComplexMatrix::from_fn(3, 3, |r, col| {
        let id = if r == col { ONE } else { ZERO };
        id - I * a * h[r][col] + C64::new(b * h2[r][col], 0.0)
    })
}

/// `<11|U|11>` after one pulse of length `τ = π/Ω_a` at ratio `N = Ω_b/Ω_a`.
pub fn return_amplitude(ratio: f64) -> C64 {
    let u = reduced_three_level_propagate(1.0, ratio, std::f64::consts::PI);
    u[(0, 0)]
}

/// `(N, P11, Φ11)` for each ratio in the grid.
pub fn population_phase_curve(ratio_grid: &[f64]) -> Vec<(f64, f64, f64)> {
    ratio_grid
        .iter()
        .map(|&n| {
            let amp = return_amplitude(n);
            (n, amp.norm_sqr(), amp.arg())
        })
        .collect()
}
