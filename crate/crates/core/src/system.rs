//! Lab-frame two-atom Hamiltonian with sinusoidal detuning modulation.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::basis::{atom_ketbra, on_atom, Level, PAIR_DIM, RYDBERG_COUNT, SRR};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::pulse::PulseShape;

/// Two-atom physical constants. Rates in 1/μs, energies in rad/μs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub v_int: f64,
    /// Decay `|r> -> |0>`.
    pub gamma0: f64,
    /// Decay `|r> -> |1>`.
    pub gamma1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c6: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

impl SystemParams {
    pub fn new(v_int: f64, gamma0: f64, gamma1: f64) -> Result<Self> {
        let s = Self {
            v_int,
            gamma0,
            gamma1,
            c6: None,
            distance: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// Splits the Rydberg decay rate `1/lifetime` evenly between both ground levels.
    pub fn from_lifetime(v_int: f64, lifetime: f64) -> Result<Self> {
        if !(lifetime > 0.0) {
            return Err(Error::invalid("lifetime", "must be positive"));
        }
        let g = 0.5 / lifetime;
        Self::new(v_int, g, g)
    }

    pub fn from_geometry(c6: f64, distance: f64, gamma0: f64, gamma1: f64) -> Result<Self> {
        let v_int = vdw_interaction(c6, distance)?;
        let s = Self {
            v_int,
            gamma0,
            gamma1,
            c6: Some(c6),
            distance: Some(distance),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn closed(&self) -> Self {
        Self {
            gamma0: 0.0,
            gamma1: 0.0,
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_int > 0.0 && self.v_int.is_finite()) {
            return Err(Error::invalid("v_int", "must be positive and finite"));
        }
        if !(self.gamma0 >= 0.0 && self.gamma1 >= 0.0) {
            return Err(Error::invalid("gamma", "decay rates must be non-negative"));
        }
        if let (Some(c6), Some(d)) = (self.c6, self.distance) {
            let v = vdw_interaction(c6, d)?;
            if (v - self.v_int).abs() > 1e-6 * v.abs() {
                return Err(Error::invalid("v_int", "inconsistent with c6 / distance^6"));
            }
        }
        Ok(())
    }
}

/// `C6 / d^6`.
pub fn vdw_interaction(c6: f64, distance: f64) -> Result<f64> {
    if !(distance > 0.0) {
        return Err(Error::NonPositiveDistance(distance));
    }
    Ok(c6 / distance.powi(6))
}

/// Laser program for both atoms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub shape: PulseShape,
    /// Static detuning Δ₀.
    pub delta0: f64,
    /// Modulation amplitude δ.
    pub delta_mod: f64,
    /// Modulation frequency ω₀.
    pub omega_mod: f64,
    /// Laser phase ϑ applied from `jump_time` onward.
    pub phase_jump: f64,
    pub jump_time: f64,
    /// End of the evolution window. Normally the pulse duration; timing
    /// disorder may stretch it past the Gaussian envelope, where Ω = 0.
    pub duration: f64,
    /// Quasi-static Doppler shift δ_D, entering as `Ω(t) e^{i δ_D t}`.
    #[serde(default)]
    pub doppler_shift: f64,
}

impl DriveParams {
    pub fn new(
        shape: PulseShape,
        delta_mod: f64,
        omega_mod: f64,
        phase_jump: f64,
        jump_time: f64,
    ) -> Result<Self> {
        let d = Self {
            shape,
            delta0: 0.0,
            delta_mod,
            omega_mod,
            phase_jump,
            jump_time,
            duration: shape.duration,
            doppler_shift: 0.0,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        if !(self.omega_mod > 0.0 && self.omega_mod.is_finite()) {
            return Err(Error::invalid("omega_mod", "must be positive and finite"));
        }
        if !(self.delta_mod >= 0.0 && self.delta_mod.is_finite()) {
            return Err(Error::invalid("delta_mod", "must be non-negative and finite"));
        }
        if !(self.duration > 0.0) {
            return Err(Error::invalid("duration", "must be positive"));
        }
        if !(0.0..=self.duration).contains(&self.jump_time) {
            return Err(Error::invalid("jump_time", "must lie inside the pulse window"));
        }
        if !self.delta0.is_finite() || !self.phase_jump.is_finite() || !self.doppler_shift.is_finite()
        {
            return Err(Error::invalid("drive", "non-finite parameter"));
        }
        Ok(())
    }

    /// Modulation index α = δ/ω₀.
    pub fn alpha(&self) -> f64 {
        self.delta_mod / self.omega_mod
    }

    /// Δ(t) = Δ₀ + δ sin(ω₀ t).
    pub fn detuning_at(&self, t: f64) -> f64 {
        self.delta0 + self.delta_mod * (self.omega_mod * t).sin()
    }

    /// Step function: 0 before the jump, ϑ from the jump onward.
    pub fn laser_phase_at(&self, t: f64) -> f64 {
        if t < self.jump_time {
            0.0
        } else {
            self.phase_jump
        }
    }

    pub(crate) fn amplitude_at(&self, t: f64) -> f64 {
        if t > self.shape.duration {
            0.0
        } else {
            self.shape.amplitude_unchecked(t.max(0.0))
        }
    }

    /// `(Ω(t)/2) e^{i(φ(t) + δ_D t)}`, the prefactor of `|1><r|`.
    pub(crate) fn half_coupling_at(&self, t: f64) -> C64 {
        let phase = self.laser_phase_at(t) + self.doppler_shift * t;
        C64::from_polar(0.5 * self.amplitude_at(t), phase)
    }

    pub(crate) fn check_window(&self, t: f64) -> Result<()> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::OutOfWindow {
                t,
                start: 0.0,
                end: self.duration,
            });
        }
        Ok(())
    }
}

/// Diagonal of H(t): `-Δ(t) n_r + V [rr]`.
pub(crate) fn diagonal_energies(sys: &SystemParams, detuning: f64) -> [f64; PAIR_DIM] {
    let mut e = [0.0; PAIR_DIM];
    for (i, slot) in e.iter_mut().enumerate() {
        *slot = -detuning * RYDBERG_COUNT[i] as f64;
    }
    e[SRR] += sys.v_int;
    e
}

/// Off-diagonal `(row, col)` positions carrying `|1><r|` on either atom.
pub(crate) const RAISING_ENTRIES: [(usize, usize); 6] = {
    use crate::basis::*;
    [
        (S10, SR0),
        (S11, SR1),
        (S1R, SRR),
        (S01, S0R),
        (S11, S1R),
        (SR1, SRR),
    ]
};

/// H(t) of the driven pair:
/// `-Δ(t) Σ|r><r| + (Ω/2) e^{iφ} Σ|1><r| + h.c. + V |rr><rr|`.
pub fn hamiltonian_at(sys: &SystemParams, drive: &DriveParams, t: f64) -> Result<ComplexMatrix> {
    drive.check_window(t)?;
    let energies = diagonal_energies(sys, drive.detuning_at(t));
    let mut h = ComplexMatrix::real_diagonal(&energies);
    let c = drive.half_coupling_at(t);
    for &(r, col) in &RAISING_ENTRIES {
        h[(r, col)] += c;
        h[(col, r)] += c.conj();
    }
    Ok(h)
}

/// Σᵢ |1>ᵢ<r|, assembled from tensor products; used to cross-check the
/// hard-coded entry table.
pub fn collective_raising() -> ComplexMatrix {
    let single = atom_ketbra(Level::One, Level::Rydberg);
    &on_atom(&single, 0) + &on_atom(&single, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{swap_operator, w_state, S00, S11};
    use crate::linalg::ZERO;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn drive(omega: f64, delta_mod: f64, theta: f64) -> DriveParams {
        let shape = PulseShape::square(omega, 2.0).unwrap();
        DriveParams::new(shape, delta_mod, PI, theta, 1.0).unwrap()
    }

    #[test]
    fn detuning_examples() {
        let d = drive(1.0, 0.0, 0.0);
        assert_eq!(d.detuning_at(0.37), 0.0);
        let mut d = drive(1.0, 2.0, 0.0);
        assert_eq!(d.detuning_at(0.0), 0.0);
        assert_abs_diff_eq!(d.detuning_at(0.5), 2.0, epsilon = 1e-15);
        d.delta0 = 0.3;
        assert_eq!(d.detuning_at(0.0), 0.3);
    }

    #[test]
    fn phase_step() {
        let d = drive(1.0, 0.0, 0.0);
        assert_eq!(d.laser_phase_at(1.5), 0.0);
        let d = drive(1.0, 0.0, FRAC_PI_2);
        assert_eq!(d.laser_phase_at(1.5), FRAC_PI_2);
        assert_eq!(d.laser_phase_at(0.5), 0.0);
    }

    #[test]
    fn vdw_examples() {
        let c6 = TAU * 858.4e3; // rad/μs · μm^6
        let v = vdw_interaction(c6, 4.8).unwrap();
        assert_abs_diff_eq!(v / TAU, 70.18, epsilon = 0.01);
        let v2 = vdw_interaction(c6, 9.6).unwrap();
        assert_abs_diff_eq!(v / v2, 64.0, epsilon = 1e-12);
        assert_eq!(vdw_interaction(c6, 1.0).unwrap(), c6);
        assert!(matches!(
            vdw_interaction(c6, 0.0),
            Err(Error::NonPositiveDistance(_))
        ));
    }

    #[test]
    fn geometry_consistency_enforced() {
        let mut s = SystemParams::from_geometry(TAU * 858.4e3, 4.8, 0.0, 0.0).unwrap();
        assert!(s.validate().is_ok());
        s.v_int *= 1.01;
        assert!(s.validate().is_err());
    }

    #[test]
    fn idle_hamiltonian_is_interaction_only() {
        let sys = SystemParams::new(5.0, 0.0, 0.0).unwrap();
        let d = drive(0.0, 0.0, 0.0);
        let h = hamiltonian_at(&sys, &d, 0.3).unwrap();
        let mut expected = ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM);
        expected[(SRR, SRR)] = C64::new(5.0, 0.0);
        assert_eq!(h, expected);
    }

    #[test]
    fn ground_pair_is_dark() {
        let sys = SystemParams::new(40.0, 0.0, 0.0).unwrap();
        let d = drive(3.0, 7.0, 1.1);
        for &t in &[0.0, 0.4, 1.2, 1.9] {
            let h = hamiltonian_at(&sys, &d, t).unwrap();
            for x in 0..PAIR_DIM {
                assert_eq!(h[(S00, x)], ZERO);
                assert_eq!(h[(x, S00)], ZERO);
            }
        }
    }

    #[test]
    fn w_couples_to_11_with_enhanced_strength() {
        let sys = SystemParams::new(40.0, 0.0, 0.0).unwrap();
        let d = drive(3.0, 0.0, 0.7);
        let t = 1.5;
        let h = hamiltonian_at(&sys, &d, t).unwrap();
        let w = w_state();
        let hw11: C64 = (0..PAIR_DIM).map(|k| w.amplitudes()[k].conj() * h[(k, S11)]).sum();
        // <W|H|11> sums two <r|..|1> elements, each (Ω/2) e^{-iφ}
        let expected = C64::from_polar(2.0_f64.sqrt() * 1.5, -0.7);
        assert_abs_diff_eq!((hw11 - expected).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn entry_table_matches_tensor_construction() {
        let s = collective_raising();
        let mut from_table = ComplexMatrix::zeros(PAIR_DIM, PAIR_DIM);
        for &(r, c) in &RAISING_ENTRIES {
            from_table[(r, c)] += C64::new(1.0, 0.0);
        }
        assert_eq!(s, from_table);
    }

    #[test]
    fn hermitian_and_swap_symmetric() {
        let sys = SystemParams::new(40.0, 0.0, 0.0).unwrap();
        let d = drive(3.0, 9.0, 0.4);
        let sw = swap_operator();
        for k in 0..20 {
            let t = 0.1 * k as f64;
            let h = hamiltonian_at(&sys, &d, t).unwrap();
            assert!(h.hermitian_defect() <= 1e-12);
            let hs = h.conjugate_by(&sw).unwrap();
            assert!(h.max_abs_diff(&hs) <= 1e-12);
        }
    }

    #[test]
    fn undriven_hamiltonian_is_diagonal() {
        let sys = SystemParams::new(40.0, 0.0, 0.0).unwrap();
        let mut d = drive(3.0, 9.0, 0.4);
        d.shape = PulseShape::gaussian(3.0, 0.25).unwrap();
        // Gaussian envelope vanishes at t = 0
        let h = hamiltonian_at(&sys, &d, 0.0).unwrap();
        for r in 0..PAIR_DIM {
            for c in 0..PAIR_DIM {
                if r != c {
                    assert!(h[(r, c)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn window_enforced() {
        let sys = SystemParams::new(40.0, 0.0, 0.0).unwrap();
        let d = drive(3.0, 9.0, 0.4);
        assert!(matches!(
            hamiltonian_at(&sys, &d, 2.5),
            Err(Error::OutOfWindow { .. })
        ));
    }
}
