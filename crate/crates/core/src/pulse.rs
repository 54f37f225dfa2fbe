//! Rabi amplitude laws: square pulse and the two-lobe Gaussian soft pulse.
//!
//! Times are in microseconds and angular frequencies in rad/μs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian offset `a = exp(-(2 T_g)^2 / T_g^2)`.
pub const GAUSSIAN_OFFSET: f64 = 0.018_315_638_888_734_18; // e^-4

/// `erf(2)`, the fraction of a unit Gaussian captured by one lobe window.
pub const ERF_2: f64 = 0.995_322_265_018_952_7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseKind {
    Square,
    Gaussian,
}

impl PulseKind {
    pub fn name(self) -> &'static str {
        match self {
            PulseKind::Square => "square",
            PulseKind::Gaussian => "gaussian",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseShape {
    pub kind: PulseKind,
    /// Ω for a square pulse, Ω_g for the Gaussian.
    pub omega_peak: f64,
    /// Gaussian width; unused (zero) for square pulses.
    pub t_g: f64,
    pub duration: f64,
}

impl PulseShape {
    pub fn square(omega: f64, duration: f64) -> Result<Self> {
        let s = Self {
            kind: PulseKind::Square,
            omega_peak: omega,
            t_g: 0.0,
            duration,
        };
        s.validate()?;
        Ok(s)
    }

    /// Two congruent lobes of width `t_g`; the total duration is `8 t_g`.
    pub fn gaussian(omega_g: f64, t_g: f64) -> Result<Self> {
        let s = Self {
            kind: PulseKind::Gaussian,
            omega_peak: omega_g,
            t_g,
            duration: 8.0 * t_g,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        // Square pulses may be idle (Ω = 0); Gaussian envelopes need a peak.
        let min_ok = match self.kind {
            PulseKind::Square => self.omega_peak >= 0.0,
            PulseKind::Gaussian => self.omega_peak > 0.0,
        };
        if !(min_ok && self.omega_peak.is_finite()) {
            return Err(Error::invalid("omega_peak", "must be positive and finite"));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::invalid("duration", "must be positive and finite"));
        }
        if self.kind == PulseKind::Gaussian {
            if !(self.t_g > 0.0) {
                return Err(Error::invalid("t_g", "Gaussian width must be positive"));
            }
            if (self.duration - 8.0 * self.t_g).abs() > 1e-9 * self.duration.max(1.0) {
                return Err(Error::invalid("duration", "Gaussian pulse requires T = 8 T_g"));
            }
        }
        Ok(())
    }

    /// Ω(t) on `[0, duration]`.
    pub fn amplitude_at(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.duration).contains(&t) {
            return Err(Error::OutOfWindow {
                t,
                start: 0.0,
                end: self.duration,
            });
        }
        Ok(self.amplitude_unchecked(t))
    }

    pub(crate) fn amplitude_unchecked(&self, t: f64) -> f64 {
        match self.kind {
            PulseKind::Square => self.omega_peak,
            PulseKind::Gaussian => {
                let tg = self.t_g;
                let (center, offset) = if t <= 4.0 * tg {
                    (2.0 * tg, GAUSSIAN_OFFSET)
                } else {
                    // b = exp(-(T/2 - 6 T_g)^2 / T_g^2), equal to a when T = 8 T_g
                    let half = 0.5 * self.duration - 6.0 * tg;
                    (6.0 * tg, (-(half * half) / (tg * tg)).exp())
                };
                let x = (t - center) / tg;
                self.omega_peak * ((-x * x).exp() - offset) / (1.0 - offset)
            }
        }
    }

    /// Exact `∫ Ω(t) dt` over one Gaussian lobe, or over the whole square pulse.
    pub fn lobe_area(&self) -> f64 {
        match self.kind {
            PulseKind::Square => self.omega_peak * self.duration,
            PulseKind::Gaussian => {
                let a = GAUSSIAN_OFFSET;
                self.omega_peak * self.t_g * (std::f64::consts::PI.sqrt() * ERF_2 - 4.0 * a)
                    / (1.0 - a)
            }
        }
    }
}

/// Gaussian width giving each lobe an effective area of π once scaled by
/// `J0(α)`, using the closed form `T_g = (a - 1) π / [Ω_g J0(α) (4a - √π)]`.
///
/// The closed form replaces `√π·erf(2)` by `√π`, so the realized lobe area
/// is `π (√π erf 2 - 4a)/(√π - 4a)`, about 0.49% short of π. See
/// [`gaussian_width_exact_area`] for the exact solution.
pub fn gaussian_width_for_area(omega_g: f64, j0_alpha: f64) -> Result<f64> {
    check_width_inputs(omega_g, j0_alpha)?;
    let a = GAUSSIAN_OFFSET;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    Ok((a - 1.0) * std::f64::consts::PI / (omega_g * j0_alpha.abs() * (4.0 * a - sqrt_pi)))
}

/// Gaussian width whose lobe integrates exactly to `π / |J0(α)|`.
pub fn gaussian_width_exact_area(omega_g: f64, j0_alpha: f64) -> Result<f64> {
    check_width_inputs(omega_g, j0_alpha)?;
    let a = GAUSSIAN_OFFSET;
    let sqrt_pi = std::f64::consts::PI.sqrt();
    Ok((1.0 - a) * std::f64::consts::PI / (omega_g * j0_alpha.abs() * (sqrt_pi * ERF_2 - 4.0 * a)))
}

fn check_width_inputs(omega_g: f64, j0_alpha: f64) -> Result<()> {
    if !(omega_g > 0.0) {
        return Err(Error::invalid("omega_g", "must be positive"));
    }
    if j0_alpha == 0.0 {
        return Err(Error::ZeroEffectiveCoupling);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn square_is_constant() {
        let p = PulseShape::square(TAU * 3.5, 1.3).unwrap();
        for &t in &[0.0, 0.2, 0.65, 1.3] {
            assert_eq!(p.amplitude_at(t).unwrap(), TAU * 3.5);
        }
        assert_eq!(p.lobe_area(), TAU * 3.5 * 1.3);
    }

    #[test]
    fn gaussian_zeros_and_peaks() {
        let tg = 0.17;
        let p = PulseShape::gaussian(10.0, tg).unwrap();
        for &t in &[0.0, 4.0 * tg, 8.0 * tg] {
            assert_abs_diff_eq!(p.amplitude_at(t).unwrap(), 0.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(p.amplitude_at(2.0 * tg).unwrap(), 10.0, epsilon = 1e-12);
        assert_abs_diff_eq!(p.amplitude_at(6.0 * tg).unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn offset_constant_is_e_to_minus_four() {
        assert_abs_diff_eq!(GAUSSIAN_OFFSET, (-4.0f64).exp(), epsilon = 1e-18);
    }

    #[test]
    fn out_of_window() {
        let p = PulseShape::gaussian(1.0, 0.1).unwrap();
        assert!(matches!(p.amplitude_at(-1e-9), Err(Error::OutOfWindow { .. })));
        assert!(matches!(p.amplitude_at(0.81), Err(Error::OutOfWindow { .. })));
    }

    #[test]
    fn invalid_shapes() {
        assert!(PulseShape::square(-1.0, 1.0).is_err());
        assert!(PulseShape::square(0.0, 1.0).is_ok());
        assert!(PulseShape::gaussian(0.0, 1.0).is_err());
        assert!(PulseShape::square(1.0, -1.0).is_err());
        let mut g = PulseShape::gaussian(1.0, 0.1).unwrap();
        g.duration = 0.9;
        assert!(g.validate().is_err());
    }

    #[test]
    fn width_scales_inversely_with_peak() {
        let a = gaussian_width_for_area(TAU * 4.0, 0.3).unwrap();
        let b = gaussian_width_for_area(TAU * 8.0, 0.3).unwrap();
        assert_abs_diff_eq!(a, 2.0 * b, epsilon = 1e-15);
        assert!(matches!(
            gaussian_width_for_area(1.0, 0.0),
            Err(Error::ZeroEffectiveCoupling)
        ));
    }

    #[test]
    fn closed_form_area_deficit_is_erf_factor() {
        let j0 = 0.2177;
        let tg = gaussian_width_for_area(TAU * 8.1, j0).unwrap();
        let p = PulseShape::gaussian(TAU * 8.1, tg).unwrap();
        let a = GAUSSIAN_OFFSET;
        let sp = PI.sqrt();
        let expected = PI * (sp * ERF_2 - 4.0 * a) / (sp - 4.0 * a);
        assert_abs_diff_eq!(p.lobe_area() * j0, expected, epsilon = 1e-12);
    }
}
