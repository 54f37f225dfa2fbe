//! Floquet analysis of the modulated drive: frame transform, Jacobi-Anger
//! couplings, the gate-design root solves and the reduced oracle models.

mod bessel;
mod reduced;

pub use bessel::{bessel_j, bessel_j_all, MAX_ARG, MAX_ORDER};
pub use reduced::{
    population_phase_curve, reduced_three_level_propagate, reduced_two_level_propagate,
    return_amplitude,
};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{DriveParams, SystemParams};

/// First positive zero of `J0`.
pub const J0_FIRST_ZERO: f64 = 2.404_825_557_695_773;

/// Principal α window `(0, j_{0,1})`, where `J0(α) > 0`.
pub const PRINCIPAL_WINDOW: (f64, f64) = (0.0, J0_FIRST_ZERO);

const PROBE_POINTS: usize = 1000;
const ALPHA_RESIDUAL_TOL: f64 = 1e-10;
const RESONANCE_REL_TOL: f64 = 1e-6;

/// `f(t) = -Δ₀ t + (δ/ω₀) cos(ω₀ t)`, the phase of the rotating-frame transform.
pub fn frame_phase(drive: &DriveParams, t: f64) -> f64 {
    -drive.delta0 * t + drive.alpha() * (drive.omega_mod * t).cos()
}

/// `Σ_{|m|≤M} J_m(α) e^{im(θ + π/2)}`, which converges to `e^{iα cos θ}`.
pub fn jacobi_anger_partial_sum(alpha: f64, theta: f64, terms: usize) -> Result<C64> {
    let j = bessel_j_all(terms, alpha)?;
    let mut sum = C64::new(j[0], 0.0);
    for (m, &jm) in j.iter().enumerate().skip(1) {
        let arg = m as f64 * (theta + std::f64::consts::FRAC_PI_2);
        // J_{-m} e^{-im x} = (-1)^m J_m e^{-im x}
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sum += jm * C64::from_polar(1.0, arg) + sign * jm * C64::from_polar(1.0, -arg);
    }
    Ok(sum)
}

/// Resonant couplings of the modulated drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EffectiveCouplings {
    /// `|Ω_a| = Ω |J0(α)|`, ground pair to single excitation.
    pub omega_a: f64,
    /// `|Ω_b| = Ω |J_m(α)|`, single to double excitation.
    pub omega_b: f64,
    /// Sideband order `m` with `m ω₀ = -V`.
    pub sideband: i32,
    /// Phase of `J0(α)`.
    pub phase_a: f64,
    /// Phase of `J_m(α) e^{imπ/2}`.
    pub phase_b: f64,
}

impl EffectiveCouplings {
    pub fn ratio(&self) -> f64 {
        self.omega_b / self.omega_a
    }
}

/// Keeps only the resonant Jacobi-Anger terms: `m = 0` on the ground-pair
/// transitions and `m = -V/ω₀` on the doubly excited one.
pub fn effective_couplings(drive: &DriveParams, sys: &SystemParams) -> Result<EffectiveCouplings> {
    let omega = drive.shape.omega_peak;
    if drive.omega_mod < 5.0 * omega {
        log::warn!(
            "modulation frequency {} is below 5x the peak Rabi frequency {}; resonant-term model is inaccurate",
            drive.omega_mod,
            omega
        );
    }
    let ratio = sys.v_int / drive.omega_mod;
    let m = (-ratio).round();
    if m == 0.0 || (m + ratio).abs() > RESONANCE_REL_TOL * ratio {
        return Err(Error::ResonanceUnsatisfied { ratio });
    }
    if m.abs() > MAX_ORDER as f64 {
        return Err(Error::OutOfDomain(format!("sideband order {m}")));
    }
    let m = m as i32;
    let alpha = drive.alpha();
    let j0 = bessel_j(0, alpha)?;
    let jm = bessel_j(m, alpha)?;
    let arg = |x: f64| if x < 0.0 { std::f64::consts::PI } else { 0.0 };
    let phase_b = arg(jm) + m as f64 * std::f64::consts::FRAC_PI_2;
    Ok(EffectiveCouplings {
        omega_a: omega * j0.abs(),
        omega_b: omega * jm.abs(),
        sideband: m,
        phase_a: arg(j0),
        phase_b: wrap_phase(phase_b),
    })
}

fn wrap_phase(x: f64) -> f64 {
    let tau = std::f64::consts::TAU;
    let mut y = x.rem_euclid(tau);
    if y > std::f64::consts::PI {
        y -= tau;
    }
    y
}

/// Which return ratio a design uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioRule {
    /// Numerically solved exact return condition of the three-level ladder.
    #[default]
    Exact,
    /// Linear interpolation `N = (√31 - √7) n + √7`.
    LinearFormula,
}

/// `N = (√31 - √7) n + √7`.
pub fn linear_ratio_formula(branch: u32) -> f64 {
    let s7 = 7.0_f64.sqrt();
    (31.0_f64.sqrt() - s7) * branch as f64 + s7
}

/// One branch of the return condition, comparing both ratio rules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioCandidate {
    pub branch: u32,
    pub linear_formula: f64,
    pub numeric_root: f64,
    /// `linear_formula - numeric_root`.
    pub discrepancy: f64,
    /// `|<11|U|11>|²` at the formula ratio.
    pub formula_population: f64,
    /// `arg <11|U|11>` at the formula ratio.
    pub formula_phase: f64,
}

/// Linear-formula and numerically exact return ratios for `n = 0..=max_branch`.
///
/// Exact roots are located where `<W|U(τ)|11>` changes sign and kept when
/// `|11>` returns with unit population and positive amplitude.
pub fn return_ratio_candidates(max_branch: u32) -> Vec<RatioCandidate> {
    let roots = exact_return_ratios(max_branch as usize + 1);
    roots
        .into_iter()
        .enumerate()
        .map(|(n, root)| {
            let formula = linear_ratio_formula(n as u32);
            let amp = return_amplitude(formula);
            RatioCandidate {
                branch: n as u32,
                linear_formula: formula,
                numeric_root: root,
                discrepancy: formula - root,
                formula_population: amp.norm_sqr(),
                formula_phase: amp.arg(),
            }
        })
        .collect()
}

fn w_amplitude(ratio: f64) -> f64 {
    let u = reduced_three_level_propagate(1.0, ratio, std::f64::consts::PI);
    u[(1, 0)].im
}

fn exact_return_ratios(count: usize) -> Vec<f64> {
    const STEP: f64 = 0.01;
    let mut out = Vec::with_capacity(count);
    let mut lo = 0.0;
    let mut f_lo = w_amplitude(lo);
    while out.len() < count {
        let hi = lo + STEP;
        let f_hi = w_amplitude(hi);
        if f_lo == 0.0 || f_lo.signum() != f_hi.signum() {
            let root = bisect(w_amplitude, lo, hi, f_lo);
            let amp = return_amplitude(root);
            if amp.re > 0.0 && (amp.norm_sqr() - 1.0).abs() < 1e-9 {
                out.push(root);
            }
        }
        lo = hi;
        f_lo = f_hi;
    }
    out
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, mut f_lo: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Solves `J1(α) = N J0(α)` inside `window` by bisection. The window must
/// contain exactly one sign change on a 1000-interval probe grid.
pub fn solve_alpha(ratio: f64, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::invalid("ratio", "must be positive and finite"));
    }
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::invalid("window", "must be a finite interval lo < hi"));
    }
    let f = |a: f64| -> f64 {
        let j = bessel_j_all(1, a).expect("window checked against the Bessel domain");
        j[1] - ratio * j[0]
    };
    if lo.abs().max(hi.abs()) > MAX_ARG {
        return Err(Error::OutOfDomain(format!("alpha window ({lo}, {hi})")));
    }
    let probe: Vec<(f64, f64)> = (0..=PROBE_POINTS)
        .map(|k| {
            let a = lo + (hi - lo) * k as f64 / PROBE_POINTS as f64;
            (a, f(a))
        })
        .collect();
    let brackets: Vec<usize> = (0..PROBE_POINTS)
        .filter(|&k| probe[k].1.signum() != probe[k + 1].1.signum() || probe[k].1 == 0.0)
        .collect();
    match brackets.len() {
        0 => return Err(Error::NoRootInWindow { lo, hi }),
        1 => {}
        count => return Err(Error::MultipleRoots { lo, hi, count }),
    }
    let k = brackets[0];
    let (a, fa) = probe[k];
    let root = if fa == 0.0 { a } else { bisect(f, a, probe[k + 1].0, fa) };
    let residual = f(root).abs();
    if residual > ALPHA_RESIDUAL_TOL {
        return Err(Error::NoRootInWindow { lo, hi });
    }
    Ok(root)
}

/// Solved parameters of the two-pulse gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDesign {
    pub branch: u32,
    pub ratio_rule: RatioRule,
    pub ratio: f64,
    pub alpha: f64,
    /// ω₀, set equal to V.
    pub omega_mod: f64,
    /// δ = α ω₀.
    pub delta_mod: f64,
    /// Peak Rabi frequency Ω of the bare drive.
    pub omega_peak: f64,
    pub omega_eff_a: f64,
    pub omega_eff_b: f64,
    /// Single-pulse duration τ = π/|Ω_a|.
    pub tau: f64,
    /// T = 2τ.
    pub gate_time: f64,
    /// Phase jump ϑ.
    pub theta: f64,
    pub sideband: i32,
    pub coupling_phase_a: f64,
    pub coupling_phase_b: f64,
}

impl GateDesign {
    pub fn validate(&self) -> Result<()> {
        if (self.omega_eff_b - self.ratio * self.omega_eff_a).abs() > 1e-6 * self.omega_eff_a {
            return Err(Error::invalid("ratio", "|Ω_b| != N |Ω_a|"));
        }
        if (self.tau - std::f64::consts::PI / self.omega_eff_a).abs() > 1e-12 * self.tau {
            return Err(Error::invalid("tau", "τ != π/|Ω_a|"));
        }
        Ok(())
    }
}

/// Designs the gate on branch `n` with the exact return ratio.
pub fn design_gate(sys: &SystemParams, omega_peak: f64, branch: u32, theta: f64) -> Result<GateDesign> {
    design_gate_with(sys, omega_peak, branch, theta, RatioRule::Exact)
}

pub fn design_gate_with(
    sys: &SystemParams,
    omega_peak: f64,
    branch: u32,
    theta: f64,
    rule: RatioRule,
) -> Result<GateDesign> {
    sys.validate()?;
    if !(omega_peak > 0.0 && omega_peak.is_finite()) {
        return Err(Error::invalid("omega_peak", "must be positive and finite"));
    }
    if omega_peak > 0.2 * sys.v_int {
        log::warn!("omega_peak {omega_peak} is not small against V {}", sys.v_int);
    }
    let ratio = match rule {
        RatioRule::Exact => *exact_return_ratios(branch as usize + 1)
            .last()
            .expect("at least one root requested"),
        RatioRule::LinearFormula => linear_ratio_formula(branch),
    };
    let alpha = solve_alpha(ratio, PRINCIPAL_WINDOW)?;
    let omega_mod = sys.v_int;
    let j = bessel_j_all(1, alpha)?;
    if j[0] == 0.0 {
        return Err(Error::ZeroEffectiveCoupling);
    }
    let omega_eff_a = omega_peak * j[0].abs();
    let omega_eff_b = omega_peak * j[1].abs();
    let tau = std::f64::consts::PI / omega_eff_a;
    let d = GateDesign {
        branch,
        ratio_rule: rule,
        ratio,
        alpha,
        omega_mod,
        delta_mod: alpha * omega_mod,
        omega_peak,
        omega_eff_a,
        omega_eff_b,
        tau,
        gate_time: 2.0 * tau,
        theta,
        sideband: -1,
        coupling_phase_a: 0.0,
        // J_{-1} e^{-iπ/2} = i J_1
        coupling_phase_b: std::f64::consts::FRAC_PI_2,
    };
    d.validate()?;
    Ok(d)
}
