//! Adaptive Dormand-Prince 8(5,3) integrator for complex linear systems.
//!
//! Step control follows the usual scheme: mixed absolute/relative scale,
//! a blended 5th/3rd-order error estimate, and a safety-factored
//! `err^(-1/8)` step update. Steps are shortened to land exactly on every
//! requested stop time.

use num_complex::Complex64 as C64;

use super::tableau::{A, B, C, E3_SHIFT, E5, STAGES};
use crate::error::{Error, Result};

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const ERROR_EXPONENT: f64 = -1.0 / 8.0;

#[derive(Clone, Copy, Debug)]
pub(crate) struct StepControl {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl IntegrationStats {
    pub(crate) fn absorb(&mut self, other: IntegrationStats) {
        self.accepted += other.accepted;
        self.rejected += other.rejected;
        self.evaluations += other.evaluations;
    }
}

/// Integrates `y' = f(t, y)` from `t0` to the last entry of `stops`, calling
/// `on_stop(k, t, y)` at each stop. `stops` must be increasing and `> t0`.
pub(crate) fn integrate<F, S>(
    mut f: F,
    t0: f64,
    y: &mut [C64],
    stops: &[f64],
    ctl: &StepControl,
    mut on_stop: S,
) -> Result<IntegrationStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    S: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    let n = y.len();
    let mut stats = IntegrationStats::default();
    let Some(&t_end) = stops.last() else {
        return Ok(stats);
    };
    debug_assert!(stops.windows(2).all(|w| w[0] < w[1]) && stops[0] > t0);

    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; STAGES + 1];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut tmp = vec![C64::new(0.0, 0.0); n];

    f(t0, y, &mut k[0]);
    stats.evaluations += 1;
    let mut h_abs = initial_step(&mut f, t0, y, &k[0], t_end - t0, ctl, &mut tmp, &mut y_new);
    stats.evaluations += 1;

    let mut t = t0;
    let mut next_stop = 0;
    while next_stop < stops.len() {
        let target = stops[next_stop];
        let min_step = 10.0 * (next_up(t) - t);
        h_abs = h_abs.clamp(min_step, ctl.max_step);
        let mut rejected = false;
        loop {
            if h_abs < min_step {
                return Err(Error::ToleranceNotMet { t, step: h_abs });
            }
            let proposed = h_abs;
            let (h, hits_stop) = if t + h_abs >= target {
                (target - t, true)
            } else {
                (h_abs, false)
            };
            let t_new = if hits_stop { target } else { t + h };

            rk_step(&mut f, t, y, h, &mut k, &mut y_new, &mut tmp);
            stats.evaluations += STAGES;
            let err = error_norm(&k, y, &y_new, h, ctl);

            if err < 1.0 {
                let mut factor = if err == 0.0 {
                    MAX_FACTOR
                } else {
                    MAX_FACTOR.min(SAFETY * err.powf(ERROR_EXPONENT))
                };
                if rejected {
                    factor = factor.min(1.0);
                }
                h_abs = h.abs() * factor;
                if hits_stop {
                    // a step cut short by a stop says nothing against the
                    // step size that was proposed before the cut
                    h_abs = h_abs.max(proposed.min(ctl.max_step));
                }
                stats.accepted += 1;
                t = t_new;
                y.copy_from_slice(&y_new);
                let (head, tail) = k.split_at_mut(STAGES);
                head[0].copy_from_slice(&tail[0]);
                if hits_stop {
                    on_stop(next_stop, t, y)?;
                    next_stop += 1;
                }
                break;
            }
            h_abs = h.abs() * MIN_FACTOR.max(SAFETY * err.powf(ERROR_EXPONENT));
            stats.rejected += 1;
            rejected = true;
        }
    }
    Ok(stats)
}

fn next_up(t: f64) -> f64 {
    if t.is_nan() || t == f64::INFINITY {
        return t;
    }
    if t == 0.0 {
        return f64::from_bits(1);
    }
    let bits = t.to_bits();
    if t > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}

fn rms(n: usize, mut term: impl FnMut(usize) -> f64) -> f64 {
    ((0..n).map(|i| {
        let x = term(i);
        x * x
    })
    .sum::<f64>()
        / n as f64)
        .sqrt()
}

#[allow(clippy::too_many_arguments)]
fn initial_step<F>(
    f: &mut F,
    t0: f64,
    y0: &[C64],
    f0: &[C64],
    interval: f64,
    ctl: &StepControl,
    y1: &mut [C64],
    f1: &mut [C64],
) -> f64
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y0.len();
    let scale: Vec<f64> = y0.iter().map(|v| ctl.atol + v.norm() * ctl.rtol).collect();
    let d0 = rms(n, |i| y0[i].norm() / scale[i]);
    let d1 = rms(n, |i| f0[i].norm() / scale[i]);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(interval);
    for i in 0..n {
        y1[i] = y0[i] + f0[i] * h0;
    }
    f(t0 + h0, y1, f1);
    let d2 = rms(n, |i| (f1[i] - f0[i]).norm() / scale[i]) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(-ERROR_EXPONENT)
    };
    (100.0 * h0).min(h1).min(interval).min(ctl.max_step)
}

fn rk_step<F>(
    f: &mut F,
    t: f64,
    y: &[C64],
    h: f64,
    k: &mut [Vec<C64>],
    y_new: &mut [C64],
    stage: &mut [C64],
) where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    let n = y.len();
    for s in 1..STAGES {
        stage.copy_from_slice(y);
        for (j, kj) in k.iter().enumerate().take(s) {
            let a = A[s][j] * h;
            if a != 0.0 {
                for i in 0..n {
                    stage[i] += kj[i] * a;
                }
            }
        }
        f(t + C[s] * h, stage, &mut k[s]);
    }
    y_new.copy_from_slice(y);
    for (j, kj) in k.iter().enumerate().take(STAGES) {
        let b = B[j] * h;
        if b != 0.0 {
            for i in 0..n {
                y_new[i] += kj[i] * b;
            }
        }
    }
    f(t + h, y_new, &mut k[STAGES]);
}

fn error_norm(k: &[Vec<C64>], y: &[C64], y_new: &[C64], h: f64, ctl: &StepControl) -> f64 {
    let n = y.len();
    let mut e5_sq = 0.0;
    let mut e3_sq = 0.0;
    for i in 0..n {
        let scale = ctl.atol + y[i].norm().max(y_new[i].norm()) * ctl.rtol;
        let mut e5 = C64::new(0.0, 0.0);
        for &(j, w) in &E5 {
            e5 += k[j][i] * w;
        }
        let mut e3 = C64::new(0.0, 0.0);
        for (j, kj) in k.iter().enumerate().take(STAGES) {
            if B[j] != 0.0 {
                e3 += kj[i] * B[j];
            }
        }
        for &(j, w) in &E3_SHIFT {
            e3 -= k[j][i] * w;
        }
        e5_sq += (e5 / scale).norm_sqr();
        e3_sq += (e3 / scale).norm_sqr();
    }
    if e5_sq == 0.0 && e3_sq == 0.0 {
        return 0.0;
    }
    let denom = e5_sq + 0.01 * e3_sq;
    h.abs() * e5_sq / (denom * n as f64).sqrt()
}
