//! Integer-order Bessel functions of the first kind.

use crate::error::{Error, Result};

/// Largest |order| and |x| accepted by [`bessel_j`].
pub const MAX_ORDER: i32 = 50;
pub const MAX_ARG: f64 = 50.0;

const RESCALE_AT: f64 = 1e250;

/// `J_m(x)` by Miller's downward recurrence, normalized with
/// `J_0 + 2 Σ J_{2k} = 1`.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    if order.abs() > MAX_ORDER || !(x.abs() <= MAX_ARG) {
        return Err(Error::OutOfDomain(format!("J_{order}({x})")));
    }
    let m = order.unsigned_abs() as usize;
    // J_{-m} = (-1)^m J_m and J_m(-x) = (-1)^m J_m(x)
    let mut sign = 1.0;
    if order < 0 && m % 2 == 1 {
        sign = -sign;
    }
    if x < 0.0 && m % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * bessel_j_nonneg(m, x.abs()))
}

/// All orders `0..=max_order` at once; cheaper than repeated calls.
pub fn bessel_j_all(max_order: usize, x: f64) -> Result<Vec<f64>> {
    if max_order > MAX_ORDER as usize || !(x.abs() <= MAX_ARG) {
        return Err(Error::OutOfDomain(format!("J_0..{max_order}({x})")));
    }
    let mut v = downward(max_order, x.abs());
    if x < 0.0 {
        for (k, j) in v.iter_mut().enumerate() {
            if k % 2 == 1 {
                *j = -*j;
            }
        }
    }
    Ok(v)
}

fn bessel_j_nonneg(m: usize, x: f64) -> f64 {
    downward(m, x)[m]
}

fn start_order(m: usize, x: f64) -> usize {
    let base = (m as f64).max(x);
    let start = (base + 30.0 + 2.0 * base.sqrt()).ceil() as usize;
    start + start % 2
}

fn downward(max_order: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; max_order + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let top = start_order(max_order, x);
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-300; // J_k
    let mut norm = 0.0;
    for k in (1..=top).rev() {
        let prev = 2.0 * k as f64 / x * cur - next; // J_{k-1}
        next = cur;
        cur = prev;
        let k1 = k - 1;
        if k1 <= max_order {
            out[k1] = cur;
        }
        if k1 > 0 && k1 % 2 == 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            cur *= s;
            next *= s;
            norm *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    norm += cur; // J_0 term
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn values_at_origin() {
        assert_eq!(bessel_j(0, 0.0).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0).unwrap(), 0.0);
        assert_eq!(bessel_j(-7, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn j0_at_two() {
        assert_abs_diff_eq!(bessel_j(0, 2.0).unwrap(), 0.223_890_779_141_235_67, epsilon = 1e-15);
    }

    #[test]
    fn reflection_in_order_and_argument() {
        for m in 0..8 {
            let j = bessel_j(m, 3.3).unwrap();
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(bessel_j(-m, 3.3).unwrap(), sign * j);
            assert_eq!(bessel_j(m, -3.3).unwrap(), sign * j);
        }
    }

    #[test]
    fn domain_checked() {
        assert!(bessel_j(51, 1.0).is_err());
        assert!(bessel_j(0, 50.5).is_err());
        assert!(bessel_j(0, f64::NAN).is_err());
    }

    #[test]
    fn batch_matches_single() {
        let all = bessel_j_all(10, 7.25).unwrap();
        for (m, v) in all.iter().enumerate() {
            assert_abs_diff_eq!(*v, bessel_j(m as i32, 7.25).unwrap(), epsilon = 1e-15);
        }
    }
}
