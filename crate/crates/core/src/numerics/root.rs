//! Bracketed scalar root finding.

use crate::error::NumericsError;
use crate::scalar::Real;

const MAX_STEPS: usize = 400;

/// Finds a root of `f` on `[lo, hi]`.
///
/// Uses the Illinois variant of regula falsi, falling back to bisection
/// whenever the interpolated point leaves the bracket or the bracket fails to
/// halve. Stops when `|f(x)| <= tol`, when the bracket is narrower than `tol`,
/// or when the bracket cannot shrink further in floating point.
pub fn find_root<T, F>(mut f: F, lo: T, hi: T, tol: T) -> Result<T, NumericsError>
where
    T: Real,
    F: FnMut(T) -> T,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut fa = f(a);
    let mut fb = f(b);
    if fa.abs() <= tol {
        return Ok(a);
    }
    if fb.abs() <= tol {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || fa.signum() == fb.signum() {
        return Err(NumericsError::NoSignChange {
            lo: a.to_f64().unwrap_or(f64::NAN),
            hi: b.to_f64().unwrap_or(f64::NAN),
            flo: fa.to_f64().unwrap_or(f64::NAN),
            fhi: fb.to_f64().unwrap_or(f64::NAN),
        });
    }

    let half = T::lit(0.5);
    // which endpoint was retained on the previous step: -1 = a, 1 = b
    let mut side = 0i8;
    let mut width = b - a;
    for _ in 0..MAX_STEPS {
        let mut x = if fa.is_finite() && fb.is_finite() {
            b - fb * (b - a) / (fb - fa)
        } else {
            a + (b - a) * half
        };
        if !(x > a && x < b) {
            x = a + (b - a) * half;
        }
        let fx = f(x);
        if fx.abs() <= tol || fx == T::zero() {
            return Ok(x);
        }
        if fx.signum() == fb.signum() {
            b = x;
            fb = fx;
            if side == 1 {
                fa *= half;
            }
            side = 1;
        } else {
            a = x;
            fa = fx;
            if side == -1 {
                fb *= half;
            }
            side = -1;
        }
        let new_width = b - a;
        if new_width <= tol {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
        if new_width > width * half {
            // Too slow: force a bisection step.
            let m = a + (b - a) * half;
            if m <= a || m >= b {
                return Ok(if fa.abs() < fb.abs() { a } else { b });
            }
            let fm = f(m);
            if fm.abs() <= tol {
                return Ok(m);
            }
            if fm.signum() == fb.signum() {
                b = m;
                fb = fm;
            } else {
                a = m;
                fa = fm;
            }
            side = 0;
        }
        width = b - a;
        let m = a + (b - a) * half;
        if m <= a || m >= b {
            return Ok(if fa.abs() < fb.abs() { a } else { b });
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}
