//! Principal branch of the Lambert W function.

use crate::error::NumericsError;
use crate::scalar::Real;

const MAX_HALLEY_STEPS: usize = 64;

/// Principal branch `W0(x)`: the `w >= -1` solving `w * exp(w) = x`.
///
/// Initial guesses come from the branch-point series near `-1/e`, a
/// Winitzki-style log approximation in the middle range and the
/// asymptotic `ln x - ln ln x` expansion for large arguments, followed by
/// Halley refinement.
pub fn lambert_w0<T: Real>(x: T) -> Result<T, NumericsError> {
    let one = T::one();
    let inv_e = one / T::E();
    if x.is_nan() || x < -inv_e {
        return Err(NumericsError::LambertDomain(x.to_f64().unwrap_or(f64::NAN)));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x.is_infinite() {
        return Ok(x);
    }
    // e*x + 1 measures the distance to the branch point without cancelling in x + 1/e.
    let near = T::E() * x + one;
    if near <= T::zero() {
        return Ok(-one);
    }

    let mut w = initial_guess(x, near);
    for _ in 0..MAX_HALLEY_STEPS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + one;
        if wp1 == T::zero() {
            break;
        }
        let two = T::lit(2.0);
        let denom = ew * wp1 - (w + two) * f / (two * wp1);
        if denom == T::zero() || !denom.is_finite() {
            break;
        }
        let step = f / denom;
        let next = (w - step).max(-one);
        let done = (next - w).abs() <= T::epsilon() * T::lit(4.0) * (one + next.abs());
        w = next;
        if done {
            break;
        }
    }
    Ok(w)
}

fn initial_guess<T: Real>(x: T, near: T) -> T {
    let one = T::one();
    if near < T::lit(0.5) {
        // Series in p = sqrt(2 (e x + 1)) around the branch point.
        let p = (T::lit(2.0) * near).sqrt();
        let p2 = p * p;
        -one + p - p2 / T::lit(3.0) + T::lit(11.0 / 72.0) * p2 * p
            - T::lit(43.0 / 540.0) * p2 * p2
            + T::lit(769.0 / 17280.0) * p2 * p2 * p
    } else if x < T::lit(3.0) {
        let l = (one + x).ln();
        l * (one - (one + l).ln() / (T::lit(2.0) + l))
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
