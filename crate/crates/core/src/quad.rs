//! Adaptive Simpson quadrature.

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

/// `∫_a^b f` to absolute tolerance `tol`, recursing at most `max_depth` levels.
pub fn adaptive_simpson<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, tol: T, max_depth: u32) -> Result<T> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument("integration bounds must be finite".into()));
    }
    if a == b {
        return Ok(T::zero());
    }
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / lit(2.0);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let v = recurse(f, a, b, fa, fm, fb, whole, tol, max_depth);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonConvergence("integrand is not finite on the interval".into()))
    }
}

fn simpson<T: Real>(a: T, b: T, fa: T, fm: T, fb: T) -> T {
    (b - a) / lit(6.0) * (fa + lit::<T>(4.0) * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T, fa: T, fm: T, fb: T, whole: T, tol: T, depth: u32) -> T {
    let m = (a + b) / lit(2.0);
    let lm = (a + m) / lit(2.0);
    let rm = (m + b) / lit(2.0);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= lit::<T>(15.0) * tol {
        return left + right + delta / lit(15.0);
    }
    let half = tol / lit(2.0);
    recurse(f, a, m, fa, flm, fm, left, half, depth - 1) + recurse(f, m, b, fm, frm, fb, right, half, depth - 1)
}
