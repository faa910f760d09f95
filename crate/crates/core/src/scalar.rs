//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar the library computes in: `f32` or `f64`.
///
/// The associated tolerances scale with the precision of the type. For `f64`
/// they are the values the acceptance tests are pinned to.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + 'static
{
    /// Allowed deviation of a probability vector's sum from one.
    fn norm_tol() -> Self;
    /// Slack used when comparing quantities that should agree up to rounding.
    fn cmp_tol() -> Self;
}

impl Real for f64 {
    fn norm_tol() -> Self {
        1e-12
    }
    fn cmp_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn norm_tol() -> Self {
        1e-5
    }
    fn cmp_tol() -> Self {
        1e-5
    }
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `0 * inf = 0` product used for expectations over zero-mass outcomes.
#[inline]
pub(crate) fn weighted<T: Real>(p: T, v: T) -> T {
    if p == T::zero() {
        T::zero()
    } else {
        p * v
    }
}

/// Pairwise summation; order independent up to the usual rounding bound and
/// deterministic for a fixed input order.
pub fn pairwise_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n if n <= 8 => xs.iter().copied().fold(T::zero(), |a, b| a + b),
        n => {
            let (l, r) = xs.split_at(n / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

pub fn mean<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    pairwise_sum(xs) / lit(xs.len() as f64)
}

/// Median of a slice by sorting a copy; NaN-free input assumed.
pub fn median<T: Real>(xs: &[T]) -> T {
    if xs.is_empty() {
        return T::nan();
    }
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / lit(2.0)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope<T: Real>(x: &[T], y: &[T]) -> T {
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = mean(&lx);
    let my = mean(&ly);
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (a, b) in lx.iter().zip(&ly) {
        sxy = sxy + (*a - mx) * (*b - my);
        sxx = sxx + (*a - mx) * (*a - mx);
    }
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_on_small_ints() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        assert_eq!(pairwise_sum(&xs), 5050.0);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((log_log_slope(&x, &y) + 0.5).abs() < 1e-12);
    }
}
