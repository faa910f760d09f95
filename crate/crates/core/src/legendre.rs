//! Legendre duals of CGF envelopes and their generalized inverses.
//!
//! An envelope `φ` on `[0, b)` bounds a centered log moment generating
//! function. Its dual `φ*(γ) = sup_{0 ≤ λ < b} λγ − φ(λ)` is evaluated on a
//! log-spaced λ lattice and refined by golden-section search; the inverse
//! `φ*⁻¹(x) = sup{γ : φ*(γ) ≤ x}` is found by bisection.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Real};

pub const DEFAULT_GRID: usize = 512;
const LAMBDA_CAP: f64 = 1e6;
const LAMBDA_FLOOR_RATIO: f64 = 1e-12;
const POLE_GAP: f64 = 1e-9;
const LAMBDA_TOL: f64 = 1e-10;

type Phi<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

#[derive(Clone)]
pub struct CgfEnvelope<T: Real> {
    name: String,
    phi: Phi<T>,
    b: T,
    grid: Vec<T>,
}

impl<T: Real> fmt::Debug for CgfEnvelope<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CgfEnvelope")
            .field("name", &self.name)
            .field("b", &self.b)
            .field("grid_len", &self.grid.len())
            .finish()
    }
}

fn log_grid<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let (llo, lhi) = (lo.ln(), hi.ln());
    let steps: T = lit((n - 1).max(1) as f64);
    (0..n)
        .map(|k| (llo + (lhi - llo) * lit::<T>(k as f64) / steps).exp())
        .collect()
}

impl<T: Real> CgfEnvelope<T> {
    /// Envelope from a closure on `[0, b)`; `b` may be `+∞`.
    pub fn new<F>(name: impl Into<String>, phi: F, b: T, grid_len: usize) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        if !(b > T::zero()) {
            return Err(Error::InvalidArgument(format!("envelope domain bound b = {b} must be positive")));
        }
        if grid_len < 2 {
            return Err(Error::InvalidArgument("envelope grid needs at least two points".into()));
        }
        let hi = if b.is_finite() {
            b - lit::<T>(POLE_GAP) * b
        } else {
            lit(LAMBDA_CAP)
        }
        .min(lit(LAMBDA_CAP));
        let lo = hi * lit(LAMBDA_FLOOR_RATIO);
        Ok(Self {
            name: name.into(),
            phi: Arc::new(phi),
            b,
            grid: log_grid(lo, hi, grid_len),
        })
    }

    /// `φ(λ) = σ²λ²/2` on `[0, ∞)`.
    pub fn subgaussian(sigma2: T) -> Result<Self> {
        if !(sigma2 >= T::zero()) {
            return Err(Error::InvalidArgument(format!("variance proxy {sigma2} < 0")));
        }
        let half: T = lit(0.5);
        Self::new(
            format!("subgaussian(sigma2={sigma2})"),
            move |l: T| half * sigma2 * l * l,
            T::infinity(),
            DEFAULT_GRID,
        )
    }

    /// `φ(λ) = σ⁴λ²/(1 − 2σ²λ)` on `[0, 1/(2σ²))`.
    pub fn chi_square(sigma2: T) -> Result<Self> {
        if !(sigma2 > T::zero()) {
            return Err(Error::InvalidArgument(format!("variance {sigma2} must be positive")));
        }
        let two: T = lit(2.0);
        Self::new(
            format!("chi-square(sigma2={sigma2})"),
            move |l: T| {
                let den = T::one() - two * sigma2 * l;
                if den <= T::zero() {
                    T::infinity()
                } else {
                    sigma2 * sigma2 * l * l / den
                }
            },
            T::one() / (two * sigma2),
            DEFAULT_GRID,
        )
    }

    /// Piecewise-linear envelope through `(λ_k, φ_k)`, defined on `[0, λ_last)`.
    pub fn custom(lambda: Vec<T>, phi: Vec<T>) -> Result<Self> {
        if lambda.len() != phi.len() || lambda.len() < 2 {
            return Err(Error::InvalidArgument("custom envelope needs ≥ 2 matching (λ, φ) points".into()));
        }
        if lambda[0] != T::zero() || lambda.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument(
                "custom envelope λ must start at 0 and increase strictly".into(),
            ));
        }
        let b = *lambda.last().expect("non-empty");
        let (lx, ly) = (lambda, phi);
        Self::new(
            "custom",
            move |l: T| {
                let k = lx.partition_point(|v| *v <= l);
                if k == 0 {
                    return ly[0];
                }
                if k >= lx.len() {
                    return *ly.last().expect("non-empty");
                }
                let t = (l - lx[k - 1]) / (lx[k] - lx[k - 1]);
                ly[k - 1] + t * (ly[k] - ly[k - 1])
            },
            b,
            DEFAULT_GRID,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn b(&self) -> T {
        self.b
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn phi(&self, lambda: T) -> T {
        (self.phi)(lambda)
    }

    /// `φ*(γ) = sup_{0 ≤ λ < b} λγ − φ(λ)`.
    pub fn dual(&self, gamma: T) -> T {
        legendre_dual(self, gamma)
    }

    pub fn inverse(&self, x: T) -> T {
        generalized_inverse(self, x)
    }
}

/// Legendre dual by a lattice scan refined with golden-section search.
pub fn legendre_dual<T: Real>(env: &CgfEnvelope<T>, gamma: T) -> T {
    let obj = |l: T| {
        let v = gamma * l - env.phi(l);
        if v.is_nan() {
            T::neg_infinity()
        } else {
            v
        }
    };
    let mut pts = Vec::with_capacity(env.grid.len() + 1);
    pts.push(T::zero());
    pts.extend_from_slice(&env.grid);
    let vals: Vec<T> = pts.iter().map(|l| obj(*l)).collect();
    let mut k = 0;
    for (i, v) in vals.iter().enumerate() {
        if *v > vals[k] {
            k = i;
        }
    }
    if vals[k] == T::infinity() {
        return T::infinity();
    }
    // still increasing at the top of an unbounded domain: the supremum diverges
    if k + 1 == pts.len() && !env.b.is_finite() && vals[k] > vals[k - 1] {
        return T::infinity();
    }
    let lo = if k == 0 { pts[0] } else { pts[k - 1] };
    let hi = if k + 1 == pts.len() { pts[k] } else { pts[k + 1] };
    let best = golden_max(&obj, lo, hi).max(vals[k]);
    best.max(-env.phi(T::zero()))
}

fn golden_max<T: Real, F: Fn(T) -> T>(f: &F, mut a: T, mut b: T) -> T {
    let r: T = lit(0.618_033_988_749_894_8);
    let tol: T = lit(LAMBDA_TOL);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd).max(f(a)).max(f(b));
    for _ in 0..200 {
        if (b - a) <= tol * (T::one() + a.abs()) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// `sup{γ : φ*(γ) ≤ x}`, by bracket expansion and bisection; `+∞` when the
/// dual never exceeds `x`.
pub fn generalized_inverse<T: Real>(env: &CgfEnvelope<T>, x: T) -> T {
    if x == T::infinity() {
        return T::infinity();
    }
    if env.dual(T::zero()) > x {
        // empty sublevel set on γ ≥ 0; the dual is nondecreasing so fall back to γ < 0
        let mut lo = -T::one();
        while env.dual(lo) > x {
            lo = lo * lit(2.0);
            if lo < lit(-1e300) {
                return T::neg_infinity();
            }
        }
        return bisect(env, x, lo, T::zero());
    }
    let mut lo = T::zero();
    let mut hi = T::one();
    while env.dual(hi) <= x {
        lo = hi;
        hi = hi * lit(2.0);
        if hi > lit(1e300) {
            return T::infinity();
        }
    }
    bisect(env, x, lo, hi)
}

fn bisect<T: Real>(env: &CgfEnvelope<T>, x: T, mut lo: T, mut hi: T) -> T {
    let half: T = lit(0.5);
    for _ in 0..300 {
        let mid = half * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if env.dual(mid) <= x {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi.abs().max(T::one()) {
            break;
        }
    }
    lo
}

/// `φ*⁻¹(D)`: the KL-driven bound on an expectation gap.
pub fn kl_bound_from_cgf<T: Real>(env: &CgfEnvelope<T>, kl_value: T) -> Result<T> {
    if kl_value.is_nan() || kl_value < -T::cmp_tol() {
        return Err(Error::InvalidArgument(format!("KL value {kl_value} is negative")));
    }
    if kl_value == T::infinity() {
        return Ok(T::infinity());
    }
    Ok(generalized_inverse(env, kl_value.max(T::zero())))
}

/// `log E_w exp(λ (f − E_w f))` over the points with `w > 0`; `+∞` when `f`
/// is infinite on that support.
pub fn centered_cgf<T: Real>(w: &[T], f: &[T], lambda: T) -> T {
    let idx: Vec<usize> = (0..w.len()).filter(|i| w[*i] > T::zero()).collect();
    if idx.iter().any(|i| !f[*i].is_finite()) {
        return T::infinity();
    }
    let mean = idx.iter().fold(T::zero(), |s, i| s + w[*i] * f[*i]);
    let xs: Vec<T> = idx.iter().map(|i| lambda * (f[*i] - mean)).collect();
    let top = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if top.abs() < T::one() {
        // small exponents: expm1/ln1p keeps the O(λ²) value accurate
        let s = idx
            .iter()
            .zip(&xs)
            .fold(T::zero(), |s, (i, x)| s + w[*i] * x.exp_m1());
        return s.ln_1p().max(T::zero());
    }
    let s = idx
        .iter()
        .zip(&xs)
        .fold(T::zero(), |s, (i, x)| s + w[*i] * (*x - top).exp());
    (top + s.ln()).max(T::zero())
}

/// Checks `log E_w exp(s λ (f − E_w f)) ≤ φ(λ)` on the envelope grid, with
/// `s = +1` or `−1`. Returns the first violating `λ`.
pub fn check_cgf<T: Real>(env: &CgfEnvelope<T>, w: &[T], f: &[T], sign: T) -> std::result::Result<(), T> {
    let g: Vec<T> = f.iter().map(|v| sign * *v).collect();
    for l in &env.grid {
        let cgf = centered_cgf(w, &g, *l);
        let phi = env.phi(*l);
        if cgf > phi + T::cmp_tol() * (T::one() + phi.abs()) {
            return Err(*l);
        }
    }
    Ok(())
}

/// Envelope presets as they appear in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case")]
pub enum EnvelopeSpec {
    Subgaussian { sigma2: f64 },
    ChiSquare { sigma2: f64 },
    Custom { lambda: Vec<f64>, phi: Vec<f64> },
}

impl EnvelopeSpec {
    pub fn build<T: Real>(&self) -> Result<CgfEnvelope<T>> {
        match self {
            EnvelopeSpec::Subgaussian { sigma2 } => CgfEnvelope::subgaussian(lit(*sigma2)),
            EnvelopeSpec::ChiSquare { sigma2 } => CgfEnvelope::chi_square(lit(*sigma2)),
            EnvelopeSpec::Custom { lambda, phi } => CgfEnvelope::custom(
                lambda.iter().map(|v| lit(*v)).collect(),
                phi.iter().map(|v| lit(*v)).collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgaussian_dual_and_inverse() {
        let e = CgfEnvelope::<f64>::subgaussian(2.0).unwrap();
        for g in [0.0, 0.3, 1.0, 4.0] {
            assert!((e.dual(g) - g * g / 4.0).abs() < 1e-9, "γ = {g}");
        }
        let e1 = CgfEnvelope::<f64>::subgaussian(1.0).unwrap();
        assert!((e1.inverse(0.5) - 1.0).abs() < 1e-8);
        assert!((kl_bound_from_cgf(&e, 1.0).unwrap() - 2.0).abs() < 1e-8);
        assert_eq!(kl_bound_from_cgf(&e, 0.0).unwrap().abs() < 1e-9, true);
        assert!(kl_bound_from_cgf(&e, f64::INFINITY).unwrap().is_infinite());
        assert!(kl_bound_from_cgf(&e, -1.0).is_err());
    }

    #[test]
    fn chi_square_closed_forms() {
        let s2: f64 = 1.0;
        let e = CgfEnvelope::chi_square(s2).unwrap();
        let s = s2.sqrt();
        for g in [0.0, 0.5, 2.0, 9.0] {
            let want = ((2.0 * g + s2).sqrt() - s).powi(2) / (4.0 * s2);
            assert!((e.dual(g) - want).abs() < 1e-9, "γ = {g}");
        }
        let d = 0.125;
        assert!((e.inverse(d) - 2.0 * (d.sqrt() + d)).abs() < 1e-7);
        assert!((e.inverse(d) - 0.9571).abs() < 1e-4);
    }

    #[test]
    fn inverse_zero_for_strictly_convex() {
        let e = CgfEnvelope::<f64>::chi_square(0.7).unwrap();
        assert!(e.inverse(0.0).abs() < 1e-9);
        assert!(e.dual(0.0).abs() < 1e-15);
    }

    #[test]
    fn unbounded_dual_gives_infinite_inverse_range() {
        // φ linear: the dual is 0 up to the slope and +∞ beyond
        let e = CgfEnvelope::<f64>::new("lin", |l| 0.5 * l, f64::INFINITY, 256).unwrap();
        assert_eq!(e.dual(0.2), 0.0);
        assert!(e.dual(1.0).is_infinite());
        assert!((e.inverse(3.0) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn cgf_check_detects_violation() {
        let w = [0.5, 0.5];
        let f = [0.0, 1.0];
        // Bernoulli(½) centered CGF ≤ λ²/8
        let ok = CgfEnvelope::<f64>::subgaussian(0.25).unwrap();
        assert!(check_cgf(&ok, &w, &f, 1.0).is_ok());
        assert!(check_cgf(&ok, &w, &f, -1.0).is_ok());
        let tight = CgfEnvelope::<f64>::subgaussian(0.2).unwrap();
        assert!(check_cgf(&tight, &w, &f, 1.0).is_err());
    }

    #[test]
    fn centered_cgf_small_lambda() {
        let w = [0.25, 0.75];
        let f = [1.0, 0.0];
        let v: f64 = 0.25 * 0.75;
        let k3: f64 = v * (1.0 - 2.0 * 0.25);
        let l: f64 = 1e-4;
        assert!((centered_cgf(&w, &f, l) / (l * l) - (v / 2.0 + k3 * l / 6.0)).abs() < 1e-8);
        let exact = (0.25f64 * (30.0f64 * 0.75).exp() + 0.75 * (-30.0f64 * 0.25).exp()).ln();
        assert!((centered_cgf(&w, &f, 30.0) - exact).abs() < 1e-12);
    }

    #[test]
    fn preset_json() {
        let s: EnvelopeSpec = serde_json::from_str(r#"{"preset":"chi-square","sigma2":1.0}"#).unwrap();
        let e: CgfEnvelope<f64> = s.build().unwrap();
        assert!((e.b() - 0.5).abs() < 1e-15);
    }
}
