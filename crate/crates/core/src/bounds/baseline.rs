use crate::bounds::report::{BoundReport, Direction, Family};
use crate::bounds::PairContext;
use crate::dist::GaussianScalar;
use crate::divergence::{tv, wasserstein2_1d};
use crate::error::Result;
use crate::loss::LossKind;
use crate::scalar::{lit, Real};

/// Caller-supplied constants for the baselines that need them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BaselineExtras<T: Real> {
    /// `(c₁, c₂)` with `‖∇ log Q(z)‖ ≤ c₁‖z‖ + c₂`.
    pub regular: Option<(T, T)>,
}

/// `h₂(t)` in nats.
pub fn binary_entropy<T: Real>(t: T) -> T {
    let xlx = |x: T| if x > T::zero() { -x * x.ln() } else { T::zero() };
    xlx(t) + xlx(T::one() - t)
}

/// `2t·log(n/(2t))` when `t ≤ 1/4`, with `0` at `t = 0`.
pub fn csiszar_korner_bound<T: Real>(t: T, n: usize) -> Option<T> {
    if t > lit(0.25) {
        return None;
    }
    if t == T::zero() {
        return Some(T::zero());
    }
    let two_t = lit::<T>(2.0) * t;
    Some(two_t * (lit::<T>(n as f64) / two_t).ln())
}

/// `t·log(n − 1) + h₂(t)`.
pub fn coupling_bound<T: Real>(t: T, n: usize) -> T {
    let first = if n > 1 && t > T::zero() {
        t * lit::<T>((n - 1) as f64).ln()
    } else {
        T::zero()
    };
    first + binary_entropy(t)
}

fn variance_w2<T: Real>(m2p: T, m2q: T, w2: T) -> T {
    lit::<T>(2.0) * (m2p.sqrt() + m2q.sqrt()) * w2
}

/// Literature baselines for a discrete pair: the two Shannon-entropy bounds
/// under log loss and the variance bound under quadratic loss.
pub fn baseline_bounds<T: Real>(ctx: &PairContext<T>, _extras: &BaselineExtras<T>) -> Result<Vec<BoundReport<T>>> {
    let mut out = Vec::new();
    let n = ctx.p.len();
    match ctx.spec.kind {
        LossKind::Log => {
            let t = tv(&ctx.p, &ctx.q)?;
            let r = BoundReport::new(
                "csiszar-korner",
                Family::Baseline,
                Direction::Abs,
                "2d_TV·log(|Z|/(2d_TV)), x·log(1/x) → 0 at d_TV = 0",
            )
            .condition("d_TV(P,Q) ≤ 1/4")
            .detail("tv", t);
            out.push(match csiszar_korner_bound(t, n) {
                Some(v) => r.with_value(v),
                None => r.fail(format!("d_TV = {t} > 1/4")),
            });
            out.push(
                BoundReport::new(
                    "coupling",
                    Family::Baseline,
                    Direction::Abs,
                    "d_TV·log(|Z| − 1) + h₂(d_TV)",
                )
                .condition("finite Z")
                .detail("tv", t)
                .with_value(coupling_bound(t, n)),
            );
        }
        LossKind::Quadratic => {
            let r = BoundReport::new(
                "variance-w2",
                Family::Baseline,
                Direction::Abs,
                "2(√E_P Z² + √E_Q Z²)·W₂(P,Q)",
            )
            .condition("numeric support, finite second moments");
            let w2 = wasserstein2_1d(&ctx.p, &ctx.q)?;
            let (m2p, m2q) = (ctx.p.second_moment()?, ctx.q.second_moment()?);
            out.push(
                r.detail("w2", w2)
                    .with_value(variance_w2(m2p, m2q, w2)),
            );
        }
        _ => {}
    }
    Ok(out)
}

/// Baselines for a pair of scalar Gaussians: the regular-density Wasserstein
/// bound on differential entropy and the variance bound.
pub fn baseline_bounds_gaussian<T: Real>(
    p: &GaussianScalar<T>,
    q: &GaussianScalar<T>,
    extras: &BaselineExtras<T>,
) -> Vec<BoundReport<T>> {
    let dm = p.mean() - q.mean();
    let ds = p.std_dev() - q.std_dev();
    let w2 = (dm * dm + ds * ds).sqrt();
    let m2p = p.variance() + p.mean() * p.mean();
    let m2q = q.variance() + q.mean() * q.mean();
    let (c1, c2, how) = match extras.regular {
        Some((a, b)) => (a, b, "supplied"),
        None => (
            T::one() / q.variance(),
            q.mean().abs() / q.variance(),
            "derived from Gaussian Q: c₁ = 1/σ², c₂ = |μ|/σ²",
        ),
    };
    let half: T = lit(0.5);
    let pw = BoundReport::new(
        "regular-density-w2",
        Family::Baseline,
        Direction::Upper,
        "((c₁/2)(√E_P Z² + √E_Q Z²) + c₂)·W₂(P,Q)",
    )
    .condition(format!("Q has a (c₁, c₂)-regular density ({how})"))
    .detail("c1", c1)
    .detail("c2", c2)
    .detail("w2", w2)
    .with_value((c1 * half * (m2p.sqrt() + m2q.sqrt()) + c2) * w2);
    let var = BoundReport::new(
        "variance-w2",
        Family::Baseline,
        Direction::Abs,
        "2(√E_P Z² + √E_Q Z²)·W₂(P,Q)",
    )
    .condition("finite second moments")
    .detail("w2", w2)
    .with_value(variance_w2(m2p, m2q, w2));
    vec![pw, var]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::entropy::generalized_entropy_gaussian;
    use crate::loss::LossSpec;

    fn bern(p: f64) -> DiscreteDist<f64> {
        DiscreteDist::indexed(vec![1.0 - p, p]).unwrap()
    }

    #[test]
    fn bernoulli_examples() {
        let ctx = PairContext::new(&bern(0.2), &bern(0.3), &LossSpec::log()).unwrap();
        let b = baseline_bounds(&ctx, &BaselineExtras::default()).unwrap();
        let c = b.iter().find(|r| r.name == "coupling").unwrap();
        assert!((c.value.unwrap() - 0.3251).abs() < 1e-4);
        let ctx = PairContext::new(&bern(0.5), &bern(0.99), &LossSpec::log()).unwrap();
        let b = baseline_bounds(&ctx, &BaselineExtras::default()).unwrap();
        let c = b.iter().find(|r| r.name == "coupling").unwrap();
        // h₂(0.49) = 0.692947…
        assert!((c.value.unwrap() - binary_entropy(0.49)).abs() < 1e-15);
        assert!((c.value.unwrap() - 0.6929471672).abs() < 1e-9);
        let ck = b.iter().find(|r| r.name == "csiszar-korner").unwrap();
        assert!(!ck.applicable);
    }

    #[test]
    fn equal_pair_baselines_zero() {
        let ctx = PairContext::new(&bern(0.3), &bern(0.3), &LossSpec::log()).unwrap();
        for r in baseline_bounds(&ctx, &BaselineExtras::default()).unwrap() {
            assert_eq!(r.value, Some(0.0), "{}", r.name);
        }
    }

    #[test]
    fn gaussian_baselines_hold() {
        let p = GaussianScalar::new(0.3, 2.0).unwrap();
        let q = GaussianScalar::new(-0.5, 1.0).unwrap();
        let b = baseline_bounds_gaussian(&p, &q, &BaselineExtras::default());
        let log = LossSpec::log();
        let dh = generalized_entropy_gaussian(&p, &log).unwrap().value
            - generalized_entropy_gaussian(&q, &log).unwrap().value;
        assert!(b[0].covers(dh, 1e-12).unwrap());
        assert!(b[1].covers(p.variance() - q.variance(), 1e-12).unwrap());
    }

    #[test]
    fn discrete_variance_baseline() {
        let p = DiscreteDist::on_reals(&[0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        let q = DiscreteDist::on_reals(&[0.0, 1.0, 3.0], vec![0.5, 0.4, 0.1]).unwrap();
        let ctx = PairContext::new(&p, &q, &LossSpec::quadratic()).unwrap();
        let b = baseline_bounds(&ctx, &BaselineExtras::default()).unwrap();
        assert!(b[0].covers(ctx.diff(), 1e-12).unwrap());
    }
}
