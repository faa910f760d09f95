use crate::bounds::report::{BoundPair, BoundReport, Direction, Family};
use crate::bounds::PairContext;
use crate::dist::{DiscreteDist, GaussianMixture, GaussianScalar};
use crate::divergence::{
    chi2, cross_varentropy, kl, kl_gaussian, kl_mixture_gaussian, pushforward_pair, semidistance_al, tv,
    varentropy, variance_under, PushforwardPair,
};
use crate::error::{Error, Result};
use crate::legendre::{centered_cgf, check_cgf, kl_bound_from_cgf, CgfEnvelope};
use crate::loss::{check_lipschitz, column_masked, lipschitz_constant, Action, LossKind};
use crate::scalar::{lit, Real};
use crate::transport::{wasserstein1_discrete, Metric};

fn range_on<T: Real>(col: &[T], mask: &[bool]) -> std::result::Result<(T, T), String> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (v, m) in col.iter().zip(mask) {
        if *m {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
    }
    if lo > hi {
        return Ok((T::zero(), T::zero()));
    }
    if !lo.is_finite() || !hi.is_finite() {
        return Err("loss is unbounded on the support at this action".into());
    }
    Ok((lo, hi))
}

/// `x·y` with `0·∞ = ∞` (a vacuous bound stays vacuous).
fn scaled<T: Real>(width: T, dist: T) -> T {
    if dist.is_infinite() {
        T::infinity()
    } else {
        width * dist
    }
}

fn subgaussian_value<T: Real>(sigma2: T, d: T) -> T {
    if d.is_infinite() {
        T::infinity()
    } else {
        (lit::<T>(2.0) * sigma2 * d).sqrt()
    }
}

/// Total-variation bound with tight per-action ranges.
pub fn tv_bound<T: Real>(ctx: &PairContext<T>) -> BoundPair<T> {
    let d = tv(&ctx.p, &ctx.q).expect("aligned");
    let side = |col: &[T], dir: Direction, tag: &str| {
        let r = BoundReport::new("tv", Family::Tv, dir, format!("(β_{tag} − α_{tag})·d_TV(P,Q)"))
            .condition(format!("ℓ(·,a_{tag}) ∈ [α_{tag}, β_{tag}] on supp P ∪ supp Q"))
            .detail("tv", d);
        match range_on(col, &ctx.mass) {
            Ok((lo, hi)) => r
                .detail("alpha", lo)
                .detail("beta", hi)
                .with_value(scaled(hi - lo, d)),
            Err(e) => r.fail(e),
        }
    };
    BoundPair {
        upper: side(&ctx.col_q, Direction::Upper, "Q"),
        lower: side(&ctx.col_p, Direction::Lower, "P"),
    }
}

/// Log-loss form `log(P̄ ∨ Q̄)·d_TV(P,Q)` with `P̄ = max P / min P`.
pub fn tv_log_ratio_bound<T: Real>(ctx: &PairContext<T>) -> BoundReport<T> {
    let r = BoundReport::new(
        "tv-log-ratio",
        Family::Tv,
        Direction::Abs,
        "log(P̄ ∨ Q̄)·d_TV(P,Q), P̄ = max_z P(z) / min_z P(z)",
    );
    if ctx.spec.kind != LossKind::Log {
        return r.fail("log loss only");
    }
    let d = tv(&ctx.p, &ctx.q).expect("aligned");
    let ratio = ctx.p.ratio_max_min().max(ctx.q.ratio_max_min());
    let r = r
        .condition("all entries of P and Q positive")
        .detail("tv", d)
        .detail("ratio", ratio);
    if !ratio.is_finite() {
        return r.fail("a zero probability makes the ratio infinite");
    }
    r.with_value(scaled(ratio.ln(), d))
}

/// KL bound `√(2σ²·D(P‖Q))` in both directions.
///
/// Both constants refer to `Q`: the upper side needs `ℓ(·,a_Q)` to be
/// σ_Q²-subgaussian under `Q` (upper tail) and the lower side needs `ℓ(·,a_P)`
/// to be σ_P²-subgaussian under `Q` (lower tail). Supplied constants are
/// verified on the λ grid; otherwise the bounded-loss value `(β−α)²/4` over
/// `supp Q` is used.
pub fn kl_subgaussian_bound<T: Real>(ctx: &PairContext<T>, sigma2: Option<(T, T)>) -> Result<BoundPair<T>> {
    let d = kl(&ctx.p, &ctx.q)?;
    let qmass = ctx.q_mass();
    let side = |col: &[T], dir: Direction, tag: &str, supplied: Option<T>, sign: T| -> Result<BoundReport<T>> {
        let r = BoundReport::new(
            "kl-subgaussian",
            Family::Kl,
            dir,
            format!("√(2σ_{tag}²·D(P‖Q))"),
        )
        .detail("kl", d);
        let r = match supplied {
            Some(s2) => {
                let env = CgfEnvelope::subgaussian(s2)?;
                let r = r
                    .condition(format!("σ_{tag}² = {s2} supplied; CGF of ℓ(·,a_{tag}) under Q checked on the λ grid"))
                    .detail("sigma2", s2);
                match check_cgf(&env, ctx.q.probs(), col, sign) {
                    Ok(()) => r.with_value(subgaussian_value(s2, d)),
                    Err(l) => r.detail("violating_lambda", l).fail(format!("CGF condition violated at λ = {l}")),
                }
            }
            None => {
                let r = r.condition(format!(
                    "ℓ(·,a_{tag}) ∈ [α, β] on supp Q gives σ_{tag}² = (β − α)²/4"
                ));
                match range_on(col, &qmass) {
                    Ok((lo, hi)) => {
                        let s2 = (hi - lo) * (hi - lo) / lit(4.0);
                        r.detail("sigma2", s2).with_value(subgaussian_value(s2, d))
                    }
                    Err(e) => r.fail(e),
                }
            }
        };
        Ok(r)
    };
    Ok(BoundPair {
        upper: side(&ctx.col_q, Direction::Upper, "Q", sigma2.map(|s| s.0), T::one())?,
        lower: side(&ctx.col_p, Direction::Lower, "P", sigma2.map(|s| s.1), -T::one())?,
    })
}

/// KL bound `φ*⁻¹(D(P‖Q))` with general CGF envelopes, both checked under `Q`.
pub fn kl_general_bound<T: Real>(
    ctx: &PairContext<T>,
    env_q: &CgfEnvelope<T>,
    env_p: &CgfEnvelope<T>,
) -> Result<BoundPair<T>> {
    let d = kl(&ctx.p, &ctx.q)?;
    let side = |env: &CgfEnvelope<T>, col: &[T], dir: Direction, tag: &str, sign: T| -> Result<BoundReport<T>> {
        let r = BoundReport::new("kl-cgf", Family::KlCgf, dir, format!("φ_{tag}*⁻¹(D(P‖Q))"))
            .condition(format!(
                "log E_Q exp(±λ(ℓ(Z,a_{tag}) − E_Q ℓ(Z,a_{tag}))) ≤ φ_{tag}(λ) on the λ grid, envelope {}",
                env.name()
            ))
            .detail("kl", d);
        Ok(match check_cgf(env, ctx.q.probs(), col, sign) {
            Ok(()) => r.with_value(kl_bound_from_cgf(env, d)?),
            Err(l) => r
                .detail("violating_lambda", l)
                .fail(format!("CGF condition violated at λ = {l}")),
        })
    };
    Ok(BoundPair {
        upper: side(env_q, &ctx.col_q, Direction::Upper, "Q", T::one())?,
        lower: side(env_p, &ctx.col_p, Direction::Lower, "P", -T::one())?,
    })
}

/// A scalar distribution compared against a Gaussian reference.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarModel<T: Real> {
    Gaussian(GaussianScalar<T>),
    Mixture(GaussianMixture<T>),
    Discrete(DiscreteDist<T>),
}

impl<T: Real> ScalarModel<T> {
    pub fn variance(&self) -> Result<T> {
        match self {
            ScalarModel::Gaussian(g) => Ok(g.variance()),
            ScalarModel::Mixture(m) => Ok(m.variance()),
            ScalarModel::Discrete(d) => d.variance(),
        }
    }

    /// `D(self‖q)`: closed form, quadrature, or `+∞` for atoms.
    pub fn kl_to(&self, q: &GaussianScalar<T>) -> Result<T> {
        match self {
            ScalarModel::Gaussian(g) => Ok(kl_gaussian(g, q)),
            ScalarModel::Mixture(m) => kl_mixture_gaussian(m, q),
            ScalarModel::Discrete(_) => Ok(T::infinity()),
        }
    }
}

/// `2σ²(√D + D)`.
pub fn gaussian_variance_bound_from_kl<T: Real>(sigma2: T, d: T) -> Result<T> {
    if d.is_nan() || d < -T::cmp_tol() {
        return Err(Error::InvalidArgument(format!("KL value {d} is negative")));
    }
    if d.is_infinite() {
        return Ok(T::infinity());
    }
    let d = d.max(T::zero());
    Ok(lit::<T>(2.0) * sigma2 * (d.sqrt() + d))
}

/// `|Var_P − Var_Q| ≤ 2σ_Q²(√D + D)` for Gaussian `Q`.
pub fn gaussian_variance_kl_bound<T: Real>(p: &ScalarModel<T>, q: &GaussianScalar<T>) -> Result<BoundReport<T>> {
    let d = p.kl_to(q)?;
    let vp = p.variance()?;
    let r = BoundReport::new(
        "gaussian-variance-kl",
        Family::Kl,
        Direction::Abs,
        "2σ_Q²(√D(P‖Q) + D(P‖Q)), chi-square CGF envelope of (Z − μ_Q)² under Gaussian Q",
    )
    .condition("Q Gaussian with variance σ_Q²")
    .detail("kl", d)
    .detail("var_p", vp)
    .detail("var_q", q.variance());
    Ok(r.with_value(gaussian_variance_bound_from_kl(q.variance(), d)?))
}

/// Grid points for the Rényi fit.
pub const RENYI_GRID_LEN: usize = 400;
pub const RENYI_LAMBDA_MAX: f64 = 50.0;
const RENYI_LAMBDA_MIN: f64 = 1e-3;

/// Fitted subgaussian constants from the Rényi-gap condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenyiFit<T: Real> {
    /// `sup_λ 2(R_{1−λ}(Q) − R₁(Q))/λ`
    pub sigma_q2: T,
    /// `sup_λ 2(R₁(Q,P) − R_{1+λ}(Q,P))/λ`
    pub sigma_p2: T,
}

/// Grid-fit estimator of the constants in the Rényi condition.
///
/// `R_{1−λ}(Q) − R₁(Q)` equals `CGF(λ)/λ` of `−log Q(Z)` under `Q`, and
/// `R₁(Q,P) − R_{1+λ}(Q,P)` equals `CGF(−λ)/λ` of `−log P(Z)` under `Q`; both
/// are evaluated through the centered CGF for accuracy at small λ. The λ → 0
/// limits (varentropy and cross varentropy) are included.
pub fn renyi_fit<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<RenyiFit<T>> {
    let (p, q) = p.align(q)?;
    let fq: Vec<T> = q
        .probs()
        .iter()
        .map(|v| if *v > T::zero() { -v.ln() } else { T::zero() })
        .collect();
    let cross = cross_varentropy(&q, &p)?;
    let mut sigma_q2 = varentropy(&q);
    let mut sigma_p2 = cross;
    let lo: T = lit(RENYI_LAMBDA_MIN);
    let hi: T = lit(RENYI_LAMBDA_MAX);
    let steps: T = lit((RENYI_GRID_LEN - 1) as f64);
    let fp_neg: Vec<T> = p
        .probs()
        .iter()
        .map(|v| if *v > T::zero() { v.ln() } else { T::neg_infinity() })
        .collect();
    for k in 0..RENYI_GRID_LEN {
        let l = (lo.ln() + (hi.ln() - lo.ln()) * lit::<T>(k as f64) / steps).exp();
        let two_over = lit::<T>(2.0) / (l * l);
        sigma_q2 = sigma_q2.max(two_over * centered_cgf(q.probs(), &fq, l));
        if cross.is_finite() {
            sigma_p2 = sigma_p2.max(two_over * centered_cgf(q.probs(), &fp_neg, l));
        }
    }
    Ok(RenyiFit { sigma_q2, sigma_p2 })
}

/// `√(2σ²·D(P‖Q))` with σ² fitted from the Rényi-gap condition on a grid.
pub fn renyi_condition_bound<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<BoundPair<T>> {
    let (p, q) = p.align(q)?;
    let fit = renyi_fit(&p, &q)?;
    let d = kl(&p, &q)?;
    let grid = format!(
        "grid-fit estimator: smallest σ² meeting the condition for λ ∈ [{RENYI_LAMBDA_MIN}, {RENYI_LAMBDA_MAX}] ({RENYI_GRID_LEN} points) and λ → 0"
    );
    let side = |s2: T, dir: Direction, cite: &str, cond: &str| {
        let r = BoundReport::new("renyi-fit", Family::Renyi, dir, cite)
            .condition(cond)
            .condition(grid.clone())
            .detail("sigma2", s2)
            .detail("kl", d);
        if s2.is_finite() {
            r.with_value(subgaussian_value(s2, d))
        } else {
            r.fail("no finite constant on the grid")
        }
    };
    Ok(BoundPair {
        upper: side(
            fit.sigma_q2,
            Direction::Upper,
            "√(2σ_Q²·D(P‖Q)), R_{1−λ}(Q) − R₁(Q) ≤ λσ_Q²/2",
            "Rényi entropy gap of Q",
        ),
        lower: side(
            fit.sigma_p2,
            Direction::Lower,
            "√(2σ_P²·D(P‖Q)), R₁(Q,P) − R_{1+λ}(Q,P) ≤ λσ_P²/2",
            "Rényi cross-entropy gap of (Q, P)",
        ),
    })
}

/// `√(Var_Q[ℓ(Z,a)]·χ²(P‖Q))` in both directions.
pub fn chi2_bound<T: Real>(ctx: &PairContext<T>) -> Result<BoundPair<T>> {
    let c = chi2(&ctx.p, &ctx.q)?;
    let log = ctx.spec.kind == LossKind::Log;
    let side = |col: &[T], dir: Direction, tag: &str, var_name: &str| {
        let v = variance_under(ctx.q.probs(), col);
        let name = if log { "chi2-log" } else { "chi2" };
        let r = BoundReport::new(name, Family::Chi2, dir, format!("√(Var_Q[ℓ(Z,a_{tag})]·χ²(P‖Q))"))
            .condition(format!("{var_name} finite"))
            .detail("chi2", c)
            .detail("variance", v);
        if v.is_finite() {
            r.with_value(scaled(v, c).sqrt())
        } else {
            r.fail(format!("{var_name} infinite"))
        }
    };
    let (vq, vp) = if log {
        ("varentropy of Q", "cross varentropy Var_Q[−log P(Z)]")
    } else {
        ("Var_Q[ℓ(Z,a_Q)]", "Var_Q[ℓ(Z,a_P)]")
    };
    Ok(BoundPair {
        upper: side(&ctx.col_q, Direction::Upper, "Q", vq),
        lower: side(&ctx.col_p, Direction::Lower, "P", vp),
    })
}

/// Divergence applied to the loss pushforwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PushforwardDivergence {
    Tv,
    Kl,
    Chi2,
    W1,
}

impl PushforwardDivergence {
    pub const ALL: [PushforwardDivergence; 4] = [Self::Tv, Self::Kl, Self::Chi2, Self::W1];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Tv => "pushforward-tv",
            Self::Kl => "pushforward-kl",
            Self::Chi2 => "pushforward-chi2",
            Self::W1 => "pushforward-w1",
        }
    }
}

fn pushforward_side<T: Real>(
    pf: &PushforwardPair<T>,
    which: PushforwardDivergence,
    dir: Direction,
    tag: &str,
) -> Result<BoundReport<T>> {
    let all = vec![true; pf.values.len()];
    let qmass: Vec<bool> = pf.q.probs().iter().map(|v| *v > T::zero()).collect();
    let base = |cite: String| {
        BoundReport::new(which.name(), Family::Pushforward, dir, cite)
            .condition(format!("divergence between the laws of ℓ(Z,a_{tag}) under P and Q"))
    };
    Ok(match which {
        PushforwardDivergence::Tv => {
            let d = tv(&pf.p, &pf.q)?;
            let r = base(format!("(β_{tag} − α_{tag})·d_TV(P_ℓ,Q_ℓ)")).detail("tv", d);
            match range_on(&pf.values, &all) {
                Ok((lo, hi)) => r.with_value(scaled(hi - lo, d)),
                Err(e) => r.fail(e),
            }
        }
        PushforwardDivergence::Kl => {
            let d = kl(&pf.p, &pf.q)?;
            let r = base(format!("√(2σ_{tag}²·D(P_ℓ‖Q_ℓ)), σ² = (β − α)²/4 on supp Q_ℓ")).detail("kl", d);
            match range_on(&pf.values, &qmass) {
                Ok((lo, hi)) => {
                    let s2 = (hi - lo) * (hi - lo) / lit(4.0);
                    r.detail("sigma2", s2).with_value(subgaussian_value(s2, d))
                }
                Err(e) => r.fail(e),
            }
        }
        PushforwardDivergence::Chi2 => {
            let c = chi2(&pf.p, &pf.q)?;
            let v = variance_under(pf.q.probs(), &pf.values);
            let r = base(format!("√(Var_Q[ℓ(Z,a_{tag})]·χ²(P_ℓ‖Q_ℓ))"))
                .detail("chi2", c)
                .detail("variance", v);
            if v.is_finite() {
                r.with_value(scaled(v, c).sqrt())
            } else {
                r.fail("infinite variance")
            }
        }
        PushforwardDivergence::W1 => {
            let w = pf.w1();
            let r = base("W₁(P_ℓ, Q_ℓ) on the line, identity is 1-Lipschitz".into()).detail("w1", w);
            if w.is_finite() {
                r.with_value(w)
            } else {
                r.fail("infinite loss value charged")
            }
        }
    })
}

/// The TV/KL/χ²/W₁ bounds on the pushforwards of `P`, `Q` through
/// `ℓ(·, a_Q)` (upper side) and `ℓ(·, a_P)` (lower side).
pub fn pushforward_bounds<T: Real>(ctx: &PairContext<T>, which: PushforwardDivergence) -> Result<BoundPair<T>> {
    let pf_q = pushforward_pair(&ctx.p, &ctx.q, &ctx.spec, &ctx.hq.optimal_action)?;
    let pf_p = pushforward_pair(&ctx.p, &ctx.q, &ctx.spec, &ctx.hp.optimal_action)?;
    Ok(BoundPair {
        upper: pushforward_side(&pf_q, which, Direction::Upper, "Q")?,
        lower: pushforward_side(&pf_p, which, Direction::Lower, "P")?,
    })
}

fn is_metric_loss<T: Real>(ctx: &PairContext<T>, metric: &Metric<T>) -> bool {
    ctx.spec.table.as_ref().is_some_and(|t| {
        t.outcomes() == metric.labels() && t.actions() == metric.labels() && t.values() == metric.matrix()
    })
}

/// `ρ_Q·W_d(P,Q)` and `ρ_P·W_d(P,Q)` with per-action Lipschitz constants on
/// the charged points.
pub fn wasserstein_lipschitz_bound<T: Real>(ctx: &PairContext<T>, metric: &Metric<T>) -> Result<BoundPair<T>> {
    let p = ctx.p.pad_to(metric.labels())?;
    let q = ctx.q.pad_to(metric.labels())?;
    let w = wasserstein1_discrete(&p, &q, metric)?.cost;
    let mass: Vec<bool> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| *a > T::zero() || *b > T::zero())
        .collect();
    let idx: Vec<usize> = (0..mass.len()).filter(|i| mass[*i]).collect();
    let sub: Vec<Vec<T>> = idx
        .iter()
        .map(|i| idx.iter().map(|j| metric.matrix()[*i][*j]).collect())
        .collect();
    let metric_loss = is_metric_loss(ctx, metric);
    let side = |a: &Action<T>, dir: Direction, tag: &str| -> Result<BoundReport<T>> {
        let col = column_masked(&ctx.spec, metric.labels(), &mass, a)?;
        let c: Vec<T> = idx.iter().map(|i| col[*i]).collect();
        let exact = lipschitz_constant(&c, &sub);
        let mut r = BoundReport::new(
            "wasserstein-lipschitz",
            Family::Wasserstein,
            dir,
            format!("ρ_{tag}·W_d(P,Q)"),
        )
        .condition(format!("ℓ(·,a_{tag}) is ρ_{tag}-Lipschitz w.r.t. d on the charged points"))
        .detail("w1", w)
        .detail("rho_exact", exact);
        if metric_loss {
            r = r.condition("metric loss ℓ = d: ρ ≤ 1 by the triangle inequality");
        }
        let rho = match ctx.spec.lipschitz {
            Some(declared) => match check_lipschitz(&c, &sub, declared) {
                Ok(()) => declared,
                Err(e) => return Ok(r.fail(e.to_string())),
            },
            None => exact,
        };
        if !rho.is_finite() {
            return Ok(r.fail("no finite Lipschitz constant"));
        }
        Ok(r.detail("rho", rho).with_value(scaled(rho, w)))
    };
    Ok(BoundPair {
        upper: side(&ctx.hq.optimal_action, Direction::Upper, "Q")?,
        lower: side(&ctx.hp.optimal_action, Direction::Lower, "P")?,
    })
}

/// `|H(P) − H(Q)| ≤ d_{A,ℓ}(P,Q)`.
pub fn semidistance_bound<T: Real>(ctx: &PairContext<T>) -> Result<BoundReport<T>> {
    let d = semidistance_al(&ctx.p, &ctx.q, &ctx.spec)?;
    Ok(BoundReport::new(
        "semidistance",
        Family::Semidistance,
        Direction::Abs,
        "d_{A,ℓ}(P,Q) = sup_a |E_P ℓ(Z,a) − E_Q ℓ(Z,a)|",
    )
    .condition(format!("{} loss", ctx.spec.kind))
    .with_value(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::renyi_entropy;
    use crate::loss::{LossSpec, LossTable};

    fn d(p: &[f64]) -> DiscreteDist<f64> {
        DiscreteDist::indexed(p.to_vec()).unwrap()
    }

    fn on01(p: &[f64]) -> DiscreteDist<f64> {
        DiscreteDist::on_reals(&[0.0, 1.0], p.to_vec()).unwrap()
    }

    #[test]
    fn tv_zero_one_tight() {
        let ctx = PairContext::new(&d(&[0.5, 0.5]), &d(&[0.6, 0.4]), &LossSpec::zero_one()).unwrap();
        let b = tv_bound(&ctx);
        assert!((b.upper.value.unwrap() - 0.1).abs() < 1e-12);
        assert!((ctx.diff().abs() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn tv_equal_is_zero() {
        let ctx = PairContext::new(&d(&[0.3, 0.7]), &d(&[0.3, 0.7]), &LossSpec::log()).unwrap();
        let b = tv_bound(&ctx);
        assert_eq!(b.upper.value, Some(0.0));
        assert_eq!(b.lower.value, Some(0.0));
    }

    #[test]
    fn log_ratio_example() {
        let ctx = PairContext::new(&d(&[0.2, 0.8]), &d(&[0.3, 0.7]), &LossSpec::log()).unwrap();
        let r = tv_log_ratio_bound(&ctx);
        assert!((r.value.unwrap() - 0.1 * 4f64.ln()).abs() < 1e-12);
        assert!((r.value.unwrap() - 0.1386).abs() < 1e-4);
    }

    #[test]
    fn unbounded_log_loss_tv_inapplicable() {
        let ctx = PairContext::new(&d(&[0.5, 0.5]), &d(&[1.0, 0.0]), &LossSpec::log()).unwrap();
        let b = tv_bound(&ctx);
        // −log Q is infinite where P charges Q's zero; −log P is bounded
        assert!(!b.upper.applicable && b.upper.value.is_none());
        assert!(b.lower.applicable);
    }

    #[test]
    fn kl_bounded_example() {
        let ctx = PairContext::new(&d(&[0.5, 0.5]), &d(&[0.25, 0.75]), &LossSpec::zero_one()).unwrap();
        let b = kl_subgaussian_bound(&ctx, None).unwrap();
        let v = b.upper.value.unwrap();
        assert!((b.upper.details["kl"] - 0.1438).abs() < 1e-4);
        assert!((v - 0.2681).abs() < 1e-4);
        assert!(v >= ctx.diff().abs());
        assert!((b.lower.value.unwrap() - v).abs() < 1e-15);
    }

    #[test]
    fn supplied_sigma_checked() {
        let ctx = PairContext::new(&d(&[0.5, 0.5]), &d(&[0.25, 0.75]), &LossSpec::zero_one()).unwrap();
        let ok = kl_subgaussian_bound(&ctx, Some((0.25, 0.25))).unwrap();
        assert!(ok.upper.applicable && ok.lower.applicable);
        let bad = kl_subgaussian_bound(&ctx, Some((1e-3, 1e-3))).unwrap();
        assert!(!bad.upper.applicable);
        assert!(bad.upper.details.contains_key("violating_lambda"));
    }

    #[test]
    fn general_matches_subgaussian() {
        let ctx = PairContext::new(&d(&[0.5, 0.5]), &d(&[0.25, 0.75]), &LossSpec::zero_one()).unwrap();
        let env = CgfEnvelope::subgaussian(0.25).unwrap();
        let g = kl_general_bound(&ctx, &env, &env).unwrap();
        let s = kl_subgaussian_bound(&ctx, None).unwrap();
        assert!((g.upper.value.unwrap() - s.upper.value.unwrap()).abs() < 1e-8);
    }

    #[test]
    fn gaussian_variance_examples() {
        let q = GaussianScalar::<f64>::new(0.0, 1.0).unwrap();
        let r = gaussian_variance_kl_bound(&ScalarModel::Gaussian(GaussianScalar::new(0.5, 1.0).unwrap()), &q).unwrap();
        assert!((r.value.unwrap() - 0.9571).abs() < 1e-4);
        let r = gaussian_variance_kl_bound(&ScalarModel::Gaussian(GaussianScalar::new(0.0, 2.0).unwrap()), &q).unwrap();
        assert!((r.details["kl"] - 0.1534).abs() < 1e-4);
        assert!((r.value.unwrap() - 1.090).abs() < 1e-3);
        let r = gaussian_variance_kl_bound(&ScalarModel::Gaussian(q), &q).unwrap();
        assert_eq!(r.value, Some(0.0));
        let m = GaussianMixture::single(GaussianScalar::new(0.0, 2.0).unwrap());
        let r = gaussian_variance_kl_bound(&ScalarModel::Mixture(m), &q).unwrap();
        assert!((r.details["kl"] - 0.1534264097).abs() < 1e-8);
    }

    #[test]
    fn renyi_identities_and_examples() {
        let q = d(&[0.7, 0.3]);
        let fq = [-(0.7f64.ln()), -(0.3f64.ln())];
        for l in [0.01, 0.5, 3.0] {
            let gap = renyi_entropy(&q, 1.0 - l).unwrap() - renyi_entropy(&q, 1.0).unwrap();
            assert!((gap - centered_cgf(q.probs(), &fq, l) / l).abs() < 1e-10);
        }
        let u = renyi_condition_bound(&d(&[0.6, 0.4]), &d(&[0.5, 0.5])).unwrap();
        assert_eq!(u.upper.value, Some(0.0));
        let b = renyi_condition_bound(&d(&[0.6, 0.4]), &q).unwrap();
        let ctx = PairContext::new(&d(&[0.6, 0.4]), &q, &LossSpec::log()).unwrap();
        assert!(b.upper.value.unwrap() >= ctx.diff());
        assert!(b.lower.value.unwrap() >= -ctx.diff());
        let same = renyi_condition_bound(&q, &q).unwrap();
        assert_eq!(same.upper.value, Some(0.0));
    }

    #[test]
    fn chi2_quadratic_constant_pushforward() {
        let ctx = PairContext::new(&on01(&[0.25, 0.75]), &on01(&[0.5, 0.5]), &LossSpec::quadratic()).unwrap();
        let b = chi2_bound(&ctx).unwrap();
        assert_eq!(b.upper.value, Some(0.0));
        assert!((ctx.diff() - (0.1875 - 0.25)).abs() < 1e-15);
    }

    #[test]
    fn pushforward_zero_one_two_point() {
        let p = d(&[0.5, 0.3, 0.2]);
        let q = d(&[0.4, 0.4, 0.2]);
        let ctx = PairContext::new(&p, &q, &LossSpec::zero_one()).unwrap();
        let b = pushforward_bounds(&ctx, PushforwardDivergence::Tv).unwrap();
        // a_Q = outcome 0; the pushforward is the hit / miss indicator
        assert!((b.upper.details["tv"] - 0.1).abs() < 1e-12);
        assert!(b.upper.details["tv"] <= tv(&p, &q).unwrap() + 1e-15);
    }

    #[test]
    fn pushforward_constant_column() {
        let t = LossTable::indexed(vec![vec![0.3], vec![0.3], vec![0.3]]).unwrap();
        let ctx = PairContext::new(&d(&[0.1, 0.2, 0.7]), &d(&[0.5, 0.25, 0.25]), &LossSpec::table(t)).unwrap();
        for w in PushforwardDivergence::ALL {
            let b = pushforward_bounds(&ctx, w).unwrap();
            assert_eq!(b.upper.value, Some(0.0), "{w:?}");
        }
    }

    #[test]
    fn wasserstein_zero_one_is_tv() {
        let p = d(&[0.5, 0.3, 0.2]);
        let q = d(&[0.2, 0.3, 0.5]);
        let m = Metric::zero_one(p.outcomes().to_vec()).unwrap();
        let spec = LossSpec::from_metric(&m).unwrap();
        let ctx = PairContext::new(&p, &q, &spec).unwrap();
        let b = wasserstein_lipschitz_bound(&ctx, &m).unwrap();
        assert!((b.upper.value.unwrap() - 0.3).abs() < 1e-12);
        assert!((b.lower.value.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn wasserstein_absolute_line() {
        let vals = [0.0, 1.0, 2.0];
        let p = DiscreteDist::<f64>::on_reals(&vals, vec![0.6, 0.1, 0.3]).unwrap();
        let q = DiscreteDist::on_reals(&vals, vec![0.2, 0.5, 0.3]).unwrap();
        let m = Metric::line(&vals).unwrap();
        let ctx = PairContext::new(&p, &q, &LossSpec::absolute()).unwrap();
        let b = wasserstein_lipschitz_bound(&ctx, &m).unwrap();
        assert!(b.upper.details["rho"] <= 1.0 + 1e-12);
        assert!(b.upper.value.unwrap() >= ctx.diff().abs() - 1e-12);
    }

    #[test]
    fn declared_lipschitz_violation() {
        let vals = [0.0, 1.0, 2.0];
        let p = DiscreteDist::on_reals(&vals, vec![0.6, 0.1, 0.3]).unwrap();
        let q = DiscreteDist::on_reals(&vals, vec![0.2, 0.5, 0.3]).unwrap();
        let m = Metric::line(&vals).unwrap();
        let spec = LossSpec::absolute().with_lipschitz(0.5).unwrap();
        let ctx = PairContext::new(&p, &q, &spec).unwrap();
        let b = wasserstein_lipschitz_bound(&ctx, &m).unwrap();
        assert!(!b.upper.applicable);
    }

    #[test]
    fn semidistance_single_action_tight() {
        let t = LossTable::indexed(vec![vec![0.1], vec![0.9], vec![0.4]]).unwrap();
        let p = d(&[0.2, 0.5, 0.3]);
        let q = d(&[0.6, 0.1, 0.3]);
        let ctx = PairContext::new(&p, &q, &LossSpec::table(t)).unwrap();
        let r = semidistance_bound(&ctx).unwrap();
        assert!((r.value.unwrap() - ctx.diff().abs()).abs() < 1e-15);
    }
}
