use crate::bounds::{tv_bound, BoundReport, Direction, Family, PairContext};
use crate::dist::{DiscreteDist, JointDiscrete};
use crate::divergence::{chi2, conditional_kl, kl, kl_joint, tv};
use crate::entropy::{conditional_entropy, default_action, BayesRule};
use crate::error::{Error, Result};
use crate::loss::{column_masked, Action, LossSpec};
use crate::quad::adaptive_simpson;
use crate::scalar::{lit, pairwise_sum, weighted, Real};

/// `ℓ(y, ψ(x))` on the `X × Y` grid; cells without mass under either joint
/// map to 0 when the loss is undefined there.
fn rule_grid<T: Real>(
    spec: &LossSpec<T>,
    y: &[String],
    mass: &[Vec<bool>],
    rule: &[Action<T>],
) -> Result<Vec<Vec<T>>> {
    rule.iter()
        .zip(mass)
        .map(|(a, m)| column_masked(spec, y, m, a))
        .collect()
}

fn grid_expect<T: Real>(j: &JointDiscrete<T>, f: &[Vec<T>]) -> T {
    let terms: Vec<T> = j
        .probs()
        .iter()
        .zip(f)
        .flat_map(|(r, c)| r.iter().zip(c).map(|(p, v)| weighted(*p, *v)))
        .collect();
    pairwise_sum(&terms)
}

fn grid_range<T: Real>(f: &[Vec<T>], mass: &[Vec<bool>]) -> Option<(T, T)> {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (r, m) in f.iter().zip(mass) {
        for (v, c) in r.iter().zip(m) {
            if *c {
                lo = lo.min(*v);
                hi = hi.max(*v);
            }
        }
    }
    if lo > hi {
        Some((T::zero(), T::zero()))
    } else if lo.is_finite() && hi.is_finite() {
        Some((lo, hi))
    } else {
        None
    }
}

/// Everything the conditional and mismatch evaluators share: both Bayes
/// rules completed to every `x`, and the loss grids under each.
struct CondContext<T: Real> {
    p: JointDiscrete<T>,
    q: JointDiscrete<T>,
    spec: LossSpec<T>,
    hp: T,
    hq: T,
    psi_p: Vec<Action<T>>,
    psi_q: Vec<Action<T>>,
    mass: Vec<Vec<bool>>,
    f_p: Vec<Vec<T>>,
    f_q: Vec<Vec<T>>,
    shared_marginal: bool,
}

fn complete<T: Real>(rule: BayesRule<T>, fallback: &Action<T>) -> Vec<Action<T>> {
    rule.actions
        .into_iter()
        .map(|a| a.unwrap_or_else(|| fallback.clone()))
        .collect()
}

impl<T: Real> CondContext<T> {
    fn new(p: &JointDiscrete<T>, q: &JointDiscrete<T>, spec: &LossSpec<T>) -> Result<Self> {
        if p.x_outcomes() != q.x_outcomes() || p.y_outcomes() != q.y_outcomes() {
            return Err(Error::SupportMismatch("joint distributions on different grids".into()));
        }
        let (hp, rp) = conditional_entropy(p, spec)?;
        let (hq, rq) = conditional_entropy(q, spec)?;
        // Where a marginal has no mass any action is Bayes; use one that is
        // finite wherever either joint charges a `y`.
        let fallback = default_action(spec, &p.marginal_y().mix(&q.marginal_y(), lit(0.5))?);
        let psi_p = complete(rp, &fallback);
        let psi_q = complete(rq, &fallback);
        let mass: Vec<Vec<bool>> = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| *x > T::zero() || *y > T::zero()).collect())
            .collect();
        let f_p = rule_grid(spec, p.y_outcomes(), &mass, &psi_p)?;
        let f_q = rule_grid(spec, p.y_outcomes(), &mass, &psi_q)?;
        let (px, qx) = (p.marginal_x(), q.marginal_x());
        let shared_marginal = px
            .probs()
            .iter()
            .zip(qx.probs())
            .all(|(a, b)| (*a - *b).abs() <= T::cmp_tol());
        Ok(Self {
            p: p.clone(),
            q: q.clone(),
            spec: spec.clone(),
            hp,
            hq,
            psi_p,
            psi_q,
            mass,
            f_p,
            f_q,
            shared_marginal,
        })
    }

    /// `(E_P ℓ(Y,ψ_Q) − E_Q ℓ(Y,ψ_Q), E_Q ℓ(Y,ψ_P) − E_P ℓ(Y,ψ_P))`.
    fn lemma_terms(&self) -> (T, T) {
        let u = grid_expect(&self.p, &self.f_q) - grid_expect(&self.q, &self.f_q);
        let l = grid_expect(&self.q, &self.f_p) - grid_expect(&self.p, &self.f_p);
        (u, l)
    }

    /// Per-`x` pairs `(P_X(x), P_{Y|X=x}, Q_{Y|X=x})` over charged `x`;
    /// `Err` names the first `x` where `Q_{Y|X=x}` is undefined.
    #[allow(clippy::type_complexity)]
    fn rows(&self) -> std::result::Result<Vec<(usize, T, DiscreteDist<T>, DiscreteDist<T>)>, String> {
        let px = self.p.marginal_x();
        let mut out = Vec::new();
        for i in 0..self.p.nx() {
            let w = px.probs()[i];
            if w == T::zero() {
                continue;
            }
            let pr = self.p.conditional(i).expect("charged row");
            let qr = self
                .q
                .conditional(i)
                .map_err(|_| format!("Q_{{Y|X={}}} undefined", self.p.x_outcomes()[i]))?;
            out.push((i, w, pr, qr));
        }
        Ok(out)
    }

    /// The lemma terms against `P_X ⊗ Q_{Y|X}`.
    fn per_x_terms(&self) -> std::result::Result<(T, T), String> {
        let rows = self.rows()?;
        let mut us = Vec::with_capacity(rows.len());
        let mut ls = Vec::with_capacity(rows.len());
        for (i, w, pr, qr) in &rows {
            let m: Vec<bool> = pr
                .probs()
                .iter()
                .zip(qr.probs())
                .map(|(a, b)| *a > T::zero() || *b > T::zero())
                .collect();
            let cq = column_masked(&self.spec, pr.outcomes(), &m, &self.psi_q[*i]).map_err(|e| e.to_string())?;
            let cp = column_masked(&self.spec, pr.outcomes(), &m, &self.psi_p[*i]).map_err(|e| e.to_string())?;
            us.push(weighted(*w, pr.expect(&cq) - qr.expect(&cq)));
            ls.push(weighted(*w, qr.expect(&cp) - pr.expect(&cp)));
        }
        Ok((pairwise_sum(&us), pairwise_sum(&ls)))
    }
}

fn half_kl_root<T: Real>(d: T) -> T {
    if d.is_infinite() {
        T::infinity()
    } else {
        (lit::<T>(0.5) * d).sqrt()
    }
}

fn times<T: Real>(w: T, d: T) -> T {
    if d.is_infinite() {
        T::infinity()
    } else {
        w * d
    }
}

/// Bounds on `H_ℓ(P_{Y|X}|P_X) − H_ℓ(Q_{Y|X}|Q_X)`.
///
/// Always reports the raw expectation differences and their total-variation
/// relaxation. The KL chain-rule form needs `ℓ ∈ [0,1]`. When the two joints
/// share `P_X`, the per-`x` total-variation and KL decompositions are added.
pub fn cond_entropy_diff_bounds<T: Real>(
    pj: &JointDiscrete<T>,
    qj: &JointDiscrete<T>,
    spec: &LossSpec<T>,
) -> Result<Vec<BoundReport<T>>> {
    let c = CondContext::new(pj, qj, spec)?;
    let mut out = Vec::new();
    let (u, l) = c.lemma_terms();
    out.push(
        BoundReport::new("cond-lemma", Family::Conditional, Direction::Upper, "E_P ℓ(Y,ψ_Q(X)) − E_Q ℓ(Y,ψ_Q(X))")
            .condition("ψ_Q Bayes under Q")
            .with_value(u),
    );
    out.push(
        BoundReport::new("cond-lemma", Family::Conditional, Direction::Lower, "E_Q ℓ(Y,ψ_P(X)) − E_P ℓ(Y,ψ_P(X))")
            .condition("ψ_P Bayes under P")
            .with_value(l),
    );
    let d = tv(&pj.flatten(), &qj.flatten())?;
    for (f, dir, tag) in [(&c.f_q, Direction::Upper, "Q"), (&c.f_p, Direction::Lower, "P")] {
        let r = BoundReport::new(
            "cond-tv",
            Family::Conditional,
            dir,
            format!("(β_{tag} − α_{tag})·d_TV(P_XY, Q_XY)"),
        )
        .condition(format!("ℓ(y, ψ_{tag}(x)) ∈ [α_{tag}, β_{tag}] on charged cells"))
        .detail("tv", d);
        out.push(match grid_range(f, &c.mass) {
            Some((lo, hi)) => r.detail("alpha", lo).detail("beta", hi).with_value(times(hi - lo, d)),
            None => r.fail("loss is unbounded on the charged cells"),
        });
    }
    let chain = BoundReport::new(
        "cond-kl-chain",
        Family::Conditional,
        Direction::Abs,
        "√(½(D(P_X‖Q_X) + D(P_{Y|X}‖Q_{Y|X}|P_X)))",
    )
    .condition("ℓ ∈ [0,1]");
    if spec.is_unit_bounded() {
        let dx = kl(&pj.marginal_x(), &qj.marginal_x())?;
        let dc = conditional_kl(pj, qj)?;
        let total = if dx.is_infinite() || dc.is_infinite() { T::infinity() } else { dx + dc };
        out.push(
            chain
                .detail("kl_x", dx)
                .detail("kl_conditional", dc)
                .detail("kl_joint", kl_joint(pj, qj)?)
                .with_value(half_kl_root(total)),
        );
    } else {
        out.push(chain.fail(format!("{} loss is not known to lie in [0,1]", spec.kind)));
    }
    if c.shared_marginal {
        out.extend(per_x_reports(&c)?);
    }
    Ok(out)
}

fn per_x_reports<T: Real>(c: &CondContext<T>) -> Result<Vec<BoundReport<T>>> {
    let mut up = Vec::new();
    let mut lo = Vec::new();
    let mut kls = Vec::new();
    let mut failed = None;
    let rows = c.rows().map_err(Error::NotApplicable)?;
    for (_, w, pr, qr) in &rows {
        let ctx = PairContext::new(pr, qr, &c.spec)?;
        let b = tv_bound(&ctx);
        match (b.upper.value, b.lower.value) {
            (Some(a), Some(z)) => {
                up.push(times(*w, a));
                lo.push(times(*w, z));
            }
            _ => failed = Some("per-x loss range unbounded"),
        }
        kls.push(times(*w, half_kl_root(kl(pr, qr)?)));
    }
    let mut out = Vec::new();
    for (vals, dir, tag) in [(&up, Direction::Upper, "Q"), (&lo, Direction::Lower, "P")] {
        let r = BoundReport::new(
            "cond-per-x-tv",
            Family::Conditional,
            dir,
            format!("Σ_x P_X(x)(β_{tag},x − α_{tag},x)·d_TV(P_x, Q_x)"),
        )
        .condition("P and Q share the marginal P_X");
        out.push(match failed {
            Some(why) => r.fail(why),
            None => r.with_value(pairwise_sum(vals)),
        });
    }
    let r = BoundReport::new(
        "cond-per-x-kl",
        Family::Conditional,
        Direction::Abs,
        "Σ_x P_X(x)·√(½D(P_x‖Q_x))",
    )
    .condition("P and Q share the marginal P_X")
    .condition("ℓ ∈ [0,1]");
    out.push(if c.spec.is_unit_bounded() {
        r.with_value(pairwise_sum(&kls))
    } else {
        r.fail(format!("{} loss is not known to lie in [0,1]", c.spec.kind))
    });
    Ok(out)
}

/// Excess risk of `ψ_Q` under `P` with its `2B_Q` and `2B_P` bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct MismatchResult<T: Real> {
    /// `E_P ℓ(Y, ψ_Q(X)) − H_ℓ(P_{Y|X}|P_X)`
    pub excess: T,
    /// `E_P ℓ(Y, ψ_Q(X))`
    pub risk: T,
    pub h_p: T,
    pub h_q: T,
    pub shared_marginal: bool,
    /// Quantity reports whose value is `2B`.
    pub reports: Vec<BoundReport<T>>,
}

impl<T: Real> MismatchResult<T> {
    /// Names of applicable reports that fall below the excess by more than `tol`.
    pub fn violations(&self, tol: T) -> Vec<String> {
        self.reports
            .iter()
            .filter(|r| r.covers(self.excess, tol) == Some(false))
            .map(|r| r.name.clone())
            .collect()
    }
}

/// Excess risk of the Bayes rule of `Q` used under `P`, bounded through the
/// `Q`-route (`B_Q` from the lemma terms, KL and TV) and the `P`-route
/// (`B_P` against `P_X ⊗ Q_{Y|X}`).
pub fn mismatch_excess<T: Real>(
    pj: &JointDiscrete<T>,
    qj: &JointDiscrete<T>,
    spec: &LossSpec<T>,
) -> Result<MismatchResult<T>> {
    let c = CondContext::new(pj, qj, spec)?;
    let two: T = lit(2.0);
    let risk = grid_expect(&c.p, &c.f_q);
    let excess = if risk.is_infinite() {
        T::infinity()
    } else {
        (risk - grid_expect(&c.p, &c.f_p)).max(T::zero())
    };
    let unit = spec.is_unit_bounded();
    let mut reports = Vec::new();

    let (u, l) = c.lemma_terms();
    reports.push(
        BoundReport::new("mismatch-bq-lemma", Family::Mismatch, Direction::Quantity, "2·max(U, L) with the lemma terms under Q")
            .detail("u", u)
            .detail("l", l)
            .with_value(two * u.max(l)),
    );
    let r = BoundReport::new("mismatch-bq-kl", Family::Mismatch, Direction::Quantity, "2√(½D(P_XY‖Q_XY))")
        .condition("ℓ ∈ [0,1]");
    reports.push(if unit {
        let d = kl_joint(pj, qj)?;
        r.detail("kl_joint", d).with_value(two * half_kl_root(d))
    } else {
        r.fail(format!("{} loss is not known to lie in [0,1]", spec.kind))
    });
    let d = tv(&pj.flatten(), &qj.flatten())?;
    let r = BoundReport::new(
        "mismatch-bq-tv",
        Family::Mismatch,
        Direction::Quantity,
        "2·max(β_Q − α_Q, β_P − α_P)·d_TV(P_XY, Q_XY)",
    )
    .detail("tv", d);
    reports.push(match (grid_range(&c.f_q, &c.mass), grid_range(&c.f_p, &c.mass)) {
        (Some((a, b)), Some((e, f))) => r.with_value(two * times((b - a).max(f - e), d)),
        _ => r.fail("loss is unbounded on the charged cells"),
    });

    let p_route = |name: &str, cite: &str| {
        BoundReport::new(name, Family::Mismatch, Direction::Quantity, cite)
            .condition("compares P with P_X ⊗ Q_{Y|X}")
    };
    match c.per_x_terms() {
        Ok((u2, l2)) => reports.push(
            p_route("mismatch-bp-lemma", "2·max(U′, L′) with the per-x lemma terms")
                .detail("u", u2)
                .detail("l", l2)
                .with_value(two * u2.max(l2)),
        ),
        Err(e) => reports.push(p_route("mismatch-bp-lemma", "2·max(U′, L′) with the per-x lemma terms").fail(e)),
    }
    let r = p_route("mismatch-bp-kl", "2√(½D(P_{Y|X}‖Q_{Y|X}|P_X))").condition("ℓ ∈ [0,1]");
    reports.push(if unit {
        let d = conditional_kl(pj, qj)?;
        r.detail("kl_conditional", d).with_value(two * half_kl_root(d))
    } else {
        r.fail(format!("{} loss is not known to lie in [0,1]", spec.kind))
    });
    let r = p_route(
        "mismatch-bp-tv",
        "2·max(Σ_x P_X(x)(β_Q,x − α_Q,x)d_TV(P_x,Q_x), Σ_x P_X(x)(β_P,x − α_P,x)d_TV(P_x,Q_x))",
    );
    reports.push(match c.rows() {
        Err(e) => r.fail(e),
        Ok(rows) => {
            let mut sq = Vec::new();
            let mut sp = Vec::new();
            let mut bad = false;
            for (_, w, pr, qr) in &rows {
                let ctx = PairContext::new(pr, qr, spec)?;
                let b = tv_bound(&ctx);
                match (b.upper.value, b.lower.value) {
                    (Some(a), Some(z)) => {
                        sq.push(times(*w, a));
                        sp.push(times(*w, z));
                    }
                    _ => bad = true,
                }
            }
            if bad {
                r.fail("per-x loss range unbounded")
            } else {
                r.with_value(two * pairwise_sum(&sq).max(pairwise_sum(&sp)))
            }
        }
    });
    Ok(MismatchResult {
        excess,
        risk,
        h_p: c.hp,
        h_q: c.hq,
        shared_marginal: c.shared_marginal,
        reports,
    })
}

/// Excess risk of the mismatched MMSE estimator for `X = αY + V`,
/// `V ~ N(0,1)`, and the two-term χ² bound on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MismatchedEstimator<T: Real> {
    /// `E_P (Y − ψ_Q(X))² − E_P (Y − ψ_P(X))²`
    pub excess: T,
    pub bound: T,
    /// `√(E_Q (Y − ψ_Q(X))⁴ · χ²(P_Y‖Q_Y))`
    pub term_q: T,
    /// `√(E_P (Y − ψ_P(X))⁴ · χ²(Q_Y‖P_Y))`
    pub term_p: T,
    pub chi2_pq: T,
    pub chi2_qp: T,
    pub fourth_q: T,
    pub fourth_p: T,
}

/// Integration half-width beyond the outermost `αy` in noise standard deviations.
pub const ESTIMATOR_HALF_WIDTH: f64 = 8.0;
/// Absolute tolerance handed to the adaptive quadrature.
pub const ESTIMATOR_QUAD_TOL: f64 = 1e-10;

struct Posterior<T: Real> {
    ys: Vec<T>,
    w: Vec<T>,
    alpha: T,
}

impl<T: Real> Posterior<T> {
    fn new(ys: &[T], w: &[T], alpha: T) -> Self {
        let (ys, w) = ys
            .iter()
            .zip(w)
            .filter(|(_, p)| **p > T::zero())
            .map(|(y, p)| (*y, *p))
            .unzip();
        Self { ys, w, alpha }
    }

    fn log_terms(&self, x: T) -> Vec<T> {
        let half: T = lit(0.5);
        self.ys
            .iter()
            .zip(&self.w)
            .map(|(y, p)| {
                let r = x - self.alpha * *y;
                p.ln() - half * r * r
            })
            .collect()
    }

    /// `E[Y | X = x]`.
    fn mean(&self, x: T) -> T {
        let lt = self.log_terms(x);
        let m = lt.iter().copied().fold(T::neg_infinity(), T::max);
        let mut num = T::zero();
        let mut den = T::zero();
        for (l, y) in lt.iter().zip(&self.ys) {
            let e = (*l - m).exp();
            num = num + e * *y;
            den = den + e;
        }
        num / den
    }

    /// Density of `X`.
    fn density(&self, x: T) -> T {
        let c = (lit::<T>(2.0) * T::PI()).sqrt();
        self.log_terms(x).iter().map(|l| l.exp()).fold(T::zero(), |s, v| s + v) / c
    }

    /// `∫ Σ_y w_y φ(x − αy)(y − est(x))⁴ dx` integrand at `x`.
    fn fourth<F: Fn(T) -> T>(&self, x: T, est: &F) -> T {
        let c = (lit::<T>(2.0) * T::PI()).sqrt();
        let e = est(x);
        self.log_terms(x)
            .iter()
            .zip(&self.ys)
            .map(|(l, y)| {
                let d = *y - e;
                l.exp() * d * d * d * d
            })
            .fold(T::zero(), |s, v| s + v)
            / c
    }
}

/// Excess risk of the mismatched estimator and the χ² corollary bound, by
/// adaptive quadrature over `x`.
pub fn mismatched_estimator_bound<T: Real>(
    p_y: &DiscreteDist<T>,
    q_y: &DiscreteDist<T>,
    alpha: T,
) -> Result<MismatchedEstimator<T>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("α must be finite".into()));
    }
    let (p, q) = p_y.align(q_y)?;
    let ys = p.values()?;
    let pp = Posterior::new(&ys, p.probs(), alpha);
    let pq = Posterior::new(&ys, q.probs(), alpha);
    let shifts: Vec<T> = ys.iter().map(|y| alpha * *y).collect();
    let hw: T = lit(ESTIMATOR_HALF_WIDTH);
    let lo = shifts.iter().copied().fold(T::infinity(), T::min) - hw;
    let hi = shifts.iter().copied().fold(T::neg_infinity(), T::max) + hw;
    let tol: T = lit(ESTIMATOR_QUAD_TOL);
    let depth = 40;
    let excess = adaptive_simpson(
        &|x: T| {
            let d = pq.mean(x) - pp.mean(x);
            pp.density(x) * d * d
        },
        lo,
        hi,
        tol,
        depth,
    )?;
    let fourth_q = adaptive_simpson(&|x: T| pq.fourth(x, &|t| pq.mean(t)), lo, hi, tol, depth)?;
    let fourth_p = adaptive_simpson(&|x: T| pp.fourth(x, &|t| pp.mean(t)), lo, hi, tol, depth)?;
    let chi2_pq = chi2(&p, &q)?;
    let chi2_qp = chi2(&q, &p)?;
    let term = |m: T, c: T| if c.is_infinite() { T::infinity() } else { (m * c).sqrt() };
    let term_q = term(fourth_q, chi2_pq);
    let term_p = term(fourth_p, chi2_qp);
    Ok(MismatchedEstimator {
        excess,
        bound: term_q + term_p,
        term_q,
        term_p,
        chi2_pq,
        chi2_qp,
        fourth_q,
        fourth_p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{action_risks, rule_risk};
    use crate::loss::LossTable;

    fn table() -> LossSpec<f64> {
        LossSpec::table(LossTable::indexed(vec![vec![0.0, 1.0, 0.4], vec![1.0, 0.0, 0.5], vec![0.7, 0.6, 0.2]]).unwrap())
    }

    fn j(rows: Vec<Vec<f64>>) -> JointDiscrete<f64> {
        JointDiscrete::indexed(rows).unwrap()
    }

    #[test]
    fn equal_joints_all_zero() {
        let p = j(vec![vec![0.1, 0.2, 0.1], vec![0.05, 0.05, 0.2], vec![0.1, 0.1, 0.1]]);
        for r in cond_entropy_diff_bounds(&p, &p, &table()).unwrap() {
            assert_eq!(r.value, Some(0.0), "{} {:?}", r.name, r.details);
        }
        let m = mismatch_excess(&p, &p, &table()).unwrap();
        assert_eq!(m.excess, 0.0);
        assert!(m.reports.iter().all(|r| r.value == Some(0.0)));
    }

    #[test]
    fn shared_marginal_per_x_structure() {
        let p = j(vec![vec![0.1, 0.2, 0.1], vec![0.3, 0.0, 0.0], vec![0.1, 0.1, 0.1]]);
        let q = j(vec![vec![0.2, 0.1, 0.1], vec![0.1, 0.1, 0.1], vec![0.0, 0.1, 0.2]]);
        let b = cond_entropy_diff_bounds(&p, &q, &table()).unwrap();
        let per_x = b.iter().find(|r| r.name == "cond-per-x-tv" && r.direction == Direction::Upper).unwrap();
        let px = p.marginal_x();
        let mut want = 0.0;
        for i in 0..3 {
            let ctx = PairContext::new(&p.conditional(i).unwrap(), &q.conditional(i).unwrap(), &table()).unwrap();
            want += px.probs()[i] * tv_bound(&ctx).upper.value.unwrap();
        }
        assert!((per_x.value.unwrap() - want).abs() < 1e-15);
        let (hp, _) = conditional_entropy(&p, &table()).unwrap();
        let (hq, _) = conditional_entropy(&q, &table()).unwrap();
        for r in &b {
            assert!(r.covers(hp - hq, 1e-12).unwrap(), "{}", r.name);
        }
    }

    #[test]
    fn no_per_x_without_shared_marginal() {
        let p = j(vec![vec![0.2, 0.2], vec![0.3, 0.3]]);
        let q = j(vec![vec![0.1, 0.2], vec![0.5, 0.2]]);
        let b = cond_entropy_diff_bounds(&p, &q, &LossSpec::zero_one()).unwrap();
        assert!(b.iter().all(|r| !r.name.starts_with("cond-per-x")));
    }

    #[test]
    fn flipped_map_rule_matches_brute_force() {
        // Q's conditionals put the mode of P on the other label.
        let p = j(vec![vec![0.3, 0.1], vec![0.15, 0.25], vec![0.05, 0.15]]);
        let q = j(vec![vec![0.1, 0.3], vec![0.25, 0.15], vec![0.15, 0.05]]);
        let spec = LossSpec::zero_one();
        let m = mismatch_excess(&p, &q, &spec).unwrap();
        // exhaustive search over all 2^3 rules
        let y = p.marginal_y();
        let acts = spec.finite_actions(y.outcomes()).unwrap();
        let mut best = f64::INFINITY;
        for code in 0..8usize {
            let rule = BayesRule {
                actions: (0..3).map(|i| Some(acts[(code >> i) & 1].clone())).collect(),
            };
            best = best.min(rule_risk(&p, &spec, &rule).unwrap());
        }
        let (_, rq) = conditional_entropy(&q, &spec).unwrap();
        let gap = rule_risk(&p, &spec, &rq).unwrap() - best;
        assert!((m.excess - gap).abs() < 1e-12);
        assert!((m.excess - 0.4).abs() < 1e-12);
        assert!(m.violations(1e-12).is_empty(), "{:?}", m.violations(1e-12));
        let _ = action_risks(&y, &spec, &acts).unwrap();
    }

    #[test]
    fn undefined_q_row_disables_p_route() {
        let p = j(vec![vec![0.3, 0.2], vec![0.25, 0.25]]);
        let q = j(vec![vec![0.6, 0.4], vec![0.0, 0.0]]);
        let m = mismatch_excess(&p, &q, &LossSpec::zero_one()).unwrap();
        let bp = m.reports.iter().find(|r| r.name == "mismatch-bp-lemma").unwrap();
        assert!(!bp.applicable);
        assert!(m.violations(1e-12).is_empty());
    }

    fn line(v: &[f64], p: &[f64]) -> DiscreteDist<f64> {
        DiscreteDist::on_reals(v, p.to_vec()).unwrap()
    }

    #[test]
    fn estimator_equal_priors() {
        let p = line(&[-1.0, 1.0], &[0.5, 0.5]);
        let e = mismatched_estimator_bound(&p, &p, 1.0).unwrap();
        assert!(e.excess.abs() < 1e-14);
        assert_eq!(e.bound, 0.0);
    }

    #[test]
    fn estimator_uninformative_observation() {
        let p = line(&[-1.0, 2.0], &[0.5, 0.5]);
        let q = line(&[-1.0, 2.0], &[0.3, 0.7]);
        let e = mismatched_estimator_bound(&p, &q, 0.0).unwrap();
        let want = (q.mean().unwrap() - p.mean().unwrap()).powi(2);
        assert!((e.excess - want).abs() < 1e-9);
        assert!(e.excess <= e.bound);
    }

    #[test]
    fn estimator_two_point_example() {
        let p = line(&[-1.0, 1.0], &[0.5, 0.5]);
        let q = line(&[-1.0, 1.0], &[0.4, 0.6]);
        let e = mismatched_estimator_bound(&p, &q, 1.0).unwrap();
        assert!(e.excess > 0.0);
        assert!(e.excess <= e.bound);
    }

    #[test]
    fn estimator_infinite_chi2() {
        let p = line(&[-1.0, 0.0, 1.0], &[0.3, 0.3, 0.4]);
        let q = line(&[-1.0, 1.0], &[0.5, 0.5]);
        let e = mismatched_estimator_bound(&p, &q, 1.0).unwrap();
        assert!(e.bound.is_infinite());
        assert!(e.excess.is_finite());
    }
}
