//! Entropy-difference bounds, literature baselines and mutual-information
//! bounds. Every evaluator returns [`BoundReport`]s.

mod baseline;
mod continuity;
mod mi;
mod report;

pub use baseline::{
    baseline_bounds, baseline_bounds_gaussian, binary_entropy, coupling_bound, csiszar_korner_bound,
    BaselineExtras,
};
pub use continuity::{
    chi2_bound, gaussian_variance_bound_from_kl, gaussian_variance_kl_bound, kl_general_bound,
    kl_subgaussian_bound, pushforward_bounds, renyi_condition_bound, renyi_fit, semidistance_bound,
    tv_bound, tv_log_ratio_bound, wasserstein_lipschitz_bound, PushforwardDivergence, RenyiFit,
    ScalarModel, RENYI_GRID_LEN, RENYI_LAMBDA_MAX,
};
pub use mi::mi_upper_bounds;
pub use report::{BoundPair, BoundReport, Direction, Family};

use crate::dist::DiscreteDist;
use crate::entropy::{generalized_entropy, EntropyResult};
use crate::error::Result;
use crate::legendre::EnvelopeSpec;
use crate::loss::{column_masked, LossKind, LossSpec};
use crate::scalar::Real;
use crate::transport::Metric;

/// `P` and `Q` on their union support with everything the evaluators share.
#[derive(Debug, Clone)]
pub struct PairContext<T: Real> {
    pub p: DiscreteDist<T>,
    pub q: DiscreteDist<T>,
    pub spec: LossSpec<T>,
    pub hp: EntropyResult<T>,
    pub hq: EntropyResult<T>,
    /// Outcomes charged by `P` or `Q`.
    pub mass: Vec<bool>,
    /// `ℓ(·, a_P)` on the support.
    pub col_p: Vec<T>,
    /// `ℓ(·, a_Q)` on the support.
    pub col_q: Vec<T>,
}

impl<T: Real> PairContext<T> {
    pub fn new(p: &DiscreteDist<T>, q: &DiscreteDist<T>, spec: &LossSpec<T>) -> Result<Self> {
        let (p, q) = p.align(q)?;
        let hp = generalized_entropy(&p, spec)?;
        let hq = generalized_entropy(&q, spec)?;
        let mass: Vec<bool> = p
            .probs()
            .iter()
            .zip(q.probs())
            .map(|(a, b)| *a > T::zero() || *b > T::zero())
            .collect();
        let col_p = column_masked(spec, p.outcomes(), &mass, &hp.optimal_action)?;
        let col_q = column_masked(spec, p.outcomes(), &mass, &hq.optimal_action)?;
        Ok(Self {
            p,
            q,
            spec: spec.clone(),
            hp,
            hq,
            mass,
            col_p,
            col_q,
        })
    }

    /// `H(P) − H(Q)`.
    pub fn diff(&self) -> T {
        self.hp.value - self.hq.value
    }

    pub fn q_mass(&self) -> Vec<bool> {
        self.q.probs().iter().map(|v| *v > T::zero()).collect()
    }
}

/// Optional inputs for [`evaluate_all`].
#[derive(Debug, Clone)]
pub struct EvalOptions<T: Real> {
    pub metric: Option<Metric<T>>,
    pub envelopes: Option<(EnvelopeSpec, EnvelopeSpec)>,
    /// Caller-supplied subgaussian constants `(σ_Q², σ_P²)`.
    pub sigma2: Option<(T, T)>,
    pub baseline: BaselineExtras<T>,
    /// Restricts the output to these families; empty means all.
    pub families: Vec<Family>,
}

impl<T: Real> Default for EvalOptions<T> {
    fn default() -> Self {
        Self {
            metric: None,
            envelopes: None,
            sigma2: None,
            baseline: BaselineExtras::default(),
            families: Vec::new(),
        }
    }
}

impl<T: Real> EvalOptions<T> {
    fn wants(&self, f: Family) -> bool {
        self.families.is_empty() || self.families.contains(&f)
    }
}

/// Runs every evaluator that makes sense for the inputs.
pub fn evaluate_all<T: Real>(
    p: &DiscreteDist<T>,
    q: &DiscreteDist<T>,
    spec: &LossSpec<T>,
    opts: &EvalOptions<T>,
) -> Result<Vec<BoundReport<T>>> {
    let ctx = PairContext::new(p, q, spec)?;
    let mut out = Vec::new();
    if opts.wants(Family::Tv) {
        out.extend(tv_bound(&ctx).into_vec());
        if spec.kind == LossKind::Log {
            out.push(tv_log_ratio_bound(&ctx));
        }
    }
    if opts.wants(Family::Kl) {
        out.extend(kl_subgaussian_bound(&ctx, opts.sigma2)?.into_vec());
    }
    if opts.wants(Family::KlCgf) {
        if let Some((eq, ep)) = &opts.envelopes {
            out.extend(kl_general_bound(&ctx, &eq.build()?, &ep.build()?)?.into_vec());
        }
    }
    if opts.wants(Family::Renyi) && spec.kind == LossKind::Log {
        out.extend(renyi_condition_bound(&ctx.p, &ctx.q)?.into_vec());
    }
    if opts.wants(Family::Chi2) {
        out.extend(chi2_bound(&ctx)?.into_vec());
    }
    if opts.wants(Family::Pushforward) {
        for d in PushforwardDivergence::ALL {
            out.extend(pushforward_bounds(&ctx, d)?.into_vec());
        }
    }
    if opts.wants(Family::Wasserstein) {
        if let Some(m) = &opts.metric {
            out.extend(wasserstein_lipschitz_bound(&ctx, m)?.into_vec());
        }
    }
    if opts.wants(Family::Semidistance) {
        out.push(semidistance_bound(&ctx)?);
    }
    if opts.wants(Family::Baseline) {
        out.extend(baseline_bounds(&ctx, &opts.baseline)?);
    }
    Ok(out)
}
