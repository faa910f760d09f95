use crate::bounds::report::{BoundReport, Direction, Family};
use crate::dist::JointDiscrete;
use crate::divergence::{lautum_information, mutual_information, tv};
use crate::error::Result;
use crate::scalar::{lit, pairwise_sum, Real};

/// The three log-ratio bounds on `I(X;Z)`, with `γ(x)` the log ratio of the
/// largest to the smallest entry of `P_{Z|X=x}`.
pub fn mi_upper_bounds<T: Real>(j: &JointDiscrete<T>) -> Result<Vec<BoundReport<T>>> {
    let (px, pz, rows) = j.marginals();
    let mi = mutual_information(j);
    let lautum = lautum_information(j);
    let mut gammas = Vec::with_capacity(j.nx());
    let mut zero_at = None;
    for (i, r) in rows.iter().enumerate() {
        if let Some(r) = r {
            let ratio = r.ratio_max_min();
            if !ratio.is_finite() && zero_at.is_none() {
                let k = r.probs().iter().position(|v| *v == T::zero()).unwrap_or(0);
                zero_at = Some(format!("P(Z = {} | X = {}) = 0", r.outcomes()[k], j.x_outcomes()[i]));
            }
            gammas.push((i, ratio.ln()));
        }
    }
    let reports = [
        (
            "mi-lautum",
            "√(½E[γ²(X)]·L(X;Z)), L the Lautum information",
        ),
        ("mi-gamma", "½E[γ²(X)]"),
        (
            "mi-tv-information",
            "sup_x γ(x) · Σ_x P_X(x)·d_TV(P_{Z|X=x}, P_Z)",
        ),
    ];
    let mut out: Vec<BoundReport<T>> = reports
        .iter()
        .map(|(n, c)| {
            BoundReport::new(*n, Family::Mi, Direction::Quantity, *c)
                .condition("P_{Z|X=x}(z) > 0 for every charged x and every z")
                .detail("mi", mi)
        })
        .collect();
    if let Some(loc) = zero_at {
        return Ok(out.into_iter().map(|r| r.fail(loc.clone())).collect());
    }
    let half: T = lit(0.5);
    let eg2 = pairwise_sum(
        &gammas
            .iter()
            .map(|(i, g)| px.probs()[*i] * *g * *g)
            .collect::<Vec<T>>(),
    );
    let sup_g = gammas.iter().map(|(_, g)| *g).fold(T::zero(), T::max);
    let mut tvs = Vec::with_capacity(gammas.len());
    for (i, _) in &gammas {
        let r = rows[*i].as_ref().expect("charged row");
        tvs.push(px.probs()[*i] * tv(r, &pz)?);
    }
    let tv_info = pairwise_sum(&tvs);
    let vals = [(half * eg2 * lautum).sqrt(), half * eg2, sup_g * tv_info];
    for (r, v) in out.iter_mut().zip(vals) {
        *r = r.clone().detail("lautum", lautum).detail("e_gamma2", eg2).with_value(v);
    }
    out[2] = out[2].clone().detail("tv_information", tv_info).detail("sup_gamma", sup_g);
    Ok(out)
}
