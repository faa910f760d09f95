//! Generalized entropy `H_ℓ(P) = inf_a E_P ℓ(Z, a)`, its conditional form and
//! Bayes decision rules.

use crate::dist::{DiscreteDist, GaussianScalar, JointDiscrete};
use crate::error::{Error, Result};
use crate::loss::{column, column_masked, Action, LossKind, LossSpec};
use crate::scalar::{lit, pairwise_sum, weighted, Real};

/// `H_ℓ(P)` together with the minimizing action.
///
/// `achieved` is true when the minimizer comes from a closed form or an
/// exhaustive scan of a finite action set. No general certificate of
/// attainment exists, so any other route would report `false`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyResult<T: Real> {
    pub value: T,
    pub optimal_action: Action<T>,
    pub achieved: bool,
}

/// Per-`x` optimal actions; `None` where `P_X(x) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesRule<T: Real> {
    pub actions: Vec<Option<Action<T>>>,
}

impl<T: Real> BayesRule<T> {
    /// Action at `x_i`, falling back to `default` where the rule is undefined.
    pub fn at<'a>(&'a self, i: usize, default: &'a Action<T>) -> &'a Action<T> {
        self.actions[i].as_ref().unwrap_or(default)
    }
}

/// Lowest index among the maxima.
pub fn argmax_tiebreak<T: Real>(values: &[T]) -> Result<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, v) in values.iter().enumerate() {
        match best {
            Some((_, b)) if !(*v > b) => {}
            _ => best = Some((i, *v)),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::Empty)
}

/// Lowest index among the minima.
pub fn argmin_tiebreak<T: Real>(values: &[T]) -> Result<usize> {
    let neg: Vec<T> = values.iter().map(|v| -*v).collect();
    argmax_tiebreak(&neg)
}

/// `E_P ℓ(Z, a)`; zero-mass outcomes contribute nothing even at infinite loss.
pub fn expected_loss<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>, a: &Action<T>) -> Result<T> {
    let mass: Vec<bool> = p.probs().iter().map(|v| *v > T::zero()).collect();
    let col = column_masked(spec, p.outcomes(), &mass, a)?;
    Ok(p.expect(&col))
}

fn shannon<T: Real>(p: &[T]) -> T {
    let terms: Vec<T> = p
        .iter()
        .map(|v| if *v > T::zero() { -*v * v.ln() } else { T::zero() })
        .collect();
    pairwise_sum(&terms)
}

/// Lower median of a distribution on the line.
pub fn lower_median<T: Real>(p: &DiscreteDist<T>) -> Result<T> {
    let v = p.values()?;
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|a, b| v[*a].partial_cmp(&v[*b]).unwrap_or(std::cmp::Ordering::Equal));
    let half = lit::<T>(0.5) - T::cmp_tol();
    let mut acc = T::zero();
    for i in &order {
        acc = acc + p.probs()[*i];
        if p.probs()[*i] > T::zero() && acc >= half {
            return Ok(v[*i]);
        }
    }
    Ok(v[*order.last().ok_or(Error::Empty)?])
}

/// Generalized entropy of a finite distribution.
pub fn generalized_entropy<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>) -> Result<EntropyResult<T>> {
    spec.validate()?;
    let (value, optimal_action) = match spec.kind {
        LossKind::Log => (shannon(p.probs()), Action::Dist(p.clone())),
        LossKind::Quadratic => (p.variance()?, Action::Real(p.mean()?)),
        LossKind::ZeroOne => {
            let i = argmax_tiebreak(p.probs())?;
            (T::one() - p.probs()[i], Action::Outcome(p.outcomes()[i].clone()))
        }
        LossKind::Absolute => {
            let m = lower_median(p)?;
            let v = p.values()?;
            let dev: Vec<T> = v.iter().map(|x| (*x - m).abs()).collect();
            (p.expect(&dev), Action::Real(m))
        }
        LossKind::Table => {
            let t = spec.table.as_ref().expect("validated");
            let risks = (0..t.n_actions())
                .map(|j| expected_loss(p, spec, &Action::Column(j)))
                .collect::<Result<Vec<T>>>()?;
            let j = argmin_tiebreak(&risks)?;
            (risks[j], Action::Column(j))
        }
    };
    Ok(EntropyResult {
        value,
        optimal_action,
        achieved: true,
    })
}

/// Generalized entropy of a scalar Gaussian under the canonical real losses.
pub fn generalized_entropy_gaussian<T: Real>(
    g: &GaussianScalar<T>,
    spec: &LossSpec<T>,
) -> Result<EntropyResult<T>> {
    let two: T = lit(2.0);
    let (value, optimal_action) = match spec.kind {
        LossKind::Log => (
            lit::<T>(0.5) * (two * T::PI() * T::E() * g.variance()).ln(),
            Action::Gaussian(*g),
        ),
        LossKind::Quadratic => (g.variance(), Action::Real(g.mean())),
        LossKind::Absolute => (g.std_dev() * (two / T::PI()).sqrt(), Action::Real(g.mean())),
        k => {
            return Err(Error::NotApplicable(format!(
                "{k} loss on a continuous distribution"
            )))
        }
    };
    Ok(EntropyResult {
        value,
        optimal_action,
        achieved: true,
    })
}

/// `Σ_x P_X(x) H_ℓ(P_{Y|X=x})` and the per-`x` optimal actions.
pub fn conditional_entropy<T: Real>(
    j: &JointDiscrete<T>,
    spec: &LossSpec<T>,
) -> Result<(T, BayesRule<T>)> {
    let px = j.marginal_x();
    let mut terms = Vec::with_capacity(j.nx());
    let mut actions = Vec::with_capacity(j.nx());
    for (i, row) in j.conditionals().into_iter().enumerate() {
        match row {
            Some(r) => {
                let h = generalized_entropy(&r, spec)?;
                terms.push(weighted(px.probs()[i], h.value));
                actions.push(Some(h.optimal_action));
            }
            None => {
                terms.push(T::zero());
                actions.push(None);
            }
        }
    }
    Ok((pairwise_sum(&terms), BayesRule { actions }))
}

/// An arbitrary fixed action used where a Bayes rule is undefined.
pub fn default_action<T: Real>(spec: &LossSpec<T>, y: &DiscreteDist<T>) -> Action<T> {
    match spec.kind {
        LossKind::Table => Action::Column(0),
        LossKind::ZeroOne => Action::Outcome(y.outcomes()[0].clone()),
        LossKind::Log => Action::Dist(y.clone()),
        LossKind::Quadratic | LossKind::Absolute => Action::Real(T::zero()),
    }
}

/// `E_P[ℓ(Y, ψ(X))]` for a decision rule `ψ`.
pub fn rule_risk<T: Real>(j: &JointDiscrete<T>, spec: &LossSpec<T>, rule: &BayesRule<T>) -> Result<T> {
    let fallback = default_action(spec, &j.marginal_y());
    let mut terms = Vec::with_capacity(j.nx());
    for (i, row) in j.probs().iter().enumerate() {
        let a = rule.at(i, &fallback);
        let mass: Vec<bool> = row.iter().map(|v| *v > T::zero()).collect();
        let col = column_masked(spec, j.y_outcomes(), &mass, a)?;
        let t: Vec<T> = row.iter().zip(&col).map(|(p, l)| weighted(*p, *l)).collect();
        terms.push(pairwise_sum(&t));
    }
    Ok(pairwise_sum(&terms))
}

/// Loss column of each action for brute-force consumers.
pub fn action_risks<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>, actions: &[Action<T>]) -> Result<Vec<T>> {
    actions
        .iter()
        .map(|a| column(spec, p.outcomes(), a).map(|c| p.expect(&c)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loss::LossTable;

    #[test]
    fn zero_one_entropy_and_action() {
        let p = DiscreteDist::<f64>::new(vec!["a", "b", "c"], vec![0.5, 0.3, 0.2]).unwrap();
        let h = generalized_entropy(&p, &LossSpec::zero_one()).unwrap();
        assert!((h.value - 0.5).abs() < 1e-15);
        assert_eq!(h.optimal_action, Action::Outcome("a".into()));
    }

    #[test]
    fn quadratic_fair_coin() {
        let p = DiscreteDist::<f64>::on_reals(&[0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let h = generalized_entropy(&p, &LossSpec::quadratic()).unwrap();
        assert_eq!(h.value, 0.25);
        assert_eq!(h.optimal_action, Action::Real(0.5));
    }

    #[test]
    fn gaussian_log_entropy() {
        let g = GaussianScalar::<f64>::new(3.0, 1.0).unwrap();
        let h = generalized_entropy_gaussian(&g, &LossSpec::log()).unwrap();
        assert!((h.value - 1.4189385332046727).abs() < 1e-12);
    }

    #[test]
    fn value_matches_expected_loss_of_action() {
        let p = DiscreteDist::<f64>::on_reals(&[0.0, 1.0, 3.0], vec![0.2, 0.5, 0.3]).unwrap();
        for spec in [
            LossSpec::log(),
            LossSpec::quadratic(),
            LossSpec::zero_one(),
            LossSpec::absolute(),
        ] {
            let h = generalized_entropy(&p, &spec).unwrap();
            let e = expected_loss(&p, &spec, &h.optimal_action).unwrap();
            assert!((h.value - e).abs() < 1e-12, "{:?}", spec.kind);
        }
    }

    #[test]
    fn lower_median_on_tie() {
        let p = DiscreteDist::<f64>::on_reals(&[0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let h = generalized_entropy(&p, &LossSpec::absolute()).unwrap();
        assert_eq!(h.optimal_action, Action::Real(0.0));
        assert_eq!(h.value, 0.5);
    }

    #[test]
    fn table_brute_force() {
        let t = LossTable::indexed(vec![vec![0.2, 0.9], vec![0.4, 0.1]]).unwrap();
        let spec = LossSpec::table(t);
        let p = DiscreteDist::<f64>::indexed(vec![0.5, 0.5]).unwrap();
        let h = generalized_entropy(&p, &spec).unwrap();
        assert!((h.value - 0.3).abs() < 1e-15);
        assert_eq!(h.optimal_action, Action::Column(0));
    }

    #[test]
    fn conditional_zero_one_map_rule() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let (h, rule) = conditional_entropy(&j, &LossSpec::zero_one()).unwrap();
        assert!((h - 0.2).abs() < 1e-15);
        assert_eq!(rule.actions[0], Some(Action::Outcome("0".into())));
        assert_eq!(rule.actions[1], Some(Action::Outcome("1".into())));
    }

    #[test]
    fn conditional_deterministic_and_independent() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.3, 0.0], vec![0.0, 0.7]]).unwrap();
        assert_eq!(conditional_entropy(&j, &LossSpec::zero_one()).unwrap().0, 0.0);
        let px = DiscreteDist::<f64>::indexed(vec![0.5, 0.5]).unwrap();
        let py = DiscreteDist::<f64>::indexed(vec![0.3, 0.7]).unwrap();
        let j = JointDiscrete::product(&px, &py).unwrap();
        let h = conditional_entropy(&j, &LossSpec::log()).unwrap().0;
        let hy = generalized_entropy(&py, &LossSpec::log()).unwrap().value;
        assert!((h - hy).abs() < 1e-12);
    }

    #[test]
    fn zero_mass_row_skipped() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        let (h, rule) = conditional_entropy(&j, &LossSpec::zero_one()).unwrap();
        assert_eq!(h, 0.5);
        assert!(rule.actions[1].is_none());
    }

    #[test]
    fn tie_breaks() {
        assert_eq!(argmax_tiebreak(&[1.0, 3.0, 3.0]).unwrap(), 1);
        assert_eq!(argmax_tiebreak(&[2.0]).unwrap(), 0);
        assert_eq!(argmax_tiebreak(&[0.0, 0.0, 0.0]).unwrap(), 0);
        assert_eq!(argmax_tiebreak::<f64>(&[]).unwrap_err(), Error::Empty);
        assert_eq!(argmin_tiebreak(&[3.0, 1.0, 1.0]).unwrap(), 1);
    }
}
