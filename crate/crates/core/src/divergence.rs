//! Statistical distances: total variation, KL, χ², Rényi (cross) entropy,
//! Wasserstein on the line, loss pushforwards and the `(A, ℓ)`-semidistance.

use crate::dist::{format_real, DiscreteDist, GaussianMixture, GaussianScalar, JointDiscrete};
use crate::error::{Error, Result};
use crate::loss::{column_masked, Action, LossKind, LossSpec};
use crate::quad::adaptive_simpson;
use crate::scalar::{lit, pairwise_sum, Real};

fn same_support<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<()> {
    if p.outcomes() != q.outcomes() {
        return Err(Error::SupportMismatch(format!(
            "outcome lists differ ({} vs {} entries); align the supports first",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// `½ Σ |p_i − q_i|` on a common support list.
pub fn tv<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<T> {
    same_support(p, q)?;
    Ok(tv_raw(p.probs(), q.probs()))
}

pub(crate) fn tv_raw<T: Real>(p: &[T], q: &[T]) -> T {
    let d: Vec<T> = p.iter().zip(q).map(|(a, b)| (*a - *b).abs()).collect();
    (pairwise_sum(&d) * lit(0.5)).min(T::one())
}

/// `Σ p log(p/q)`; `+∞` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<T> {
    same_support(p, q)?;
    Ok(kl_raw(p.probs(), q.probs()))
}

pub(crate) fn kl_raw<T: Real>(p: &[T], q: &[T]) -> T {
    let mut terms = Vec::with_capacity(p.len());
    for (a, b) in p.iter().zip(q) {
        if *a == T::zero() {
            continue;
        }
        if *b == T::zero() {
            return T::infinity();
        }
        terms.push(*a * (*a / *b).ln());
    }
    pairwise_sum(&terms).max(T::zero())
}

/// Closed-form `D(P‖Q)` between scalar Gaussians.
pub fn kl_gaussian<T: Real>(p: &GaussianScalar<T>, q: &GaussianScalar<T>) -> T {
    let dm = p.mean() - q.mean();
    let half: T = lit(0.5);
    half * (q.variance() / p.variance()).ln() + (p.variance() + dm * dm) / (lit::<T>(2.0) * q.variance())
        - half
}

/// `D(P‖Q)` for a Gaussian mixture `P` against a Gaussian `Q` by adaptive
/// quadrature over the mixture's ±12σ envelope.
pub fn kl_mixture_gaussian<T: Real>(p: &GaussianMixture<T>, q: &GaussianScalar<T>) -> Result<T> {
    if p.components().len() == 1 {
        return Ok(kl_gaussian(&p.components()[0], q));
    }
    let (lo, hi) = p.envelope(lit(12.0));
    let f = |x: T| {
        let px = p.pdf(x);
        if px <= T::zero() {
            T::zero()
        } else {
            px * (px.ln() - q.ln_pdf(x))
        }
    };
    Ok(adaptive_simpson(&f, lo, hi, lit(1e-10), 40)?.max(T::zero()))
}

/// `Σ (p−q)²/q`; `+∞` on a support violation.
pub fn chi2<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<T> {
    same_support(p, q)?;
    Ok(chi2_raw(p.probs(), q.probs()))
}

pub(crate) fn chi2_raw<T: Real>(p: &[T], q: &[T]) -> T {
    let mut terms = Vec::with_capacity(p.len());
    for (a, b) in p.iter().zip(q) {
        if *b == T::zero() {
            if *a > T::zero() {
                return T::infinity();
            }
            continue;
        }
        terms.push((*a - *b) * (*a - *b) / *b);
    }
    pairwise_sum(&terms)
}

fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    if m == T::neg_infinity() {
        return m;
    }
    if m == T::infinity() {
        return m;
    }
    let s: Vec<T> = xs.iter().map(|x| (*x - m).exp()).collect();
    m + pairwise_sum(&s).ln()
}

/// `−Σ Q log P` with `+∞` when `Q` charges a zero of `P`.
pub fn cross_entropy<T: Real>(q: &DiscreteDist<T>, p: &DiscreteDist<T>) -> Result<T> {
    same_support(q, p)?;
    let mut terms = Vec::with_capacity(q.len());
    for (a, b) in q.probs().iter().zip(p.probs()) {
        if *a == T::zero() {
            continue;
        }
        if *b == T::zero() {
            return Ok(T::infinity());
        }
        terms.push(-*a * b.ln());
    }
    Ok(pairwise_sum(&terms))
}

/// Rényi cross entropy `R_α(Q, P) = (1/(1−α)) log Σ Q(z) P(z)^{α−1}`; the
/// ordinary cross entropy at `α = 1`.
pub fn renyi_cross<T: Real>(q: &DiscreteDist<T>, p: &DiscreteDist<T>, alpha: T) -> Result<T> {
    if alpha == T::one() {
        return cross_entropy(q, p);
    }
    same_support(q, p)?;
    let am1 = alpha - T::one();
    let mut logs = Vec::with_capacity(q.len());
    for (a, b) in q.probs().iter().zip(p.probs()) {
        if *a == T::zero() {
            continue;
        }
        if *b == T::zero() {
            if am1 < T::zero() {
                return Ok(T::infinity());
            }
            continue;
        }
        logs.push(a.ln() + am1 * b.ln());
    }
    let l = log_sum_exp(&logs);
    if l == T::neg_infinity() {
        // α > 1 and P vanishes on all of Q's support.
        return Ok(T::infinity());
    }
    Ok(l / (T::one() - alpha))
}

/// Rényi entropy of order `α`.
pub fn renyi_entropy<T: Real>(q: &DiscreteDist<T>, alpha: T) -> Result<T> {
    renyi_cross(q, q, alpha)
}

/// Shannon entropy in nats.
pub fn shannon_entropy<T: Real>(q: &DiscreteDist<T>) -> T {
    cross_entropy(q, q).expect("same support")
}

/// `Var_Q[−log P(Z)]` with `+∞` where `Q` charges a zero of `P`.
pub fn cross_varentropy<T: Real>(q: &DiscreteDist<T>, p: &DiscreteDist<T>) -> Result<T> {
    same_support(q, p)?;
    let mut f = Vec::with_capacity(q.len());
    for (a, b) in q.probs().iter().zip(p.probs()) {
        if *a > T::zero() && *b == T::zero() {
            return Ok(T::infinity());
        }
        f.push(if *b > T::zero() { -b.ln() } else { T::zero() });
    }
    Ok(variance_under(q.probs(), &f))
}

/// `Var_Q[−log Q(Z)]`.
pub fn varentropy<T: Real>(q: &DiscreteDist<T>) -> T {
    cross_varentropy(q, q).expect("same support")
}

/// Variance of `f` under `w` with `0 · ∞ = 0`; `+∞` for infinite charged values.
pub(crate) fn variance_under<T: Real>(w: &[T], f: &[T]) -> T {
    let mut m = Vec::with_capacity(w.len());
    for (p, v) in w.iter().zip(f) {
        if *p > T::zero() {
            if !v.is_finite() {
                return T::infinity();
            }
            m.push(*p * *v);
        }
    }
    let mean = pairwise_sum(&m);
    let c: Vec<T> = w
        .iter()
        .zip(f)
        .filter(|(p, _)| **p > T::zero())
        .map(|(p, v)| *p * (*v - mean) * (*v - mean))
        .collect();
    pairwise_sum(&c)
}

/// Sorted union of the atoms of two distributions on the line, with both
/// mass vectors on it.
fn merged_line<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let pv = p.values()?;
    let qv = q.values()?;
    merge_atoms(&pv, p.probs(), &qv, q.probs())
}

pub(crate) fn merge_atoms<T: Real>(
    pv: &[T],
    pp: &[T],
    qv: &[T],
    qp: &[T],
) -> Result<(Vec<T>, Vec<T>, Vec<T>)> {
    let mut all: Vec<(T, T, T)> = pv
        .iter()
        .zip(pp)
        .map(|(v, m)| (*v, *m, T::zero()))
        .chain(qv.iter().zip(qp).map(|(v, m)| (*v, T::zero(), *m)))
        .collect();
    if all.iter().any(|(v, _, _)| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN atom".into()));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("no NaN"));
    let mut xs: Vec<T> = Vec::new();
    let mut a: Vec<T> = Vec::new();
    let mut b: Vec<T> = Vec::new();
    for (v, m1, m2) in all {
        if xs.last() == Some(&v) {
            let k = xs.len() - 1;
            a[k] = a[k] + m1;
            b[k] = b[k] + m2;
        } else {
            xs.push(v);
            a.push(m1);
            b.push(m2);
        }
    }
    Ok((xs, a, b))
}

/// `W₁` on the line as `∫ |F_P − F_Q|`.
pub fn wasserstein1_1d<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<T> {
    let (xs, a, b) = merged_line(p, q)?;
    Ok(w1_sorted(&xs, &a, &b))
}

pub(crate) fn w1_sorted<T: Real>(xs: &[T], a: &[T], b: &[T]) -> T {
    let (mut fa, mut fb) = (T::zero(), T::zero());
    let mut terms = Vec::with_capacity(xs.len());
    for k in 0..xs.len().saturating_sub(1) {
        fa = fa + a[k];
        fb = fb + b[k];
        let gap = xs[k + 1] - xs[k];
        let diff = (fa - fb).abs();
        terms.push(if diff == T::zero() { T::zero() } else { diff * gap });
    }
    pairwise_sum(&terms)
}

/// `W₂` on the line through the quantile coupling.
pub fn wasserstein2_1d<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>) -> Result<T> {
    let sorted = |d: &DiscreteDist<T>| -> Result<Vec<(T, T)>> {
        let mut v: Vec<(T, T)> = d
            .values()?
            .into_iter()
            .zip(d.probs().iter().copied())
            .filter(|(_, m)| *m > T::zero())
            .collect();
        v.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite"));
        Ok(v)
    };
    let a = sorted(p)?;
    let b = sorted(q)?;
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut terms = Vec::new();
    while i < a.len() && j < b.len() {
        let m = ra.min(rb);
        let d = a[i].0 - b[j].0;
        terms.push(m * d * d);
        ra = ra - m;
        rb = rb - m;
        if ra <= T::zero() {
            i += 1;
            if i < a.len() {
                ra = a[i].1;
            }
        }
        if rb <= T::zero() {
            j += 1;
            if j < b.len() {
                rb = b[j].1;
            }
        }
    }
    Ok(pairwise_sum(&terms).max(T::zero()).sqrt())
}

/// Distribution of `ℓ(Z, a)` under `P`: equal loss values merged, ascending.
pub fn pushforward<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>, a: &Action<T>) -> Result<DiscreteDist<T>> {
    let pf = pushforward_pair(p, p, spec, a)?;
    Ok(pf.p)
}

/// Pushforwards of `P` and `Q` at a common action on one value grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PushforwardPair<T: Real> {
    pub values: Vec<T>,
    pub p: DiscreteDist<T>,
    pub q: DiscreteDist<T>,
}

pub fn pushforward_pair<T: Real>(
    p: &DiscreteDist<T>,
    q: &DiscreteDist<T>,
    spec: &LossSpec<T>,
    a: &Action<T>,
) -> Result<PushforwardPair<T>> {
    let (p, q) = p.align(q)?;
    let mass: Vec<bool> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(x, y)| *x > T::zero() || *y > T::zero())
        .collect();
    let col = column_masked(spec, p.outcomes(), &mass, a)?;
    let keep: Vec<usize> = (0..col.len()).filter(|i| mass[*i]).collect();
    let cv: Vec<T> = keep.iter().map(|i| col[*i]).collect();
    let pp: Vec<T> = keep.iter().map(|i| p.probs()[*i]).collect();
    let qp: Vec<T> = keep.iter().map(|i| q.probs()[*i]).collect();
    let (values, a_m, b_m) = merge_atoms(&cv, &pp, &cv, &qp)?;
    let labels: Vec<String> = values.iter().map(|v| format_real(*v)).collect();
    Ok(PushforwardPair {
        p: DiscreteDist::new(labels.clone(), a_m)?,
        q: DiscreteDist::new(labels, b_m)?,
        values,
    })
}

impl<T: Real> PushforwardPair<T> {
    /// `W₁` between the two loss distributions; `+∞` if an infinite loss is charged.
    pub fn w1(&self) -> T {
        if self.values.iter().any(|v| !v.is_finite()) {
            return T::infinity();
        }
        w1_sorted(&self.values, self.p.probs(), self.q.probs())
    }
}

/// `sup_a |E_P ℓ(Z,a) − E_Q ℓ(Z,a)|`.
pub fn semidistance_al<T: Real>(p: &DiscreteDist<T>, q: &DiscreteDist<T>, spec: &LossSpec<T>) -> Result<T> {
    let (p, q) = p.align(q)?;
    let mass: Vec<bool> = p
        .probs()
        .iter()
        .zip(q.probs())
        .map(|(x, y)| *x > T::zero() || *y > T::zero())
        .collect();
    let gap = |a: &Action<T>| -> Result<T> {
        let c = column_masked(spec, p.outcomes(), &mass, a)?;
        Ok((p.expect(&c) - q.expect(&c)).abs())
    };
    match spec.kind {
        LossKind::Table | LossKind::ZeroOne => {
            let acts = spec
                .finite_actions(p.outcomes())
                .expect("finite action space");
            let mut best = T::zero();
            for a in &acts {
                best = best.max(gap(a)?);
            }
            Ok(best)
        }
        LossKind::Absolute => {
            let mut best = (p.mean()? - q.mean()?).abs();
            for v in p.values()? {
                best = best.max(gap(&Action::Real(v))?);
            }
            Ok(best)
        }
        LossKind::Quadratic => {
            let dm = p.mean()? - q.mean()?;
            if dm != T::zero() {
                Ok(T::infinity())
            } else {
                Ok((p.second_moment()? - q.second_moment()?).abs())
            }
        }
        LossKind::Log => {
            if p.probs() == q.probs() {
                Ok(T::zero())
            } else {
                Ok(T::infinity())
            }
        }
    }
}

/// `I(X;Y) = D(P_{X,Y} ‖ P_X ⊗ P_Y)`.
pub fn mutual_information<T: Real>(j: &JointDiscrete<T>) -> T {
    let (prod, flat) = product_and_flat(j);
    kl_raw(&flat, &prod)
}

/// Lautum information `D(P_X ⊗ P_Y ‖ P_{X,Y})`.
pub fn lautum_information<T: Real>(j: &JointDiscrete<T>) -> T {
    let (prod, flat) = product_and_flat(j);
    kl_raw(&prod, &flat)
}

fn product_and_flat<T: Real>(j: &JointDiscrete<T>) -> (Vec<T>, Vec<T>) {
    let px = j.marginal_x();
    let py = j.marginal_y();
    let mut prod = Vec::with_capacity(j.nx() * j.ny());
    for a in px.probs() {
        for b in py.probs() {
            prod.push(*a * *b);
        }
    }
    let flat = j.probs().iter().flatten().copied().collect();
    (prod, flat)
}

/// `D(P_{X,Y} ‖ Q_{X,Y})` on a common `X × Y` grid.
pub fn kl_joint<T: Real>(p: &JointDiscrete<T>, q: &JointDiscrete<T>) -> Result<T> {
    joint_same(p, q)?;
    kl(&p.flatten(), &q.flatten())
}

/// `Σ_x P_X(x) D(P_{Y|X=x} ‖ Q_{Y|X=x})`.
pub fn conditional_kl<T: Real>(p: &JointDiscrete<T>, q: &JointDiscrete<T>) -> Result<T> {
    joint_same(p, q)?;
    let px = p.marginal_x();
    let mut terms = Vec::new();
    for i in 0..p.nx() {
        if px.probs()[i] == T::zero() {
            continue;
        }
        let pr = p.conditional(i)?;
        let qr = match q.conditional(i) {
            Ok(r) => r,
            Err(_) => return Ok(T::infinity()),
        };
        terms.push(px.probs()[i] * kl(&pr, &qr)?);
    }
    Ok(pairwise_sum(&terms))
}

pub(crate) fn joint_same<T: Real>(p: &JointDiscrete<T>, q: &JointDiscrete<T>) -> Result<()> {
    if p.x_outcomes() != q.x_outcomes() || p.y_outcomes() != q.y_outcomes() {
        return Err(Error::SupportMismatch("joint distributions on different grids".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(p: &[f64]) -> DiscreteDist<f64> {
        DiscreteDist::indexed(p.to_vec()).unwrap()
    }

    fn line(v: &[f64], p: &[f64]) -> DiscreteDist<f64> {
        DiscreteDist::on_reals(v, p.to_vec()).unwrap()
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(), 0.0);
        assert_eq!(tv(&d(&[1.0, 0.0]), &d(&[0.0, 1.0])).unwrap(), 1.0);
        assert!((tv(&d(&[0.6, 0.4]), &d(&[0.5, 0.5])).unwrap() - 0.1).abs() < 1e-15);
        assert!(tv(&d(&[0.5, 0.5]), &d(&[0.2, 0.3, 0.5])).is_err());
    }

    #[test]
    fn kl_examples() {
        assert_eq!(kl(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(), 0.0);
        assert!(kl(&d(&[0.5, 0.5]), &d(&[1.0, 0.0])).unwrap().is_infinite());
        let p = GaussianScalar::<f64>::new(0.5, 1.0).unwrap();
        let q = GaussianScalar::new(0.0, 1.0).unwrap();
        assert!((kl_gaussian(&p, &q) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn chi2_examples() {
        assert_eq!(chi2(&d(&[0.3, 0.7]), &d(&[0.3, 0.7])).unwrap(), 0.0);
        assert!((chi2(&d(&[0.5, 0.5]), &d(&[0.25, 0.75])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let p = d(&[0.5, 0.5]).pad_to(&["0".into(), "1".into(), "2".into()]).unwrap();
        assert_eq!(chi2(&p, &d(&[0.5, 0.5, 0.0])).unwrap(), 0.0);
        assert!(chi2(&d(&[0.5, 0.5, 0.0]), &d(&[1.0, 0.0, 0.0])).unwrap().is_infinite());
    }

    #[test]
    fn renyi_uniform_and_limit() {
        let u = d(&[0.25; 4]);
        for a in [-3.0, 0.0, 0.5, 2.0, 7.0] {
            assert!((renyi_entropy(&u, a).unwrap() - 4f64.ln()).abs() < 1e-12);
        }
        let q = d(&[0.1, 0.2, 0.7]);
        let h = shannon_entropy(&q);
        for a in [1.0 - 1e-4, 1.0 + 1e-4] {
            assert!((renyi_entropy(&q, a).unwrap() - h).abs() < 1e-4);
        }
        let lo = renyi_entropy(&q, 1.0 - 1e-4).unwrap();
        let hi = renyi_entropy(&q, 1.0 + 1e-4).unwrap();
        assert!(((lo + hi) / 2.0 - h).abs() < 1e-6);
        let p = d(&[0.3, 0.3, 0.4]);
        let ce: f64 = -(0.1 * 0.3f64.ln() + 0.2 * 0.3f64.ln() + 0.7 * 0.4f64.ln());
        assert!((renyi_cross(&q, &p, 1.0).unwrap() - ce).abs() < 1e-15);
    }

    #[test]
    fn w1_line_examples() {
        assert_eq!(wasserstein1_1d(&line(&[0.0], &[1.0]), &line(&[1.0], &[1.0])).unwrap(), 1.0);
        let p = line(&[0.0, 1.0], &[0.5, 0.5]);
        assert_eq!(wasserstein1_1d(&p, &p).unwrap(), 0.0);
        assert_eq!(wasserstein1_1d(&p, &line(&[0.0], &[1.0])).unwrap(), 0.5);
    }

    #[test]
    fn w2_line_examples() {
        let p = line(&[0.0, 1.0], &[0.5, 0.5]);
        let q = line(&[0.0], &[1.0]);
        assert!((wasserstein2_1d(&p, &q).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        let a = line(&[0.0, 1.0, 2.0], &[0.2, 0.3, 0.5]);
        let b = line(&[0.5, 1.5], &[0.6, 0.4]);
        // quantile coupling: 0.2@(0,0.5) 0.3@(1,0.5) 0.1@(2,0.5) 0.4@(2,1.5)
        let want: f64 = 0.2 * 0.25 + 0.3 * 0.25 + 0.1 * 2.25 + 0.4 * 0.25;
        assert!((wasserstein2_1d(&a, &b).unwrap() - want.sqrt()).abs() < 1e-14);
        let s = line(&[3.0], &[1.0]);
        assert!((wasserstein2_1d(&s, &s).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn pushforward_examples() {
        let p = d(&[0.3, 0.7]);
        let pf = pushforward(&p, &LossSpec::zero_one(), &Action::Outcome("0".into())).unwrap();
        assert_eq!(pf.values().unwrap(), vec![0.0, 1.0]);
        assert_eq!(pf.probs(), &[0.3, 0.7]);

        use crate::loss::LossTable;
        let t = LossTable::indexed(vec![vec![0.2], vec![0.2], vec![0.5]]).unwrap();
        let spec = LossSpec::table(t);
        let pf = pushforward(&d(&[0.25, 0.25, 0.5]), &spec, &Action::Column(0)).unwrap();
        assert_eq!(pf.values().unwrap(), vec![0.2, 0.5]);
        assert_eq!(pf.probs(), &[0.5, 0.5]);

        let t = LossTable::indexed(vec![vec![0.4], vec![0.4]]).unwrap();
        let pf = pushforward(&d(&[0.1, 0.9]), &LossSpec::table(t), &Action::Column(0)).unwrap();
        assert_eq!(pf.probs(), &[1.0]);
    }

    #[test]
    fn semidistance_examples() {
        use crate::loss::LossTable;
        let p = d(&[0.2, 0.3, 0.5]);
        let q = d(&[0.4, 0.4, 0.2]);
        assert_eq!(semidistance_al(&p, &p, &LossSpec::zero_one()).unwrap(), 0.0);
        // all 2^|Z| indicator columns recover total variation
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|z| (0..8).map(|m| f64::from((m >> z) & 1)).collect())
            .collect();
        let spec = LossSpec::table(LossTable::indexed(cols).unwrap());
        let s = semidistance_al(&p, &q, &spec).unwrap();
        assert!((s - tv(&p, &q).unwrap()).abs() < 1e-15);
        let one = LossSpec::table(LossTable::indexed(vec![vec![0.1], vec![0.7], vec![0.4]]).unwrap());
        let want = ((0.02 + 0.21 + 0.2) - (0.04 + 0.28 + 0.08f64)).abs();
        assert!((semidistance_al(&p, &q, &one).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn semidistance_vanishes_for_constant_loss() {
        use crate::loss::LossTable;
        let spec = LossSpec::table(LossTable::indexed(vec![vec![0.5], vec![0.5]]).unwrap());
        let p = d(&[0.1, 0.9]);
        let q = d(&[0.8, 0.2]);
        assert_eq!(semidistance_al(&p, &q, &spec).unwrap(), 0.0);
        assert!(tv(&p, &q).unwrap() > 0.5);
    }

    #[test]
    fn mutual_information_example() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let i = mutual_information(&j);
        let want = 0.4 * 1.6f64.ln() * 2.0 + 0.1 * 0.4f64.ln() * 2.0;
        assert!((i - want).abs() < 1e-15);
        assert!((i - 0.1927).abs() < 1e-4);
    }
}
