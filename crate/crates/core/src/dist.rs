//! Finite discrete distributions, scalar Gaussians and joints over `X × Y`.

use std::collections::{HashMap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::scalar::{lit, pairwise_sum, to_f64, Real};

/// Parses a label as a real number.
fn parse_label<T: Real>(label: &str) -> Result<T> {
    label
        .trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .map(lit)
        .ok_or_else(|| Error::InvalidArgument(format!("outcome `{label}` is not numeric")))
}

pub(crate) fn format_real<T: Real>(v: T) -> String {
    format!("{}", to_f64(v))
}

/// Validates a probability vector and renormalizes when the sum is off by
/// more than accumulated rounding but still within tolerance.
fn check_probs<T: Real>(probs: &mut [T]) -> Result<()> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    for (i, p) in probs.iter().enumerate() {
        if !p.is_finite() || *p < T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "probability #{i} = {p} is negative or non-finite"
            )));
        }
    }
    let s = pairwise_sum(probs);
    let dev = (s - T::one()).abs();
    if dev > T::norm_tol() {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {s}, not 1"
        )));
    }
    let rounding = lit::<T>(8.0 * probs.len() as f64) * T::epsilon();
    if dev > rounding {
        for p in probs.iter_mut() {
            *p = *p / s;
        }
    }
    Ok(())
}

fn check_distinct(labels: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::InvalidDistribution(format!(
                "duplicate {what} label `{l}`"
            )));
        }
    }
    Ok(())
}

/// Probability vector over an ordered list of distinct labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist<T: Real> {
    outcomes: Vec<String>,
    probs: Vec<T>,
}

impl<T: Real> DiscreteDist<T> {
    pub fn new<S: Into<String>>(outcomes: Vec<S>, probs: Vec<T>) -> Result<Self> {
        let outcomes: Vec<String> = outcomes.into_iter().map(Into::into).collect();
        if outcomes.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} outcomes but {} probabilities",
                outcomes.len(),
                probs.len()
            )));
        }
        check_distinct(&outcomes, "outcome")?;
        let mut probs = probs;
        check_probs(&mut probs)?;
        Ok(Self { outcomes, probs })
    }

    /// Distribution on real-valued outcomes; labels are the shortest decimal
    /// representation of each value.
    pub fn on_reals(values: &[T], probs: Vec<T>) -> Result<Self> {
        Self::new(values.iter().map(|v| format_real(*v)).collect(), probs)
    }

    /// Outcomes labelled `0..k`.
    pub fn indexed(probs: Vec<T>) -> Result<Self> {
        Self::new((0..probs.len()).map(|i| i.to_string()).collect(), probs)
    }

    pub fn uniform<S: Into<String>>(outcomes: Vec<S>) -> Result<Self> {
        let k = outcomes.len();
        let p = T::one() / lit(k as f64);
        Self::new(outcomes, vec![p; k])
    }

    pub fn point_mass<S: Into<String>>(outcomes: Vec<S>, at: usize) -> Result<Self> {
        let k = outcomes.len();
        if at >= k {
            return Err(Error::InvalidArgument(format!("index {at} out of range")));
        }
        let mut probs = vec![T::zero(); k];
        probs[at] = T::one();
        Self::new(outcomes, probs)
    }

    /// Normalizes nonnegative counts.
    pub fn from_counts(outcomes: Vec<String>, counts: &[usize]) -> Result<Self> {
        let n: usize = counts.iter().sum();
        if n == 0 {
            return Err(Error::Empty);
        }
        let nt: T = lit(n as f64);
        let probs = counts.iter().map(|c| lit::<T>(*c as f64) / nt).collect();
        Self::new(outcomes, probs)
    }

    /// Empirical distribution of `samples` on `support`, zero counts kept.
    pub fn empirical<S: AsRef<str>>(samples: &[S], support: &[String]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if samples.is_empty() {
            return Err(Error::Empty);
        }
        let index: HashMap<&str, usize> = support
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut counts = vec![0usize; support.len()];
        for s in samples {
            let s = s.as_ref();
            let i = index
                .get(s)
                .ok_or_else(|| Error::UnknownOutcome(s.to_string()))?;
            counts[*i] += 1;
        }
        Self::from_counts(support.to_vec(), &counts)
    }

    /// Empirical distribution from sample indices into this distribution's support.
    pub fn empirical_indices(&self, idx: &[usize]) -> Result<Self> {
        let mut counts = vec![0usize; self.len()];
        for &i in idx {
            if i >= counts.len() {
                return Err(Error::UnknownOutcome(i.to_string()));
            }
            counts[i] += 1;
        }
        Self::from_counts(self.outcomes.clone(), &counts)
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }

    /// Probability of `label`, zero when absent.
    pub fn prob(&self, label: &str) -> T {
        self.index_of(label)
            .map(|i| self.probs[i])
            .unwrap_or_else(T::zero)
    }

    /// Outcomes interpreted as reals.
    pub fn values(&self) -> Result<Vec<T>> {
        self.outcomes.iter().map(|o| parse_label(o)).collect()
    }

    pub fn mean(&self) -> Result<T> {
        let v = self.values()?;
        Ok(self.expect(&v))
    }

    pub fn variance(&self) -> Result<T> {
        let v = self.values()?;
        let m = self.expect(&v);
        let sq: Vec<T> = v.iter().map(|x| (*x - m) * (*x - m)).collect();
        Ok(self.expect(&sq))
    }

    pub fn second_moment(&self) -> Result<T> {
        let v = self.values()?;
        let sq: Vec<T> = v.iter().map(|x| *x * *x).collect();
        Ok(self.expect(&sq))
    }

    /// `Σ p_i f_i` with the `0 · ∞ = 0` convention.
    pub fn expect(&self, f: &[T]) -> T {
        let terms: Vec<T> = self
            .probs
            .iter()
            .zip(f)
            .map(|(p, v)| crate::scalar::weighted(*p, *v))
            .collect();
        pairwise_sum(&terms)
    }

    pub fn max_prob(&self) -> T {
        self.probs.iter().copied().fold(T::zero(), T::max)
    }

    /// `max P / min P` over the listed support; `+∞` when some mass is zero.
    pub fn ratio_max_min(&self) -> T {
        let mn = self.probs.iter().copied().fold(T::infinity(), T::min);
        if mn == T::zero() {
            T::infinity()
        } else {
            self.max_prob() / mn
        }
    }

    /// Re-expresses the distribution on `support` (reordering, zero padding).
    /// Fails when positive mass sits outside `support`.
    pub fn pad_to(&self, support: &[String]) -> Result<Self> {
        let idx: HashMap<&str, usize> = support
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let mut probs = vec![T::zero(); support.len()];
        for (o, p) in self.outcomes.iter().zip(&self.probs) {
            match idx.get(o.as_str()) {
                Some(i) => probs[*i] = *p,
                None if *p == T::zero() => {}
                None => {
                    return Err(Error::SupportMismatch(format!(
                        "outcome `{o}` has mass but is not in the target support"
                    )))
                }
            }
        }
        Ok(Self {
            outcomes: support.to_vec(),
            probs,
        })
    }

    /// Union of two supports: `self`'s order first, then new labels of `other`.
    pub fn union_support(&self, other: &Self) -> Vec<String> {
        let mut out = self.outcomes.clone();
        let have: HashSet<&str> = self.outcomes.iter().map(String::as_str).collect();
        for o in &other.outcomes {
            if !have.contains(o.as_str()) {
                out.push(o.clone());
            }
        }
        out
    }

    /// Both distributions on their common union support.
    pub fn align(&self, other: &Self) -> Result<(Self, Self)> {
        if self.outcomes == other.outcomes {
            return Ok((self.clone(), other.clone()));
        }
        let u = self.union_support(other);
        Ok((self.pad_to(&u)?, other.pad_to(&u)?))
    }

    /// `λ self + (1−λ) other` on the union support.
    pub fn mix(&self, other: &Self, lambda: T) -> Result<Self> {
        let (a, b) = self.align(other)?;
        let probs = a
            .probs
            .iter()
            .zip(&b.probs)
            .map(|(p, q)| lambda * *p + (T::one() - lambda) * *q)
            .collect();
        Self::new(a.outcomes, probs)
    }

    /// Draws `n` indices into the support.
    pub fn sample_indices<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<usize> {
        if n == 0 {
            return Vec::new();
        }
        let w: Vec<f64> = self.probs.iter().map(|p| to_f64(*p)).collect();
        let dist = WeightedIndex::new(&w).expect("validated probability vector");
        (0..n).map(|_| dist.sample(rng)).collect()
    }

    pub fn cast<U: Real>(&self) -> DiscreteDist<U> {
        DiscreteDist {
            outcomes: self.outcomes.clone(),
            probs: self.probs.iter().map(|p| lit(to_f64(*p))).collect(),
        }
    }
}

/// Sampling into outcome values under the seeded stream contract.
pub trait Sample {
    type Item;
    fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<Self::Item>;

    /// Draws on stream 0 of `seed`.
    fn sample(&self, n: usize, seed: u64) -> Vec<Self::Item> {
        let mut r = rng::stream(seed, 0);
        self.sample_with(n, &mut r)
    }
}

impl<T: Real> Sample for DiscreteDist<T> {
    type Item = String;
    fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<String> {
        self.sample_indices(n, rng)
            .into_iter()
            .map(|i| self.outcomes[i].clone())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct DistJson {
    outcomes: Vec<serde_json::Value>,
    probs: Vec<f64>,
}

fn label_from_json(v: serde_json::Value) -> std::result::Result<String, String> {
    match v {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(format!("unsupported outcome label {other}")),
    }
}

impl<T: Real> Serialize for DiscreteDist<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        DistJson {
            outcomes: self
                .outcomes
                .iter()
                .map(|o| serde_json::Value::String(o.clone()))
                .collect(),
            probs: self.probs.iter().map(|p| to_f64(*p)).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for DiscreteDist<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = DistJson::deserialize(d)?;
        let outcomes = raw
            .outcomes
            .into_iter()
            .map(label_from_json)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(serde::de::Error::custom)?;
        let probs = raw.probs.into_iter().map(lit).collect();
        DiscreteDist::new(outcomes, probs).map_err(serde::de::Error::custom)
    }
}

/// Scalar normal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussJson", into = "GaussJson")]
pub struct GaussianScalar<T: Real> {
    mean: T,
    variance: T,
}

#[derive(Serialize, Deserialize)]
struct GaussJson {
    mean: f64,
    variance: f64,
}

impl<T: Real> TryFrom<GaussJson> for GaussianScalar<T> {
    type Error = Error;
    fn try_from(g: GaussJson) -> Result<Self> {
        GaussianScalar::new(lit(g.mean), lit(g.variance))
    }
}

impl<T: Real> From<GaussianScalar<T>> for GaussJson {
    fn from(g: GaussianScalar<T>) -> Self {
        GaussJson {
            mean: to_f64(g.mean),
            variance: to_f64(g.variance),
        }
    }
}

impl<T: Real> GaussianScalar<T> {
    pub fn new(mean: T, variance: T) -> Result<Self> {
        if !mean.is_finite() || !variance.is_finite() || variance <= T::zero() {
            return Err(Error::InvalidDistribution(format!(
                "gaussian needs finite mean and positive variance, got ({mean}, {variance})"
            )));
        }
        Ok(Self { mean, variance })
    }

    pub fn mean(&self) -> T {
        self.mean
    }

    pub fn variance(&self) -> T {
        self.variance
    }

    pub fn std_dev(&self) -> T {
        self.variance.sqrt()
    }

    pub fn pdf(&self, x: T) -> T {
        let z = x - self.mean;
        (-(z * z) / (lit::<T>(2.0) * self.variance)).exp()
            / (lit::<T>(2.0) * T::PI() * self.variance).sqrt()
    }

    pub fn ln_pdf(&self, x: T) -> T {
        let z = x - self.mean;
        -(z * z) / (lit::<T>(2.0) * self.variance)
            - lit::<T>(0.5) * (lit::<T>(2.0) * T::PI() * self.variance).ln()
    }
}

impl<T: Real> Sample for GaussianScalar<T> {
    type Item = T;
    fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<T> {
        let d = Normal::new(to_f64(self.mean), to_f64(self.std_dev())).expect("validated gaussian");
        (0..n).map(|_| lit(d.sample(rng))).collect()
    }
}

/// Finite mixture of scalar Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture<T: Real> {
    weights: Vec<T>,
    components: Vec<GaussianScalar<T>>,
}

impl<T: Real> GaussianMixture<T> {
    pub fn new(weights: Vec<T>, components: Vec<GaussianScalar<T>>) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::InvalidDistribution(
                "mixture weights and components differ in length".into(),
            ));
        }
        let mut weights = weights;
        check_probs(&mut weights)?;
        Ok(Self {
            weights,
            components,
        })
    }

    pub fn single(g: GaussianScalar<T>) -> Self {
        Self {
            weights: vec![T::one()],
            components: vec![g],
        }
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn components(&self) -> &[GaussianScalar<T>] {
        &self.components
    }

    pub fn pdf(&self, x: T) -> T {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| *w * c.pdf(x))
            .sum()
    }

    pub fn mean(&self) -> T {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| *w * c.mean())
            .sum()
    }

    pub fn variance(&self) -> T {
        let m = self.mean();
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| *w * (c.variance() + (c.mean() - m) * (c.mean() - m)))
            .sum()
    }

    /// Interval carrying all but a negligible tail of every component.
    pub fn envelope(&self, half_width_sd: T) -> (T, T) {
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for c in &self.components {
            lo = lo.min(c.mean() - half_width_sd * c.std_dev());
            hi = hi.max(c.mean() + half_width_sd * c.std_dev());
        }
        (lo, hi)
    }
}

/// Joint distribution on `X × Y`, rows indexed by `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDiscrete<T: Real> {
    x: Vec<String>,
    y: Vec<String>,
    probs: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct JointJson {
    x: Vec<serde_json::Value>,
    y: Vec<serde_json::Value>,
    probs: Vec<Vec<f64>>,
}

impl<T: Real> Serialize for JointDiscrete<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let lab = |v: &[String]| {
            v.iter()
                .map(|o| serde_json::Value::String(o.clone()))
                .collect()
        };
        JointJson {
            x: lab(&self.x),
            y: lab(&self.y),
            probs: self
                .probs
                .iter()
                .map(|r| r.iter().map(|p| to_f64(*p)).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for JointDiscrete<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = JointJson::deserialize(d)?;
        let conv = |v: Vec<serde_json::Value>| {
            v.into_iter()
                .map(label_from_json)
                .collect::<std::result::Result<Vec<_>, _>>()
        };
        let x = conv(raw.x).map_err(serde::de::Error::custom)?;
        let y = conv(raw.y).map_err(serde::de::Error::custom)?;
        let probs = raw
            .probs
            .into_iter()
            .map(|r| r.into_iter().map(lit).collect())
            .collect();
        JointDiscrete::new(x, y, probs).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> JointDiscrete<T> {
    pub fn new<S: Into<String>>(x: Vec<S>, y: Vec<S>, probs: Vec<Vec<T>>) -> Result<Self> {
        let x: Vec<String> = x.into_iter().map(Into::into).collect();
        let y: Vec<String> = y.into_iter().map(Into::into).collect();
        if probs.len() != x.len() || probs.iter().any(|r| r.len() != y.len()) {
            return Err(Error::InvalidDistribution(format!(
                "joint table must be {}x{}",
                x.len(),
                y.len()
            )));
        }
        check_distinct(&x, "x")?;
        check_distinct(&y, "y")?;
        let mut flat: Vec<T> = probs.iter().flatten().copied().collect();
        check_probs(&mut flat)?;
        let probs = flat.chunks(y.len()).map(<[T]>::to_vec).collect();
        Ok(Self { x, y, probs })
    }

    /// Joint with indexed labels `0..|X|`, `0..|Y|`.
    pub fn indexed(probs: Vec<Vec<T>>) -> Result<Self> {
        let nx = probs.len();
        let ny = probs.first().map_or(0, Vec::len);
        Self::new(
            (0..nx).map(|i| i.to_string()).collect(),
            (0..ny).map(|i| i.to_string()).collect(),
            probs,
        )
    }

    /// `P_X ⊗ P_{Y|X}` from a marginal and one conditional row per `x`.
    pub fn compose(px: &DiscreteDist<T>, rows: &[DiscreteDist<T>]) -> Result<Self> {
        if rows.len() != px.len() {
            return Err(Error::InvalidArgument(
                "one conditional row per x outcome required".into(),
            ));
        }
        let y = rows
            .first()
            .map(|r| r.outcomes().to_vec())
            .ok_or(Error::Empty)?;
        let mut probs = Vec::with_capacity(rows.len());
        for (p, r) in px.probs().iter().zip(rows) {
            let r = r.pad_to(&y)?;
            probs.push(r.probs().iter().map(|q| *p * *q).collect());
        }
        Self::new(px.outcomes().to_vec(), y, probs)
    }

    pub fn product(px: &DiscreteDist<T>, py: &DiscreteDist<T>) -> Result<Self> {
        let rows = vec![py.clone(); px.len()];
        Self::compose(px, &rows)
    }

    pub fn x_outcomes(&self) -> &[String] {
        &self.x
    }

    pub fn y_outcomes(&self) -> &[String] {
        &self.y
    }

    pub fn probs(&self) -> &[Vec<T>] {
        &self.probs
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn ny(&self) -> usize {
        self.y.len()
    }

    pub fn marginal_x(&self) -> DiscreteDist<T> {
        let p: Vec<T> = self.probs.iter().map(|r| pairwise_sum(r)).collect();
        DiscreteDist::new(self.x.clone(), p).expect("rows of a valid joint")
    }

    pub fn marginal_y(&self) -> DiscreteDist<T> {
        let p: Vec<T> = (0..self.ny())
            .map(|j| {
                let col: Vec<T> = self.probs.iter().map(|r| r[j]).collect();
                pairwise_sum(&col)
            })
            .collect();
        DiscreteDist::new(self.y.clone(), p).expect("columns of a valid joint")
    }

    /// `P_{Y|X=x_i}`; undefined when the row carries no mass.
    pub fn conditional(&self, i: usize) -> Result<DiscreteDist<T>> {
        let row = &self.probs[i];
        let m = pairwise_sum(row);
        if m <= T::zero() {
            return Err(Error::UndefinedConditional(self.x[i].clone()));
        }
        let p = row.iter().map(|v| *v / m).collect();
        DiscreteDist::new(self.y.clone(), p)
    }

    /// All conditional rows, `None` where undefined.
    pub fn conditionals(&self) -> Vec<Option<DiscreteDist<T>>> {
        (0..self.nx()).map(|i| self.conditional(i).ok()).collect()
    }

    /// `(P_X, P_Y, rows of P_{Y|X})`.
    #[allow(clippy::type_complexity)]
    pub fn marginals(&self) -> (DiscreteDist<T>, DiscreteDist<T>, Vec<Option<DiscreteDist<T>>>) {
        (self.marginal_x(), self.marginal_y(), self.conditionals())
    }

    /// Flat distribution over `Z = X × Y`, row-major, labels `"x,y"`.
    pub fn flatten(&self) -> DiscreteDist<T> {
        let mut labels = Vec::with_capacity(self.nx() * self.ny());
        for xi in &self.x {
            for yj in &self.y {
                labels.push(format!("{xi},{yj}"));
            }
        }
        let p = self.probs.iter().flatten().copied().collect();
        DiscreteDist::new(labels, p).expect("valid joint flattens")
    }

    /// Inverse of [`flatten`](Self::flatten) for a row-major probability vector.
    pub fn from_flat(x: Vec<String>, y: Vec<String>, flat: &[T]) -> Result<Self> {
        if flat.len() != x.len() * y.len() {
            return Err(Error::InvalidArgument("flat length must be |X||Y|".into()));
        }
        let probs = flat.chunks(y.len()).map(<[T]>::to_vec).collect();
        Self::new(x, y, probs)
    }

    /// Same shape, new probabilities from a row-major vector.
    pub fn with_flat(&self, flat: &[T]) -> Result<Self> {
        Self::from_flat(self.x.clone(), self.y.clone(), flat)
    }

    pub fn cast<U: Real>(&self) -> JointDiscrete<U> {
        JointDiscrete {
            x: self.x.clone(),
            y: self.y.clone(),
            probs: self
                .probs
                .iter()
                .map(|r| r.iter().map(|p| lit(to_f64(*p))).collect())
                .collect(),
        }
    }
}

impl<T: Real> Sample for JointDiscrete<T> {
    type Item = (String, String);
    fn sample_with<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<(String, String)> {
        let flat = self.flatten();
        let ny = self.ny();
        flat.sample_indices(n, rng)
            .into_iter()
            .map(|k| (self.x[k / ny].clone(), self.y[k % ny].clone()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empirical_counts() {
        let d = DiscreteDist::<f64>::empirical(&["a", "a", "b", "a"], &labels(&["a", "b"])).unwrap();
        assert_eq!(d.probs(), &[0.75, 0.25]);
        let d = DiscreteDist::<f64>::empirical(&["a"], &labels(&["a", "b", "c"])).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn empirical_rejects_unknown_label() {
        let e = DiscreteDist::<f64>::empirical(&["a", "z"], &labels(&["a", "b"])).unwrap_err();
        assert_eq!(e, Error::UnknownOutcome("z".into()));
    }

    #[test]
    fn constructor_rejects_bad_vectors() {
        assert!(DiscreteDist::<f64>::new(vec!["a", "b"], vec![0.5, 0.6]).is_err());
        assert!(DiscreteDist::<f64>::new(vec!["a", "b"], vec![1.5, -0.5]).is_err());
        assert!(DiscreteDist::<f64>::new(vec!["a", "a"], vec![0.5, 0.5]).is_err());
        assert!(DiscreteDist::<f64>::new(vec!["a", "b"], vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(DiscreteDist::<f64>::new(vec!["a", "b"], vec![0.5, 0.5 + 1e-11]).is_err());
    }

    #[test]
    fn sampling_zero_and_point_mass() {
        let d = DiscreteDist::<f64>::new(vec!["only"], vec![1.0]).unwrap();
        assert!(d.sample(0, 3).is_empty());
        assert_eq!(d.sample(5, 3), vec!["only".to_string(); 5]);
    }

    #[test]
    fn sampling_is_deterministic() {
        let d = DiscreteDist::<f64>::new(vec!["a", "b", "c"], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(d.sample(50, 11), d.sample(50, 11));
    }

    #[test]
    fn joint_marginals_and_conditionals() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let (px, py, rows) = j.marginals();
        assert_eq!(px.probs(), &[0.5, 0.5]);
        assert_eq!(py.probs(), &[0.5, 0.5]);
        let r0 = rows[0].as_ref().unwrap();
        assert!((r0.probs()[0] - 0.8).abs() < 1e-15);
        assert!((r0.probs()[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_row_conditional_is_undefined() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.5, 0.5], vec![0.0, 0.0]]).unwrap();
        assert_eq!(
            j.conditional(1).unwrap_err(),
            Error::UndefinedConditional("1".into())
        );
        assert!(j.conditional(0).is_ok());
    }

    #[test]
    fn product_marginals_exact() {
        let px = DiscreteDist::<f64>::indexed(vec![0.5, 0.5]).unwrap();
        let py = DiscreteDist::<f64>::indexed(vec![0.3, 0.7]).unwrap();
        let j = JointDiscrete::product(&px, &py).unwrap();
        assert_eq!(j.marginal_x().probs(), px.probs());
        assert_eq!(j.marginal_y().probs(), py.probs());
        for r in j.conditionals() {
            assert_eq!(r.unwrap().probs(), py.probs());
        }
    }

    #[test]
    fn json_round_trip_with_numeric_labels() {
        let d: DiscreteDist<f64> =
            serde_json::from_str(r#"{"outcomes":[0,0.5,"x"],"probs":[0.2,0.3,0.5]}"#).unwrap();
        assert_eq!(d.outcomes(), &labels(&["0", "0.5", "x"]));
        let s = serde_json::to_string(&d).unwrap();
        let back: DiscreteDist<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn joint_json_round_trip() {
        let j = JointDiscrete::<f64>::indexed(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let s = serde_json::to_string(&j).unwrap();
        assert_eq!(serde_json::from_str::<JointDiscrete<f64>>(&s).unwrap(), j);
    }

    #[test]
    fn pad_and_align() {
        let p = DiscreteDist::<f64>::new(vec!["a", "b"], vec![0.5, 0.5]).unwrap();
        let q = DiscreteDist::<f64>::new(vec!["b", "c"], vec![0.5, 0.5]).unwrap();
        let (pa, qa) = p.align(&q).unwrap();
        assert_eq!(pa.outcomes(), qa.outcomes());
        assert_eq!(pa.probs(), &[0.5, 0.5, 0.0]);
        assert_eq!(qa.probs(), &[0.0, 0.5, 0.5]);
    }

    #[test]
    fn f32_instantiation() {
        let d = DiscreteDist::<f32>::indexed(vec![0.25, 0.75]).unwrap();
        assert!((d.mean().unwrap() - 0.75).abs() < 1e-6);
    }
}
