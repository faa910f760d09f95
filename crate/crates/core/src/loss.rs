//! Loss functions `ℓ(z, a)` and the range / Lipschitz metadata the bound
//! evaluators consume.

use serde::{Deserialize, Serialize};

use crate::dist::{format_real, DiscreteDist, GaussianScalar};
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};
use crate::transport::Metric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossKind {
    Log,
    Quadratic,
    #[serde(alias = "zero_one", alias = "zeroone", alias = "01")]
    ZeroOne,
    Absolute,
    Table,
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            LossKind::Log => "log",
            LossKind::Quadratic => "quadratic",
            LossKind::ZeroOne => "zero-one",
            LossKind::Absolute => "absolute",
            LossKind::Table => "table",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "log" => Ok(LossKind::Log),
            "quadratic" | "squared" => Ok(LossKind::Quadratic),
            "zero-one" | "zero_one" | "zeroone" | "01" => Ok(LossKind::ZeroOne),
            "absolute" => Ok(LossKind::Absolute),
            "table" => Ok(LossKind::Table),
            other => Err(Error::InvalidLoss(format!(
                "unknown loss kind `{other}` (expected log, quadratic, zero-one, absolute, table)"
            ))),
        }
    }
}

/// Finite loss matrix: rows are outcomes, columns are actions.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable<T: Real> {
    outcomes: Vec<String>,
    actions: Vec<String>,
    values: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    outcomes: Vec<serde_json::Value>,
    actions: Vec<serde_json::Value>,
    values: Vec<Vec<f64>>,
}

fn lab(v: serde_json::Value) -> std::result::Result<String, String> {
    match v {
        serde_json::Value::String(s) => Ok(s),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        other => Err(format!("unsupported label {other}")),
    }
}

impl<T: Real> LossTable<T> {
    pub fn new<S: Into<String>>(outcomes: Vec<S>, actions: Vec<S>, values: Vec<Vec<T>>) -> Result<Self> {
        let outcomes: Vec<String> = outcomes.into_iter().map(Into::into).collect();
        let actions: Vec<String> = actions.into_iter().map(Into::into).collect();
        if outcomes.is_empty() || actions.is_empty() {
            return Err(Error::InvalidLoss("loss table needs outcomes and actions".into()));
        }
        if values.len() != outcomes.len() || values.iter().any(|r| r.len() != actions.len()) {
            return Err(Error::InvalidLoss(format!(
                "loss table must be {}x{}",
                outcomes.len(),
                actions.len()
            )));
        }
        if let Some((i, j)) = values.iter().enumerate().find_map(|(i, r)| {
            r.iter().position(|v| !v.is_finite()).map(|j| (i, j))
        }) {
            return Err(Error::InvalidLoss(format!("entry ({i},{j}) is not finite")));
        }
        Ok(Self {
            outcomes,
            actions,
            values,
        })
    }

    /// Table with indexed labels on both axes.
    pub fn indexed(values: Vec<Vec<T>>) -> Result<Self> {
        let nz = values.len();
        let na = values.first().map_or(0, Vec::len);
        Self::new(
            (0..nz).map(|i| i.to_string()).collect(),
            (0..na).map(|i| i.to_string()).collect(),
            values,
        )
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn actions(&self) -> &[String] {
        &self.actions
    }

    pub fn values(&self) -> &[Vec<T>] {
        &self.values
    }

    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn row_of(&self, z: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == z)
    }

    pub fn get(&self, z: &str, a: usize) -> Result<T> {
        let i = self
            .row_of(z)
            .ok_or_else(|| Error::UnknownOutcome(z.to_string()))?;
        self.values[i]
            .get(a)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("action column {a} out of range")))
    }
}

impl<T: Real> Serialize for LossTable<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let l = |v: &[String]| v.iter().map(|x| serde_json::Value::String(x.clone())).collect();
        TableJson {
            outcomes: l(&self.outcomes),
            actions: l(&self.actions),
            values: self
                .values
                .iter()
                .map(|r| r.iter().map(|v| to_f64(*v)).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for LossTable<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = TableJson::deserialize(d)?;
        let c = |v: Vec<serde_json::Value>| {
            v.into_iter()
                .map(lab)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(serde::de::Error::custom)
        };
        let outcomes = c(raw.outcomes)?;
        let actions = c(raw.actions)?;
        let values = raw
            .values
            .into_iter()
            .map(|r| r.into_iter().map(lit).collect())
            .collect();
        LossTable::new(outcomes, actions, values).map_err(serde::de::Error::custom)
    }
}

/// An action in whichever action space the loss kind uses.
#[derive(Debug, Clone, PartialEq)]
pub enum Action<T: Real> {
    /// Predictive distribution (log loss).
    Dist(DiscreteDist<T>),
    /// Predictive Gaussian density (log loss on the line).
    Gaussian(GaussianScalar<T>),
    /// Point estimate (quadratic, absolute).
    Real(T),
    /// Guessed outcome (zero-one).
    Outcome(String),
    /// Column of a loss table.
    Column(usize),
}

impl<T: Real> Action<T> {
    /// Short human-readable rendering for reports.
    pub fn describe(&self, spec: &LossSpec<T>) -> String {
        match self {
            Action::Dist(_) | Action::Gaussian(_) => "self".to_string(),
            Action::Real(v) => format_real(*v),
            Action::Outcome(o) => o.clone(),
            Action::Column(j) => spec
                .table
                .as_ref()
                .and_then(|t| t.actions.get(*j).cloned())
                .unwrap_or_else(|| j.to_string()),
        }
    }
}

/// A loss function with optional declared metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec<T: Real> {
    pub kind: LossKind,
    pub table: Option<LossTable<T>>,
    pub range: Option<(T, T)>,
    pub lipschitz: Option<T>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound = "")]
struct SpecJson<T: Real> {
    kind: LossKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<LossTable<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lipschitz: Option<f64>,
}

impl<T: Real> Serialize for LossSpec<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SpecJson {
            kind: self.kind,
            table: self.table.clone(),
            range: self.range.map(|(a, b)| [to_f64(a), to_f64(b)]),
            lipschitz: self.lipschitz.map(to_f64),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for LossSpec<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SpecJson::<T>::deserialize(d)?;
        let mut spec = LossSpec {
            kind: raw.kind,
            table: raw.table,
            range: None,
            lipschitz: None,
        };
        if let Some([a, b]) = raw.range {
            spec = spec.with_range(lit(a), lit(b)).map_err(serde::de::Error::custom)?;
        }
        if let Some(r) = raw.lipschitz {
            spec = spec.with_lipschitz(lit(r)).map_err(serde::de::Error::custom)?;
        }
        spec.validate().map_err(serde::de::Error::custom)?;
        Ok(spec)
    }
}

impl<T: Real> LossSpec<T> {
    pub fn canonical(kind: LossKind) -> Result<Self> {
        if kind == LossKind::Table {
            return Err(Error::InvalidLoss("table loss requires a table".into()));
        }
        Ok(Self {
            kind,
            table: None,
            range: None,
            lipschitz: None,
        })
    }

    pub fn log() -> Self {
        Self::canonical(LossKind::Log).expect("canonical")
    }

    pub fn quadratic() -> Self {
        Self::canonical(LossKind::Quadratic).expect("canonical")
    }

    pub fn zero_one() -> Self {
        Self::canonical(LossKind::ZeroOne).expect("canonical")
    }

    pub fn absolute() -> Self {
        Self::canonical(LossKind::Absolute).expect("canonical")
    }

    pub fn table(table: LossTable<T>) -> Self {
        Self {
            kind: LossKind::Table,
            table: Some(table),
            range: None,
            lipschitz: None,
        }
    }

    /// Metric loss `ℓ(z, a) = d(z, a)` with the action space equal to `Z`.
    pub fn from_metric(metric: &Metric<T>) -> Result<Self> {
        let labels = metric.labels().to_vec();
        let t = LossTable::new(labels.clone(), labels, metric.matrix().to_vec())?;
        Ok(Self::table(t))
    }

    pub fn with_range(mut self, lo: T, hi: T) -> Result<Self> {
        if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidLoss(format!("bad range [{lo}, {hi}]")));
        }
        self.range = Some((lo, hi));
        self.validate()?;
        Ok(self)
    }

    pub fn with_lipschitz(mut self, rho: T) -> Result<Self> {
        if !(rho >= T::zero()) {
            return Err(Error::InvalidLoss(format!("lipschitz constant {rho} < 0")));
        }
        self.lipschitz = Some(rho);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, &self.table) {
            (LossKind::Table, None) => {
                return Err(Error::InvalidLoss("table loss requires a table".into()))
            }
            (k, Some(_)) if k != LossKind::Table => {
                return Err(Error::InvalidLoss(format!("{k} loss does not take a table")))
            }
            _ => {}
        }
        if let (Some((lo, hi)), Some(t)) = (self.range, &self.table) {
            for (i, r) in t.values.iter().enumerate() {
                for (j, v) in r.iter().enumerate() {
                    if *v < lo || *v > hi {
                        return Err(Error::InvalidLoss(format!(
                            "entry ({i},{j}) = {v} outside declared range [{lo}, {hi}]"
                        )));
                    }
                }
            }
        }
        if let (Some((lo, hi)), LossKind::ZeroOne) = (self.range, self.kind) {
            if lo > T::zero() || hi < T::one() {
                return Err(Error::InvalidLoss("zero-one loss takes values 0 and 1".into()));
            }
        }
        Ok(())
    }

    /// Whether every value of the loss lies in `[0, 1]`.
    pub fn is_unit_bounded(&self) -> bool {
        match self.kind {
            LossKind::ZeroOne => true,
            LossKind::Table => self.table.as_ref().is_some_and(|t| {
                t.values
                    .iter()
                    .flatten()
                    .all(|v| *v >= T::zero() && *v <= T::one())
            }),
            _ => self
                .range
                .is_some_and(|(a, b)| a >= T::zero() && b <= T::one()),
        }
    }

    /// All actions when the action space is finite relative to `support`.
    pub fn finite_actions(&self, support: &[String]) -> Option<Vec<Action<T>>> {
        match self.kind {
            LossKind::Table => Some(
                (0..self.table.as_ref()?.n_actions())
                    .map(Action::Column)
                    .collect(),
            ),
            LossKind::ZeroOne => Some(support.iter().cloned().map(Action::Outcome).collect()),
            _ => None,
        }
    }
}

/// `ℓ(z, a)`; the log loss returns `+∞` at zero predicted probability.
pub fn eval_loss<T: Real>(spec: &LossSpec<T>, z: &str, a: &Action<T>) -> Result<T> {
    let num = || -> Result<T> {
        z.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(lit)
            .ok_or_else(|| Error::InvalidArgument(format!("outcome `{z}` is not numeric")))
    };
    match (spec.kind, a) {
        (LossKind::Log, Action::Dist(q)) => {
            let p = q.prob(z);
            Ok(if p > T::zero() { -p.ln() } else { T::infinity() })
        }
        (LossKind::Log, Action::Gaussian(g)) => Ok(-g.ln_pdf(num()?)),
        (LossKind::Quadratic, Action::Real(v)) => {
            let d = num()? - *v;
            Ok(d * d)
        }
        (LossKind::Absolute, Action::Real(v)) => Ok((num()? - *v).abs()),
        (LossKind::ZeroOne, Action::Outcome(o)) => {
            Ok(if o == z { T::zero() } else { T::one() })
        }
        (LossKind::Table, Action::Column(j)) => spec
            .table
            .as_ref()
            .ok_or_else(|| Error::InvalidLoss("table loss without table".into()))?
            .get(z, *j),
        (k, a) => Err(Error::InvalidArgument(format!(
            "action {a:?} is not in the action space of the {k} loss"
        ))),
    }
}

/// `ℓ(z, a)` for every `z` in `support`.
pub fn column<T: Real>(spec: &LossSpec<T>, support: &[String], a: &Action<T>) -> Result<Vec<T>> {
    support.iter().map(|z| eval_loss(spec, z, a)).collect()
}

/// Like [`column`] but outcomes absent from a loss table map to 0 when
/// `mass` says they carry no probability.
pub fn column_masked<T: Real>(
    spec: &LossSpec<T>,
    support: &[String],
    mass: &[bool],
    a: &Action<T>,
) -> Result<Vec<T>> {
    support
        .iter()
        .zip(mass)
        .map(|(z, m)| match eval_loss(spec, z, a) {
            Err(Error::UnknownOutcome(_)) if !*m => Ok(T::zero()),
            other => other,
        })
        .collect()
}

/// Tight `[min, max]` of `ℓ(·, a)` over the points in `support`; falls back to
/// the declared range when the column is unbounded.
pub fn loss_range<T: Real>(spec: &LossSpec<T>, support: &[String], a: &Action<T>) -> Result<(T, T)> {
    if support.is_empty() {
        return Err(Error::Empty);
    }
    let col = column(spec, support, a)?;
    let lo = col.iter().copied().fold(T::infinity(), T::min);
    let hi = col.iter().copied().fold(T::neg_infinity(), T::max);
    if lo.is_finite() && hi.is_finite() {
        return Ok((lo, hi));
    }
    spec.range.ok_or_else(|| {
        Error::NotApplicable(format!(
            "{} loss is unbounded at this action and no range is declared",
            spec.kind
        ))
    })
}

/// Smallest `ρ` with `|c_i − c_j| ≤ ρ d_ij` on every pair; `+∞` when two
/// points at distance zero carry different losses.
pub fn lipschitz_constant<T: Real>(col: &[T], metric: &[Vec<T>]) -> T {
    let mut rho = T::zero();
    for i in 0..col.len() {
        for j in (i + 1)..col.len() {
            let diff = (col[i] - col[j]).abs();
            if diff == T::zero() {
                continue;
            }
            let d = metric[i][j];
            if d <= T::zero() {
                return T::infinity();
            }
            rho = rho.max(diff / d);
        }
    }
    rho
}

/// Exhaustive pair check of a declared Lipschitz constant for one action.
pub fn check_lipschitz<T: Real>(col: &[T], metric: &[Vec<T>], rho: T) -> Result<()> {
    let slack = T::cmp_tol();
    for i in 0..col.len() {
        for j in (i + 1)..col.len() {
            let diff = (col[i] - col[j]).abs();
            if diff > rho * metric[i][j] + slack {
                return Err(Error::InvalidLoss(format!(
                    "declared lipschitz {rho} violated between outcomes #{i} and #{j}: |Δℓ| = {diff}, d = {}",
                    metric[i][j]
                )));
            }
        }
    }
    Ok(())
}
