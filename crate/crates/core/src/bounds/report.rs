use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::scalar::{lit, to_f64, Real};

/// Which quantity a report bounds from above.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `H(P) − H(Q)`
    Upper,
    /// `H(Q) − H(P)`
    Lower,
    /// `|H(P) − H(Q)|`
    Abs,
    /// A named nonnegative quantity (mutual information, excess risk).
    Quantity,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Upper => "upper",
            Direction::Lower => "lower",
            Direction::Abs => "abs",
            Direction::Quantity => "quantity",
        }
    }
}

/// Evaluator groups, used for filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Tv,
    Kl,
    KlCgf,
    Renyi,
    Chi2,
    Pushforward,
    Wasserstein,
    Semidistance,
    Baseline,
    Mi,
    Conditional,
    Mismatch,
}

impl Family {
    pub const ALL: [Family; 12] = [
        Family::Tv,
        Family::Kl,
        Family::KlCgf,
        Family::Renyi,
        Family::Chi2,
        Family::Pushforward,
        Family::Wasserstein,
        Family::Semidistance,
        Family::Baseline,
        Family::Mi,
        Family::Conditional,
        Family::Mismatch,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Tv => "tv",
            Family::Kl => "kl",
            Family::KlCgf => "kl-cgf",
            Family::Renyi => "renyi",
            Family::Chi2 => "chi2",
            Family::Pushforward => "pushforward",
            Family::Wasserstein => "wasserstein",
            Family::Semidistance => "semidistance",
            Family::Baseline => "baseline",
            Family::Mi => "mi",
            Family::Conditional => "conditional",
            Family::Mismatch => "mismatch",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let t = s.trim().to_ascii_lowercase().replace('_', "-");
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.as_str() == t)
            .ok_or_else(|| {
                let names: Vec<&str> = Family::ALL.iter().map(|f| f.as_str()).collect();
                Error::InvalidArgument(format!("unknown bound family `{s}` (expected one of {})", names.join(", ")))
            })
    }
}

/// One evaluated bound.
///
/// Invariant: `applicable == false` implies `value == None`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport<T: Real> {
    pub name: String,
    pub family: Family,
    pub direction: Direction,
    pub value: Option<T>,
    pub applicable: bool,
    pub conditions: Vec<String>,
    pub citation: String,
    pub details: BTreeMap<String, T>,
}

impl<T: Real> BoundReport<T> {
    pub fn new(
        name: impl Into<String>,
        family: Family,
        direction: Direction,
        citation: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            family,
            direction,
            value: None,
            applicable: false,
            conditions: Vec::new(),
            citation: citation.into(),
            details: BTreeMap::new(),
        }
    }

    pub fn condition(mut self, c: impl Into<String>) -> Self {
        self.conditions.push(c.into());
        self
    }

    pub fn detail(mut self, key: &str, v: T) -> Self {
        self.details.insert(key.to_string(), v);
        self
    }

    pub fn with_value(mut self, v: T) -> Self {
        self.value = Some(v);
        self.applicable = true;
        self
    }

    /// Marks the report inapplicable, recording why.
    pub fn fail(mut self, why: impl Into<String>) -> Self {
        self.value = None;
        self.applicable = false;
        self.conditions.push(format!("failed: {}", why.into()));
        self
    }

    /// Whether an applicable bound covers the signed difference `H(P) − H(Q)`
    /// (or the bounded quantity itself for [`Direction::Quantity`]).
    pub fn covers(&self, diff: T, tol: T) -> Option<bool> {
        let v = self.value?;
        let target = match self.direction {
            Direction::Upper | Direction::Quantity => diff,
            Direction::Lower => -diff,
            Direction::Abs => diff.abs(),
        };
        Some(v >= target - tol)
    }
}

fn enc<T: Real>(v: T) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(to_f64(v))
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > T::zero() {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

fn dec<T: Real>(v: &Value) -> Result<T, String> {
    match v {
        Value::Number(n) => n.as_f64().map(lit).ok_or_else(|| format!("bad number {n}")),
        Value::String(s) => match s.as_str() {
            "inf" | "+inf" | "Infinity" => Ok(T::infinity()),
            "-inf" | "-Infinity" => Ok(T::neg_infinity()),
            "nan" | "NaN" => Ok(T::nan()),
            other => Err(format!("bad real `{other}`")),
        },
        other => Err(format!("expected a real, got {other}")),
    }
}

#[derive(Serialize, Deserialize)]
struct ReportJson {
    name: String,
    family: Family,
    direction: Direction,
    value: Value,
    applicable: bool,
    conditions: Vec<String>,
    citation: String,
    #[serde(default)]
    details: BTreeMap<String, Value>,
}

impl<T: Real> Serialize for BoundReport<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ReportJson {
            name: self.name.clone(),
            family: self.family,
            direction: self.direction,
            value: self.value.map(enc).unwrap_or(Value::Null),
            applicable: self.applicable,
            conditions: self.conditions.clone(),
            citation: self.citation.clone(),
            details: self.details.iter().map(|(k, v)| (k.clone(), enc(*v))).collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for BoundReport<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = ReportJson::deserialize(d)?;
        let value = match &raw.value {
            Value::Null => None,
            v => Some(dec(v).map_err(D::Error::custom)?),
        };
        if !raw.applicable && value.is_some() {
            return Err(D::Error::custom("inapplicable report carries a value"));
        }
        let mut details = BTreeMap::new();
        for (k, v) in &raw.details {
            details.insert(k.clone(), dec(v).map_err(D::Error::custom)?);
        }
        Ok(Self {
            name: raw.name,
            family: raw.family,
            direction: raw.direction,
            value,
            applicable: raw.applicable,
            conditions: raw.conditions,
            citation: raw.citation,
            details,
        })
    }
}

/// Upper bounds on `H(P) − H(Q)` and on `H(Q) − H(P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundPair<T: Real> {
    pub upper: BoundReport<T>,
    pub lower: BoundReport<T>,
}

impl<T: Real> BoundPair<T> {
    pub fn into_vec(self) -> Vec<BoundReport<T>> {
        vec![self.upper, self.lower]
    }
}
