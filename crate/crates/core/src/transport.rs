//! Metrics on finite spaces and exact optimal transport by the
//! transportation simplex.

use std::collections::VecDeque;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dist::{format_real, DiscreteDist};
use crate::error::{Error, Result};
use crate::scalar::{lit, pairwise_sum, to_f64, Real};

/// Largest support (after dropping zero-mass atoms) the LP accepts per side.
pub const MAX_SUPPORT: usize = 64;
/// Metric axioms are checked exhaustively up to this many points.
pub const TRIANGLE_CHECK_LIMIT: usize = 32;

/// Distance matrix over labelled points.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric<T: Real> {
    labels: Vec<String>,
    d: Vec<Vec<T>>,
}

#[derive(Serialize, Deserialize)]
struct MetricJson {
    labels: Vec<String>,
    matrix: Vec<Vec<f64>>,
}

impl<T: Real> Serialize for Metric<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MetricJson {
            labels: self.labels.clone(),
            matrix: self
                .d
                .iter()
                .map(|r| r.iter().map(|v| to_f64(*v)).collect())
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for Metric<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = MetricJson::deserialize(d)?;
        let m = raw
            .matrix
            .into_iter()
            .map(|r| r.into_iter().map(lit).collect())
            .collect();
        Metric::new(raw.labels, m).map_err(serde::de::Error::custom)
    }
}

impl<T: Real> Metric<T> {
    /// Validates symmetry, zero diagonal, nonnegativity and, for small
    /// spaces, the triangle inequality.
    pub fn new(labels: Vec<String>, d: Vec<Vec<T>>) -> Result<Self> {
        let n = labels.len();
        if d.len() != n || d.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetric(format!("matrix must be {n}x{n}")));
        }
        let tol = T::cmp_tol();
        for i in 0..n {
            if d[i][i] != T::zero() {
                return Err(Error::InvalidMetric(format!("d({i},{i}) = {} ≠ 0", d[i][i])));
            }
            for j in 0..n {
                let v = d[i][j];
                if !v.is_finite() || v < T::zero() {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = {v} is not a finite nonnegative number")));
                }
                if (v - d[j][i]).abs() > tol * (T::one() + v.abs()) {
                    return Err(Error::InvalidMetric(format!("asymmetric at ({i},{j})")));
                }
                if i != j && v == T::zero() {
                    return Err(Error::InvalidMetric(format!("distinct points {i},{j} at distance 0")));
                }
            }
        }
        if n <= TRIANGLE_CHECK_LIMIT {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if d[i][k] > d[i][j] + d[j][k] + tol * (T::one() + d[i][k]) {
                            return Err(Error::InvalidMetric(format!(
                                "triangle inequality fails: d({i},{k}) > d({i},{j}) + d({j},{k})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { labels, d })
    }

    /// `|x − y|` on real points.
    pub fn line(values: &[T]) -> Result<Self> {
        let labels = values.iter().map(|v| format_real(*v)).collect();
        let d = values
            .iter()
            .map(|a| values.iter().map(|b| (*a - *b).abs()).collect())
            .collect();
        Self::new(labels, d)
    }

    /// `1{x ≠ y}`.
    pub fn zero_one(labels: Vec<String>) -> Result<Self> {
        let n = labels.len();
        let d = (0..n)
            .map(|i| (0..n).map(|j| if i == j { T::zero() } else { T::one() }).collect())
            .collect();
        Self::new(labels, d)
    }

    /// Euclidean distance between points of `R^k`.
    pub fn euclidean(labels: Vec<String>, points: &[Vec<T>]) -> Result<Self> {
        if points.len() != labels.len() {
            return Err(Error::InvalidMetric("one point per label required".into()));
        }
        let d = points
            .iter()
            .map(|a| {
                points
                    .iter()
                    .map(|b| {
                        a.iter()
                            .zip(b)
                            .map(|(x, y)| (*x - *y) * (*x - *y))
                            .fold(T::zero(), |s, v| s + v)
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        Self::new(labels, d)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrix(&self) -> &[Vec<T>] {
        &self.d
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Optimal coupling and its cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan<T: Real> {
    pub coupling: Vec<Vec<T>>,
    pub cost: T,
}

impl<T: Real> TransportPlan<T> {
    /// Writes `(row, col, mass)` for every positive entry.
    pub fn write_csv<W: Write>(&self, labels: &[String], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["row", "col", "mass"])?;
        for (i, r) in self.coupling.iter().enumerate() {
            for (j, m) in r.iter().enumerate() {
                if *m > T::zero() {
                    w.write_record([
                        labels[i].as_str(),
                        labels[j].as_str(),
                        &format!("{:.16e}", to_f64(*m)),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Exact `W_d(P, Q)` with `P`, `Q` placed on the metric's points.
pub fn wasserstein1_discrete<T: Real>(
    p: &DiscreteDist<T>,
    q: &DiscreteDist<T>,
    metric: &Metric<T>,
) -> Result<TransportPlan<T>> {
    let p = p.pad_to(metric.labels())?;
    let q = q.pad_to(metric.labels())?;
    solve_transport(p.probs(), q.probs(), metric.matrix())
}

/// Balanced transportation problem `min Σ c_ij x_ij` with row sums `a` and
/// column sums `b`.
pub fn solve_transport<T: Real>(a: &[T], b: &[T], cost: &[Vec<T>]) -> Result<TransportPlan<T>> {
    let rows: Vec<usize> = (0..a.len()).filter(|i| a[*i] > T::zero()).collect();
    let cols: Vec<usize> = (0..b.len()).filter(|j| b[*j] > T::zero()).collect();
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Empty);
    }
    if rows.len() > MAX_SUPPORT || cols.len() > MAX_SUPPORT {
        return Err(Error::TooLarge(format!(
            "transport supports {}x{} exceed {MAX_SUPPORT}x{MAX_SUPPORT}",
            rows.len(),
            cols.len()
        )));
    }
    let sa: Vec<T> = rows.iter().map(|i| a[*i]).collect();
    let sb: Vec<T> = cols.iter().map(|j| b[*j]).collect();
    let c: Vec<Vec<T>> = rows
        .iter()
        .map(|i| cols.iter().map(|j| cost[*i][*j]).collect())
        .collect();
    let sub = Simplex::new(&sa, &sb, c).run()?;
    let mut coupling = vec![vec![T::zero(); b.len()]; a.len()];
    let mut terms = Vec::new();
    for (bi, bj, x) in sub {
        let (i, j) = (rows[bi], cols[bj]);
        coupling[i][j] = x;
        terms.push(x * cost[i][j]);
    }
    Ok(TransportPlan {
        coupling,
        cost: pairwise_sum(&terms),
    })
}

struct Simplex<T: Real> {
    m: usize,
    n: usize,
    c: Vec<Vec<T>>,
    /// Basic cells `(row, col, flow)`; always a spanning tree of `m + n − 1` edges.
    basis: Vec<(usize, usize, T)>,
}

impl<T: Real> Simplex<T> {
    /// Northwest-corner start.
    fn new(a: &[T], b: &[T], c: Vec<Vec<T>>) -> Self {
        let (m, n) = (a.len(), b.len());
        let mut ra = a.to_vec();
        let mut rb = b.to_vec();
        let mut basis = Vec::with_capacity(m + n - 1);
        let (mut i, mut j) = (0, 0);
        loop {
            let x = ra[i].min(rb[j]).max(T::zero());
            basis.push((i, j, x));
            ra[i] = ra[i] - x;
            rb[j] = rb[j] - x;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if j == n - 1 || (i < m - 1 && ra[i] <= rb[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self { m, n, c, basis }
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        // nodes: rows 0..m, columns m..m+n; payload is (neighbor, basis index)
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, (i, j, _)) in self.basis.iter().enumerate() {
            adj[*i].push((self.m + *j, k));
            adj[self.m + *j].push((*i, k));
        }
        adj
    }

    fn potentials(&self, adj: &[Vec<(usize, usize)>]) -> (Vec<T>, Vec<T>) {
        let mut pot = vec![T::nan(); self.m + self.n];
        pot[0] = T::zero();
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            for (v, k) in &adj[u] {
                if pot[*v].is_nan() {
                    let (i, j, _) = self.basis[*k];
                    // u_i + v_j = c_ij
                    pot[*v] = self.c[i][j] - pot[u];
                    queue.push_back(*v);
                }
            }
        }
        let (u, v) = pot.split_at(self.m);
        (u.to_vec(), v.to_vec())
    }

    /// Basis indices on the tree path from row `i` to column `j`.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Vec<usize> {
        let target = self.m + j;
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(u) = queue.pop_front() {
            if u == target {
                break;
            }
            for (v, k) in &adj[u] {
                if !seen[*v] {
                    seen[*v] = true;
                    parent[*v] = Some((u, *k));
                    queue.push_back(*v);
                }
            }
        }
        let mut edges = Vec::new();
        let mut cur = target;
        while let Some((u, k)) = parent[cur] {
            edges.push(k);
            cur = u;
        }
        edges.reverse();
        edges
    }

    fn run(mut self) -> Result<Vec<(usize, usize, T)>> {
        let scale = self
            .c
            .iter()
            .flatten()
            .fold(T::zero(), |s, v| s.max(v.abs()));
        let tol = T::cmp_tol() * (T::one() + scale);
        let cap = 50 * (self.m + self.n) * (self.m + self.n) + 1000;
        for _ in 0..cap {
            let adj = self.adjacency();
            let (u, v) = self.potentials(&adj);
            let mut in_basis = vec![vec![false; self.n]; self.m];
            for (i, j, _) in &self.basis {
                in_basis[*i][*j] = true;
            }
            let mut enter: Option<(usize, usize, T)> = None;
            for i in 0..self.m {
                for j in 0..self.n {
                    if in_basis[i][j] {
                        continue;
                    }
                    let r = self.c[i][j] - u[i] - v[j];
                    if r < -tol && enter.is_none_or(|(_, _, best)| r < best) {
                        enter = Some((i, j, r));
                    }
                }
            }
            let Some((ei, ej, _)) = enter else {
                return Ok(self.basis);
            };
            let path = self.path(&adj, ei, ej);
            // path edges at even positions lose flow, odd positions gain
            let mut leave = path[0];
            for k in path.iter().step_by(2) {
                if self.basis[*k].2 < self.basis[leave].2 {
                    leave = *k;
                }
            }
            let theta = self.basis[leave].2;
            for (pos, k) in path.iter().enumerate() {
                let f = &mut self.basis[*k].2;
                *f = if pos % 2 == 0 { (*f - theta).max(T::zero()) } else { *f + theta };
            }
            self.basis[leave] = (ei, ej, theta);
        }
        Err(Error::NonConvergence(format!(
            "transportation simplex did not reach optimality in {cap} pivots"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::{tv, wasserstein1_1d};

    fn lab(n: usize) -> Vec<String> {
        (0..n).map(|i| i.to_string()).collect()
    }

    #[test]
    fn zero_one_metric_gives_tv() {
        let p = DiscreteDist::<f64>::indexed(vec![0.2, 0.5, 0.3]).unwrap();
        let q = DiscreteDist::<f64>::indexed(vec![0.4, 0.1, 0.5]).unwrap();
        let m = Metric::zero_one(lab(3)).unwrap();
        let plan = wasserstein1_discrete(&p, &q, &m).unwrap();
        assert!((plan.cost - tv(&p, &q).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn identical_gives_zero_diagonal_plan() {
        let p = DiscreteDist::<f64>::indexed(vec![0.2, 0.5, 0.3]).unwrap();
        let m = Metric::line(&[0.0, 1.0, 2.0]).unwrap();
        let plan = wasserstein1_discrete(&p.pad_to(m.labels()).unwrap(), &p.pad_to(m.labels()).unwrap(), &m).unwrap();
        assert_eq!(plan.cost, 0.0);
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert_eq!(plan.coupling[i][j], 0.0);
                }
            }
        }
    }

    #[test]
    fn single_route() {
        let m = Metric::line(&[0.0, 1.0, 2.0]).unwrap();
        let p = DiscreteDist::<f64>::point_mass(m.labels().to_vec(), 0).unwrap();
        let q = DiscreteDist::<f64>::point_mass(m.labels().to_vec(), 2).unwrap();
        assert_eq!(wasserstein1_discrete(&p, &q, &m).unwrap().cost, 2.0);
    }

    #[test]
    fn line_matches_cdf_formula() {
        let vals = [0.0, 0.5, 1.7, 2.0, 3.5];
        let m = Metric::line(&vals).unwrap();
        let p = DiscreteDist::<f64>::on_reals(&vals, vec![0.1, 0.3, 0.2, 0.25, 0.15]).unwrap();
        let q = DiscreteDist::<f64>::on_reals(&vals, vec![0.35, 0.05, 0.1, 0.1, 0.4]).unwrap();
        let lp = wasserstein1_discrete(&p, &q, &m).unwrap();
        let cdf = wasserstein1_1d(&p, &q).unwrap();
        assert!((lp.cost - cdf).abs() < 1e-12);
        for (i, r) in lp.coupling.iter().enumerate() {
            let s: f64 = r.iter().sum();
            assert!((s - p.probs()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn metric_validation() {
        assert!(Metric::<f64>::new(lab(2), vec![vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        assert!(Metric::<f64>::new(lab(2), vec![vec![1.0, 1.0], vec![1.0, 0.0]]).is_err());
        let bad = vec![
            vec![0.0, 1.0, 5.0],
            vec![1.0, 0.0, 1.0],
            vec![5.0, 1.0, 0.0],
        ];
        assert!(matches!(Metric::<f64>::new(lab(3), bad), Err(Error::InvalidMetric(_))));
    }

    #[test]
    fn rejects_oversized_supports() {
        let n = MAX_SUPPORT + 1;
        let a = vec![1.0 / n as f64; n];
        let c = vec![vec![1.0; n]; n];
        assert!(matches!(solve_transport(&a, &a, &c), Err(Error::TooLarge(_))));
    }

    #[test]
    fn plan_csv() {
        let p = DiscreteDist::<f64>::indexed(vec![0.5, 0.5]).unwrap();
        let q = DiscreteDist::<f64>::indexed(vec![1.0, 0.0]).unwrap();
        let m = Metric::zero_one(lab(2)).unwrap();
        let plan = wasserstein1_discrete(&p, &q, &m).unwrap();
        let mut buf = Vec::new();
        plan.write_csv(m.labels(), &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("row,col,mass\n"));
        assert_eq!(s.lines().count(), 3);
    }
}
