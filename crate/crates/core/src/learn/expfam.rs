use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{DiscreteDist, JointDiscrete};
use crate::divergence::tv;
use crate::entropy::{conditional_entropy, rule_risk};
use crate::error::{Error, Result};
use crate::linalg::{cholesky, cholesky_solve, norm2, Matrix};
use crate::loss::LossSpec;
use crate::rng::{stream, sweep_stream};
use crate::scalar::{lit, mean, median, pairwise_sum, to_f64, Real};

/// Largest natural-parameter dimension accepted.
pub const MAX_DIM: usize = 8;
/// Largest spread of `θᵀφ(z) + log ν(z)` across `z` before `A(θ)` is refused.
pub const EXPONENT_GUARD: f64 = 700.0;
/// Gradient tolerance `‖∇A(θ) − μ‖∞` for an accepted solve.
pub const GRAD_TOL: f64 = 1e-8;
pub const MAX_ITER: usize = 200;
/// Relative Newton-step size below which a solve with small residual is accepted.
pub const STEP_TOL: f64 = 1e-9;

/// `Q_θ(z) = ν(z) exp{θᵀφ(z) − A(θ)}` on a finite `Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpFamily<T: Real> {
    outcomes: Vec<String>,
    phi: Vec<Vec<T>>,
    nu: Vec<T>,
    log_nu: Vec<T>,
}

#[derive(Serialize, Deserialize)]
pub struct ExpFamilyJson {
    pub outcomes: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<Vec<f64>>,
}

impl<T: Real> Serialize for ExpFamily<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ExpFamilyJson {
            outcomes: self.outcomes.clone(),
            phi: self.phi.iter().map(|r| r.iter().map(|v| to_f64(*v)).collect()).collect(),
            nu: Some(self.nu.iter().map(|v| to_f64(*v)).collect()),
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for ExpFamily<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ExpFamilyJson::deserialize(d)?;
        let n = raw.outcomes.len();
        let nu = raw.nu.unwrap_or_else(|| vec![1.0; n]);
        ExpFamily::new(
            raw.outcomes,
            raw.phi.into_iter().map(|r| r.into_iter().map(lit).collect()).collect(),
            nu.into_iter().map(lit).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Result of a moment-matching solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection<T: Real> {
    pub theta: Vec<T>,
    pub q: DiscreteDist<T>,
    /// `‖∇A(θ) − μ‖∞` at the returned `θ`.
    pub residual: T,
    pub iterations: usize,
}

impl<T: Real> ExpFamily<T> {
    /// Validates shapes, `ν > 0`, and minimality: the `ν`-weighted covariance
    /// of `φ` must be positive definite, and a probe grid of parameters must
    /// give pairwise distinct distributions.
    pub fn new(outcomes: Vec<String>, phi: Vec<Vec<T>>, nu: Vec<T>) -> Result<Self> {
        if outcomes.is_empty() || phi.len() != outcomes.len() || nu.len() != outcomes.len() {
            return Err(Error::InvalidArgument("one potential row and one base weight per outcome".into()));
        }
        let d = phi[0].len();
        if d == 0 || d > MAX_DIM || phi.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument(format!("potential dimension must be 1..={MAX_DIM} and uniform")));
        }
        if phi.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("potential entries must be finite".into()));
        }
        if nu.iter().any(|v| !(*v > T::zero()) || !v.is_finite()) {
            return Err(Error::InvalidArgument("base weights must be positive and finite".into()));
        }
        let log_nu = nu.iter().map(|v| v.ln()).collect();
        let fam = Self { outcomes, phi, nu, log_nu };
        let zero = vec![T::zero(); d];
        if cholesky(&fam.covariance(&zero)?).is_err() {
            return Err(Error::InvalidArgument(
                "family is not minimal: φ is affinely dependent on the support".into(),
            ));
        }
        let mut probes = vec![zero];
        for i in 0..d {
            for s in [T::one(), -T::one()] {
                let mut t = vec![T::zero(); d];
                t[i] = s;
                probes.push(t);
            }
            for j in (i + 1)..d {
                let mut t = vec![T::zero(); d];
                t[i] = T::one();
                t[j] = T::one();
                probes.push(t);
            }
        }
        let qs = probes.iter().map(|t| fam.probs(t)).collect::<Result<Vec<_>>>()?;
        for a in 0..qs.len() {
            for b in (a + 1)..qs.len() {
                let gap = qs[a].iter().zip(&qs[b]).map(|(x, y)| (*x - *y).abs()).fold(T::zero(), T::max);
                if !(gap > lit(1e-12)) {
                    return Err(Error::InvalidArgument(format!(
                        "family is not minimal: probes {a} and {b} give the same distribution"
                    )));
                }
            }
        }
        Ok(fam)
    }

    /// `φ(z) = z` with `ν ≡ 1` on `{0, 1}`.
    pub fn bernoulli() -> Self {
        Self::new(
            vec!["0".into(), "1".into()],
            vec![vec![T::zero()], vec![T::one()]],
            vec![T::one(), T::one()],
        )
        .expect("bernoulli family is minimal")
    }

    pub fn dim(&self) -> usize {
        self.phi[0].len()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[String] {
        &self.outcomes
    }

    pub fn potential(&self) -> &[Vec<T>] {
        &self.phi
    }

    pub fn base(&self) -> &[T] {
        &self.nu
    }

    fn check_theta(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(Error::InvalidArgument(format!("θ has length {}, expected {}", theta.len(), self.dim())));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("θ must be finite".into()));
        }
        Ok(())
    }

    /// `θᵀφ(z) + log ν(z)` and its maximum.
    fn exponents(&self, theta: &[T]) -> Result<(Vec<T>, T)> {
        self.check_theta(theta)?;
        let e: Vec<T> = self
            .phi
            .iter()
            .zip(&self.log_nu)
            .map(|(f, l)| f.iter().zip(theta).fold(*l, |s, (a, b)| s + *a * *b))
            .collect();
        let hi = e.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = e.iter().copied().fold(T::infinity(), T::min);
        if hi - lo > lit(EXPONENT_GUARD) {
            return Err(Error::NonConvergence(format!(
                "θ = {:?} spreads the exponents by {} > {EXPONENT_GUARD}",
                theta.iter().map(|v| to_f64(*v)).collect::<Vec<_>>(),
                to_f64(hi - lo)
            )));
        }
        Ok((e, hi))
    }

    /// `A(θ) = log Σ_z ν(z) exp{θᵀφ(z)}` by max-shifted summation.
    pub fn logpartition(&self, theta: &[T]) -> Result<T> {
        let (e, m) = self.exponents(theta)?;
        let s: Vec<T> = e.iter().map(|v| (*v - m).exp()).collect();
        Ok(m + pairwise_sum(&s).ln())
    }

    pub fn probs(&self, theta: &[T]) -> Result<Vec<T>> {
        let (e, m) = self.exponents(theta)?;
        let s: Vec<T> = e.iter().map(|v| (*v - m).exp()).collect();
        let z = pairwise_sum(&s);
        Ok(s.iter().map(|v| *v / z).collect())
    }

    pub fn dist(&self, theta: &[T]) -> Result<DiscreteDist<T>> {
        DiscreteDist::new(self.outcomes.clone(), self.probs(theta)?)
    }

    /// `E_w φ(Z)` for weights aligned with the outcomes.
    fn moment_of(&self, w: &[T]) -> Vec<T> {
        (0..self.dim())
            .map(|k| {
                let t: Vec<T> = w.iter().zip(&self.phi).map(|(p, f)| *p * f[k]).collect();
                pairwise_sum(&t)
            })
            .collect()
    }

    /// `∇A(θ) = E_{Q_θ} φ(Z)`.
    pub fn mean(&self, theta: &[T]) -> Result<Vec<T>> {
        Ok(self.moment_of(&self.probs(theta)?))
    }

    /// `∇²A(θ) = Cov_{Q_θ} φ(Z)`.
    pub fn covariance(&self, theta: &[T]) -> Result<Matrix<T>> {
        let p = self.probs(theta)?;
        let m = self.moment_of(&p);
        let d = self.dim();
        let mut c = vec![vec![T::zero(); d]; d];
        for i in 0..d {
            for j in 0..=i {
                let t: Vec<T> = p
                    .iter()
                    .zip(&self.phi)
                    .map(|(w, f)| *w * (f[i] - m[i]) * (f[j] - m[j]))
                    .collect();
                c[i][j] = pairwise_sum(&t);
                c[j][i] = c[i][j];
            }
        }
        Ok(c)
    }

    /// `E_target φ(Z)`; the target must live on this family's outcomes.
    pub fn moment(&self, target: &DiscreteDist<T>) -> Result<Vec<T>> {
        let t = target.pad_to(&self.outcomes)?;
        Ok(self.moment_of(t.probs()))
    }

    /// `argmin_θ D(target ‖ Q_θ)` via `∇A(θ*) = E_target φ`.
    pub fn project(&self, target: &DiscreteDist<T>) -> Result<Projection<T>> {
        self.project_mean(&self.moment(target)?)
    }

    /// Solves `∇A(θ) = μ` by damped Newton with the exact Hessian.
    ///
    /// A solve is accepted once the gradient residual is below [`GRAD_TOL`]
    /// and the Newton step has shrunk to [`STEP_TOL`]`·(1 + ‖θ‖∞)`. For `μ` on the
    /// boundary of the mean polytope the step never shrinks, so the solve
    /// fails after [`MAX_ITER`] iterations.
    pub fn project_mean(&self, mu: &[T]) -> Result<Projection<T>> {
        if mu.len() != self.dim() || mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("μ must be a finite vector of the family's dimension".into()));
        }
        let grad_tol: T = lit(GRAD_TOL);
        let objective = |t: &[T]| -> Result<T> {
            Ok(self.logpartition(t)? - t.iter().zip(mu).fold(T::zero(), |s, (a, b)| s + *a * *b))
        };
        let inf_norm = |v: &[T]| v.iter().fold(T::zero(), |s, x| s.max(x.abs()));
        let mut theta = vec![T::zero(); self.dim()];
        let mut last_res = T::infinity();
        for it in 0..MAX_ITER {
            let g: Vec<T> = self.mean(&theta)?.iter().zip(mu).map(|(a, b)| *a - *b).collect();
            let res = inf_norm(&g);
            last_res = res;
            let h = self.covariance(&theta)?;
            let step = match newton_step(&h, &g) {
                Some(s) => s,
                None => {
                    return Err(Error::NonConvergence(format!(
                        "Hessian singular at iteration {it} (residual {})",
                        to_f64(res)
                    )))
                }
            };
            let small_step = inf_norm(&step) <= lit::<T>(STEP_TOL) * (T::one() + inf_norm(&theta));
            if res < grad_tol && small_step {
                return self.accept(theta, res, it);
            }
            let f0 = objective(&theta)?;
            let slope = g.iter().zip(&step).fold(T::zero(), |s, (a, b)| s + *a * *b);
            let mut t = T::one();
            let mut moved = false;
            for _ in 0..60 {
                let cand: Vec<T> = theta.iter().zip(&step).map(|(a, b)| *a + t * *b).collect();
                if let Ok(f) = objective(&cand) {
                    if f <= f0 + lit::<T>(1e-4) * t * slope + T::epsilon() * f0.abs() {
                        theta = cand;
                        moved = true;
                        break;
                    }
                }
                t = t / lit(2.0);
            }
            if !moved {
                if res < grad_tol && small_step {
                    return self.accept(theta, res, it);
                }
                return Err(Error::NonConvergence(format!(
                    "line search failed at iteration {it} (residual {})",
                    to_f64(res)
                )));
            }
        }
        Err(Error::NonConvergence(format!(
            "no interior solution of ∇A(θ) = μ after {MAX_ITER} iterations (residual {}, θ = {:?}); μ is on or near the boundary of the mean polytope",
            to_f64(last_res),
            theta.iter().map(|v| to_f64(*v)).collect::<Vec<_>>()
        )))
    }

    fn accept(&self, theta: Vec<T>, residual: T, iterations: usize) -> Result<Projection<T>> {
        Ok(Projection {
            q: self.dist(&theta)?,
            theta,
            residual,
            iterations,
        })
    }
}

/// `−H⁻¹g`, with a small ridge when the factorization fails.
fn newton_step<T: Real>(h: &Matrix<T>, g: &[T]) -> Option<Vec<T>> {
    let neg: Vec<T> = g.iter().map(|v| -*v).collect();
    if let Ok(l) = cholesky(h) {
        return Some(cholesky_solve(&l, &neg));
    }
    let scale = (0..h.len()).fold(T::zero(), |s, i| s + h[i][i]).max(T::min_positive_value());
    for k in [1e-14, 1e-12, 1e-10] {
        let mut r = h.clone();
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = row[i] + lit::<T>(k) * scale;
        }
        if let Ok(l) = cholesky(&r) {
            return Some(cholesky_solve(&l, &neg));
        }
    }
    None
}

pub fn expfam_logpartition<T: Real>(fam: &ExpFamily<T>, theta: &[T]) -> Result<T> {
    fam.logpartition(theta)
}

pub fn expfam_mean<T: Real>(fam: &ExpFamily<T>, theta: &[T]) -> Result<Vec<T>> {
    fam.mean(theta)
}

/// `(θ*, Q_{θ*})` minimizing `D(target ‖ Q_θ)`.
pub fn expfam_project<T: Real>(fam: &ExpFamily<T>, target: &DiscreteDist<T>) -> Result<(Vec<T>, DiscreteDist<T>)> {
    let pr = fam.project(target)?;
    Ok((pr.theta, pr.q))
}

/// One simulated dataset of the projection-learning experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpfamTrial<T: Real> {
    /// `E_P ℓ(Y, ψ_Q̂(X)) − H_ℓ(P_{Y|X}|P_X)`, exact.
    pub excess: T,
    /// `‖θ* − θ̂‖`
    pub theta_gap: T,
    /// `|A(θ*) − A(θ̂)|`
    pub a_gap: T,
    /// `√(2‖μ‖‖θ* − θ̂‖ + 2|A(θ*) − A(θ̂)|)`
    pub estim_term: T,
    /// `2d_TV(P, Q*) + estim_term`
    pub bound: T,
    pub residual: T,
    /// Datasets redrawn because `μ̂` had no interior solution.
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpfamCell<T: Real> {
    pub n: usize,
    pub trials: Vec<ExpfamTrial<T>>,
    pub mean_excess: T,
    pub approx_term: T,
    pub estim_term_median: T,
    pub estim_term_mean: T,
    /// `2d_TV(P,Q*) + √(2‖μ‖·E‖θ* − θ̂‖ + 2E|A(θ*) − A(θ̂)|)`
    pub bound: T,
    pub resamples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpfamExperiment<T: Real> {
    pub theta_star: Vec<T>,
    pub q_star: DiscreteDist<T>,
    pub mu: Vec<T>,
    /// `2d_TV(P, Q*)`
    pub approx_term: T,
    pub cells: Vec<ExpfamCell<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpfamOptions {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Redraws allowed per trial before giving up.
    pub max_resamples: usize,
}

/// Seed offset for the `k`-th redraw of a trial.
fn redraw_seed(seed: u64, k: usize) -> u64 {
    seed.wrapping_add((k as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

/// Learning by projecting the empirical distribution onto `fam` and acting
/// with the Bayes rule of the projection.
pub fn expfam_learning_experiment<T: Real>(
    p: &JointDiscrete<T>,
    fam: &ExpFamily<T>,
    spec: &LossSpec<T>,
    opts: &ExpfamOptions,
) -> Result<ExpfamExperiment<T>> {
    if !spec.is_unit_bounded() {
        return Err(Error::InvalidLoss("the projection corollary needs ℓ ∈ [0,1]".into()));
    }
    if opts.trials == 0 || opts.n_grid.is_empty() || opts.n_grid.contains(&0) {
        return Err(Error::InvalidArgument("need trials ≥ 1 and sample sizes ≥ 1".into()));
    }
    let flat = p.flatten();
    if flat.outcomes() != fam.outcomes() {
        return Err(Error::SupportMismatch(
            "family outcomes must be the flattened `x,y` labels of the joint in row-major order".into(),
        ));
    }
    let star = fam.project(&flat)?;
    let mu = fam.moment(&flat)?;
    let mu_norm = norm2(&mu);
    let a_star = fam.logpartition(&star.theta)?;
    let approx_term = lit::<T>(2.0) * tv(&flat, &star.q)?;
    let (h_p, _) = conditional_entropy(p, spec)?;
    let x = p.x_outcomes().to_vec();
    let y = p.y_outcomes().to_vec();
    let two: T = lit(2.0);

    let trial = |ci: usize, t: usize, n: usize| -> Result<ExpfamTrial<T>> {
        for k in 0..=opts.max_resamples {
            let mut rng = stream(redraw_seed(opts.seed, k), sweep_stream(ci, t));
            let idx = flat.sample_indices(n, &mut rng);
            let ph = flat.empirical_indices(&idx)?;
            let fit = match fam.project(&ph) {
                Ok(f) => f,
                Err(Error::NonConvergence(_)) => continue,
                Err(e) => return Err(e),
            };
            let qj = JointDiscrete::from_flat(x.clone(), y.clone(), fit.q.probs())?;
            let (_, rule) = conditional_entropy(&qj, spec)?;
            let excess = rule_risk(p, spec, &rule)? - h_p;
            let diff: Vec<T> = star.theta.iter().zip(&fit.theta).map(|(a, b)| *a - *b).collect();
            let theta_gap = norm2(&diff);
            let a_gap = (a_star - fam.logpartition(&fit.theta)?).abs();
            let estim_term = (two * mu_norm * theta_gap + two * a_gap).sqrt();
            return Ok(ExpfamTrial {
                excess,
                theta_gap,
                a_gap,
                estim_term,
                bound: approx_term + estim_term,
                residual: fit.residual,
                resamples: k,
            });
        }
        Err(Error::NonConvergence(format!(
            "trial {t} at n = {n}: no interior μ̂ after {} redraws",
            opts.max_resamples
        )))
    };

    let mut cells = Vec::with_capacity(opts.n_grid.len());
    for (ci, &n) in opts.n_grid.iter().enumerate() {
        let trials = (0..opts.trials)
            .into_par_iter()
            .map(|t| trial(ci, t, n))
            .collect::<Result<Vec<_>>>()?;
        let est: Vec<T> = trials.iter().map(|r| r.estim_term).collect();
        let e_theta = mean(&trials.iter().map(|r| r.theta_gap).collect::<Vec<_>>());
        let e_a = mean(&trials.iter().map(|r| r.a_gap).collect::<Vec<_>>());
        cells.push(ExpfamCell {
            n,
            mean_excess: mean(&trials.iter().map(|r| r.excess).collect::<Vec<_>>()),
            approx_term,
            estim_term_median: median(&est),
            estim_term_mean: mean(&est),
            bound: approx_term + (two * mu_norm * e_theta + two * e_a).sqrt(),
            resamples: trials.iter().map(|r| r.resamples).sum(),
            trials,
        });
    }
    Ok(ExpfamExperiment {
        theta_star: star.theta,
        q_star: star.q,
        mu,
        approx_term,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergence::kl;

    #[test]
    fn bernoulli_logpartition_closed_form() {
        let f = ExpFamily::<f64>::bernoulli();
        for t in [-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 25.0] {
            let want = (1.0f64 + f64::exp(t)).ln();
            assert!((f.logpartition(&[t]).unwrap() - want).abs() < 1e-12, "θ = {t}");
        }
    }

    #[test]
    fn zero_theta() {
        let f = ExpFamily::<f64>::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 3.0]],
            vec![1.0, 2.0, 3.0],
        )
        .unwrap();
        assert!((f.logpartition(&[0.0, 0.0]).unwrap() - 6f64.ln()).abs() < 1e-15);
        let q = f.probs(&[0.0, 0.0]).unwrap();
        assert!((q[1] - 2.0 / 6.0).abs() < 1e-15);
        let u = ExpFamily::<f64>::new(f.outcomes().to_vec(), f.potential().to_vec(), vec![1.0; 3]).unwrap();
        let m = u.mean(&[0.0, 0.0]).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-15 && (m[1] - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn bernoulli_projection_logit() {
        let f = ExpFamily::<f64>::bernoulli();
        let pr = f.project_mean(&[0.3]).unwrap();
        assert!((pr.theta[0] - (0.3f64 / 0.7).ln()).abs() < 1e-8);
        assert!(pr.residual < 1e-8);
    }

    #[test]
    fn boundary_mean_fails() {
        let f = ExpFamily::<f64>::bernoulli();
        let target = DiscreteDist::indexed(vec![1.0, 0.0]).unwrap();
        assert!(matches!(f.project(&target), Err(Error::NonConvergence(_))));
    }

    #[test]
    fn self_projection() {
        let f = ExpFamily::<f64>::new(
            (0..4).map(|i| i.to_string()).collect(),
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 2.0]],
            vec![1.0; 4],
        )
        .unwrap();
        let target = f.dist(&[0.4, -1.1]).unwrap();
        let pr = f.project(&target).unwrap();
        assert!(kl(&target, &pr.q).unwrap() < 1e-10);
    }

    #[test]
    fn non_minimal_rejected() {
        let e = ExpFamily::<f64>::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]],
            vec![1.0; 3],
        );
        assert!(e.is_err());
    }

    #[test]
    fn guard_rejects_extreme_theta() {
        let f = ExpFamily::<f64>::bernoulli();
        assert!(f.logpartition(&[800.0]).is_err());
    }
}
