use rand::Rng;
use rayon::prelude::*;

use crate::dist::DiscreteDist;
use crate::divergence::{kl, tv};
use crate::entropy::argmin_tiebreak;
use crate::error::{Error, Result};
use crate::loss::{column_masked, Action, LossSpec, LossTable};
use crate::rng::{stream, sweep_stream};
use crate::scalar::{lit, log_log_slope, mean, Real};
use crate::transport::{wasserstein1_discrete, Metric, MAX_SUPPORT};

/// One ERM run on `n` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ErmRun<T: Real> {
    pub n: usize,
    /// Index into the finite action list; ties go to the lowest index.
    pub hypothesis: usize,
    /// `H(P̂_n)`
    pub empirical_entropy: T,
    /// `H(P)`
    pub population_entropy: T,
    /// `E_P ℓ(Z, a_{P̂_n}) − H(P)`
    pub excess_risk: T,
    pub tv_to_truth: T,
    /// `D(P̂_n ‖ P)`
    pub kl_to_truth: T,
    /// `d_{A,ℓ}(P̂_n, P)`, exact over the finite action set.
    pub semidistance: T,
    /// `d_{A,ℓ}(P̂_n, P) ≤ ε`
    pub typical: bool,
}

/// A known `P` with a finite action space, precomputed for repeated runs.
#[derive(Debug, Clone)]
pub struct ErmProblem<T: Real> {
    p: DiscreteDist<T>,
    spec: LossSpec<T>,
    actions: Vec<Action<T>>,
    cols: Vec<Vec<T>>,
    risks: Vec<T>,
    entropy: T,
}

impl<T: Real> ErmProblem<T> {
    pub fn new(p: &DiscreteDist<T>, spec: &LossSpec<T>) -> Result<Self> {
        spec.validate()?;
        let actions = spec
            .finite_actions(p.outcomes())
            .ok_or_else(|| Error::NotApplicable(format!("ERM needs a finite action space, got {} loss", spec.kind)))?;
        if actions.is_empty() {
            return Err(Error::Empty);
        }
        // Every outcome can appear in a sample, so the loss must be defined on all of them.
        let all = vec![true; p.len()];
        let cols = actions
            .iter()
            .map(|a| column_masked(spec, p.outcomes(), &all, a))
            .collect::<Result<Vec<_>>>()?;
        let risks: Vec<T> = cols.iter().map(|c| p.expect(c)).collect();
        let entropy = risks[argmin_tiebreak(&risks)?];
        Ok(Self {
            p: p.clone(),
            spec: spec.clone(),
            actions,
            cols,
            risks,
            entropy,
        })
    }

    pub fn truth(&self) -> &DiscreteDist<T> {
        &self.p
    }

    pub fn spec(&self) -> &LossSpec<T> {
        &self.spec
    }

    pub fn actions(&self) -> &[Action<T>] {
        &self.actions
    }

    pub fn population_risks(&self) -> &[T] {
        &self.risks
    }

    pub fn population_entropy(&self) -> T {
        self.entropy
    }

    /// ERM on a given sample of support indices.
    pub fn run_on(&self, idx: &[usize], eps: T) -> Result<ErmRun<T>> {
        if idx.is_empty() {
            return Err(Error::InvalidArgument("ERM needs n ≥ 1 samples".into()));
        }
        let ph = self.p.empirical_indices(idx)?;
        let emp: Vec<T> = self.cols.iter().map(|c| ph.expect(c)).collect();
        let h = argmin_tiebreak(&emp)?;
        let semidistance = emp
            .iter()
            .zip(&self.risks)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max);
        Ok(ErmRun {
            n: idx.len(),
            hypothesis: h,
            empirical_entropy: emp[h],
            population_entropy: self.entropy,
            excess_risk: self.risks[h] - self.entropy,
            tv_to_truth: tv(&ph, &self.p)?,
            kl_to_truth: kl(&ph, &self.p)?,
            semidistance,
            typical: semidistance <= eps,
        })
    }

    pub fn run<R: Rng + ?Sized>(&self, n: usize, eps: T, rng: &mut R) -> Result<ErmRun<T>> {
        if n == 0 {
            return Err(Error::InvalidArgument("ERM needs n ≥ 1 samples".into()));
        }
        self.run_on(&self.p.sample_indices(n, rng), eps)
    }
}

/// Draws `n` samples from `P` on stream 0 of `seed` and runs ERM.
pub fn erm<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>, n: usize, seed: u64, eps: T) -> Result<ErmRun<T>> {
    if n == 0 {
        return Err(Error::InvalidArgument("ERM needs n ≥ 1 samples".into()));
    }
    ErmProblem::new(p, spec)?.run(n, eps, &mut stream(seed, 0))
}

/// `√(|Z|/n)`
pub fn erm_mean_curve<T: Real>(z: usize, n: usize) -> T {
    (lit::<T>(z as f64) / lit(n as f64)).sqrt()
}

/// `exp{−n(ε²/2 − |Z|·log(n+1)/n)}`, which may exceed one.
pub fn erm_deviation_curve<T: Real>(z: usize, n: usize, eps: T) -> T {
    let n_t: T = lit(n as f64);
    let z_t: T = lit(z as f64);
    (-(n_t * eps * eps / lit(2.0)) + z_t * (n_t + T::one()).ln()).exp()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exceedance<T: Real> {
    pub eps: T,
    /// Fraction of runs with excess risk `> ε`.
    pub frequency: T,
    pub theorem: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmCell<T: Real> {
    pub n: usize,
    pub runs: Vec<ErmRun<T>>,
    pub mean_excess: T,
    pub mean_tv: T,
    pub mean_semidistance: T,
    pub typical_fraction: T,
    pub theorem_curve: T,
    pub exceedance: Vec<Exceedance<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErmSweep<T: Real> {
    pub z_size: usize,
    pub cells: Vec<ErmCell<T>>,
    /// Least-squares slope of `log E d_TV` against `log n`.
    pub tv_slope: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions<T: Real> {
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub eps_levels: Vec<T>,
    /// Level of the typicality flag.
    pub epsilon: T,
}

/// Repeated ERM over a grid of sample sizes with the finite-`Z` curves
/// alongside. Trial `t` at grid cell `c` draws from its own stream.
pub fn erm_sweep<T: Real>(p: &DiscreteDist<T>, spec: &LossSpec<T>, opts: &SweepOptions<T>) -> Result<ErmSweep<T>> {
    if !spec.is_unit_bounded() {
        return Err(Error::InvalidLoss("the finite-Z curves need a loss with values in [0,1]".into()));
    }
    if opts.trials == 0 || opts.n_grid.is_empty() {
        return Err(Error::InvalidArgument("need at least one trial and one sample size".into()));
    }
    let prob = ErmProblem::new(p, spec)?;
    let z = p.len();
    let mut cells = Vec::with_capacity(opts.n_grid.len());
    for (ci, &n) in opts.n_grid.iter().enumerate() {
        let runs = (0..opts.trials)
            .into_par_iter()
            .map(|t| prob.run(n, opts.epsilon, &mut stream(opts.seed, sweep_stream(ci, t))))
            .collect::<Result<Vec<_>>>()?;
        let col = |f: fn(&ErmRun<T>) -> T| mean(&runs.iter().map(f).collect::<Vec<T>>());
        let trials: T = lit(opts.trials as f64);
        let exceedance = opts
            .eps_levels
            .iter()
            .map(|&eps| Exceedance {
                eps,
                frequency: lit::<T>(runs.iter().filter(|r| r.excess_risk > eps).count() as f64) / trials,
                theorem: erm_deviation_curve(z, n, eps),
            })
            .collect();
        cells.push(ErmCell {
            n,
            mean_excess: col(|r| r.excess_risk),
            mean_tv: col(|r| r.tv_to_truth),
            mean_semidistance: col(|r| r.semidistance),
            typical_fraction: lit::<T>(runs.iter().filter(|r| r.typical).count() as f64) / trials,
            theorem_curve: erm_mean_curve(z, n),
            exceedance,
            runs,
        });
    }
    let ns: Vec<T> = cells.iter().map(|c| lit(c.n as f64)).collect();
    let tvs: Vec<T> = cells.iter().map(|c| c.mean_tv).collect();
    Ok(ErmSweep {
        z_size: z,
        tv_slope: log_log_slope(&ns, &tvs),
        cells,
    })
}

/// Zero-one loss over `Z = X × {0,1}` with every mapping `X → {0,1}` as an
/// action. Outcome labels are `"x,y"`; action `m` predicts bit `x` of `m`.
pub fn all_mappings_table<T: Real>(nx: usize) -> Result<LossTable<T>> {
    if nx == 0 || nx > 12 {
        return Err(Error::TooLarge(format!("|X| = {nx} (all-mappings tables allow 1..=12)")));
    }
    let mut outcomes = Vec::with_capacity(2 * nx);
    let mut values = Vec::with_capacity(2 * nx);
    for x in 0..nx {
        for y in 0..2usize {
            outcomes.push(format!("{x},{y}"));
            values.push(
                (0..1usize << nx)
                    .map(|m| if (m >> x) & 1 == y { T::zero() } else { T::one() })
                    .collect(),
            );
        }
    }
    let actions = (0..1usize << nx).map(|m| format!("{m:0nx$b}")).collect();
    LossTable::new(outcomes, actions, values)
}

/// Loss on `z = (x, y)` for the Lipschitz experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LipschitzLoss {
    /// `|y − f(x,a)|`
    Absolute,
    /// `(y − f(x,a))²`
    Squared,
}

/// `Z = X × Y` on a grid with `X ⊂ R^p`, `Y ⊂ [−b, b]`, and predictors
/// `f(x,a) = clamp(aᵀx, −b, b)` over a finite list of weight vectors.
#[derive(Debug, Clone)]
pub struct LipschitzProblem<T: Real> {
    pub dim_x: usize,
    pub rho_f: T,
    pub b: T,
    pub loss: LipschitzLoss,
    pub points: Vec<Vec<T>>,
    pub metric: Metric<T>,
    /// Lipschitz constant of `ℓ(·, a)` in `z`.
    pub rho: T,
    erm: ErmProblem<T>,
}

fn linspace<T: Real>(lo: T, hi: T, k: usize) -> Vec<T> {
    if k == 1 {
        return vec![(lo + hi) / lit(2.0)];
    }
    (0..k)
        .map(|i| lo + (hi - lo) * lit::<T>(i as f64) / lit((k - 1) as f64))
        .collect()
}

impl<T: Real> LipschitzProblem<T> {
    /// `x_levels` points per axis on `[−1, 1]^p` and `y_levels` on `[−b, b]`.
    /// `weights` defaults to uniform over the grid.
    #[allow(clippy::too_many_arguments)]
    pub fn grid(
        dim_x: usize,
        x_levels: usize,
        y_levels: usize,
        b: T,
        weights: Option<Vec<T>>,
        actions: Vec<Vec<T>>,
        rho_f: T,
        loss: LipschitzLoss,
    ) -> Result<Self> {
        if !(2..=3).contains(&dim_x) {
            return Err(Error::InvalidArgument(format!("p = {dim_x} outside the desk range 2..=3")));
        }
        if x_levels == 0 || y_levels == 0 || !(b > T::zero()) {
            return Err(Error::InvalidArgument("grid needs positive levels and b > 0".into()));
        }
        if actions.is_empty() || actions.iter().any(|a| a.len() != dim_x) {
            return Err(Error::InvalidArgument(format!("actions must be nonempty vectors of length {dim_x}")));
        }
        let size = x_levels.pow(dim_x as u32) * y_levels;
        if size > MAX_SUPPORT {
            return Err(Error::TooLarge(format!("grid has {size} points, limit {MAX_SUPPORT}")));
        }
        let xs = linspace(-T::one(), T::one(), x_levels);
        let ys = linspace(-b, b, y_levels);
        let mut points = Vec::with_capacity(size);
        for k in 0..x_levels.pow(dim_x as u32) {
            let mut x = Vec::with_capacity(dim_x + 1);
            let mut r = k;
            for _ in 0..dim_x {
                x.push(xs[r % x_levels]);
                r /= x_levels;
            }
            for y in &ys {
                let mut z = x.clone();
                z.push(*y);
                points.push(z);
            }
        }
        let labels: Vec<String> = points
            .iter()
            .map(|z| z.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(","))
            .collect();
        let f = |z: &[T], a: &[T]| {
            let s = z.iter().zip(a).fold(T::zero(), |acc, (x, w)| acc + *x * *w);
            s.max(-b).min(b)
        };
        for (ai, a) in actions.iter().enumerate() {
            for i in 0..points.len() {
                for j in (i + 1)..points.len() {
                    let dx = points[i][..dim_x]
                        .iter()
                        .zip(&points[j][..dim_x])
                        .fold(T::zero(), |s, (u, v)| s + (*u - *v) * (*u - *v))
                        .sqrt();
                    let df = (f(&points[i], a) - f(&points[j], a)).abs();
                    if df > rho_f * dx + T::cmp_tol() {
                        return Err(Error::InvalidLoss(format!(
                            "f(·, a_{ai}) is not {rho_f}-Lipschitz in x on the grid"
                        )));
                    }
                }
            }
        }
        let values: Vec<Vec<T>> = points
            .iter()
            .map(|z| {
                let y = z[dim_x];
                actions
                    .iter()
                    .map(|a| {
                        let r = (y - f(z, a)).abs();
                        match loss {
                            LipschitzLoss::Absolute => r,
                            LipschitzLoss::Squared => r * r,
                        }
                    })
                    .collect()
            })
            .collect();
        let two: T = lit(2.0);
        let base = two.sqrt() * rho_f.max(T::one());
        let rho = match loss {
            LipschitzLoss::Absolute => base,
            LipschitzLoss::Squared => lit::<T>(4.0) * b * base,
        };
        let table = LossTable::new(
            labels.clone(),
            (0..actions.len()).map(|i| format!("a{i}")).collect(),
            values,
        )?;
        let spec = LossSpec::table(table).with_lipschitz(rho)?;
        let p = match weights {
            Some(w) => DiscreteDist::new(labels.clone(), w)?,
            None => DiscreteDist::uniform(labels.clone())?,
        };
        let metric = Metric::euclidean(labels, &points)?;
        Ok(Self {
            dim_x,
            rho_f,
            b,
            loss,
            points,
            metric,
            rho,
            erm: ErmProblem::new(&p, &spec)?,
        })
    }

    pub fn truth(&self) -> &DiscreteDist<T> {
        self.erm.truth()
    }

    pub fn spec(&self) -> &LossSpec<T> {
        self.erm.spec()
    }

    /// `n^{−1/(p+1)}` exponent.
    pub fn theorem_exponent(&self) -> T {
        -T::one() / lit((self.dim_x + 1) as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzRun<T: Real> {
    pub w1: T,
    pub excess_risk: T,
    /// `2ρ·W₁(P̂_n, P)`
    pub bound: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzCell<T: Real> {
    pub n: usize,
    pub runs: Vec<LipschitzRun<T>>,
    pub mean_w1: T,
    pub mean_excess: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LipschitzSweep<T: Real> {
    pub cells: Vec<LipschitzCell<T>>,
    pub fitted_exponent: T,
    pub theorem_exponent: T,
}

/// Mean exact `W₁(P̂_n, P)` and ERM excess risk over a grid of `n`, with
/// the fitted decay exponent of the `W₁` means.
pub fn lipschitz_rate_check<T: Real>(
    prob: &LipschitzProblem<T>,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
) -> Result<LipschitzSweep<T>> {
    if trials == 0 || n_grid.is_empty() || n_grid.contains(&0) {
        return Err(Error::InvalidArgument("need trials ≥ 1 and sample sizes ≥ 1".into()));
    }
    let two: T = lit(2.0);
    let mut cells = Vec::with_capacity(n_grid.len());
    for (ci, &n) in n_grid.iter().enumerate() {
        let runs = (0..trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = stream(seed, sweep_stream(ci, t));
                let idx = prob.truth().sample_indices(n, &mut rng);
                let run = prob.erm.run_on(&idx, T::zero())?;
                let ph = prob.truth().empirical_indices(&idx)?;
                let w1 = wasserstein1_discrete(&ph, prob.truth(), &prob.metric)?.cost;
                Ok(LipschitzRun {
                    w1,
                    excess_risk: run.excess_risk,
                    bound: two * prob.rho * w1,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        cells.push(LipschitzCell {
            n,
            mean_w1: mean(&runs.iter().map(|r| r.w1).collect::<Vec<_>>()),
            mean_excess: mean(&runs.iter().map(|r| r.excess_risk).collect::<Vec<_>>()),
            runs,
        });
    }
    let ns: Vec<T> = cells.iter().map(|c| lit(c.n as f64)).collect();
    let w: Vec<T> = cells.iter().map(|c| c.mean_w1).collect();
    Ok(LipschitzSweep {
        fitted_exponent: log_log_slope(&ns, &w),
        theorem_exponent: prob.theorem_exponent(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table01() -> LossSpec<f64> {
        LossSpec::table(LossTable::indexed(vec![vec![0.1, 0.9, 0.5], vec![0.8, 0.2, 0.4]]).unwrap())
    }

    #[test]
    fn forced_sample_has_zero_excess() {
        let p = DiscreteDist::indexed(vec![0.25, 0.75]).unwrap();
        let prob = ErmProblem::new(&p, &table01()).unwrap();
        let r = prob.run_on(&[0, 1, 1, 1], 0.1).unwrap();
        assert_eq!(r.excess_risk, 0.0);
        assert_eq!(r.tv_to_truth, 0.0);
        assert!(r.typical);
        assert_eq!(r.empirical_entropy, r.population_entropy);
    }

    #[test]
    fn single_action_zero_excess() {
        let spec = LossSpec::table(LossTable::indexed(vec![vec![0.3], vec![0.6], vec![1.0]]).unwrap());
        let p = DiscreteDist::indexed(vec![0.2, 0.3, 0.5]).unwrap();
        for seed in 0..20 {
            assert_eq!(erm(&p, &spec, 7, seed, 0.1).unwrap().excess_risk, 0.0);
        }
    }

    #[test]
    fn zero_samples_rejected() {
        let p = DiscreteDist::indexed(vec![0.5, 0.5]).unwrap();
        assert!(matches!(erm(&p, &table01(), 0, 0, 0.1), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn excess_below_twice_tv() {
        let p = DiscreteDist::indexed(vec![0.45, 0.55]).unwrap();
        let prob = ErmProblem::new(&p, &table01()).unwrap();
        for seed in 0..200 {
            let r = prob.run(9, 0.1, &mut stream(seed, 0)).unwrap();
            assert!(r.excess_risk >= 0.0);
            assert!(r.excess_risk <= 2.0 * r.tv_to_truth + 1e-12);
            assert!(r.excess_risk <= 2.0 * r.semidistance + 1e-12);
            let h = prob.population_risks()[r.hypothesis] - prob.population_entropy();
            assert!((r.excess_risk - h).abs() <= 1e-10);
        }
    }

    #[test]
    fn curve_values() {
        assert!((erm_mean_curve::<f64>(2, 200) - 0.1).abs() < 1e-15);
        let v: f64 = erm_deviation_curve(2, 1600, 0.3);
        assert!((v.ln() - (-72.0 + 2.0 * 1601f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn sweep_is_deterministic() {
        let p = DiscreteDist::indexed(vec![0.3, 0.7]).unwrap();
        let opts = SweepOptions {
            n_grid: vec![10, 40],
            trials: 30,
            seed: 5,
            eps_levels: vec![0.3],
            epsilon: 0.1,
        };
        let a = erm_sweep(&p, &table01(), &opts).unwrap();
        let b = erm_sweep(&p, &table01(), &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.cells[0].runs.len(), 30);
    }

    #[test]
    fn sweep_rejects_unbounded() {
        let spec = LossSpec::table(LossTable::indexed(vec![vec![0.0, 2.0], vec![1.0, 0.0]]).unwrap());
        let p = DiscreteDist::indexed(vec![0.3, 0.7]).unwrap();
        let opts = SweepOptions {
            n_grid: vec![10],
            trials: 3,
            seed: 0,
            eps_levels: vec![],
            epsilon: 0.1,
        };
        assert!(erm_sweep(&p, &spec, &opts).is_err());
    }

    #[test]
    fn all_mappings_shape() {
        let t = all_mappings_table::<f64>(3).unwrap();
        assert_eq!(t.n_actions(), 8);
        assert_eq!(t.outcomes().len(), 6);
        // action 0b101 predicts 1 at x = 0 and x = 2
        assert_eq!(t.get("0,1", 5).unwrap(), 0.0);
        assert_eq!(t.get("1,1", 5).unwrap(), 1.0);
        assert_eq!(t.get("2,0", 5).unwrap(), 1.0);
    }

    fn lip_actions() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![0.0, 0.5], vec![0.4, -0.3], vec![-0.5, 0.2]]
    }

    #[test]
    fn lipschitz_point_mass_w1_zero() {
        let mut w = vec![0.0; 64];
        w[17] = 1.0;
        let prob =
            LipschitzProblem::grid(2, 4, 4, 1.0, Some(w), lip_actions(), 0.6, LipschitzLoss::Absolute).unwrap();
        let s = lipschitz_rate_check(&prob, &[1, 5, 20], 10, 3).unwrap();
        for c in &s.cells {
            assert_eq!(c.mean_w1, 0.0);
            assert_eq!(c.mean_excess, 0.0);
        }
    }

    #[test]
    fn lipschitz_pointwise_bound() {
        for loss in [LipschitzLoss::Absolute, LipschitzLoss::Squared] {
            let prob = LipschitzProblem::grid(2, 4, 4, 1.0, None, lip_actions(), 0.6, loss).unwrap();
            let s = lipschitz_rate_check(&prob, &[3, 12], 40, 1).unwrap();
            for r in s.cells.iter().flat_map(|c| &c.runs) {
                assert!(r.excess_risk <= r.bound + 1e-12);
            }
        }
    }

    #[test]
    fn lipschitz_rejects_bad_inputs() {
        let e = LipschitzProblem::grid(1, 4, 4, 1.0, None, vec![vec![0.1]], 1.0, LipschitzLoss::Absolute);
        assert!(e.is_err());
        let e = LipschitzProblem::grid(2, 4, 4, 1.0, None, vec![vec![2.0, 0.0]], 1.0, LipschitzLoss::Absolute);
        assert!(matches!(e, Err(Error::InvalidLoss(_))));
    }
}
