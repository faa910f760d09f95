use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, quad_form, spd_inverse, trace, Matrix};
use crate::rng::{stream, sweep_stream};
use crate::scalar::{lit, mean, pairwise_sum, to_f64, Real};

/// `Y = Wᵀφ(X) + V` with `W ~ N(0, Σ_W)`, `V ~ N(0, σ²)` and `X` drawn
/// from a finite design.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianModel<T: Real> {
    prior_cov: Matrix<T>,
    features: Vec<Vec<T>>,
    design: DiscreteDist<T>,
    noise_var: T,
}

impl<T: Real> LinearGaussianModel<T> {
    /// `features[i]` is `φ` at the design's `i`-th outcome.
    pub fn new(prior_cov: Matrix<T>, features: Vec<Vec<T>>, design: DiscreteDist<T>, noise_var: T) -> Result<Self> {
        let d = prior_cov.len();
        if d == 0 || prior_cov.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidArgument("prior covariance must be square and nonempty".into()));
        }
        if cholesky(&prior_cov).is_err() {
            return Err(Error::InvalidArgument("prior covariance must be positive definite".into()));
        }
        if features.len() != design.len() || features.iter().any(|f| f.len() != d) {
            return Err(Error::InvalidArgument(format!(
                "need one feature vector of length {d} per design point"
            )));
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("features must be finite".into()));
        }
        if !(noise_var > T::zero()) || !noise_var.is_finite() {
            return Err(Error::InvalidArgument("noise variance must be positive".into()));
        }
        Ok(Self { prior_cov, features, design, noise_var })
    }

    /// `φ ≡ 1`, `W ~ N(0, prior_var)`.
    pub fn scalar(prior_var: T, noise_var: T) -> Result<Self> {
        Self::new(
            vec![vec![prior_var]],
            vec![vec![T::one()]],
            DiscreteDist::point_mass(vec!["x"], 0)?,
            noise_var,
        )
    }

    /// Standard normal prior and a uniform design over the given features.
    pub fn standard(features: Vec<Vec<T>>, noise_var: T) -> Result<Self> {
        let d = features.first().map_or(0, |f| f.len());
        let mut cov = vec![vec![T::zero(); d]; d];
        for (i, row) in cov.iter_mut().enumerate() {
            row[i] = T::one();
        }
        let design = DiscreteDist::uniform((0..features.len()).map(|i| i.to_string()).collect())?;
        Self::new(cov, features, design, noise_var)
    }

    pub fn dim(&self) -> usize {
        self.prior_cov.len()
    }

    pub fn noise_var(&self) -> T {
        self.noise_var
    }

    pub fn design(&self) -> &DiscreteDist<T> {
        &self.design
    }

    /// `E‖φ(X)‖²`
    pub fn s_g2(&self) -> T {
        let sq: Vec<T> = self.features.iter().map(|f| f.iter().map(|v| *v * *v).sum()).collect();
        self.design.expect(&sq)
    }

    /// Posterior covariance `(Σ_W⁻¹ + Σ_i φ(x_i)φ(x_i)ᵀ/σ²)⁻¹`.
    pub fn posterior_cov(&self, xs: &[usize]) -> Result<Matrix<T>> {
        let mut prec = spd_inverse(&self.prior_cov)?;
        for &x in xs {
            self.add_obs(&mut prec, x);
        }
        spd_inverse(&prec)
    }

    fn add_obs(&self, prec: &mut Matrix<T>, x: usize) {
        let f = &self.features[x];
        for i in 0..f.len() {
            for j in 0..f.len() {
                prec[i][j] = prec[i][j] + f[i] * f[j] / self.noise_var;
            }
        }
    }

    /// `E_X φ(X)ᵀ Σ φ(X)`
    fn predictive_excess(&self, cov: &Matrix<T>) -> T {
        let v: Vec<T> = self.features.iter().map(|f| quad_form(cov, f)).collect();
        self.design.expect(&v)
    }
}

/// `√(4σ²s_g²H₂) + 2s_g²H₂`
pub fn mer_theorem_bound<T: Real>(noise_var: T, s_g2: T, h2: T) -> T {
    (lit::<T>(4.0) * noise_var * s_g2 * h2).sqrt() + lit::<T>(2.0) * s_g2 * h2
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerCell<T: Real> {
    pub n: usize,
    /// `H₂(W|Zⁿ)`
    pub h2: T,
    /// `MER₂`
    pub mer: T,
    /// `s_g²·H₂(W|Zⁿ)`
    pub relaxed_bound: T,
    pub theorem_bound: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerLinear<T: Real> {
    pub s_g2: T,
    pub noise_var: T,
    pub cells: Vec<MerCell<T>>,
}

fn sorted_grid(n_grid: &[usize]) -> Result<Vec<usize>> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("empty sample-size grid".into()));
    }
    let mut g = n_grid.to_vec();
    g.sort_unstable();
    g.dedup();
    Ok(g)
}

/// Exact `H₂` and `MER₂` per design sequence, averaged over `trials` design
/// draws. Each trial's sample sizes are nested prefixes of one sequence.
pub fn mer_linear<T: Real>(model: &LinearGaussianModel<T>, n_grid: &[usize], trials: usize, seed: u64) -> Result<MerLinear<T>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let grid = sorted_grid(n_grid)?;
    let n_max = *grid.last().expect("nonempty grid");
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<Vec<(T, T)>> {
            let mut rng = stream(seed, sweep_stream(0, t));
            let xs = model.design.sample_indices(n_max, &mut rng);
            let mut prec = spd_inverse(&model.prior_cov)?;
            let mut out = Vec::with_capacity(grid.len());
            let mut seen = 0;
            for &n in &grid {
                for &x in &xs[seen..n] {
                    model.add_obs(&mut prec, x);
                }
                seen = n;
                let cov = spd_inverse(&prec)?;
                out.push((trace(&cov), model.predictive_excess(&cov)));
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    let s_g2 = model.s_g2();
    let cells = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let h2 = mean(&per_trial.iter().map(|r| r[i].0).collect::<Vec<_>>());
            let mer = mean(&per_trial.iter().map(|r| r[i].1).collect::<Vec<_>>());
            MerCell {
                n,
                h2,
                mer,
                relaxed_bound: s_g2 * h2,
                theorem_bound: mer_theorem_bound(model.noise_var, s_g2, h2),
            }
        })
        .collect();
    Ok(MerLinear { s_g2, noise_var: model.noise_var, cells })
}

/// `Y = g(X, W) + V` with scalar `W` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridModel<T: Real> {
    w_grid: Vec<T>,
    prior: DiscreteDist<T>,
    design: DiscreteDist<T>,
    x_values: Vec<T>,
    /// `g[x][k] = g(x_values[x], w_grid[k])`
    g: Vec<Vec<T>>,
    noise_var: T,
}

/// Serializable description of a [`GridModel`] with a named regression map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMap {
    /// `g(x, w) = w·x`
    Linear,
    /// `g(x, w) = sin(w·x)`
    SinWx,
    /// `g(x, w) = x`
    ConstantInW,
}

impl GridMap {
    pub fn eval<T: Real>(&self, x: T, w: T) -> T {
        match self {
            GridMap::Linear => w * x,
            GridMap::SinWx => (w * x).sin(),
            GridMap::ConstantInW => x,
        }
    }
}

impl<T: Real> GridModel<T> {
    pub fn new(
        w_grid: Vec<T>,
        prior: Vec<T>,
        design: DiscreteDist<T>,
        x_values: Vec<T>,
        g: Vec<Vec<T>>,
        noise_var: T,
    ) -> Result<Self> {
        let k = w_grid.len();
        if !(2..=1000).contains(&k) {
            return Err(Error::InvalidArgument("W grid must have 2..=1000 atoms".into()));
        }
        let step = w_grid[1] - w_grid[0];
        let uniform = step > T::zero()
            && w_grid.windows(2).all(|p| ((p[1] - p[0]) - step).abs() <= lit::<T>(1e-9) * step.max(T::one()));
        if !uniform {
            return Err(Error::InvalidArgument("W grid must be increasing with uniform spacing".into()));
        }
        if prior.len() != k {
            return Err(Error::InvalidArgument("prior must have one weight per W atom".into()));
        }
        let prior = DiscreteDist::new(w_grid.iter().map(|w| to_f64(*w).to_string()).collect(), prior)?;
        if x_values.len() != design.len() || g.len() != design.len() || g.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("g must have one row per design point and one column per W atom".into()));
        }
        if g.iter().flatten().chain(&x_values).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("g and x values must be finite".into()));
        }
        if !(noise_var > T::zero()) || !noise_var.is_finite() {
            return Err(Error::InvalidArgument("noise variance must be positive".into()));
        }
        Ok(Self { w_grid, prior, design, x_values, g, noise_var })
    }

    /// Tabulates `f(x, w)` on the grid.
    pub fn from_fn(
        w_grid: Vec<T>,
        prior: Vec<T>,
        design: DiscreteDist<T>,
        x_values: Vec<T>,
        f: impl Fn(T, T) -> T,
        noise_var: T,
    ) -> Result<Self> {
        let g = x_values.iter().map(|&x| w_grid.iter().map(|&w| f(x, w)).collect()).collect();
        Self::new(w_grid, prior, design, x_values, g, noise_var)
    }

    /// `k` evenly spaced atoms on `[lo, hi]`.
    pub fn grid(lo: T, hi: T, k: usize) -> Vec<T> {
        let h = (hi - lo) / lit(k.saturating_sub(1).max(1) as f64);
        (0..k).map(|i| lo + h * lit(i as f64)).collect()
    }

    /// Standard normal density at the atoms, normalized on the grid.
    pub fn normal_prior(w_grid: &[T]) -> Vec<T> {
        let raw: Vec<T> = w_grid.iter().map(|w| (-*w * *w / lit(2.0)).exp()).collect();
        let z = pairwise_sum(&raw);
        raw.iter().map(|v| *v / z).collect()
    }

    pub fn noise_var(&self) -> T {
        self.noise_var
    }

    pub fn w_grid(&self) -> &[T] {
        &self.w_grid
    }

    pub fn x_values(&self) -> &[T] {
        &self.x_values
    }

    /// `(centered, one-sided)` estimates of `E_X sup_w (∂g/∂w)²`.
    ///
    /// The centered estimate uses central differences at interior atoms and
    /// one-sided differences at the ends. The one-sided estimate is the
    /// largest adjacent chord slope, which bounds every chord on the grid.
    pub fn s_g2(&self) -> (T, T) {
        let h = self.w_grid[1] - self.w_grid[0];
        let two: T = lit(2.0);
        let k = self.w_grid.len();
        let mut centered = Vec::with_capacity(self.g.len());
        let mut chord = Vec::with_capacity(self.g.len());
        for row in &self.g {
            let mut c = T::zero();
            for i in 0..k {
                let d = if i == 0 {
                    (row[1] - row[0]) / h
                } else if i == k - 1 {
                    (row[k - 1] - row[k - 2]) / h
                } else {
                    (row[i + 1] - row[i - 1]) / (two * h)
                };
                c = c.max(d * d);
            }
            centered.push(c);
            chord.push(
                row.windows(2)
                    .map(|p| {
                        let d = (p[1] - p[0]) / h;
                        d * d
                    })
                    .fold(T::zero(), T::max),
            );
        }
        (self.design.expect(&centered), self.design.expect(&chord))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerGridCell<T: Real> {
    pub n: usize,
    /// Monte Carlo `E Var[W|Zⁿ]`.
    pub h2: T,
    /// Monte Carlo `E Var[g(X,W)|X,Zⁿ]`.
    pub mer: T,
    /// `E[D(K_{Y|X,W'} ‖ K_{Y|X,W})] = MER₂/σ²`
    pub kl_lhs: T,
    /// `s_g²H₂/σ²`
    pub kl_rhs: T,
    pub relaxed_bound: T,
    pub theorem_bound: T,
    /// Standard error of `mer` across trials.
    pub mer_se: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MerNonlinear<T: Real> {
    pub s_g2: T,
    pub s_g2_one_sided: T,
    pub noise_var: T,
    pub warnings: Vec<String>,
    pub cells: Vec<MerGridCell<T>>,
}

/// Exact grid posteriors on simulated datasets.
pub fn mer_nonlinear_bound<T: Real>(model: &GridModel<T>, n_grid: &[usize], trials: usize, seed: u64) -> Result<MerNonlinear<T>> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let grid = sorted_grid(n_grid)?;
    let n_max = *grid.last().expect("nonempty grid");
    let (s_g2, s_g2_one_sided) = model.s_g2();
    let mut warnings = Vec::new();
    let gap = (s_g2 - s_g2_one_sided).abs();
    if gap > lit::<T>(0.01) * s_g2.max(s_g2_one_sided) {
        warnings.push(format!(
            "W grid too coarse for the gradient surrogate: centered s_g² = {}, one-sided s_g² = {}",
            to_f64(s_g2),
            to_f64(s_g2_one_sided)
        ));
    }
    let sigma = model.noise_var.sqrt();
    let two: T = lit(2.0);
    let log_prior: Vec<T> = model.prior.probs().iter().map(|p| p.ln()).collect();
    let k = model.w_grid.len();

    let per_trial = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, sweep_stream(0, t));
            let w_star = model.prior.sample_indices(1, &mut rng)[0];
            let xs = model.design.sample_indices(n_max, &mut rng);
            let mut loglik = log_prior.clone();
            let mut out = Vec::with_capacity(grid.len());
            let mut seen = 0;
            for &n in &grid {
                for &x in &xs[seen..n] {
                    let noise: f64 = StandardNormal.sample(&mut rng);
                    let y = model.g[x][w_star] + sigma * lit(noise);
                    for (j, l) in loglik.iter_mut().enumerate() {
                        let r = y - model.g[x][j];
                        *l = *l - r * r / (two * model.noise_var);
                    }
                }
                seen = n;
                let m = loglik.iter().copied().fold(T::neg_infinity(), T::max);
                let raw: Vec<T> = loglik.iter().map(|l| (*l - m).exp()).collect();
                let z = pairwise_sum(&raw);
                let post: Vec<T> = raw.iter().map(|v| *v / z).collect();
                let var_of = |vals: &dyn Fn(usize) -> T| {
                    let m1 = pairwise_sum(&(0..k).map(|j| post[j] * vals(j)).collect::<Vec<_>>());
                    pairwise_sum(&(0..k).map(|j| post[j] * (vals(j) - m1) * (vals(j) - m1)).collect::<Vec<_>>())
                };
                let h2 = var_of(&|j| model.w_grid[j]);
                let per_x: Vec<T> = (0..model.g.len()).map(|x| var_of(&|j| model.g[x][j])).collect();
                out.push((h2, model.design.expect(&per_x)));
            }
            out
        })
        .collect::<Vec<_>>();

    let cells = grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let h2 = mean(&per_trial.iter().map(|r| r[i].0).collect::<Vec<_>>());
            let mers: Vec<T> = per_trial.iter().map(|r| r[i].1).collect();
            let mer = mean(&mers);
            let mer_se = if trials > 1 {
                let dev: Vec<T> = mers.iter().map(|v| (*v - mer) * (*v - mer)).collect();
                (pairwise_sum(&dev) / lit((trials - 1) as f64) / lit(trials as f64)).sqrt()
            } else {
                T::zero()
            };
            MerGridCell {
                n,
                h2,
                mer,
                kl_lhs: mer / model.noise_var,
                kl_rhs: s_g2 * h2 / model.noise_var,
                relaxed_bound: s_g2 * h2,
                theorem_bound: mer_theorem_bound(model.noise_var, s_g2, h2),
                mer_se,
            }
        })
        .collect();
    Ok(MerNonlinear {
        s_g2,
        s_g2_one_sided,
        noise_var: model.noise_var,
        warnings,
        cells,
    })
}
