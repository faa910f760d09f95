//! Named experiments driven by JSON configs, with CSV record output.
//!
//! Every experiment emits long-format records with columns
//! `experiment, n, trial, metric, value, citation` plus a wide summary table.
//! Floats are written with 17 significant digits.

use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{coupling_bound, mi_upper_bounds, tv_log_ratio_bound, BoundReport, PairContext};
use crate::dist::{DiscreteDist, JointDiscrete};
use crate::error::{Error, Result};
use crate::learn::{
    cond_entropy_diff_bounds, erm_sweep, expfam_learning_experiment, lipschitz_rate_check, mer_linear,
    mer_nonlinear_bound, mismatch_excess, mismatched_estimator_bound, ExpFamily, ExpfamOptions, GridMap,
    GridModel, LinearGaussianModel, LipschitzLoss, LipschitzProblem, SweepOptions,
};
use crate::loss::LossSpec;
use crate::rng::stream;

pub const EXPERIMENT_NAMES: [&str; 7] = [
    "erm_sweep",
    "lipschitz_rate",
    "expfam",
    "mer_linear",
    "mer_nonlinear",
    "mismatch",
    "mi_bounds",
];

pub const DEFAULT_EPSILON: f64 = 0.1;
pub const DEFAULT_TRIALS: usize = 200;

/// Run-level knobs shared by all experiments. Command-line flags of the same
/// names take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Knobs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl Knobs {
    /// `self` with every field present in `over` replaced.
    pub fn overridden(&self, over: &Knobs) -> Knobs {
        Knobs {
            seed: over.seed.or(self.seed),
            trials: over.trials.or(self.trials),
            epsilon: over.epsilon.or(self.epsilon),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn trials(&self) -> usize {
        self.trials.unwrap_or(DEFAULT_TRIALS)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon.unwrap_or(DEFAULT_EPSILON)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub knobs: Knobs,
    #[serde(flatten)]
    pub kind: ExperimentKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPrior {
    #[default]
    Normal,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorCase {
    pub p_y: DiscreteDist<f64>,
    pub q_y: DiscreteDist<f64>,
    pub alpha: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentKind {
    ErmSweep {
        p: DiscreteDist<f64>,
        loss: LossSpec<f64>,
        n_grid: Vec<usize>,
        #[serde(default)]
        eps_levels: Vec<f64>,
    },
    LipschitzRate {
        dim_x: usize,
        x_levels: usize,
        y_levels: usize,
        b: f64,
        actions: Vec<Vec<f64>>,
        rho_f: f64,
        loss: LipschitzLoss,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
        n_grid: Vec<usize>,
    },
    Expfam {
        /// Joint over `X × Y`; the family lives on its flattened `x,y` labels.
        p: JointDiscrete<f64>,
        phi: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        nu: Option<Vec<f64>>,
        loss: LossSpec<f64>,
        n_grid: Vec<usize>,
        #[serde(default = "default_resamples")]
        max_resamples: usize,
    },
    MerLinear {
        /// Defaults to the identity.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        prior_cov: Option<Vec<Vec<f64>>>,
        features: Vec<Vec<f64>>,
        /// Design weights over `features`; defaults to uniform.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        design: Option<Vec<f64>>,
        noise_var: f64,
        n_grid: Vec<usize>,
    },
    MerNonlinear {
        map: GridMap,
        w_lo: f64,
        w_hi: f64,
        w_atoms: usize,
        #[serde(default)]
        prior: GridPrior,
        x_values: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        design: Option<Vec<f64>>,
        noise_var: f64,
        n_grid: Vec<usize>,
    },
    Mismatch {
        p: JointDiscrete<f64>,
        q: JointDiscrete<f64>,
        loss: LossSpec<f64>,
        #[serde(default)]
        estimator: Vec<EstimatorCase>,
    },
    MiBounds {
        #[serde(default)]
        joints: Vec<JointDiscrete<f64>>,
        /// Additional random strictly positive joints of this shape.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random: Option<RandomJoints>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomJoints {
    pub count: usize,
    #[serde(default = "three")]
    pub nx: usize,
    #[serde(default = "three")]
    pub nz: usize,
}

fn default_resamples() -> usize {
    100
}

fn three() -> usize {
    3
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::ErmSweep { .. } => "erm_sweep",
            ExperimentKind::LipschitzRate { .. } => "lipschitz_rate",
            ExperimentKind::Expfam { .. } => "expfam",
            ExperimentKind::MerLinear { .. } => "mer_linear",
            ExperimentKind::MerNonlinear { .. } => "mer_nonlinear",
            ExperimentKind::Mismatch { .. } => "mismatch",
            ExperimentKind::MiBounds { .. } => "mi_bounds",
        }
    }
}

impl ExperimentConfig {
    /// Parses a config, naming the valid experiments when the tag is unknown.
    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        match v.get("experiment").and_then(|e| e.as_str()) {
            Some(name) if EXPERIMENT_NAMES.contains(&name) => Ok(serde_json::from_value(v)?),
            Some(name) => Err(Error::InvalidArgument(format!(
                "unknown experiment `{name}`; valid names: {}",
                EXPERIMENT_NAMES.join(", ")
            ))),
            None => Err(Error::InvalidArgument(format!(
                "config has no `experiment` field; valid names: {}",
                EXPERIMENT_NAMES.join(", ")
            ))),
        }
    }
}

/// One long-format CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: &'static str,
    pub n: Option<usize>,
    /// `None` for aggregates.
    pub trial: Option<usize>,
    pub metric: String,
    pub value: f64,
    pub citation: &'static str,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.header)?;
        for r in &self.rows {
            wr.write_record(r)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub experiment: &'static str,
    pub records: Vec<Record>,
    pub summary: Table,
    pub warnings: Vec<String>,
}

/// 17 significant digits; non-finite values as `inf`, `-inf`, `NaN`.
pub fn fmt_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.16e}")
    }
}

impl ExperimentOutput {
    fn new(experiment: &'static str, summary: Table) -> Self {
        Self { experiment, records: Vec::new(), summary, warnings: Vec::new() }
    }

    fn rec(&mut self, n: Option<usize>, trial: Option<usize>, metric: impl Into<String>, value: f64, citation: &'static str) {
        self.records.push(Record {
            experiment: self.experiment,
            n,
            trial,
            metric: metric.into(),
            value,
            citation,
        });
    }

    pub fn write_records<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["experiment", "n", "trial", "metric", "value", "citation"])?;
        for r in &self.records {
            wr.write_record([
                r.experiment.to_string(),
                r.n.map(|n| n.to_string()).unwrap_or_default(),
                r.trial.map(|t| t.to_string()).unwrap_or_else(|| "aggregate".into()),
                r.metric.clone(),
                fmt_float(r.value),
                r.citation.to_string(),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }
}

const CITE_ERM: &str = "E_P ℓ(Z, a_{P̂_n}) − H(P)";
const CITE_ERM_MEAN: &str = "√(|Z|/n) mean excess-risk curve";
const CITE_ERM_DEV: &str = "exp{−nε²/2 + |Z|log(n+1)} deviation curve";
const CITE_TV: &str = "d_TV(P̂_n, P)";
const CITE_SEMI: &str = "d_{A,ℓ}(P̂_n, P) uniform deviation";
const CITE_TYPICAL: &str = "(A,ℓ)-typicality at level ε";
const CITE_W1: &str = "exact W₁(P̂_n, P)";
const CITE_LIP: &str = "R_excess ≤ 2√2(ρ_f∨1)·W₁(P̂_n, P)";
const CITE_RATE: &str = "n^{−1/(p+1)} decay of E W₁";
const CITE_EXPFAM: &str = "2d_TV(P,Q*) + √(2‖μ‖‖θ*−θ̂‖ + 2|A(θ*)−A(θ̂)|)";
const CITE_EXPFAM_EXCESS: &str = "E_P ℓ(Y, ψ_Q̂(X)) − H(Y|X)";
const CITE_MER: &str = "MER₂ = H₂(Y|X,Zⁿ) − H₂(Y|X,W)";
const CITE_MER_BOUND: &str = "√(4σ²s_g²H₂(W|Zⁿ)) + 2s_g²H₂(W|Zⁿ)";
const CITE_MER_RELAXED: &str = "s_g²·H₂(W|Zⁿ)";
const CITE_MER_KL: &str = "E[D(K_{Y|X,W'}‖K_{Y|X,W})] ≤ (s_g²/σ²)H₂(W|Zⁿ)";
const CITE_MISMATCH: &str = "E_P ℓ(Y, ψ_Q(X)) − H_ℓ(Y|X) ≤ 2B";
const CITE_ESTIMATOR: &str = "√(E_Q(Y−ψ_Q)⁴χ²(P_Y‖Q_Y)) + √(E_P(Y−ψ_P)⁴χ²(Q_Y‖P_Y))";
const CITE_MI: &str = "exact I(X;Z)";

fn report_rows(out: &mut ExperimentOutput, idx: Option<usize>, reports: &[BoundReport<f64>]) {
    for r in reports {
        let v = r.value.unwrap_or(f64::NAN);
        out.records.push(Record {
            experiment: out.experiment,
            n: None,
            trial: idx,
            metric: r.name.clone(),
            value: v,
            citation: "bound report",
        });
        out.summary.push(vec![
            idx.map(|i| i.to_string()).unwrap_or_default(),
            r.name.clone(),
            r.direction.as_str().to_string(),
            fmt_float(v),
            r.applicable.to_string(),
            r.citation.clone(),
        ]);
    }
}

fn design_dist(weights: Option<&Vec<f64>>, len: usize) -> Result<DiscreteDist<f64>> {
    let labels: Vec<String> = (0..len).map(|i| i.to_string()).collect();
    match weights {
        Some(w) => DiscreteDist::new(labels, w.clone()),
        None => DiscreteDist::uniform(labels),
    }
}

/// Strictly positive random joint; entries uniform on `[0.05, 1.05)` then normalized.
pub fn random_positive_joint<R: Rng + ?Sized>(rng: &mut R, nx: usize, nz: usize) -> Result<JointDiscrete<f64>> {
    let raw: Vec<Vec<f64>> = (0..nx)
        .map(|_| (0..nz).map(|_| 0.05 + rng.random::<f64>()).collect())
        .collect();
    let total: f64 = raw.iter().flatten().sum();
    JointDiscrete::indexed(raw.into_iter().map(|r| r.into_iter().map(|v| v / total).collect()).collect())
}

/// Runs `cfg` with run-level knobs already merged.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    let k = &cfg.knobs;
    let seed = k.seed();
    let trials = k.trials();
    let name = cfg.kind.name();
    match &cfg.kind {
        ExperimentKind::ErmSweep { p, loss, n_grid, eps_levels } => {
            let s = erm_sweep(
                p,
                loss,
                &SweepOptions {
                    n_grid: n_grid.clone(),
                    trials,
                    seed,
                    eps_levels: eps_levels.clone(),
                    epsilon: k.epsilon(),
                },
            )?;
            let mut head = vec!["n", "mean_excess", "theorem_curve", "mean_tv", "mean_semidistance", "typical_fraction"];
            let eps_cols: Vec<(String, String)> = eps_levels
                .iter()
                .map(|e| (format!("exceedance_{e}"), format!("deviation_curve_{e}")))
                .collect();
            for (a, b) in &eps_cols {
                head.push(a);
                head.push(b);
            }
            let mut out = ExperimentOutput::new(name, Table::new(&head));
            for c in &s.cells {
                let n = Some(c.n);
                for (t, r) in c.runs.iter().enumerate() {
                    out.rec(n, Some(t), "excess_risk", r.excess_risk, CITE_ERM);
                    out.rec(n, Some(t), "tv", r.tv_to_truth, CITE_TV);
                    out.rec(n, Some(t), "semidistance", r.semidistance, CITE_SEMI);
                    out.rec(n, Some(t), "typical", if r.typical { 1.0 } else { 0.0 }, CITE_TYPICAL);
                }
                out.rec(n, None, "mean_excess", c.mean_excess, CITE_ERM);
                out.rec(n, None, "theorem_curve", c.theorem_curve, CITE_ERM_MEAN);
                out.rec(n, None, "mean_tv", c.mean_tv, CITE_TV);
                out.rec(n, None, "mean_semidistance", c.mean_semidistance, CITE_SEMI);
                out.rec(n, None, "typical_fraction", c.typical_fraction, CITE_TYPICAL);
                let mut row = vec![
                    c.n.to_string(),
                    fmt_float(c.mean_excess),
                    fmt_float(c.theorem_curve),
                    fmt_float(c.mean_tv),
                    fmt_float(c.mean_semidistance),
                    fmt_float(c.typical_fraction),
                ];
                for e in &c.exceedance {
                    out.rec(n, None, format!("exceedance_{}", e.eps), e.frequency, CITE_ERM_DEV);
                    out.rec(n, None, format!("deviation_curve_{}", e.eps), e.theorem, CITE_ERM_DEV);
                    row.push(fmt_float(e.frequency));
                    row.push(fmt_float(e.theorem));
                }
                out.summary.push(row);
            }
            out.rec(None, None, "tv_slope", s.tv_slope, CITE_TV);
            Ok(out)
        }
        ExperimentKind::LipschitzRate { dim_x, x_levels, y_levels, b, actions, rho_f, loss, weights, n_grid } => {
            let prob = LipschitzProblem::grid(*dim_x, *x_levels, *y_levels, *b, weights.clone(), actions.clone(), *rho_f, *loss)?;
            let s = lipschitz_rate_check(&prob, n_grid, trials, seed)?;
            let mut out = ExperimentOutput::new(name, Table::new(&["n", "mean_w1", "mean_excess", "violations"]));
            for c in &s.cells {
                let n = Some(c.n);
                let mut viol = 0usize;
                for (t, r) in c.runs.iter().enumerate() {
                    out.rec(n, Some(t), "w1", r.w1, CITE_W1);
                    out.rec(n, Some(t), "excess_risk", r.excess_risk, CITE_ERM);
                    out.rec(n, Some(t), "bound", r.bound, CITE_LIP);
                    if r.excess_risk > r.bound + 1e-12 {
                        viol += 1;
                    }
                }
                out.rec(n, None, "mean_w1", c.mean_w1, CITE_W1);
                out.rec(n, None, "mean_excess", c.mean_excess, CITE_ERM);
                out.summary.push(vec![c.n.to_string(), fmt_float(c.mean_w1), fmt_float(c.mean_excess), viol.to_string()]);
            }
            out.rec(None, None, "fitted_exponent", s.fitted_exponent, CITE_RATE);
            out.rec(None, None, "theorem_exponent", s.theorem_exponent, CITE_RATE);
            Ok(out)
        }
        ExperimentKind::Expfam { p, phi, nu, loss, n_grid, max_resamples } => {
            let outcomes = p.flatten().outcomes().to_vec();
            let nu = nu.clone().unwrap_or_else(|| vec![1.0; outcomes.len()]);
            let fam = ExpFamily::new(outcomes, phi.clone(), nu)?;
            let r = expfam_learning_experiment(
                p,
                &fam,
                loss,
                &ExpfamOptions { n_grid: n_grid.clone(), trials, seed, max_resamples: *max_resamples },
            )?;
            let mut out = ExperimentOutput::new(
                name,
                Table::new(&["n", "mean_excess", "approx_term", "estim_term", "estim_term_mean", "bound", "resamples"]),
            );
            for c in &r.cells {
                let n = Some(c.n);
                for (t, tr) in c.trials.iter().enumerate() {
                    out.rec(n, Some(t), "excess_risk", tr.excess, CITE_EXPFAM_EXCESS);
                    out.rec(n, Some(t), "estim_term", tr.estim_term, CITE_EXPFAM);
                    out.rec(n, Some(t), "bound", tr.bound, CITE_EXPFAM);
                    out.rec(n, Some(t), "residual", tr.residual, "‖∇A(θ̂) − μ̂‖∞");
                    out.rec(n, Some(t), "resamples", tr.resamples as f64, "boundary redraws");
                }
                out.rec(n, None, "mean_excess", c.mean_excess, CITE_EXPFAM_EXCESS);
                out.rec(n, None, "approx_term", c.approx_term, "2d_TV(P, Q*)");
                out.rec(n, None, "estim_term", c.estim_term_median, CITE_EXPFAM);
                out.rec(n, None, "bound", c.bound, CITE_EXPFAM);
                out.summary.push(vec![
                    c.n.to_string(),
                    fmt_float(c.mean_excess),
                    fmt_float(c.approx_term),
                    fmt_float(c.estim_term_median),
                    fmt_float(c.estim_term_mean),
                    fmt_float(c.bound),
                    c.resamples.to_string(),
                ]);
            }
            for (i, t) in r.theta_star.iter().enumerate() {
                out.rec(None, None, format!("theta_star_{i}"), *t, "argmin_θ D(P‖Q_θ)");
            }
            Ok(out)
        }
        ExperimentKind::MerLinear { prior_cov, features, design, noise_var, n_grid } => {
            let d = features.first().map_or(0, |f| f.len());
            let cov = prior_cov.clone().unwrap_or_else(|| {
                (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
            });
            let model = LinearGaussianModel::new(cov, features.clone(), design_dist(design.as_ref(), features.len())?, *noise_var)?;
            let r = mer_linear(&model, n_grid, trials, seed)?;
            let mut out = ExperimentOutput::new(name, Table::new(&["n", "h2", "mer", "relaxed_bound", "theorem_bound"]));
            for c in &r.cells {
                let n = Some(c.n);
                out.rec(n, None, "h2", c.h2, "E tr Σ_n");
                out.rec(n, None, "mer", c.mer, CITE_MER);
                out.rec(n, None, "relaxed_bound", c.relaxed_bound, CITE_MER_RELAXED);
                out.rec(n, None, "theorem_bound", c.theorem_bound, CITE_MER_BOUND);
                out.summary.push(vec![
                    c.n.to_string(),
                    fmt_float(c.h2),
                    fmt_float(c.mer),
                    fmt_float(c.relaxed_bound),
                    fmt_float(c.theorem_bound),
                ]);
            }
            out.rec(None, None, "s_g2", r.s_g2, "E‖φ(X)‖²");
            Ok(out)
        }
        ExperimentKind::MerNonlinear { map, w_lo, w_hi, w_atoms, prior, x_values, design, noise_var, n_grid } => {
            let w = GridModel::<f64>::grid(*w_lo, *w_hi, *w_atoms);
            let pr = match prior {
                GridPrior::Normal => GridModel::normal_prior(&w),
                GridPrior::Uniform => vec![1.0 / *w_atoms as f64; *w_atoms],
            };
            let model = GridModel::from_fn(
                w,
                pr,
                design_dist(design.as_ref(), x_values.len())?,
                x_values.clone(),
                |x, w| map.eval(x, w),
                *noise_var,
            )?;
            let r = mer_nonlinear_bound(&model, n_grid, trials, seed)?;
            let mut out = ExperimentOutput::new(
                name,
                Table::new(&["n", "h2", "mer", "mer_se", "kl_lhs", "kl_rhs", "relaxed_bound", "theorem_bound"]),
            );
            for c in &r.cells {
                let n = Some(c.n);
                out.rec(n, None, "h2", c.h2, "E Var[W|Zⁿ]");
                out.rec(n, None, "mer", c.mer, CITE_MER);
                out.rec(n, None, "mer_se", c.mer_se, CITE_MER);
                out.rec(n, None, "kl_lhs", c.kl_lhs, CITE_MER_KL);
                out.rec(n, None, "kl_rhs", c.kl_rhs, CITE_MER_KL);
                out.rec(n, None, "theorem_bound", c.theorem_bound, CITE_MER_BOUND);
                out.summary.push(vec![
                    c.n.to_string(),
                    fmt_float(c.h2),
                    fmt_float(c.mer),
                    fmt_float(c.mer_se),
                    fmt_float(c.kl_lhs),
                    fmt_float(c.kl_rhs),
                    fmt_float(c.relaxed_bound),
                    fmt_float(c.theorem_bound),
                ]);
            }
            out.rec(None, None, "s_g2", r.s_g2, "centered finite differences");
            out.rec(None, None, "s_g2_one_sided", r.s_g2_one_sided, "largest adjacent chord");
            out.warnings = r.warnings;
            Ok(out)
        }
        ExperimentKind::Mismatch { p, q, loss, estimator } => {
            let mut out = ExperimentOutput::new(name, Table::new(&["case", "name", "direction", "value", "applicable", "citation"]));
            let m = mismatch_excess(p, q, loss)?;
            out.rec(None, None, "excess", m.excess, CITE_MISMATCH);
            out.rec(None, None, "h_p", m.h_p, "H_ℓ(Y|X) under P");
            out.rec(None, None, "h_q", m.h_q, "H_ℓ(Y|X) under Q");
            report_rows(&mut out, None, &m.reports);
            report_rows(&mut out, None, &cond_entropy_diff_bounds(p, q, loss)?);
            for v in m.violations(1e-12) {
                out.warnings.push(format!("bound violated: {v}"));
            }
            for (i, c) in estimator.iter().enumerate() {
                let e = mismatched_estimator_bound(&c.p_y, &c.q_y, c.alpha)?;
                out.rec(None, Some(i), "estimator_excess", e.excess, CITE_ESTIMATOR);
                out.rec(None, Some(i), "estimator_bound", e.bound, CITE_ESTIMATOR);
                if e.excess > e.bound {
                    out.warnings.push(format!("estimator case {i}: excess {} above bound {}", e.excess, e.bound));
                }
            }
            Ok(out)
        }
        ExperimentKind::MiBounds { joints, random } => {
            let mut all = joints.clone();
            if let Some(rj) = random {
                for i in 0..rj.count {
                    all.push(random_positive_joint(&mut stream(seed, i as u64), rj.nx, rj.nz)?);
                }
            }
            if all.is_empty() {
                return Err(Error::InvalidArgument("mi_bounds needs `joints` or `random`".into()));
            }
            let mut out = ExperimentOutput::new(name, Table::new(&["case", "name", "direction", "value", "applicable", "citation"]));
            for (i, j) in all.iter().enumerate() {
                out.rec(None, Some(i), "mi", crate::divergence::mutual_information(j), CITE_MI);
                report_rows(&mut out, Some(i), &mi_upper_bounds(j)?);
            }
            Ok(out)
        }
    }
}

/// One cell of the Bernoulli comparison grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub p: f64,
    pub q: f64,
    /// `log(P̄ ∨ Q̄)·d_TV`
    pub bound_new: f64,
    /// `d_TV·log(|Z|−1) + h₂(d_TV)` with `|Z| = 2`
    pub bound_zhang: f64,
    /// Strictly tighter; `false` on the diagonal where both vanish.
    pub new_tighter: bool,
}

/// Log-loss comparison over Bernoulli pairs on the open grid
/// `{i/(density+1) : 1 ≤ i ≤ density}²`, row-major in `p`.
///
/// The flag map is checked to be invariant under swapping `p` and `q` and
/// under relabeling both outcomes.
pub fn figure1_grid(density: usize) -> Result<Vec<Figure1Row>> {
    if density < 9 {
        return Err(Error::InvalidArgument(format!("density {density} below the minimum 9")));
    }
    let pts: Vec<f64> = (1..=density).map(|i| i as f64 / (density + 1) as f64).collect();
    let log = LossSpec::log();
    let ber = |t: f64| DiscreteDist::new(vec!["0", "1"], vec![1.0 - t, t]);
    let mut rows = Vec::with_capacity(density * density);
    for &p in &pts {
        for &q in &pts {
            let ctx = PairContext::new(&ber(p)?, &ber(q)?, &log)?;
            let r = tv_log_ratio_bound(&ctx);
            let bound_new = r
                .value
                .ok_or_else(|| Error::NotApplicable(format!("log-ratio bound at ({p}, {q})")))?;
            let t = r.details.get("tv").copied().unwrap_or_else(|| (p - q).abs());
            let bound_zhang = coupling_bound(t, 2);
            rows.push(Figure1Row { p, q, bound_new, bound_zhang, new_tighter: bound_new < bound_zhang });
        }
    }
    let at = |i: usize, j: usize| rows[i * density + j].new_tighter;
    for i in 0..density {
        for j in 0..density {
            if at(i, j) != at(j, i) || at(i, j) != at(density - 1 - i, density - 1 - j) {
                return Err(Error::NonConvergence(format!(
                    "flag map asymmetric at ({}, {})",
                    pts[i], pts[j]
                )));
            }
        }
    }
    Ok(rows)
}

pub fn write_figure1<W: Write>(rows: &[Figure1Row], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["p", "q", "bound_new", "bound_zhang", "new_tighter"])?;
    for r in rows {
        wr.write_record([
            fmt_float(r.p),
            fmt_float(r.q),
            fmt_float(r.bound_new),
            fmt_float(r.bound_zhang),
            r.new_tighter.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}
